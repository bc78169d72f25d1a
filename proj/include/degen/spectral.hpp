#pragma once

#include "degen/spectral/filtered.hpp"
#include "degen/spectral/report.hpp"
#include "degen/spectral/oracle.hpp"
