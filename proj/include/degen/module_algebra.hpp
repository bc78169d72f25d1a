#pragma once

#include "degen/module/presented.hpp"
#include "degen/module/structure.hpp"
#include "degen/module/ext.hpp"
#include "degen/module/base_change.hpp"
