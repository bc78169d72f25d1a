#pragma once

#include "degen/bk/categories.hpp"
#include "degen/bk/module.hpp"
#include "degen/bk/structure.hpp"
