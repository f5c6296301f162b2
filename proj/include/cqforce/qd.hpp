#pragma once

#include "cqforce/qd/condition.hpp"
#include "cqforce/qd/construct.hpp"
#include "cqforce/qd/extract.hpp"
