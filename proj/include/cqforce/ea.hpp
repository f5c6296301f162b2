#pragma once

#include "cqforce/ea/condition.hpp"
#include "cqforce/ea/construct.hpp"
#include "cqforce/ea/extract.hpp"
#include "cqforce/ea/propk.hpp"
#include "cqforce/ea/representation.hpp"
