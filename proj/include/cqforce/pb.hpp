#pragma once

#include "cqforce/pb/bits.hpp"
#include "cqforce/pb/condition.hpp"
#include "cqforce/pb/construct.hpp"
#include "cqforce/pb/extract.hpp"
