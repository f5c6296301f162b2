#pragma once

#include "cqforce/linalg/dyadic.hpp"
#include "cqforce/linalg/operator.hpp"
#include "cqforce/linalg/perturb.hpp"
#include "cqforce/linalg/spectral.hpp"
