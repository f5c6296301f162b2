#pragma once

#include "cqforce/engine/certificate.hpp"
#include "cqforce/engine/descriptor.hpp"
#include "cqforce/engine/format.hpp"
#include "cqforce/engine/presentation.hpp"
#include "cqforce/engine/run.hpp"
#include "cqforce/engine/verify.hpp"
