#pragma once

#include "peano/blocks.hpp"
#include "peano/curve.hpp"
#include "peano/errors.hpp"
#include "peano/exact.hpp"
#include "peano/lebesgue.hpp"
#include "peano/limits.hpp"
#include "peano/local_time.hpp"
#include "peano/selftest.hpp"
#include "peano/ternary.hpp"

namespace peano {
inline constexpr const char* kVersion = "1.0.0";
}
