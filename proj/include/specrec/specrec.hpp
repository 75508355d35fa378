#pragma once

// Umbrella header: reflectance-curve reconstruction from sRGB triplets.

#include "color_system.hpp"   // IWYU pragma: export
#include "constants.hpp"      // IWYU pragma: export
#include "csv.hpp"            // IWYU pragma: export
#include "gamma.hpp"          // IWYU pragma: export
#include "harness.hpp"        // IWYU pragma: export
#include "oracle.hpp"         // IWYU pragma: export
#include "solvers.hpp"        // IWYU pragma: export
#include "types.hpp"          // IWYU pragma: export
