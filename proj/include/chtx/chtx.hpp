#pragma once

#include "chtx/analysis_constants.hpp"
#include "chtx/config.hpp"
#include "chtx/diagnostics.hpp"
#include "chtx/dynamics.hpp"
#include "chtx/error.hpp"
#include "chtx/field.hpp"
#include "chtx/field_io.hpp"
#include "chtx/grid.hpp"
#include "chtx/harness.hpp"
#include "chtx/linear_solver.hpp"
#include "chtx/operators.hpp"
#include "chtx/state.hpp"

namespace chtx {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace chtx
