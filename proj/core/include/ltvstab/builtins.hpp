#pragma once

#include <string>

#include "ltvstab/system_model.hpp"

namespace ltvstab {

/// Bundled demonstration systems.
///
/// "example1": 2-state single-input system obtained by sampling a rotating
/// continuous flow with one expanding and one contracting direction at step
/// `dt`; per-step exponents are exactly (0.5*dt, -dt). B = [1 1]'.
///
/// "example2": 3-state single-input period-3 system. `dt` is ignored.
///
/// Throws ConfigError for unknown names.
SystemModel builtin_system(const std::string& name, double dt = 0.1);

}  // namespace ltvstab
