#pragma once

// JSON model files:
//
//   {
//     "n": 2, "m": 1,
//     "speeds":   ["1", "-1"],            // expressions in x, t
//     "dampings": ["0", "0"],
//     "boundary": {"nonlinear": {"h": ["sin(xi2)", "0"]}}   // in t, xi1..xin
//              or {"linear": {"P": [[0, 1], [1, 0]]}},
//     "autonomous": false,
//     "speed_floor": 1,
//     "validation_box": {"T_max": 5, "xi_radius": 2}        // optional
//   }

#include "hyperprop/system.hpp"

#include <string>
#include <string_view>

namespace hyperprop {

/// Throws InvalidSpec naming the offending field, or ParseError for a bad
/// expression.
SystemSpec parse_model(std::string_view json_text);
SystemSpec load_model(const std::string& path);

} // namespace hyperprop
