#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hyperprop {

/// Command-line entry point. Exit codes: 0 success or no counterexample,
/// 1 counterexample, 2 usage error or refusal.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Splits on commas outside parentheses: "min(x,1), 2" -> {"min(x,1)", "2"}.
std::vector<std::string> split_top_level(const std::string& list);

} // namespace hyperprop
