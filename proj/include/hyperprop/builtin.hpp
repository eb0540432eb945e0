#pragma once

// Built-in problems shared by the CLI `example` subcommand and the tests.

#include "hyperprop/system.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>

namespace hyperprop {

/// Two transport equations u1_t + u1_x = 0, u2_t - u2_x = 0 with
/// u1(0,t) = r(t) sin(u2(0,t)), u2(1,t) = sin^2(s(t) u1(1,t)).
///   Suf2:     r = s = 0 on [1, 2.5]      (vanishing at T = 2.25 with k = 1)
///   Suf1:     s = 0 on [1, 3.2], r free  (vanishing at T = 3.2 with k = 2)
///   Baseline: r, s without zeros
enum class Sec32Variant { Suf2, Suf1, Baseline };

struct Sec32Functions {
    std::string r;
    std::string s;
};

Sec32Functions sec32_functions(Sec32Variant v);
SystemSpec sec32_spec(Sec32Variant v);

/// Same transport pair with u1(0,t) = g(t), u2(1,t) = u1(1,t), where
/// g = 0 on [0,4] and g(t) = G exp(-1/(t-4)) after.
std::string sec33_g(double G);
SystemSpec sec33_spec(double G = 1.0);

/// Unit speeds (1, -1), no damping, linear boundary u_out = P u_in.
SystemSpec transport_pair(const Eigen::MatrixXd& P);
SystemSpec swap_spec();                          // P = [[0,1],[1,0]]
SystemSpec lower_triangular_spec(double p = 1);  // P = [[0,0],[p,0]]
SystemSpec absorbing_spec();                     // P = 0

struct ExampleOptions {
    std::size_t trials = 64;
    double tol = 1e-10;
    std::uint64_t seed = 1;
};

/// Runs a named example (`sec3-2` with variant suf2|suf1|baseline, or
/// `sec3-3`), printing a verdict. Returns the CLI exit code.
int run_example(const std::string& name, const std::string& variant, const ExampleOptions& opts, std::ostream& out);

} // namespace hyperprop
