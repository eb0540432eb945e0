#pragma once

// Shared fixtures for the unit tests and the acceptance runner. No GTest
// dependency so the acceptance binary can include it.

#include "hyperprop/builtin.hpp"
#include "hyperprop/expr.hpp"
#include "hyperprop/pifield.hpp"
#include "hyperprop/qcalc.hpp"
#include "hyperprop/solver.hpp"
#include "hyperprop/system.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace hptest {

using namespace hyperprop;

inline Expr fn_t(const std::string& src) { return parse(src, {"t"}); }
inline Expr fn_x(const std::string& src) { return parse(src, {"x"}); }

inline double eval_t(const Expr& e, double t) {
    double v[] = {t};
    return e.eval(v);
}

/// Adaptive Gauss-Kronrod integral; an oracle independent of the library.
inline double integrate(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-14);
}

inline InitialData exprs(const std::vector<std::string>& comps) {
    std::vector<Expr> e;
    for (const auto& c : comps) e.push_back(fn_x(c));
    return InitialData::from_exprs(std::move(e));
}

/// Compatible initial data: the bottom row of a seeded C_h sample.
inline InitialData seeded_phi(const SystemSpec& spec, std::size_t nx, std::uint64_t seed) {
    return initial_slice(sample_Ch(spec, Grid::aligned(1.0, nx), seed));
}

/// Closed forms of Q and Q^2 for the two transport equations with
/// u1(0,t) = r(t) sin(u2(0,t)), u2(1,t) = sin^2(s(t) u1(1,t)).
struct Sec32Oracle {
    Expr r, s;
    InitialData phi;
    const PiField* u;

    double phi1(double x) const { return phi.value(0, x); }
    double phi2(double x) const { return phi.value(1, x); }
    double u1_at_1(double t) const { return u->column_eval(0, u->grid().nx, t); }
    double u2_at_0(double t) const { return u->column_eval(1, 0, t); }
    double sq(double v) const { return v * v; }

    double Q1(double x, double t) const {
        return x > t ? phi1(x - t) : eval_t(r, t - x) * std::sin(u2_at_0(t - x));
    }
    double Q2(double x, double t) const {
        return t + x < 1 ? phi2(x + t) : sq(std::sin(eval_t(s, t + x - 1) * u1_at_1(t + x - 1)));
    }
    double Q2_1(double x, double t) const {
        if (x > t) return phi1(x - t);
        if (t - x < 1) return eval_t(r, t - x) * std::sin(phi2(t - x));
        return eval_t(r, t - x) * std::sin(sq(std::sin(eval_t(s, t - x - 1) * u1_at_1(t - x - 1))));
    }
    double Q2_2(double x, double t) const {
        if (t + x < 1) return phi2(x + t);
        if (t + x < 2) return sq(std::sin(eval_t(s, t + x - 1) * phi1(2 - (t + x))));
        return sq(std::sin(eval_t(s, t + x - 1) * eval_t(r, t + x - 2) * std::sin(u2_at_0(t + x - 2))));
    }
};

/// Max deviation of Qu and Q^2u from the closed forms over all nodes.
struct OracleDeviation {
    double q1 = 0.0;
    double q2 = 0.0;
};

inline OracleDeviation sec32_oracle_deviation(Sec32Variant variant, std::size_t nx, double T, std::uint64_t seed) {
    SystemSpec spec = sec32_spec(variant);
    auto f = sec32_functions(variant);
    Grid g = Grid::aligned(T, nx);
    PiField u = sample_Ch(spec, g, seed);
    // phi = u(., 0) keeps u in C_h, so the branches agree on the corner lines.
    InitialData phi = initial_slice(u);
    QContext ctx(spec, phi, g);
    PiField q1 = apply_Q(ctx, u);
    PiField q2 = q_power(ctx, u, 2);
    Sec32Oracle o{fn_t(f.r), fn_t(f.s), phi, &u};
    OracleDeviation d;
    for (std::size_t n = 0; n <= g.nt; ++n)
        for (std::size_t i = 0; i <= g.nx; ++i) {
            double x = g.x(i), t = g.t(n);
            d.q1 = std::max({d.q1, std::abs(q1.at(0, i, n) - o.Q1(x, t)), std::abs(q1.at(1, i, n) - o.Q2(x, t))});
            d.q2 = std::max({d.q2, std::abs(q2.at(0, i, n) - o.Q2_1(x, t)), std::abs(q2.at(1, i, n) - o.Q2_2(x, t))});
        }
    return d;
}

/// One (spec, phi, horizon) configuration of the solver test matrix.
struct SolverCase {
    std::string name;
    SystemSpec spec;
    double T;
    std::size_t nx;
    bool allow_invalid = false;
};

inline Eigen::MatrixXd mat2(double a, double b, double c, double d) {
    Eigen::MatrixXd P(2, 2);
    P << a, b, c, d;
    return P;
}

inline std::vector<SolverCase> solver_matrix() {
    std::vector<SolverCase> cs;
    auto add = [&](std::string name, SystemSpec s, double T, std::size_t nx, bool allow = false) {
        cs.push_back({std::move(name), std::move(s), T, nx, allow});
    };
    add("sec32-suf2", sec32_spec(Sec32Variant::Suf2), 4.0, 32);
    add("sec32-suf1", sec32_spec(Sec32Variant::Suf1), 5.0, 32);
    add("sec32-baseline", sec32_spec(Sec32Variant::Baseline), 5.0, 32);
    add("swap", swap_spec(), 5.0, 32);
    add("lower-triangular", lower_triangular_spec(0.7), 3.0, 32);
    add("absorbing", absorbing_spec(), 2.0, 32);
    add("damped-linear-2-1",
        SystemSpec::from_text(1, {"2", "-1"}, {"0.5", "-0.3"}, mat2(0.5, 0.3, -0.4, 0.2), true, 1.0), 4.0, 32);
    add("three-component-nonlinear",
        SystemSpec::from_text(2, {"1", "2", "-1.5"}, {"0", "0.2", "0"},
                              std::vector<std::string>{"0.6*sin(xi3)", "0.5*xi1*xi2", "0.4*sin(xi1+xi2)"}, true, 1.0),
        3.0, 24);
    add("all-leftward-linear",
        SystemSpec::from_text(0, {"-1", "-2"}, {"0", "0"}, mat2(0.3, 0.5, -0.6, 0.1), true, 1.0), 3.0, 32);
    add("all-rightward-nonlinear",
        SystemSpec::from_text(2, {"1", "1.5"}, {"0", "0"},
                              std::vector<std::string>{"0.5*sin(xi2)", "0.5*xi1*cos(t)"}, false, 1.0),
        3.0, 32);
    add("variable-nonlinear",
        SystemSpec::from_text(1, {"1.5+0.5*sin(3*x)", "-(1.2+0.3*cos(x+t))"}, {"0.3*x", "-0.2"},
                              std::vector<std::string>{"0.8*sin(xi2)*cos(t)", "0.5*xi1*xi1+0.3*xi1"}, false, 0.8),
        5.0, 16);
    add("variable-linear",
        SystemSpec::from_text(1, {"1+0.5*x", "-(1+0.3*sin(t))"}, {"0.2", "0.1*x"}, mat2(0, 0.8, 0.6, 0), false,
                              0.7),
        4.0, 16);
    add("variable-autonomous-nonlinear",
        SystemSpec::from_text(1, {"2+sin(x)", "-(1.5+0.5*cos(3*x))"}, {"0", "0.3"},
                              std::vector<std::string>{"0.9*sin(xi2)", "0.5*xi1/(1+xi1*xi1)"}, true, 1.0),
        5.0, 16);
    add("variable-time-damping",
        SystemSpec::from_text(1, {"1+0.5*sin(t)^2", "-1"}, {"0", "0.1*t"},
                              std::vector<std::string>{"0.7*sin(xi2)", "0.6*xi1*exp(-t)"}, false, 1.0),
        3.0, 16);
    {
        Eigen::MatrixXd P = Eigen::MatrixXd::Zero(3, 3);
        P << 0, 0.5, 0.4, 0.3, 0, 0, 0.2, 0.6, 0;
        add("three-component-variable-linear",
            SystemSpec::from_text(1, {"1.2+0.3*x", "-(1+0.2*x*x)", "-(2-x)"}, {"0.1", "0", "-0.1*x"}, P, true, 1.0),
            3.0, 16);
    }
    add("sec33-nonhomogeneous", sec33_spec(1.0), 5.0, 16, true);
    return cs;
}

inline SolveOptions solve_options(const SolverCase& c) {
    SolveOptions o;
    o.nx = c.nx;
    o.allow_invalid = c.allow_invalid;
    return o;
}

/// Autonomous members of the matrix plus an autonomous variant of the
/// two-component reflection pair with constant r and s.
inline std::vector<SolverCase> autonomous_cases() {
    std::vector<SolverCase> out;
    for (auto& c : solver_matrix())
        if (c.spec.autonomous()) out.push_back(c);
    out.push_back({"sec32-constant-rs",
                   SystemSpec::from_text(1, {"1", "-1"}, {"0", "0"},
                                         std::vector<std::string>{"0.8*sin(xi2)", "sin(1.1*xi1)^2"}, true, 1.0),
                   5.0, 32});
    out.push_back({"damped-rightward-autonomous",
                   SystemSpec::from_text(2, {"1", "1.5"}, {"0.4", "0"},
                                         std::vector<std::string>{"0.5*sin(xi2)", "0.5*xi1"}, true, 1.0),
                   5.0, 32});
    return out;
}

} // namespace hptest
