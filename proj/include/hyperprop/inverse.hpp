#pragma once

// Inverse source problem for the autonomous linear problem u_out = P u_in:
//
//   u'(t) = A u(t) + f,  u(0) = u0,  u(r) = ur,
//   (A v)(x) = -A(x) v'(x) - B(x) v(x),  D(A) = { v : v_out = P v_in }.
//
// When |P| is nilpotent the semigroup S(t) vanishes for t >= T and
//
//   f = -A ur                                     if r >= T,
//   f = -A ur + sum_{k=1}^{n0} S(kr) A (u0 - ur)  if r < T,  n0 = ceil(T/r) - 1.

#include "hyperprop/expr.hpp"
#include "hyperprop/fts.hpp"
#include "hyperprop/grid.hpp"
#include "hyperprop/system.hpp"

#include <optional>
#include <vector>

namespace hyperprop {

/// Samples of an n-component function at x_i = i / nx, i = 0..nx.
struct Profile {
    std::size_t nx = 0;
    std::vector<std::vector<double>> v;

    static Profile zero(std::size_t n, std::size_t nx);
    std::size_t components() const noexcept { return v.size(); }
    InitialData as_initial_data() const { return InitialData::from_samples(v); }
};

Profile operator+(const Profile& a, const Profile& b);
Profile operator-(const Profile& a, const Profile& b);
Profile operator*(double s, const Profile& a);

/// Row n of a field as a profile.
Profile row_profile(const PiField& u, std::size_t n);

/// Trapezoidal L2(0,1)^n norm.
double l2_norm(const Profile& p);
double sup_norm(const Profile& p);

/// Fourth-order finite differences; one-sided five-point stencils at the
/// two nodes next to each end. Needs nx >= 4.
Profile finite_difference(const Profile& p);

/// A function on [0,1] given by expressions in x (optionally with
/// derivative expressions) or by samples.
class StateData {
public:
    static StateData from_exprs(std::vector<Expr> values, std::vector<Expr> derivatives = {});
    static StateData from_text(const std::vector<std::string>& values,
                               const std::vector<std::string>& derivatives = {});
    static StateData from_profile(Profile p);

    std::size_t components() const noexcept;
    Profile values(std::size_t nx) const;
    /// Derivative expressions when given; otherwise fourth-order differences
    /// of the expressions with step 1e-3, or of the samples.
    Profile derivative(std::size_t nx) const;

private:
    std::vector<Expr> values_;
    std::vector<Expr> derivs_;
    std::optional<Profile> samples_;
};

struct InverseOptions {
    std::size_t nx = 80;
    double domain_tol = 1e-8;
    /// Width of the nilpotency-time bracket.
    double bracket = 0.05;
    /// Skip the nilpotency-time search and use this T.
    std::optional<double> nilpotency_T;
    FtsOptions fts = [] {
        FtsOptions o;
        o.trials = 16;
        return o;
    }();
};

/// max_j |v_out - P v_in|.
double domain_defect(const SystemSpec& spec, const Profile& v);

/// S(t)v as the t-slice of the Q-power solution with phi = v. A defect up to
/// opts.domain_tol is corrected first; larger defects throw IncompatibleData.
Profile semigroup_apply(const SystemSpec& spec, double t, const Profile& v, const InverseOptions& opts = {});

/// The whole orbit S(s)v on the grid {horizon, v.nx, nt}, without the
/// compatibility refusal: incompatible v yields the L2 semigroup, whose
/// jump along the corner characteristic the node values carry exactly.
PiField semigroup_orbit(const SystemSpec& spec, const Profile& v, double horizon, std::size_t nt,
                        const InverseOptions& opts = {});

struct NilpotencyTime {
    std::size_t nu = 0;
    double T_bound = 0.0;  // certificate from the reflection count
    double T_lo = 0.0;     // bracket from bisection
    double T_hi = 0.0;
};

/// Throws InvalidSpec when |P| is not nilpotent or the certificate fails.
NilpotencyTime nilpotency_time(const SystemSpec& spec, const InverseOptions& opts = {});

/// -A(x) v' - B(x) v at the nodes; coefficients taken at t = 0.
Profile apply_generator(const SystemSpec& spec, const Profile& values, const Profile& derivative);
/// Same with the D(A) check: throws IncompatibleData when the defect exceeds tol.
Profile apply_generator(const SystemSpec& spec, const StateData& v, std::size_t nx, double tol = 1e-8);

struct InverseProblem {
    SystemSpec spec;
    double r = 1.0;
    StateData u0;
    StateData ur;
    InverseOptions opts;

    /// Autonomous, linear, nilpotent, r > 0, and both states in D(A).
    void check() const;
};

struct SourceResult {
    Profile f;
    bool r_below_T = false;  // which branch of the formula was taken
    std::size_t n0 = 0;
    double T = 0.0;          // nilpotency time used (upper end of the bracket)
    double T_lo = 0.0;
};

SourceResult recover_source(const InverseProblem& problem);

/// S(t)u0 + integral_0^t S(s) f ds by composite Simpson (3/8 rule on the
/// last three panels when the panel count is odd) over at least 64 panels
/// per unit time.
Profile reconstruct_state(const InverseProblem& problem, const Profile& f, double t);

/// Same integral for arbitrary data; used to manufacture targets.
Profile duhamel(const SystemSpec& spec, const Profile& u0, const Profile& f, double t,
                const InverseOptions& opts = {});

} // namespace hyperprop
