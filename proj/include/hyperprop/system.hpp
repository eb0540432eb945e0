#pragma once

// Problem data for the decoupled hyperbolic system
//
//   d_t u + A(x,t) d_x u + B(x,t) u = 0,   0 < x < 1, t > 0,
//   u(x,0) = phi(x),   u_out(t) = h(t, u_in(t)),
//
// with A = diag(a_j), B = diag(b_j), a_j >= a > 0 for j < m and a_j <= -a
// for j >= m (components are indexed from 0 throughout the library).
//
// Boundary traces: component j < m enters at x = 0 and leaves at x = 1, so
// u_out_j = u_j(0,t) and u_in_j = u_j(1,t); for j >= m the ends swap.

#include "hyperprop/expr.hpp"
#include "hyperprop/grid.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace hyperprop {

/// u_out = P u_in.
struct LinearBoundary {
    Eigen::MatrixXd P;
};

/// u_out_j = h_j(t, xi1..xin) evaluated at xi = u_in.
struct NonlinearBoundary {
    std::vector<Expr> h;
};

using BoundaryMap = std::variant<LinearBoundary, NonlinearBoundary>;

/// Region used by the sampled structural checks.
struct ValidationBox {
    double T_max = 5.0;
    double xi_radius = 2.0;
};

class SystemSpec {
public:
    SystemSpec(std::size_t n, std::size_t m, std::vector<Expr> speeds, std::vector<Expr> dampings,
               BoundaryMap boundary, bool autonomous, double speed_floor, ValidationBox box = {});

    /// Builds a spec from expression text. Speeds and dampings are parsed over
    /// (x, t); nonlinear boundary components over (t, xi1, ..., xin).
    static SystemSpec from_text(std::size_t m, const std::vector<std::string>& speeds,
                                const std::vector<std::string>& dampings,
                                const std::vector<std::string>& h, bool autonomous, double speed_floor,
                                ValidationBox box = {});
    static SystemSpec from_text(std::size_t m, const std::vector<std::string>& speeds,
                                const std::vector<std::string>& dampings, Eigen::MatrixXd P,
                                bool autonomous, double speed_floor, ValidationBox box = {});

    static std::vector<std::string> coefficient_env();
    static std::vector<std::string> boundary_env(std::size_t n);

    std::size_t n() const noexcept { return n_; }
    std::size_t m() const noexcept { return m_; }
    bool autonomous() const noexcept { return autonomous_; }
    double speed_floor() const noexcept { return speed_floor_; }
    const ValidationBox& box() const noexcept { return box_; }

    /// True for components with positive speed (j < m).
    bool rightward(std::size_t j) const noexcept { return j < m_; }
    /// Abscissa of u_out_j (where the boundary map writes component j).
    double out_end(std::size_t j) const noexcept { return rightward(j) ? 0.0 : 1.0; }
    /// Abscissa of u_in_j (where the boundary map reads component j).
    double in_end(std::size_t j) const noexcept { return rightward(j) ? 1.0 : 0.0; }

    double speed(std::size_t j, double x, double t) const;
    double damping(std::size_t j, double x, double t) const;
    bool speed_is_constant(std::size_t j) const { return speeds_[j].is_constant(); }
    bool damping_is_constant(std::size_t j) const { return dampings_[j].is_constant(); }
    const Expr& speed_expr(std::size_t j) const { return speeds_[j]; }
    const Expr& damping_expr(std::size_t j) const { return dampings_[j]; }

    const BoundaryMap& boundary() const noexcept { return boundary_; }
    bool is_linear() const noexcept { return std::holds_alternative<LinearBoundary>(boundary_); }
    /// The matrix of a linear boundary; throws InvalidSpec for nonlinear ones.
    const Eigen::MatrixXd& matrix() const;

    /// h_j(t, xi).
    double boundary_value(std::size_t j, double t, std::span<const double> xi) const;
    /// h(t, xi) for all components.
    std::vector<double> boundary_map(double t, std::span<const double> xi) const;

private:
    std::size_t n_;
    std::size_t m_;
    std::vector<Expr> speeds_;
    std::vector<Expr> dampings_;
    BoundaryMap boundary_;
    bool autonomous_;
    double speed_floor_;
    ValidationBox box_;
};

enum class CheckStatus { Pass, Fail, Skipped };

struct ValidationCheck {
    std::string name;
    CheckStatus status = CheckStatus::Skipped;
    double worst = 0.0;       // worst violation magnitude (0 when passing)
    std::string location;     // where the worst violation was sampled
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    /// Sampled sup of max_{jk} |d h_j / d xi_k| over the validation box.
    double gradient_sup = 0.0;

    bool ok() const;
    const ValidationCheck* find(const std::string& name) const;
    std::string to_text() const;
};

struct ValidationOptions {
    std::size_t nx = 64;
    std::size_t nt = 64;
    std::size_t xi_points = 5;
    double fd_step = 1e-5;
    double tolerance = 1e-12;
};

/// Sampled structural checks: "speed_sign", "homogeneity", "autonomy",
/// "gradient_bound". Never throws on a failing check; failures are entries.
ValidationReport validate(const SystemSpec& spec, const ValidationOptions& opts = {});

/// Throws InvalidSpec carrying the report text unless the report passes or
/// `allow_invalid` is set.
void require_valid(const SystemSpec& spec, bool allow_invalid);

/// phi_out - h(0, phi_in).
std::vector<double> compatibility_defect(const SystemSpec& spec, const InitialData& phi);

/// Least nu with |P|^nu = 0 (|P| taken entrywise), or nullopt when the
/// dependency digraph k -> j (|p_jk| > 0) has a cycle.
std::optional<std::size_t> nilpotency_index(const Eigen::MatrixXd& P);

struct CrossingTimes {
    std::vector<std::pair<double, double>> per_component;  // (min, max) over start times
    double t_min = 0.0;
    double t_max = 0.0;
};

/// Time a characteristic of each component needs to cross [0,1], bounded
/// over start times sampled in [0, T]. Throws InvalidSpec when |a_j| drops
/// below the speed floor along a sampled characteristic.
CrossingTimes crossing_times(const SystemSpec& spec, double T, std::size_t samples = 65,
                             double step = 1.0 / 1024);

} // namespace hyperprop
