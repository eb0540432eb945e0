#pragma once

#include "hyperprop/grid.hpp"
#include "hyperprop/qcalc.hpp"
#include "hyperprop/system.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hyperprop {

struct SolveOptions {
    std::size_t nx = 64;
    /// Time cells; 0 selects ceil(T * nx) so that dt == dx when T * nx is integral.
    std::size_t nt = 0;
    /// Run even when validate() reports a failing check.
    bool allow_invalid = false;
    double compatibility_tol = 1e-8;
    QOptions q;
};

Grid make_grid(double T, const SolveOptions& opts);

/// Throws IncompatibleData when |phi_out - h(0, phi_in)| exceeds tol.
void require_compatible(const SystemSpec& spec, const InitialData& phi, double tol);

/// Q^q w for the t-constant extension w = phi, q the stabilization index.
PiField solve_qpower(const SystemSpec& spec, const InitialData& phi, double T, const SolveOptions& opts = {});
/// Same on a prebuilt context (its phi, grid and cached index).
PiField solve_qpower(const QContext& ctx, double compatibility_tol = 1e-8);

/// Time-level marching: row by row, every node is pulled back along its
/// characteristic to t = 0 or to the out end, where the boundary value is
/// h(tau, u_in(tau)) with u_in read from rows already computed. Requires the
/// minimal crossing time to exceed dt.
PiField solve_marching(const SystemSpec& spec, const InitialData& phi, double T, const SolveOptions& opts = {});

struct ResidualOptions {
    /// Half-width, in cells, of the tube excluded around kink lines.
    double tube_cells = 2.0;
    TraceOptions trace;
};

struct ResidualReport {
    double fixed_point = 0.0;  // sup |u - Qu|
    double pde = 0.0;          // central-difference residual off the kink tubes
    double initial = 0.0;      // sup |u(., 0) - phi|
    double boundary = 0.0;     // sup |u_out - h(t, u_in)|
    std::size_t pde_nodes = 0;   // interior nodes that entered the PDE residual
    std::size_t kink_lines = 0;  // characteristic lines excluded

    std::string to_text() const;
};

/// Start times of the characteristic lines across which a continuous
/// solution may lose differentiability: the closure of {0} under "a line of
/// component j leaving its out end at s reaches its in end at s + crossing".
std::vector<double> kink_times(const SystemSpec& spec, double T, double step = 1.0 / 1024);

ResidualReport residuals(const SystemSpec& spec, const PiField& u, const InitialData& phi,
                         const ResidualOptions& opts = {});

/// Normalized truncated convolution of phi with the kernel (1 - s^2)^3,
/// s = (x - y) / eps, restricted to y in [0,1]; sampled at nx + 1 nodes.
std::vector<std::vector<double>> mollify(const InitialData& phi, double eps, std::size_t nx);

/// sqrt of the trapezoidal integral over x of sum_j |a_j - b_j|^2 on row n.
double l2_slice_distance(const PiField& a, const PiField& b, std::size_t n);
double l2_slice_norm(const PiField& u, std::size_t n);

struct L2Result {
    PiField field;  // solution for the finest radius
    std::vector<double> radii;        // sorted decreasing
    std::vector<double> slice_times;
    /// distances[p][s]: L2 distance between the fields for radii[p] and
    /// radii[p+1] at slice_times[s].
    std::vector<std::vector<double>> distances;

    /// True when every slice's distances are nonincreasing as the radius shrinks.
    bool monotone() const;
    std::string to_text() const;
};

/// Approximates an L2-generalized solution: for each radius eps, mollifies
/// phi, corrects compatibility with bumps of radius eps at the out ends and
/// solves by solve_qpower.
L2Result solve_l2(const SystemSpec& spec, const InitialData& phi_rough, double T, std::vector<double> radii,
                  const SolveOptions& opts = {});

} // namespace hyperprop
