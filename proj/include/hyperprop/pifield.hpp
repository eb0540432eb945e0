#pragma once

#include "hyperprop/grid.hpp"
#include "hyperprop/system.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace hyperprop {

/// u_in as a function of t: u_j(1, .) for j < m and u_j(0, .) for j >= m.
BoundaryTrace extract_in_trace(const PiField& u, const SystemSpec& spec);
/// u_out as a function of t: u_j(0, .) for j < m and u_j(1, .) for j >= m.
BoundaryTrace extract_out_trace(const PiField& u, const SystemSpec& spec);

/// u_out(0) - h(0, u_in(0)) read from the nodes of the bottom row.
std::vector<double> field_compatibility_defect(const PiField& u, const SystemSpec& spec);

struct SampleOptions {
    std::size_t modes = 4;
    double amplitude = 1.0;
    double corner_radius = 0.25;
};

/// Random element of C_h on the grid: a seeded cosine series per component
/// with coefficients decaying like 1/(1 + p^2 + q^2), scaled to grid sup norm
/// `amplitude`, then corrected at the out corners by
/// delta_j * bump(|(x,t) - corner| / rho) so that u_out(0) = h(0, u_in(0)).
/// Deterministic in (seed, grid, options).
PiField sample_Ch(const SystemSpec& spec, const Grid& grid, std::uint64_t seed, const SampleOptions& opts = {});

/// Max of |u_j| over all components and the grid rows with t in [t0, t1].
/// Throws if no row falls inside the interval.
double sup_norm(const PiField& u, double t0, double t1);
double sup_norm(const PiField& u);

/// The t-constant extension w(x, t) = phi(x).
PiField constant_extension(const InitialData& phi, const Grid& grid);

/// phi + delta_j * bump(x; out end, radius) with delta = h(0, phi_in) - phi_out.
/// The bumps never reach the in ends for radius < 1, so one pass is exact.
std::vector<std::vector<double>> correct_compatibility(const SystemSpec& spec,
                                                       std::vector<std::vector<double>> samples,
                                                       double radius);

/// CSV rows `x,t,u1,...,un`, t-major, with header.
void write_csv(std::ostream& os, const PiField& u);

} // namespace hyperprop
