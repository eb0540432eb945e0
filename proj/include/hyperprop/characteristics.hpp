#pragma once

// Characteristic curves xi -> omega_j(xi; x, t) of the decoupled system,
// defined by d omega / d xi = 1 / a_j(xi, omega) with omega(x) = t, and the
// exponential weights c_j accumulated along them.

#include "hyperprop/system.hpp"

#include <span>
#include <vector>

namespace hyperprop {

enum class ExitKind {
    InitialAxis,  // the curve reaches t = 0 at an interior abscissa
    Lateral,      // the curve reaches x = 0 (j < m) or x = 1 (j >= m) at time tau >= 0
};

struct PathPoint {
    double xi;
    double omega;
};

/// Backward exit of one characteristic from (x, t).
struct CharExit {
    std::size_t j = 0;
    double x = 0.0;
    double t = 0.0;
    double x_exit = 0.0;
    double tau = 0.0;
    ExitKind kind = ExitKind::Lateral;
    double weight = 1.0;  // exp of the integral of b_j/a_j from x to x_exit
    std::vector<PathPoint> path;  // filled only when requested
};

struct TraceOptions {
    double step = 1.0 / 1024;  // step in xi
    /// Compare with a run at 2*step; when exit data differ by more than
    /// 1e-8, rerun at step/2 and keep that result.
    bool richardson = true;
    bool keep_path = false;
};

/// Follows the characteristic of component j through (x, t) toward decreasing
/// time with classical RK4 in xi. A crossing of t = 0 is refined by bisection
/// to |omega| <= 1e-12. Corner hits (tau = 0 at the lateral end) are lateral.
/// Throws InvalidSpec if a_j has the wrong sign along the path.
CharExit trace(const SystemSpec& spec, std::size_t j, double x, double t, const TraceOptions& opts = {});

/// exp of the composite Simpson rule for (b_j/a_j)(eta, omega(eta)) over a
/// traced path, midpoints taken from the cubic Hermite interpolant of omega.
double weight(const SystemSpec& spec, std::size_t j, std::span<const PathPoint> path);

/// Ordinate of the characteristic through (x, t) at abscissa xi. Throws
/// InvalidSpec if the curve leaves the strip (omega < 0) before reaching xi.
double omega(const SystemSpec& spec, std::size_t j, double xi, double x, double t, const TraceOptions& opts = {});

/// Forward characteristic of component j entering at its out end at time
/// t0 and integrated across [0,1]; the last point sits on the in end.
std::vector<PathPoint> forward_path(const SystemSpec& spec, std::size_t j, double t0, double step = 1.0 / 1024);

} // namespace hyperprop
