#include "hyperprop/characteristics.hpp"

#include "hyperprop/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hyperprop {

namespace {

constexpr double kZeroTol = 1e-12;

// Right-hand side 1/a_j and the weight integrand b_j/a_j for one component.
class Field {
public:
    Field(const SystemSpec& spec, std::size_t j)
        : spec_(spec), j_(j), right_(spec.rightward(j)),
          damping_zero_(spec.damping_is_constant(j) && spec.damping(j, 0.0, 0.0) == 0.0) {}

    double inv_speed(double xi, double om) const {
        double a = spec_.speed(j_, xi, om);
        if (right_ ? !(a > 0) : !(a < 0))
            throw InvalidSpec("speed a_" + std::to_string(j_ + 1) + " has the wrong sign at (x=" + std::to_string(xi) +
                              ", t=" + std::to_string(om) + ")");
        return 1.0 / a;
    }

    // Simpson integral of b/a over the segment p0 -> p1 given 1/a at both ends.
    double segment(PathPoint p0, double f0, PathPoint p1, double f1) const {
        if (damping_zero_) return 0.0;
        double h = p1.xi - p0.xi;
        if (h == 0.0) return 0.0;
        double xm = 0.5 * (p0.xi + p1.xi);
        double om = 0.5 * (p0.omega + p1.omega) + h / 8.0 * (f0 - f1);
        double g0 = spec_.damping(j_, p0.xi, p0.omega) * f0;
        double g1 = spec_.damping(j_, p1.xi, p1.omega) * f1;
        double gm = spec_.damping(j_, xm, om) * inv_speed(xm, om);
        return h / 6.0 * (g0 + 4.0 * gm + g1);
    }

    double rk4(double xi, double om, double f0, double h) const {
        double k1 = f0;
        double k2 = inv_speed(xi + 0.5 * h, om + 0.5 * h * k1);
        double k3 = inv_speed(xi + 0.5 * h, om + 0.5 * h * k2);
        double k4 = inv_speed(xi + h, om + h * k3);
        return om + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

private:
    const SystemSpec& spec_;
    std::size_t j_;
    bool right_;
    bool damping_zero_;
};

bool constant_coefficients(const SystemSpec& spec, std::size_t j) {
    return spec.speed_is_constant(j) && spec.damping_is_constant(j);
}

CharExit trace_closed_form(const SystemSpec& spec, std::size_t j, double x, double t, bool keep_path) {
    CharExit e;
    e.j = j;
    e.x = x;
    e.t = t;
    double a = spec.speed(j, 0.0, 0.0);
    double b = spec.damping(j, 0.0, 0.0);
    if (spec.rightward(j) ? !(a > 0) : !(a < 0))
        throw InvalidSpec("speed a_" + std::to_string(j + 1) + " has the wrong sign");
    double target = spec.out_end(j);
    double om_end = t + (target - x) / a;
    if (om_end >= -kZeroTol) {
        e.kind = ExitKind::Lateral;
        e.x_exit = target;
        e.tau = std::max(om_end, 0.0);
    } else {
        double xe = x - a * t;
        e.kind = ExitKind::InitialAxis;
        e.x_exit = std::clamp(xe, 0.0, 1.0);
        e.tau = 0.0;
    }
    e.weight = b == 0.0 ? 1.0 : std::exp(b / a * (e.x_exit - x));
    if (keep_path) e.path = {{x, t}, {e.x_exit, e.tau}};
    return e;
}

CharExit trace_rk4(const SystemSpec& spec, std::size_t j, double x, double t, double step, bool keep_path) {
    Field field(spec, j);
    CharExit e;
    e.j = j;
    e.x = x;
    e.t = t;
    const double target = spec.out_end(j);
    const double sign = target > x ? 1.0 : -1.0;

    double xi = x, om = t, f = field.inv_speed(x, t);
    double logw = 0.0;
    if (keep_path) e.path.push_back({xi, om});

    while (xi != target) {
        double remaining = std::abs(target - xi);
        bool last = remaining <= step * (1 + 1e-9);
        double h = sign * (last ? remaining : step);
        double om1 = field.rk4(xi, om, f, h);
        double xi1 = last ? target : xi + h;

        if (om1 < -kZeroTol) {
            // Crossed t = 0 inside this step: bisect on the sub-step length.
            double lo = 0.0, hi = std::abs(h), s = hi, om_s = om1;
            for (int it = 0; it < 200; ++it) {
                s = 0.5 * (lo + hi);
                om_s = field.rk4(xi, om, f, sign * s);
                if (std::abs(om_s) <= kZeroTol || hi - lo < 1e-16) break;
                (om_s > 0 ? lo : hi) = s;
            }
            double xe = xi + sign * s;
            double fe = field.inv_speed(xe, om_s);
            logw += field.segment({xi, om}, f, {xe, om_s}, fe);
            if (std::abs(xe - target) <= kZeroTol) {
                e.kind = ExitKind::Lateral;
                e.x_exit = target;
            } else {
                e.kind = ExitKind::InitialAxis;
                e.x_exit = std::clamp(xe, 0.0, 1.0);
            }
            e.tau = 0.0;
            e.weight = std::exp(logw);
            if (keep_path) e.path.push_back({xe, om_s});
            return e;
        }

        double f1 = field.inv_speed(xi1, om1);
        logw += field.segment({xi, om}, f, {xi1, om1}, f1);
        xi = xi1;
        om = om1;
        f = f1;
        if (keep_path) e.path.push_back({xi, om});
    }
    e.kind = ExitKind::Lateral;
    e.x_exit = target;
    e.tau = std::max(om, 0.0);
    e.weight = std::exp(logw);
    return e;
}

} // namespace

CharExit trace(const SystemSpec& spec, std::size_t j, double x, double t, const TraceOptions& opts) {
    if (j >= spec.n()) throw Error("component index out of range");
    if (!(x >= 0.0 && x <= 1.0) || !(t >= 0.0)) throw Error("trace start must lie in the strip");
    if (!(opts.step > 0)) throw Error("trace step must be positive");

    const double target = spec.out_end(j);
    if (x == target || t == 0.0) {
        CharExit e;
        e.j = j;
        e.x = x;
        e.t = t;
        e.x_exit = x;
        e.tau = x == target ? t : 0.0;
        e.kind = x == target ? ExitKind::Lateral : ExitKind::InitialAxis;
        e.weight = 1.0;
        if (opts.keep_path) e.path = {{x, t}};
        return e;
    }
    if (constant_coefficients(spec, j)) return trace_closed_form(spec, j, x, t, opts.keep_path);

    CharExit base = trace_rk4(spec, j, x, t, opts.step, opts.keep_path);
    if (!opts.richardson) return base;
    // Error check against the doubled step; only on disagreement is the
    // halved step run, and its result kept.
    CharExit coarse = trace_rk4(spec, j, x, t, 2.0 * opts.step, false);
    bool differ = coarse.kind != base.kind || std::abs(coarse.tau - base.tau) > 1e-8 ||
                  std::abs(coarse.x_exit - base.x_exit) > 1e-8 ||
                  std::abs(coarse.weight - base.weight) > 1e-8 * std::max(1.0, std::abs(base.weight));
    return differ ? trace_rk4(spec, j, x, t, 0.5 * opts.step, opts.keep_path) : base;
}

double weight(const SystemSpec& spec, std::size_t j, std::span<const PathPoint> path) {
    if (path.size() < 2) return 1.0;
    Field field(spec, j);
    double logw = 0.0;
    double f0 = field.inv_speed(path[0].xi, path[0].omega);
    for (std::size_t k = 1; k < path.size(); ++k) {
        double f1 = field.inv_speed(path[k].xi, path[k].omega);
        logw += field.segment(path[k - 1], f0, path[k], f1);
        f0 = f1;
    }
    return std::exp(logw);
}

double omega(const SystemSpec& spec, std::size_t j, double xi, double x, double t, const TraceOptions& opts) {
    if (!(xi >= 0.0 && xi <= 1.0) || !(x >= 0.0 && x <= 1.0)) throw Error("omega: abscissae must lie in [0,1]");
    auto leave = [&](double where) {
        return InvalidSpec("characteristic through (x=" + std::to_string(x) + ", t=" + std::to_string(t) +
                           ") leaves the strip near xi=" + std::to_string(where));
    };
    if (spec.speed_is_constant(j)) {
        double a = spec.speed(j, 0.0, 0.0);
        double om = t + (xi - x) / a;
        if (om < -kZeroTol) throw leave(xi);
        return om;
    }
    Field field(spec, j);
    double sign = xi > x ? 1.0 : -1.0;
    double s = x, om = t, f = field.inv_speed(s, om);
    while (s != xi) {
        double remaining = std::abs(xi - s);
        bool last = remaining <= opts.step * (1 + 1e-9);
        double h = sign * (last ? remaining : opts.step);
        om = field.rk4(s, om, f, h);
        s = last ? xi : s + h;
        if (om < -kZeroTol) throw leave(s);
        f = field.inv_speed(s, om);
    }
    return om;
}

std::vector<PathPoint> forward_path(const SystemSpec& spec, std::size_t j, double t0, double step) {
    const double start = spec.out_end(j), end = spec.in_end(j);
    std::vector<PathPoint> path{{start, t0}};
    if (spec.speed_is_constant(j)) {
        double a = spec.speed(j, 0.0, 0.0);
        if (spec.rightward(j) ? !(a > 0) : !(a < 0))
            throw InvalidSpec("speed a_" + std::to_string(j + 1) + " has the wrong sign");
        path.push_back({end, t0 + (end - start) / a});
        return path;
    }
    Field field(spec, j);
    double sign = end > start ? 1.0 : -1.0;
    double s = start, om = t0, f = field.inv_speed(s, om);
    while (s != end) {
        double remaining = std::abs(end - s);
        bool last = remaining <= step * (1 + 1e-9);
        double h = sign * (last ? remaining : step);
        om = field.rk4(s, om, f, h);
        s = last ? end : s + h;
        f = field.inv_speed(s, om);
        path.push_back({s, om});
    }
    return path;
}

} // namespace hyperprop
