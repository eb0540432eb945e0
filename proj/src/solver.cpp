#include "hyperprop/solver.hpp"

#include "hyperprop/characteristics.hpp"
#include "hyperprop/error.hpp"
#include "hyperprop/parallel.hpp"
#include "hyperprop/pifield.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <sstream>

namespace hyperprop {

Grid make_grid(double T, const SolveOptions& opts) {
    if (!(T > 0)) throw Error("time horizon must be positive");
    if (opts.nx == 0) throw Error("nx must be positive");
    if (opts.nt == 0) return Grid::aligned(T, opts.nx);
    return Grid{T, opts.nx, opts.nt};
}

void require_compatible(const SystemSpec& spec, const InitialData& phi, double tol) {
    auto d = compatibility_defect(spec, phi);
    for (std::size_t j = 0; j < d.size(); ++j)
        if (!(std::abs(d[j]) <= tol))
            throw IncompatibleData("initial data violates u_out(0) = h(0, u_in(0)) in component " +
                                   std::to_string(j + 1) + " by " + std::to_string(d[j]));
}

PiField solve_qpower(const SystemSpec& spec, const InitialData& phi, double T, const SolveOptions& opts) {
    require_valid(spec, opts.allow_invalid);
    require_compatible(spec, phi, opts.compatibility_tol);
    QContext ctx(spec, phi, make_grid(T, opts), opts.q);
    return solve_qpower(ctx, opts.compatibility_tol);
}

PiField solve_qpower(const QContext& ctx, double compatibility_tol) {
    require_compatible(ctx.spec(), ctx.phi(), compatibility_tol);
    PiField w = constant_extension(ctx.phi(), ctx.grid());
    return q_power(ctx, w, ctx.cached_stabilization_index());
}

PiField solve_marching(const SystemSpec& spec, const InitialData& phi, double T, const SolveOptions& opts) {
    require_valid(spec, opts.allow_invalid);
    require_compatible(spec, phi, opts.compatibility_tol);
    const Grid g = make_grid(T, opts);
    const std::size_t n = spec.n();
    auto ct = crossing_times(spec, T);
    if (!(ct.t_min > g.dt()))
        throw Error("marching needs dt below the minimal crossing time " + std::to_string(ct.t_min));

    std::vector<std::size_t> in_col(n);
    for (std::size_t k = 0; k < n; ++k) in_col[k] = spec.in_end(k) == 0.0 ? 0 : g.nx;

    PiField u(g, n);
    std::vector<CharExit> exits(n * (g.nx + 1));
    for (std::size_t level = 0; level <= g.nt; ++level) {
        const double t = g.t(level);
        parallel_for(exits.size(), [&](std::size_t s) {
            exits[s] = trace(spec, s / (g.nx + 1), g.x(s % (g.nx + 1)), t, opts.q.trace);
        });
        // Initial-axis exits first: at t = 0 the lateral corner nodes read
        // the in ends of the same row.
        for (std::size_t s = 0; s < exits.size(); ++s) {
            const CharExit& e = exits[s];
            if (e.kind == ExitKind::InitialAxis)
                u.at(e.j, s % (g.nx + 1), level) = e.weight * phi.value(e.j, e.x_exit);
        }
        // Then the in-end nodes, whose exits lie more than dt back, and last
        // the rest, which may read in-end values of this row.
        std::vector<double> xi(n);
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t s = 0; s < exits.size(); ++s) {
                const CharExit& e = exits[s];
                if (e.kind != ExitKind::Lateral) continue;
                bool at_in_end = s % (g.nx + 1) == in_col[e.j];
                if (at_in_end != (pass == 0)) continue;
                for (std::size_t k = 0; k < n; ++k) xi[k] = u.column_eval(k, in_col[k], e.tau);
                u.at(e.j, s % (g.nx + 1), level) = e.weight * spec.boundary_value(e.j, e.tau, xi);
            }
    }
    return u;
}

std::string ResidualReport::to_text() const {
    std::ostringstream os;
    os.precision(6);
    os << "fixed_point " << fixed_point << "\n"
       << "pde " << pde << " (" << pde_nodes << " nodes, " << kink_lines << " kink lines excluded)\n"
       << "initial " << initial << "\n"
       << "boundary " << boundary << "\n";
    return os.str();
}

std::vector<double> kink_times(const SystemSpec& spec, double T, double step) {
    std::vector<double> known{0.0};
    std::deque<double> queue{0.0};
    constexpr std::size_t cap = 4096;
    while (!queue.empty() && known.size() < cap) {
        double s = queue.front();
        queue.pop_front();
        for (std::size_t j = 0; j < spec.n(); ++j) {
            double arrive = forward_path(spec, j, s, step).back().omega;
            if (arrive > T + 1e-12) continue;
            bool seen = std::any_of(known.begin(), known.end(), [&](double k) { return std::abs(k - arrive) < 1e-9; });
            if (seen) continue;
            known.push_back(arrive);
            queue.push_back(arrive);
        }
    }
    std::sort(known.begin(), known.end());
    return known;
}

namespace {

// Nodes within the tube around every kink line of every component.
std::vector<bool> tube_mask(const SystemSpec& spec, const Grid& g, double cells, std::size_t& lines) {
    std::vector<bool> mask(g.nodes(), false);
    auto starts = kink_times(spec, g.T);
    lines = 0;
    for (double s : starts)
        for (std::size_t j = 0; j < spec.n(); ++j) {
            auto path = forward_path(spec, j, s);
            ++lines;
            if (!spec.rightward(j)) std::reverse(path.begin(), path.end());
            for (std::size_t i = 0; i <= g.nx; ++i) {
                double x = g.x(i);
                auto it = std::lower_bound(path.begin(), path.end(), x,
                                           [](const PathPoint& p, double v) { return p.xi < v; });
                double om;
                if (it == path.begin()) {
                    om = it->omega;
                } else if (it == path.end()) {
                    om = path.back().omega;
                } else {
                    auto prev = it - 1;
                    double f = (x - prev->xi) / (it->xi - prev->xi);
                    om = prev->omega + f * (it->omega - prev->omega);
                }
                double a = std::abs(spec.speed(j, x, std::max(om, 0.0)));
                double half = cells * (g.dt() + g.dx() / a);
                for (std::size_t k = 0; k <= g.nt; ++k)
                    if (std::abs(g.t(k) - om) <= half) mask[g.index(i, k)] = true;
            }
        }
    return mask;
}

} // namespace

ResidualReport residuals(const SystemSpec& spec, const PiField& u, const InitialData& phi,
                         const ResidualOptions& opts) {
    const Grid& g = u.grid();
    const std::size_t n = spec.n();
    ResidualReport rep;

    QOptions qo;
    qo.trace = opts.trace;
    QContext ctx(spec, phi, g, qo);
    rep.fixed_point = sup_difference(u, apply_Q(ctx, u));

    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i <= g.nx; ++i)
            rep.initial = std::max(rep.initial, std::abs(u.at(j, i, 0) - phi.value(j, g.x(i))));

    std::vector<double> xi(n);
    for (std::size_t k = 0; k <= g.nt; ++k) {
        for (std::size_t c = 0; c < n; ++c) xi[c] = u.at(c, ctx.in_index(c), k);
        for (std::size_t j = 0; j < n; ++j) {
            std::size_t out = spec.out_end(j) == 0.0 ? 0 : g.nx;
            rep.boundary = std::max(rep.boundary, std::abs(u.at(j, out, k) - spec.boundary_value(j, g.t(k), xi)));
        }
    }

    auto mask = tube_mask(spec, g, opts.tube_cells, rep.kink_lines);
    const double dx = g.dx(), dt = g.dt();
    for (std::size_t k = 1; k < g.nt; ++k)
        for (std::size_t i = 1; i < g.nx; ++i) {
            if (mask[g.index(i, k)]) continue;
            ++rep.pde_nodes;
            double x = g.x(i), t = g.t(k);
            for (std::size_t j = 0; j < n; ++j) {
                double ut = (u.at(j, i, k + 1) - u.at(j, i, k - 1)) / (2 * dt);
                double ux = (u.at(j, i + 1, k) - u.at(j, i - 1, k)) / (2 * dx);
                double r = ut + spec.speed(j, x, t) * ux + spec.damping(j, x, t) * u.at(j, i, k);
                rep.pde = std::max(rep.pde, std::abs(r));
            }
        }
    return rep;
}

std::vector<std::vector<double>> mollify(const InitialData& phi, double eps, std::size_t nx) {
    if (!(eps > 0)) throw Error("mollifier radius must be positive");
    constexpr std::size_t M = 512;  // Simpson subintervals per support
    const std::size_t n = phi.components();
    std::vector<std::vector<double>> out(n, std::vector<double>(nx + 1));
    auto kernel = [eps](double d) {
        double s = d / eps;
        double q = 1.0 - s * s;
        return q > 0 ? q * q * q : 0.0;
    };
    for (std::size_t i = 0; i <= nx; ++i) {
        double x = static_cast<double>(i) / static_cast<double>(nx);
        double lo = std::max(0.0, x - eps), hi = std::min(1.0, x + eps);
        double h = (hi - lo) / M;
        std::vector<double> num(n, 0.0);
        double den = 0.0;
        for (std::size_t p = 0; p <= M; ++p) {
            double y = lo + h * static_cast<double>(p);
            double w = (p == 0 || p == M) ? 1.0 : (p % 2 ? 4.0 : 2.0);
            double k = w * kernel(x - y);
            den += k;
            for (std::size_t j = 0; j < n; ++j) num[j] += k * phi.value(j, y);
        }
        for (std::size_t j = 0; j < n; ++j) out[j][i] = num[j] / den;
    }
    return out;
}

double l2_slice_distance(const PiField& a, const PiField& b, std::size_t n) {
    const Grid& g = a.grid();
    double sum = 0.0;
    for (std::size_t j = 0; j < a.components(); ++j)
        for (std::size_t i = 0; i <= g.nx; ++i) {
            double d = a.at(j, i, n) - b.at(j, i, n);
            sum += (i == 0 || i == g.nx ? 0.5 : 1.0) * d * d;
        }
    return std::sqrt(sum * g.dx());
}

double l2_slice_norm(const PiField& u, std::size_t n) {
    const Grid& g = u.grid();
    double sum = 0.0;
    for (std::size_t j = 0; j < u.components(); ++j)
        for (std::size_t i = 0; i <= g.nx; ++i) {
            double d = u.at(j, i, n);
            sum += (i == 0 || i == g.nx ? 0.5 : 1.0) * d * d;
        }
    return std::sqrt(sum * g.dx());
}

bool L2Result::monotone() const {
    for (std::size_t s = 0; s < slice_times.size(); ++s)
        for (std::size_t p = 1; p < distances.size(); ++p)
            if (distances[p][s] > distances[p - 1][s]) return false;
    return true;
}

std::string L2Result::to_text() const {
    std::ostringstream os;
    os.precision(6);
    os << "radius_pair";
    for (double t : slice_times) os << ",t=" << t;
    os << "\n";
    for (std::size_t p = 0; p < distances.size(); ++p) {
        os << radii[p] << "->" << radii[p + 1];
        for (double d : distances[p]) os << "," << d;
        os << "\n";
    }
    os << "monotone " << (monotone() ? "yes" : "no") << "\n";
    return os.str();
}

L2Result solve_l2(const SystemSpec& spec, const InitialData& phi_rough, double T, std::vector<double> radii,
                  const SolveOptions& opts) {
    if (radii.empty()) throw Error("solve_l2 needs at least one mollifier radius");
    for (double r : radii)
        if (!(r > 0 && r < 0.5)) throw Error("mollifier radii must lie in (0, 0.5)");
    require_valid(spec, opts.allow_invalid);
    std::sort(radii.begin(), radii.end(), std::greater<>());

    const Grid g = make_grid(T, opts);
    std::vector<PiField> fields;
    std::optional<QContext> base;
    for (double eps : radii) {
        auto samples = correct_compatibility(spec, mollify(phi_rough, eps, g.nx), eps);
        InitialData phi = InitialData::from_samples(std::move(samples));
        if (!base) base.emplace(spec, phi, g, opts.q);
        fields.push_back(solve_qpower(base->with_phi(std::move(phi)), opts.compatibility_tol));
    }

    L2Result res;
    res.radii = radii;
    std::vector<std::size_t> rows;
    for (int q = 1; q <= 4; ++q) {
        std::size_t row = static_cast<std::size_t>(std::llround(static_cast<double>(g.nt) * q / 4.0));
        if (!rows.empty() && rows.back() == row) continue;
        rows.push_back(row);
        res.slice_times.push_back(g.t(row));
    }
    for (std::size_t p = 0; p + 1 < fields.size(); ++p) {
        std::vector<double> d;
        for (std::size_t row : rows) d.push_back(l2_slice_distance(fields[p], fields[p + 1], row));
        res.distances.push_back(std::move(d));
    }
    res.field = std::move(fields.back());
    return res;
}

} // namespace hyperprop
