#include "hyperprop/pifield.hpp"

#include "hyperprop/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

namespace hyperprop {

namespace {

std::size_t end_index(const Grid& g, double end) { return end == 0.0 ? 0 : g.nx; }

BoundaryTrace boundary_trace(const PiField& u, const SystemSpec& spec, bool in) {
    const Grid& g = u.grid();
    BoundaryTrace tr(g.T, g.nt, spec.n());
    for (std::size_t j = 0; j < spec.n(); ++j) {
        std::size_t i = end_index(g, in ? spec.in_end(j) : spec.out_end(j));
        for (std::size_t n = 0; n <= g.nt; ++n) tr.at(j, n) = u.at(j, i, n);
    }
    return tr;
}

} // namespace

BoundaryTrace extract_in_trace(const PiField& u, const SystemSpec& spec) { return boundary_trace(u, spec, true); }

BoundaryTrace extract_out_trace(const PiField& u, const SystemSpec& spec) { return boundary_trace(u, spec, false); }

std::vector<double> field_compatibility_defect(const PiField& u, const SystemSpec& spec) {
    const Grid& g = u.grid();
    std::vector<double> in(spec.n()), out(spec.n());
    for (std::size_t j = 0; j < spec.n(); ++j) {
        in[j] = u.at(j, end_index(g, spec.in_end(j)), 0);
        out[j] = u.at(j, end_index(g, spec.out_end(j)), 0);
    }
    auto h = spec.boundary_map(0.0, in);
    for (std::size_t j = 0; j < spec.n(); ++j) out[j] -= h[j];
    return out;
}

PiField sample_Ch(const SystemSpec& spec, const Grid& grid, std::uint64_t seed, const SampleOptions& opts) {
    const std::size_t n = spec.n();
    const std::size_t P = opts.modes;
    PiField w(grid, n);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

    for (std::size_t j = 0; j < n; ++j) {
        struct Mode {
            double alpha, kx, kt, px, pt;
        };
        std::vector<Mode> modes;
        for (std::size_t p = 0; p <= P; ++p)
            for (std::size_t q = 0; q <= P; ++q) {
                double decay = 1.0 / (1.0 + static_cast<double>(p * p + q * q));
                Mode md{coef(rng) * decay, std::numbers::pi * static_cast<double>(p),
                        std::numbers::pi * static_cast<double>(q) / grid.T, phase(rng), phase(rng)};
                modes.push_back(md);
            }
        // Separable sum: precompute the 1D factors per mode.
        for (const auto& md : modes) {
            std::vector<double> fx(grid.nx + 1), ft(grid.nt + 1);
            for (std::size_t i = 0; i <= grid.nx; ++i) fx[i] = std::cos(md.kx * grid.x(i) + md.px);
            for (std::size_t k = 0; k <= grid.nt; ++k) ft[k] = md.alpha * std::cos(md.kt * grid.t(k) + md.pt);
            for (std::size_t k = 0; k <= grid.nt; ++k)
                for (std::size_t i = 0; i <= grid.nx; ++i) w.at(j, i, k) += fx[i] * ft[k];
        }
    }

    double sup = sup_norm(w);
    double scale = sup > 0 ? opts.amplitude / sup : 0.0;
    for (std::size_t j = 0; j < n; ++j)
        for (double& v : w.values(j)) v *= scale;

    // Corner correction: bumps centred on the out corners (out_end(j), 0).
    auto delta = field_compatibility_defect(w, spec);
    const double rho = opts.corner_radius;
    for (std::size_t j = 0; j < n; ++j) {
        if (delta[j] == 0.0) continue;
        double cx = spec.out_end(j);
        for (std::size_t k = 0; k <= grid.nt; ++k) {
            double t = grid.t(k);
            if (t >= rho) break;
            for (std::size_t i = 0; i <= grid.nx; ++i) {
                double r = std::hypot(grid.x(i) - cx, t);
                if (r < rho) w.at(j, i, k) -= delta[j] * bump(0.0, rho, r);
            }
        }
    }
    return w;
}

double sup_norm(const PiField& u, double t0, double t1) {
    const Grid& g = u.grid();
    double sup = 0.0;
    bool any = false;
    for (std::size_t k = 0; k <= g.nt; ++k) {
        double t = g.t(k);
        if (t < t0 - 1e-12 || t > t1 + 1e-12) continue;
        any = true;
        for (std::size_t j = 0; j < u.components(); ++j)
            for (std::size_t i = 0; i <= g.nx; ++i) sup = std::max(sup, std::abs(u.at(j, i, k)));
    }
    if (!any) throw Error("sup_norm: no grid rows in the requested time interval");
    return sup;
}

double sup_norm(const PiField& u) { return sup_norm(u, 0.0, u.grid().T); }

PiField constant_extension(const InitialData& phi, const Grid& grid) {
    PiField w(grid, phi.components());
    auto s = phi.sample(grid.nx);
    for (std::size_t j = 0; j < phi.components(); ++j)
        for (std::size_t k = 0; k <= grid.nt; ++k)
            for (std::size_t i = 0; i <= grid.nx; ++i) w.at(j, i, k) = s[j][i];
    return w;
}

std::vector<std::vector<double>> correct_compatibility(const SystemSpec& spec,
                                                       std::vector<std::vector<double>> samples, double radius) {
    const std::size_t n = spec.n();
    if (samples.size() != n) throw InvalidSpec("initial data has the wrong number of components");
    std::size_t nx = samples.front().size() - 1;
    std::vector<double> in(n), out(n);
    for (std::size_t j = 0; j < n; ++j) {
        in[j] = samples[j][spec.in_end(j) == 0.0 ? 0 : nx];
        out[j] = samples[j][spec.out_end(j) == 0.0 ? 0 : nx];
    }
    auto h = spec.boundary_map(0.0, in);
    for (std::size_t j = 0; j < n; ++j) {
        double delta = h[j] - out[j];
        if (delta == 0.0) continue;
        double c = spec.out_end(j);
        for (std::size_t i = 0; i <= nx; ++i)
            samples[j][i] += delta * bump(c, radius, static_cast<double>(i) / static_cast<double>(nx));
    }
    return samples;
}

void write_csv(std::ostream& os, const PiField& u) {
    const Grid& g = u.grid();
    os << "x,t";
    for (std::size_t j = 0; j < u.components(); ++j) os << ",u" << (j + 1);
    os << "\n";
    auto old = os.precision(17);
    for (std::size_t k = 0; k <= g.nt; ++k)
        for (std::size_t i = 0; i <= g.nx; ++i) {
            os << g.x(i) << "," << g.t(k);
            for (std::size_t j = 0; j < u.components(); ++j) os << "," << u.at(j, i, k);
            os << "\n";
        }
    os.precision(old);
}

} // namespace hyperprop
