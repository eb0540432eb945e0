#include "hyperprop/qcalc.hpp"

#include "hyperprop/error.hpp"
#include "hyperprop/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>

namespace hyperprop {

struct QContext::Shared {
    std::once_flag once;
    std::size_t q = 0;
};

ExitTable::ExitTable(const SystemSpec& spec, const Grid& grid, const TraceOptions& opts)
    : grid_(grid), exits_(spec.n(), std::vector<NodeExit>(grid.nodes())) {
    const std::size_t n = spec.n();
    // With t-free coefficients a lateral exit only shifts with t, so one
    // trace per column gives the delay and weight for every row after it.
    std::vector<char> t_free(n);
    for (std::size_t j = 0; j < n; ++j)
        t_free[j] = !spec.speed_expr(j).uses("t") && !spec.damping_expr(j).uses("t");
    const double t_ref = grid.T + 1.0 / spec.speed_floor() + 1.0;
    std::vector<CharExit> ref(n * (grid.nx + 1));
    parallel_for(ref.size(), [&](std::size_t s) {
        std::size_t j = s / (grid.nx + 1);
        if (t_free[j]) ref[s] = trace(spec, j, grid.x(s % (grid.nx + 1)), t_ref, opts);
    });

    parallel_for((grid.nt + 1) * n, [&](std::size_t task) {
        std::size_t j = task % n;
        std::size_t k = task / n;
        const double t = grid.t(k);
        for (std::size_t i = 0; i <= grid.nx; ++i) {
            const CharExit& r = ref[j * (grid.nx + 1) + i];
            if (t_free[j] && r.kind == ExitKind::Lateral) {
                double delay = t_ref - r.tau;
                if (t - delay > 1e-9) {
                    exits_[j][grid.index(i, k)] = {r.x_exit, t - delay, r.weight, true};
                    continue;
                }
            }
            CharExit e = trace(spec, j, grid.x(i), t, opts);
            exits_[j][grid.index(i, k)] = {e.x_exit, e.tau, e.weight, e.kind == ExitKind::Lateral};
        }
    });
}

QContext::QContext(SystemSpec spec, InitialData phi, const Grid& grid, QOptions opts)
    : spec_(std::make_shared<const SystemSpec>(std::move(spec))), phi_(std::move(phi)), grid_(grid),
      opts_(std::move(opts)) {
    if (phi_.components() != spec_->n()) throw InvalidSpec("initial data has the wrong number of components");
    table_ = std::make_shared<const ExitTable>(*spec_, grid_, opts_.trace);
    shared_ = std::make_shared<Shared>();
}

QContext QContext::with_phi(InitialData phi) const {
    if (phi.components() != spec_->n()) throw InvalidSpec("initial data has the wrong number of components");
    QContext c = *this;
    c.phi_ = std::move(phi);
    return c;
}

double QContext::verify_exit_cache(std::size_t samples, std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick_i(0, grid_.nx), pick_n(0, grid_.nt), pick_j(0, spec_->n() - 1);
    double worst = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        std::size_t i = pick_i(rng), k = pick_n(rng), j = pick_j(rng);
        CharExit e = trace(*spec_, j, grid_.x(i), grid_.t(k), opts_.trace);
        const NodeExit& c = exit(j, i, k);
        if ((e.kind == ExitKind::Lateral) != c.lateral) return std::numeric_limits<double>::infinity();
        worst = std::max({worst, std::abs(e.tau - c.tau), std::abs(e.x_exit - c.x_exit),
                          std::abs(e.weight - c.weight)});
    }
    return worst;
}

std::size_t QContext::cached_stabilization_index() const {
    std::call_once(shared_->once, [&] { shared_->q = stabilization_index(*this); });
    return shared_->q;
}

std::size_t stabilization_bound(const QContext& ctx) {
    const Grid& g = ctx.grid();
    auto ct = crossing_times(ctx.spec(), g.T);
    double reach = ct.t_min - g.dt();
    if (!(reach > 0))
        throw Error("time step " + std::to_string(g.dt()) + " is not below the minimal crossing time " +
                    std::to_string(ct.t_min));
    return static_cast<std::size_t>(std::ceil(g.T / reach - 1e-12)) + 1;
}

namespace {

// u_in at time tau from the in columns of u.
void in_values(const QContext& ctx, const PiField& u, double tau, std::vector<double>& out) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = u.column_eval(k, ctx.in_index(k), tau);
}

void check_shape(const QContext& ctx, const PiField& u) {
    const Grid& g = u.grid();
    const Grid& c = ctx.grid();
    if (u.components() != ctx.spec().n() || g.nx != c.nx || g.nt != c.nt || g.T != c.T)
        throw Error("field does not live on the context grid");
}

} // namespace

BoundaryTrace apply_R(const QContext& ctx, const PiField& u) {
    check_shape(ctx, u);
    const Grid& g = ctx.grid();
    const std::size_t n = ctx.spec().n();
    BoundaryTrace out(g.T, g.nt, n);
    std::vector<double> xi(n);
    for (std::size_t k = 0; k <= g.nt; ++k) {
        for (std::size_t c = 0; c < n; ++c) xi[c] = u.at(c, ctx.in_index(c), k);
        for (std::size_t j = 0; j < n; ++j) out.at(j, k) = ctx.spec().boundary_value(j, g.t(k), xi);
    }
    return out;
}

PiField apply_S(const QContext& ctx, const BoundaryTrace& v) {
    const Grid& g = ctx.grid();
    const std::size_t n = ctx.spec().n();
    if (v.components() != n) throw Error("boundary trace has the wrong number of components");
    PiField out(g, n);
    parallel_for(g.nt + 1, [&](std::size_t k) {
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i <= g.nx; ++i) {
                const NodeExit& e = ctx.exit(j, i, k);
                out.at(j, i, k) = e.weight * v.eval(j, e.lateral ? e.tau : 0.0);
            }
    });
    return out;
}

namespace {

PiField propagate(const QContext& ctx, const PiField& u, bool use_phi) {
    check_shape(ctx, u);
    const Grid& g = ctx.grid();
    const std::size_t n = ctx.spec().n();
    PiField out(g, n);
    parallel_for(g.nt + 1, [&](std::size_t k) {
        std::vector<double> xi(n);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i <= g.nx; ++i) {
                const NodeExit& e = ctx.exit(j, i, k);
                double v;
                if (!e.lateral && use_phi) {
                    v = ctx.phi().value(j, e.x_exit);
                } else {
                    double tau = e.lateral ? e.tau : 0.0;
                    in_values(ctx, u, tau, xi);
                    v = ctx.spec().boundary_value(j, tau, xi);
                }
                out.at(j, i, k) = e.weight * v;
            }
    });
    return out;
}

} // namespace

PiField apply_SR(const QContext& ctx, const PiField& u) { return propagate(ctx, u, false); }

PiField apply_Q(const QContext& ctx, const PiField& u) { return propagate(ctx, u, true); }

PiField q_power(const QContext& ctx, const PiField& u, std::size_t k, std::vector<PiField>* iterates) {
    if (k == 0) throw Error("q_power needs k >= 1");
    PiField cur = apply_Q(ctx, u);
    if (iterates) iterates->push_back(cur);
    for (std::size_t s = 1; s < k; ++s) {
        cur = apply_Q(ctx, cur);
        if (iterates) iterates->push_back(cur);
    }
    return cur;
}

double sup_difference(const PiField& a, const PiField& b) {
    if (a.components() != b.components() || a.grid().nodes() != b.grid().nodes())
        throw Error("sup_difference: fields differ in shape");
    double d = 0.0;
    for (std::size_t j = 0; j < a.components(); ++j) {
        auto va = a.values(j), vb = b.values(j);
        for (std::size_t s = 0; s < va.size(); ++s) d = std::max(d, std::abs(va[s] - vb[s]));
    }
    return d;
}

InitialData initial_slice(const PiField& w) {
    std::vector<std::vector<double>> rows;
    for (std::size_t j = 0; j < w.components(); ++j) rows.push_back(w.row(j, 0));
    return InitialData::from_samples(std::move(rows));
}

std::size_t stabilization_index(const QContext& ctx) {
    const std::size_t bound = stabilization_bound(ctx);
    const auto& o = ctx.options();
    std::size_t q = 1;
    for (std::size_t s = 0; s < o.witnesses; ++s) {
        PiField w = sample_Ch(ctx.spec(), ctx.grid(), o.witness_seed + s, o.sample);
        QContext c = ctx.with_phi(initial_slice(w));
        PiField cur = apply_Q(c, w);
        std::size_t settled = 0;
        for (std::size_t k = 1; k <= bound; ++k) {
            PiField next = apply_Q(c, cur);
            double scale = std::max(1.0, sup_norm(next));
            if (sup_difference(cur, next) <= o.stabilization_tol * scale) {
                settled = k;
                break;
            }
            cur = std::move(next);
        }
        if (settled == 0)
            throw ConvergenceError("Q iterates did not settle within the bound q = " + std::to_string(bound));
        q = std::max(q, settled);
    }
    return q;
}

} // namespace hyperprop
