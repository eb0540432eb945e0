#include "hyperprop/fts.hpp"

#include "hyperprop/error.hpp"
#include "hyperprop/parallel.hpp"
#include "hyperprop/pifield.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hyperprop {

std::string FtsVerdict::to_text() const {
    std::ostringstream os;
    os.precision(10);
    os << "criterion " << (criterion == Criterion::C0 ? "C0" : "C00") << "\n"
       << "T " << T << "\n";
    if (criterion == Criterion::C0)
        os << "k " << k << "\n";
    else
        os << "q " << q << "\nk_max " << k_max << "\n";
    os << "trials " << trials << "\n"
       << "tolerance " << tolerance << "\n"
       << "seed " << seed << "\n"
       << "nx " << nx << "\n"
       << "outcome " << (passed() ? "no-counterexample" : "counterexample") << "\n";
    if (witness)
        os << "witness seed=" << witness->seed << " j=" << witness->j + 1 << " x=" << witness->x
           << " t=" << witness->t << " value=" << witness->value << "\n";
    return os.str();
}

std::string ToptResult::to_text() const {
    std::ostringstream os;
    os.precision(10);
    if (!certified) {
        os << "no certificate <= T_max (probe at " << T_hi << " failed)\n";
        return os.str();
    }
    os << "T_opt in [" << T_lo << ", " << T_hi << "]\n"
       << "probes " << probes << "\n"
       << "nx " << nx << "\n";
    return os.str();
}

Grid fts_grid(double T, std::size_t nx) { return Grid::aligned(T, nx); }

namespace {

void require_homogeneous(const SystemSpec& spec, bool allow_invalid) {
    ValidationReport rep = validate(spec);
    if (const auto* h = rep.find("homogeneity"); h && h->status == CheckStatus::Fail)
        throw InvalidSpec("refused: h(t, 0) != 0 (" + h->location +
                          "); the vanishing criteria only characterize stabilization for homogeneous boundaries");
    if (!rep.ok() && !allow_invalid) throw InvalidSpec("invalid specification\n" + rep.to_text());
}

// Largest |value| on row `row`, as a witness.
Witness slice_peak(const PiField& u, std::size_t row) {
    const Grid& g = u.grid();
    Witness w;
    w.t = g.t(row);
    for (std::size_t j = 0; j < u.components(); ++j)
        for (std::size_t i = 0; i <= g.nx; ++i) {
            double v = u.at(j, i, row);
            if (std::abs(v) > std::abs(w.value)) {
                w.value = v;
                w.j = j;
                w.x = g.x(i);
            }
        }
    return w;
}

struct TrialResult {
    bool failed = false;
    Witness witness;
};

FtsVerdict finish(FtsVerdict v, const std::vector<TrialResult>& results) {
    for (const auto& r : results)
        if (r.failed) {
            v.outcome = Outcome::Counterexample;
            v.witness = r.witness;
            break;
        }
    return v;
}

Grid c00_grid(double T, std::size_t nx, std::size_t k_max) {
    Grid small = fts_grid(T, nx);
    return Grid{T * static_cast<double>(k_max), nx, small.nt * k_max};
}

} // namespace

FtsVerdict check_C0(const SystemSpec& spec, double T, std::optional<std::size_t> k, const FtsOptions& opts) {
    require_homogeneous(spec, opts.allow_invalid);
    if (k && *k == 0) throw Error("k must be positive");
    const Grid g = fts_grid(T, opts.nx);
    QContext base(spec, InitialData::zero(spec.n()), g, opts.q);

    FtsVerdict v;
    v.criterion = Criterion::C0;
    v.T = g.T;
    v.k = k ? *k : base.cached_stabilization_index();
    v.trials = opts.trials;
    v.tolerance = opts.tol;
    v.seed = opts.seed;
    v.nx = opts.nx;

    std::vector<TrialResult> results(opts.trials);
    parallel_for(opts.trials, [&](std::size_t i) {
        std::uint64_t seed = opts.seed + i;
        PiField w = sample_Ch(spec, g, seed, opts.sample);
        QContext ctx = base.with_phi(initial_slice(w));
        PiField u = q_power(ctx, w, v.k);
        Witness peak = slice_peak(u, g.nt);
        if (!(std::abs(peak.value) <= opts.tol)) {
            peak.seed = seed;
            results[i] = {true, peak};
        }
    });
    return finish(v, results);
}

FtsVerdict check_C00(const SystemSpec& spec, double T, std::optional<std::size_t> q, std::size_t k_max,
                     const FtsOptions& opts) {
    if (!spec.autonomous()) throw InvalidSpec("refused: criterion C00 needs an autonomous specification");
    require_homogeneous(spec, opts.allow_invalid);
    if (k_max == 0) throw Error("k_max must be positive");
    if (q && *q == 0) throw Error("q must be positive");
    const Grid small = fts_grid(T, opts.nx);
    const Grid big = c00_grid(T, opts.nx, k_max);

    FtsVerdict v;
    v.criterion = Criterion::C00;
    v.T = small.T;
    v.q = q ? *q : QContext(spec, InitialData::zero(spec.n()), small, opts.q).cached_stabilization_index();
    v.k = v.q;
    v.k_max = k_max;
    v.trials = opts.trials;
    v.tolerance = opts.tol;
    v.seed = opts.seed;
    v.nx = opts.nx;

    QContext base(spec, InitialData::zero(spec.n()), big, opts.q);
    std::vector<TrialResult> results(opts.trials);
    parallel_for(opts.trials, [&](std::size_t i) {
        std::uint64_t seed = opts.seed + i;
        PiField w = sample_Ch(spec, big, seed, opts.sample);
        QContext ctx = base.with_phi(initial_slice(w));
        PiField cur = w;
        for (std::size_t s = 1; s <= k_max; ++s) {
            cur = q_power(ctx, cur, v.q);
            Witness peak = slice_peak(cur, s * small.nt);
            if (!(std::abs(peak.value) <= opts.tol)) {
                peak.seed = seed;
                peak.slice = s;
                results[i] = {true, peak};
                return;
            }
        }
    });
    return finish(v, results);
}

double replay(const SystemSpec& spec, const FtsVerdict& verdict, const FtsOptions& opts) {
    if (!verdict.witness) throw Error("replay needs a counterexample verdict");
    const Witness& w = *verdict.witness;
    Grid g = verdict.criterion == Criterion::C0 ? fts_grid(verdict.T, verdict.nx)
                                                : c00_grid(verdict.T, verdict.nx, verdict.k_max);
    PiField field = sample_Ch(spec, g, w.seed, opts.sample);
    QContext ctx(spec, initial_slice(field), g, opts.q);
    std::size_t power = verdict.criterion == Criterion::C0 ? verdict.k : verdict.q * w.slice;
    PiField u = q_power(ctx, field, power);
    auto i = static_cast<std::size_t>(std::llround(w.x * static_cast<double>(g.nx)));
    std::size_t row = verdict.criterion == Criterion::C0 ? g.nt : w.slice * (g.nt / verdict.k_max);
    return u.at(w.j, i, row);
}

ToptResult estimate_Topt(const SystemSpec& spec, double T_max, double bisect_tol, const FtsOptions& opts) {
    if (!(T_max > 0)) throw Error("T_max must be positive");
    if (!(bisect_tol > 0)) throw Error("bisection tolerance must be positive");
    FtsOptions o = opts;
    o.nx = std::max<std::size_t>(opts.nx, static_cast<std::size_t>(std::ceil(1.0 / bisect_tol - 1e-9)));
    const double cells = static_cast<double>(o.nx);

    ToptResult res;
    res.nx = o.nx;
    auto hi = static_cast<std::size_t>(std::ceil(T_max * cells - 1e-9));
    std::size_t lo = 0;
    auto passes = [&](std::size_t idx) {
        ++res.probes;
        return check_C0(spec, static_cast<double>(idx) / cells, std::nullopt, o).passed();
    };
    res.T_hi = static_cast<double>(hi) / cells;
    if (!passes(hi)) return res;
    res.certified = true;
    while (hi - lo > 1) {
        std::size_t mid = lo + (hi - lo) / 2;
        (passes(mid) ? hi : lo) = mid;
    }
    res.T_lo = static_cast<double>(lo) / cells;
    res.T_hi = static_cast<double>(hi) / cells;
    return res;
}

std::optional<NilpotentCertificate> certify_linear_nilpotent(const SystemSpec& spec, const FtsOptions& opts) {
    if (!spec.is_linear()) throw InvalidSpec("certify_linear_nilpotent needs a linear boundary");
    auto nu = nilpotency_index(spec.matrix());
    if (!nu) return std::nullopt;
    const double factor = static_cast<double>(*nu);
    double T = factor / spec.speed_floor();
    for (int it = 0; it < 100; ++it) {
        double next = factor * crossing_times(spec, T).t_max;
        bool done = std::abs(next - T) <= 1e-12 * std::max(1.0, T);
        T = next;
        if (done) break;
    }
    NilpotentCertificate cert;
    cert.nu = *nu;
    cert.T_bound = T;
    cert.confirmation = check_C0(spec, T, std::nullopt, opts);
    return cert;
}

} // namespace hyperprop
