// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include "support.hpp"

#include "hyperprop/characteristics.hpp"
#include "hyperprop/fts.hpp"
#include "hyperprop/inverse.hpp"

#include <chrono>
#include <cstdio>
#include <exception>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

using namespace hyperprop;
using namespace hptest;

namespace {

struct Line {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

Line criterion1() {
    auto t0 = Clock::now();
    OracleDeviation d = sec32_oracle_deviation(Sec32Variant::Baseline, 200, 4.0, 11);
    double secs = seconds_since(t0);
    bool ok = d.q1 <= 1e-12 && d.q2 <= 1e-12 && secs < 5.0;
    return {ok, "max |Qu - oracle| " + fmt(d.q1) + ", max |Q^2u - oracle| " + fmt(d.q2) + ", " + fmt(secs) + " s"};
}

Line criterion2() {
    std::ostringstream os;
    bool ok = true;
    struct Probe {
        Sec32Variant v;
        double T;
        std::size_t k, nx;
        const char* name;
    };
    for (Probe p : {Probe{Sec32Variant::Suf2, 2.25, 1, 64, "r=s=0 on [1,2.5]"},
                    Probe{Sec32Variant::Suf1, 3.2, 2, 80, "s=0 on [1,3.2]"}}) {
        auto t0 = Clock::now();
        FtsOptions o;
        o.nx = p.nx;
        o.trials = 64;
        o.tol = 1e-10;
        FtsVerdict v = check_C0(sec32_spec(p.v), p.T, p.k, o);
        double secs = seconds_since(t0);
        ok = ok && v.passed() && secs < 30.0;
        os << p.name << ": " << (v.passed() ? "no counterexample" : "counterexample") << " (T=" << p.T
           << ", k=" << p.k << ", " << fmt(secs) << " s); ";
    }
    return {ok, os.str()};
}

Line criterion3() {
    auto t0 = Clock::now();
    bool ok = true;
    std::ostringstream os;
    FtsOptions o;
    o.trials = 8;
    for (double T : {1.0, 2.0, 4.0, 6.0}) {
        FtsVerdict v = check_C0(swap_spec(), T, std::nullopt, o);
        double replayed = v.witness ? replay(swap_spec(), v, o) : 0.0;
        bool good = !v.passed() && std::abs(replayed) >= v.tolerance / 2 && replayed == v.witness->value;
        ok = ok && good;
        os << "T=" << T << " k=" << v.k << " witness " << (v.witness ? fmt(v.witness->value) : "none")
           << " replay " << fmt(replayed) << "; ";
    }
    double secs = seconds_since(t0);
    ok = ok && secs < 30.0;
    os << fmt(secs) << " s";
    return {ok, os.str()};
}

Line criterion4() {
    auto t0 = Clock::now();
    const double G = 1.0;
    SystemSpec spec = sec33_spec(G);
    Grid g = Grid::aligned(3.0, 32);
    QContext base(spec, InitialData::zero(2), g);
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 32; ++seed) {
        PiField w = sample_Ch(spec, g, seed);
        PiField u = q_power(base.with_phi(initial_slice(w)), w, 2);
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t i = 0; i <= g.nx; ++i) worst = std::max(worst, std::abs(u.at(j, i, g.nt)));
    }
    SolveOptions so;
    so.nx = 32;
    so.allow_invalid = true;
    PiField u = solve_marching(spec, InitialData::zero(2), 5.0, so);
    double at5 = sup_norm(u, 5.0, 5.0);
    const ValidationCheck* hom = validate(spec).find("homogeneity");
    bool flagged = hom && hom->status == CheckStatus::Fail;
    double secs = seconds_since(t0);
    bool ok = worst <= 1e-10 && at5 >= 0.1 * G && flagged && secs < 20.0;
    return {ok, "max |[Q^2w](.,3)| " + fmt(worst) + " over 32 w, sup |u(.,5)| " + fmt(at5) +
                    ", homogeneity " + (flagged ? "flagged" : "not flagged") + ", " + fmt(secs) + " s"};
}

Line criterion5() {
    auto t0 = Clock::now();
    double worst = 0.0;
    std::string worst_case;
    auto cases = solver_matrix();
    for (std::size_t c = 0; c < cases.size(); ++c) {
        const auto& sc = cases[c];
        InitialData phi = seeded_phi(sc.spec, sc.nx, 100 + c);
        SolveOptions o = solve_options(sc);
        double d = sup_difference(solve_qpower(sc.spec, phi, sc.T, o), solve_marching(sc.spec, phi, sc.T, o));
        if (d >= worst) {
            worst = d;
            worst_case = sc.name;
        }
    }
    double secs = seconds_since(t0);
    return {worst <= 1e-8 && secs < 120.0 && cases.size() == 16,
            std::to_string(cases.size()) + " cases, worst sup difference " + fmt(worst) + " (" + worst_case +
                "), " + fmt(secs) + " s"};
}

Line criterion6() {
    double worst = 0.0;
    std::ostringstream qs;
    auto cases = solver_matrix();
    for (std::size_t c = 0; c < cases.size(); ++c) {
        const auto& sc = cases[c];
        Grid g = Grid::aligned(sc.T, sc.nx);
        PiField w = sample_Ch(sc.spec, g, 200 + c);
        QContext ctx(sc.spec, initial_slice(w), g);
        std::size_t q = stabilization_index(ctx);
        std::vector<PiField> it;
        q_power(ctx, w, q + 2, &it);
        worst = std::max({worst, sup_difference(it[q - 1], it[q]), sup_difference(it[q - 1], it[q + 1])});
        qs << q << (c + 1 < cases.size() ? "," : "");
    }
    return {worst <= 1e-10, "q per case [" + qs.str() + "], max |Q^q w - Q^{q+j} w| " + fmt(worst)};
}

Line criterion7() {
    const std::size_t q = 2;
    double worst = 0.0;
    std::size_t checked_cases = 0, nodes = 0;
    for (const auto& sc : autonomous_cases()) {
        Grid g = Grid::aligned(sc.T, sc.nx);
        const std::size_t shift = sc.nx;  // T0 = 1
        Grid gz{g.T - 1.0, g.nx, g.nt - shift};
        PiField w = sample_Ch(sc.spec, g, 300 + checked_cases);
        PiField z(gz, sc.spec.n());
        for (std::size_t j = 0; j < sc.spec.n(); ++j)
            for (std::size_t n = 0; n <= gz.nt; ++n)
                for (std::size_t i = 0; i <= gz.nx; ++i) z.at(j, i, n) = w.at(j, i, n + shift);
        QContext cw(sc.spec, initial_slice(w), g), cz(sc.spec, initial_slice(z), gz);
        PiField sw = w, sz = z;
        for (std::size_t k = 0; k < q; ++k) {
            sw = apply_SR(cw, sw);
            sz = apply_SR(cz, sz);
        }
        const double reach = static_cast<double>(q) * crossing_times(sc.spec, sc.T).t_max + gz.dt();
        for (std::size_t n = 0; n <= gz.nt; ++n) {
            if (gz.t(n) < reach) continue;
            for (std::size_t j = 0; j < sc.spec.n(); ++j)
                for (std::size_t i = 0; i <= gz.nx; ++i) {
                    worst = std::max(worst, std::abs(sz.at(j, i, n) - sw.at(j, i, n + shift)));
                    ++nodes;
                }
        }
        ++checked_cases;
    }
    return {checked_cases >= 8 && nodes > 0 && worst <= 1e-9,
            std::to_string(checked_cases) + " autonomous cases, " + std::to_string(nodes) +
                " compared nodes, max deviation " + fmt(worst)};
}

Line criterion8() {
    SystemSpec spec = lower_triangular_spec(0.8);
    FtsOptions o;
    o.trials = 16;
    ToptResult r = estimate_Topt(spec, 3.0, 0.05, o);
    bool bracket = r.certified && r.T_lo < 2.0 && 2.0 <= r.T_hi && r.T_hi - r.T_lo <= 0.05;
    double after = 0.0;
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        InitialData phi = seeded_phi(spec, 64, seed);
        SolveOptions so;
        so.nx = 64;
        PiField u = solve_qpower(spec, phi, r.T_hi + 1.0, so);
        after = std::max(after, sup_norm(u, r.T_hi, r.T_hi + 1.0));
    }
    return {bracket && after <= 1e-10, "bracket [" + fmt(r.T_lo) + ", " + fmt(r.T_hi) + "] after " +
                                           std::to_string(r.probes) + " probes, sup |u| after T_hi " + fmt(after)};
}

Line criterion9() {
    SystemSpec spec = lower_triangular_spec(0.8);
    const std::vector<std::string> u0_src = {"bump(0.5,0.45,x)", "0.5*bump(0.45,0.4,x)"};
    const std::vector<std::string> f_src = {"bump(0.55,0.4,x)", "-0.7*bump(0.5,0.42,x)"};
    InverseOptions opts;
    opts.nx = 320;
    StateData u0 = StateData::from_text(u0_src);
    Profile f_star = StateData::from_text(f_src).values(opts.nx);
    bool ok = true;
    std::ostringstream os;
    for (double r : {0.7, 1.3, 2.5}) {
        auto t0 = Clock::now();
        Profile ur = duhamel(spec, u0.values(opts.nx), f_star, r, opts);
        InverseProblem prob{spec, r, u0, StateData::from_profile(ur), opts};
        SourceResult res = recover_source(prob);
        double rel = l2_norm(res.f - f_star) / l2_norm(f_star);
        double recon = l2_norm(reconstruct_state(prob, res.f, r) - ur);
        double secs = seconds_since(t0);
        ok = ok && rel <= 1e-3 && recon <= 1e-3 && secs < 60.0 && std::abs(res.T - 2.0) < 1e-12;
        os << "r=" << r << " (" << (res.r_below_T ? "n0=" + std::to_string(res.n0) : std::string("r>=T"))
           << ", T=" << res.T << "): rel err " << fmt(rel) << ", u(r) err " << fmt(recon) << ", " << fmt(secs)
           << " s; ";
    }
    return {ok, os.str()};
}

Line criterion10() {
    SystemSpec spec = SystemSpec::from_text(1, {"1.5+0.5*sin(3*x+2*t)"}, {"0"}, std::vector<std::string>{"0.5*xi1"},
                                            false, 1.0);
    auto tau = [&](double h) {
        TraceOptions o;
        o.step = h;
        o.richardson = false;
        return trace(spec, 0, 1.0, 3.0, o).tau;
    };
    const std::vector<double> steps = {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
    const double ref = tau(steps.back() / 16);
    std::vector<double> err;
    for (double h : steps) err.push_back(std::abs(tau(h) - ref));
    double worst = 1e300;
    std::ostringstream os;
    for (std::size_t k = 0; k + 1 < err.size(); ++k) {
        double f = err[k] / err[k + 1];
        worst = std::min(worst, f);
        os << fmt(f) << " ";
    }
    return {worst >= 8.0, "exit-time errors " + fmt(err.front()) + " .. " + fmt(err.back()) +
                              ", halving factors " + os.str()};
}

Line criterion11() {
    SystemSpec spec = absorbing_spec();
    InitialData step = exprs({"if(x <= 0.5, 1, 0)", "0"});
    SolveOptions o;
    o.nx = 128;
    L2Result res = solve_l2(spec, step, 2.0, {0.1, 0.05, 0.025}, o);
    const Grid& g = res.field.grid();
    std::size_t row = 0;
    for (std::size_t n = 0; n <= g.nt; ++n)
        if (std::abs(g.t(n) - 1.5) < 1e-12) row = n;
    double zero_dist = l2_slice_norm(res.field, row);
    return {row != 0 && zero_dist <= 1e-3 && res.monotone(),
            "L2 norm at t=1.5 " + fmt(zero_dist) + ", distances " + (res.monotone() ? "monotone" : "not monotone")};
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Line()>>> criteria = {
        {"closed-form Q oracle", criterion1},
        {"(C0) positive cases", criterion2},
        {"(C0) swap counterexamples", criterion3},
        {"non-homogeneous regression", criterion4},
        {"solver equivalence", criterion5},
        {"stabilization identity", criterion6},
        {"autonomous shift identity", criterion7},
        {"nilpotent fast path", criterion8},
        {"inverse roundtrip", criterion9},
        {"tracer order", criterion10},
        {"L2 step example", criterion11},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Line o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first
                  << "): " << o.detail << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
