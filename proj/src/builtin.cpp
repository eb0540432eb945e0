#include "hyperprop/builtin.hpp"

#include "hyperprop/error.hpp"
#include "hyperprop/fts.hpp"
#include "hyperprop/pifield.hpp"
#include "hyperprop/qcalc.hpp"
#include "hyperprop/solver.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace hyperprop {

Sec32Functions sec32_functions(Sec32Variant v) {
    switch (v) {
    case Sec32Variant::Suf2:
        return {"1.5*(bump(0.4, 0.6, t) + bump(3.5, 1, t))", "1.2*(bump(0.3, 0.7, t) + bump(3.6, 1.1, t))"};
    case Sec32Variant::Suf1:
        return {"1 + 0.5*sin(t)", "1.5*(bump(0.4, 0.6, t) + bump(4.2, 1, t))"};
    case Sec32Variant::Baseline:
        break;
    }
    return {"1 + 0.5*sin(t)", "1 + 0.3*cos(2*t)"};
}

SystemSpec sec32_spec(Sec32Variant v) {
    auto f = sec32_functions(v);
    return SystemSpec::from_text(1, {"1", "-1"}, {"0", "0"},
                                 std::vector<std::string>{"(" + f.r + ")*sin(xi2)", "sin((" + f.s + ")*xi1)^2"},
                                 false, 1.0);
}

std::string sec33_g(double G) {
    std::ostringstream os;
    os.precision(17);
    os << "if(t <= 4, 0, " << G << "*exp(-1/(t - 4)))";
    return os.str();
}

SystemSpec sec33_spec(double G) {
    return SystemSpec::from_text(1, {"1", "-1"}, {"0", "0"}, std::vector<std::string>{sec33_g(G), "xi1"}, false, 1.0);
}

SystemSpec transport_pair(const Eigen::MatrixXd& P) {
    return SystemSpec::from_text(1, {"1", "-1"}, {"0", "0"}, P, true, 1.0);
}

SystemSpec swap_spec() {
    Eigen::MatrixXd P(2, 2);
    P << 0, 1, 1, 0;
    return transport_pair(P);
}

SystemSpec lower_triangular_spec(double p) {
    Eigen::MatrixXd P(2, 2);
    P << 0, 0, p, 0;
    return transport_pair(P);
}

SystemSpec absorbing_spec() { return transport_pair(Eigen::MatrixXd::Zero(2, 2)); }

namespace {

int sec32(const std::string& variant, const ExampleOptions& opts, std::ostream& out) {
    Sec32Variant v;
    double T;
    std::optional<std::size_t> k;
    std::size_t nx = 80;
    if (variant == "suf2") {
        v = Sec32Variant::Suf2;
        T = 2.25;
        k = 1;
        nx = 64;
    } else if (variant == "suf1") {
        v = Sec32Variant::Suf1;
        T = 3.2;
        k = 2;
    } else if (variant == "baseline") {
        v = Sec32Variant::Baseline;
        T = 3.2;
    } else {
        throw InvalidSpec("unknown variant `" + variant + "` (expected suf2, suf1 or baseline)");
    }
    auto f = sec32_functions(v);
    out << "example sec3-2 variant " << variant << "\n"
        << "r(t) = " << f.r << "\n"
        << "s(t) = " << f.s << "\n";
    FtsOptions fo;
    fo.nx = nx;
    fo.trials = opts.trials;
    fo.tol = opts.tol;
    fo.seed = opts.seed;
    FtsVerdict verdict = check_C0(sec32_spec(v), T, k, fo);
    out << verdict.to_text();
    if (verdict.passed()) {
        out << "(C0) holds with k=" << verdict.k << " at T=" << verdict.T << ": no counterexample in "
            << verdict.trials << " sampled w\n";
        return 0;
    }
    out << "(C0) fails with k=" << verdict.k << " at T=" << verdict.T << "\n";
    return 1;
}

int sec33(const ExampleOptions& opts, std::ostream& out) {
    const double G = 1.0;
    SystemSpec spec = sec33_spec(G);
    out << "example sec3-3\n"
        << "g(t) = " << sec33_g(G) << "\n";

    ValidationReport rep = validate(spec);
    const ValidationCheck* hom = rep.find("homogeneity");
    bool flagged = hom && hom->status == CheckStatus::Fail;
    out << "homogeneity check: " << (flagged ? "FAIL" : "pass");
    if (flagged) out << " (h(t,0) != 0 at " << hom->location << ", worst " << hom->worst << ")";
    out << "\n";

    const std::size_t samples = std::min<std::size_t>(opts.trials, 32);
    Grid g = Grid::aligned(3.0, 64);
    QContext base(spec, InitialData::zero(2), g);
    double worst = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        PiField w = sample_Ch(spec, g, opts.seed + i);
        PiField u = q_power(base.with_phi(initial_slice(w)), w, 2);
        worst = std::max(worst, sup_norm(u, 3.0, 3.0));
    }
    out << "[Q^2 w](., 3) over " << samples << " sampled w: max |value| = " << worst << "\n";

    SolveOptions so;
    so.allow_invalid = true;
    PiField u = solve_marching(spec, InitialData::zero(2), 5.0, so);
    double at5 = sup_norm(u, 5.0, 5.0);
    out << "marching solution with phi = 0: sup |u(., 5)| = " << at5 << " (g(5) = " << G * std::exp(-1.0) << ")\n";
    bool vanished = worst <= opts.tol;
    out << (vanished && at5 > 0 ? "[Q^2 w](., 3) vanishes for every sampled w, yet the solution is nonzero at t = 5: "
                                  "the problem is not FTS\n"
                                : "unexpected outcome\n");
    return 0;
}

} // namespace

int run_example(const std::string& name, const std::string& variant, const ExampleOptions& opts, std::ostream& out) {
    if (name == "sec3-2") return sec32(variant.empty() ? "suf2" : variant, opts, out);
    if (name == "sec3-3") return sec33(opts, out);
    throw InvalidSpec("unknown example `" + name + "` (expected sec3-2 or sec3-3)");
}

} // namespace hyperprop
