#include "hyperprop/cli.hpp"

#include "hyperprop/builtin.hpp"
#include "hyperprop/characteristics.hpp"
#include "hyperprop/error.hpp"
#include "hyperprop/fts.hpp"
#include "hyperprop/inverse.hpp"
#include "hyperprop/model_io.hpp"
#include "hyperprop/pifield.hpp"
#include "hyperprop/qcalc.hpp"
#include "hyperprop/solver.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <optional>
#include <ostream>

namespace hyperprop {

std::vector<std::string> split_top_level(const std::string& list) {
    std::vector<std::string> parts;
    std::string cur;
    int depth = 0;
    for (char c : list) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == ',' && depth == 0) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

namespace {

constexpr const char* kExitPlain = "Exit codes: 0 success, 2 usage error or refused input.";
constexpr const char* kExitVerdict =
    "Exit codes: 0 no counterexample, 1 counterexample found, 2 usage error or refused input.";

// Raised for flag combinations CLI11 cannot express; maps to exit 2.
struct Usage : Error {
    using Error::Error;
};

InitialData phi_from(const std::string& list, std::size_t n) {
    auto parts = split_top_level(list);
    if (parts.size() != n)
        throw Usage("--phi needs " + std::to_string(n) + " comma-separated expressions, got " +
                    std::to_string(parts.size()));
    std::vector<Expr> e;
    for (const auto& p : parts) e.push_back(parse(p, {"x"}));
    return InitialData::from_exprs(std::move(e));
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Usage("cannot write " + path);
    return f;
}

std::optional<std::size_t> power_flag(const std::string& s, const char* name) {
    if (s == "auto") return std::nullopt;
    try {
        std::size_t used = 0;
        long v = std::stol(s, &used);
        if (used == s.size() && v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw Usage(std::string("--") + name + " must be a positive integer or `auto`");
}

void write_profile(std::ostream& os, const Profile& p, const char* prefix) {
    os << "x";
    for (std::size_t j = 0; j < p.components(); ++j) os << "," << prefix << (j + 1);
    os << "\n";
    auto old = os.precision(17);
    for (std::size_t i = 0; i <= p.nx; ++i) {
        os << static_cast<double>(i) / static_cast<double>(p.nx);
        for (const auto& c : p.v) os << "," << c[i];
        os << "\n";
    }
    os.precision(old);
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Propagation-operator solver for decoupled hyperbolic systems with boundary reflections"};
    app.require_subcommand(1);
    app.footer(kExitVerdict);

    std::string model;
    auto add_model = [&](CLI::App* s) { s->add_option("--model", model, "JSON model file")->required(); };

    // validate
    auto* validate_cmd = app.add_subcommand("validate", "Run the sampled structural checks on a model");
    add_model(validate_cmd);
    validate_cmd->footer("Exit codes: 0 all checks pass, 2 a check fails or the model is malformed.");

    // solve
    std::string phi_list, out_path, method = "qpower";
    double T = 1.0;
    std::size_t nx = 64, nt = 0;
    bool allow_invalid = false;
    auto* solve_cmd = app.add_subcommand("solve", "Solve on [0,1] x [0,T] and write the field as CSV");
    add_model(solve_cmd);
    solve_cmd->add_option("--phi", phi_list, "initial data: n comma-separated expressions in x")->required();
    solve_cmd->add_option("--T", T, "time horizon")->required();
    solve_cmd->add_option("--nx", nx, "cells in x")->capture_default_str();
    solve_cmd->add_option("--nt", nt, "cells in t (0: ceil(T*nx))")->capture_default_str();
    solve_cmd->add_option("--out", out_path, "CSV output path")->required();
    solve_cmd->add_option("--method", method, "qpower or marching")
        ->check(CLI::IsMember({"qpower", "marching"}))
        ->capture_default_str();
    solve_cmd->add_flag("--allow-invalid", allow_invalid, "solve even if validation fails");
    solve_cmd->footer(kExitPlain);

    // trace
    std::size_t j_index = 1;
    double x0 = 0.0, t0 = 0.0, step = 1.0 / 1024;
    auto* trace_cmd = app.add_subcommand("trace", "Trace one characteristic back to its exit; path CSV on stdout");
    add_model(trace_cmd);
    trace_cmd->add_option("--j", j_index, "component, 1-based")->required();
    trace_cmd->add_option("--x", x0, "start abscissa")->required();
    trace_cmd->add_option("--t", t0, "start time")->required();
    trace_cmd->add_option("--step", step, "xi step")->capture_default_str();
    trace_cmd->footer(kExitPlain);

    // qpower
    std::size_t k_iter = 1;
    std::uint64_t seed = 1;
    auto* qpower_cmd = app.add_subcommand(
        "qpower", "Iterate Q and print the sup norm of each iterate per component as CSV");
    add_model(qpower_cmd);
    qpower_cmd->add_option("--k", k_iter, "number of iterations")->required();
    qpower_cmd->add_option("--T", T, "time horizon")->required();
    qpower_cmd->add_option("--phi", phi_list, "initial data; omitted: a sampled compatible field");
    qpower_cmd->add_option("--seed", seed, "seed of the sampled field")->capture_default_str();
    qpower_cmd->add_option("--nx", nx, "cells in x")->capture_default_str();
    qpower_cmd->add_option("--nt", nt, "cells in t (0: ceil(T*nx))")->capture_default_str();
    qpower_cmd->add_flag("--allow-invalid", allow_invalid, "run even if validation fails");
    qpower_cmd->footer(kExitPlain);

    // fts-check
    std::string k_flag = "auto", criterion = "C0";
    std::size_t trials = 64, k_max = 3;
    double tol = 1e-10;
    auto* fts_cmd = app.add_subcommand("fts-check", "Search for counterexamples to criterion C0 or C00");
    add_model(fts_cmd);
    fts_cmd->add_option("--T", T, "horizon")->required();
    fts_cmd->add_option("--k", k_flag, "power k (C0) or q (C00), or auto")->capture_default_str();
    fts_cmd->add_option("--criterion", criterion, "C0 or C00")
        ->check(CLI::IsMember({"C0", "C00"}))
        ->capture_default_str();
    fts_cmd->add_option("--k-max", k_max, "slices kT checked by C00")->capture_default_str();
    fts_cmd->add_option("--trials", trials, "sampled witnesses")->capture_default_str();
    fts_cmd->add_option("--tol", tol, "vanishing tolerance")->capture_default_str();
    fts_cmd->add_option("--seed", seed, "first witness seed")->capture_default_str();
    fts_cmd->add_option("--nx", nx, "cells in x")->capture_default_str();
    fts_cmd->add_flag("--allow-invalid", allow_invalid, "run even if non-homogeneity-related checks fail");
    fts_cmd->footer(kExitVerdict);

    // topt
    double T_max = 1.0, bisect_tol = 0.05;
    auto* topt_cmd = app.add_subcommand("topt", "Bracket the optimal stabilization time by bisection");
    add_model(topt_cmd);
    topt_cmd->add_option("--Tmax", T_max, "largest horizon probed")->required();
    topt_cmd->add_option("--bisect-tol", bisect_tol, "bracket width")->capture_default_str();
    topt_cmd->add_option("--trials", trials, "sampled witnesses per probe")->capture_default_str();
    topt_cmd->add_option("--tol", tol, "vanishing tolerance")->capture_default_str();
    topt_cmd->add_option("--seed", seed, "first witness seed")->capture_default_str();
    topt_cmd->add_option("--nx", nx, "minimal cells in x")->capture_default_str();
    topt_cmd->footer("Exit codes: 0 bracket found, 1 no vanishing observed at T_max, 2 usage error or refused input.");

    // inverse
    std::string u0_list, ur_list, u0_deriv, ur_deriv, states_path;
    double r = 1.0;
    std::optional<double> T_known;
    std::size_t inv_nx = 80;
    auto* inverse_cmd = app.add_subcommand("inverse", "Recover the source f from u(0) = u0 and u(r) = ur");
    add_model(inverse_cmd);
    inverse_cmd->add_option("--u0", u0_list, "u0: n comma-separated expressions in x")->required();
    inverse_cmd->add_option("--ur", ur_list, "ur: n comma-separated expressions in x")->required();
    inverse_cmd->add_option("--u0-deriv", u0_deriv, "derivative of u0 (default: finite differences)");
    inverse_cmd->add_option("--ur-deriv", ur_deriv, "derivative of ur (default: finite differences)");
    inverse_cmd->add_option("--r", r, "observation time")->required();
    inverse_cmd->add_option("--out", out_path, "CSV path for f")->required();
    inverse_cmd->add_option("--states", states_path, "CSV path for u(t) at t = 0, r/4, r/2, 3r/4, r");
    inverse_cmd->add_option("--nilpotency-T", T_known, "use this vanishing time instead of searching");
    inverse_cmd->add_option("--nx", inv_nx, "cells in x")->capture_default_str();
    inverse_cmd->footer(kExitPlain);

    // example
    std::string name, variant;
    auto* example_cmd = app.add_subcommand("example", "Run a built-in example");
    example_cmd->add_option("--name", name, "sec3-2 or sec3-3")->required();
    example_cmd->add_option("--variant", variant, "for sec3-2: suf2, suf1 or baseline");
    example_cmd->add_option("--trials", trials, "sampled witnesses")->capture_default_str();
    example_cmd->add_option("--seed", seed, "first witness seed")->capture_default_str();
    example_cmd->footer(kExitVerdict);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*example_cmd) {
            ExampleOptions eo;
            eo.trials = trials;
            eo.seed = seed;
            return run_example(name, variant, eo, out);
        }

        SystemSpec spec = load_model(model);

        if (*validate_cmd) {
            ValidationReport rep = validate(spec);
            out << rep.to_text();
            return rep.ok() ? 0 : 2;
        }

        if (*solve_cmd) {
            InitialData phi = phi_from(phi_list, spec.n());
            SolveOptions so;
            so.nx = nx;
            so.nt = nt;
            so.allow_invalid = allow_invalid;
            PiField u = method == "marching" ? solve_marching(spec, phi, T, so) : solve_qpower(spec, phi, T, so);
            auto f = open_out(out_path);
            write_csv(f, u);
            out << residuals(spec, u, phi).to_text();
            return 0;
        }

        if (*trace_cmd) {
            if (j_index < 1 || j_index > spec.n()) throw Usage("--j must lie in 1.." + std::to_string(spec.n()));
            TraceOptions to;
            to.step = step;
            to.keep_path = true;
            CharExit e = trace(spec, j_index - 1, x0, t0, to);
            auto old = out.precision(17);
            out << "xi,omega\n";
            for (const auto& p : e.path) out << p.xi << "," << p.omega << "\n";
            out.precision(old);
            err.precision(17);
            err << "kind " << (e.kind == ExitKind::Lateral ? "lateral" : "initial-axis") << "\n"
                << "x_exit " << e.x_exit << "\n"
                << "tau " << e.tau << "\n"
                << "weight " << e.weight << "\n";
            return 0;
        }

        if (*qpower_cmd) {
            if (k_iter == 0) throw Usage("--k must be positive");
            require_valid(spec, allow_invalid);
            SolveOptions so;
            so.nx = nx;
            so.nt = nt;
            Grid g = make_grid(T, so);
            PiField w;
            InitialData phi;
            if (phi_list.empty()) {
                w = sample_Ch(spec, g, seed);
                phi = initial_slice(w);
            } else {
                phi = phi_from(phi_list, spec.n());
                w = constant_extension(phi, g);
            }
            QContext ctx(spec, phi, g);
            std::vector<PiField> its;
            q_power(ctx, w, k_iter, &its);
            out << "k";
            for (std::size_t j = 0; j < spec.n(); ++j) out << ",sup_u" << (j + 1);
            out << ",sup_change\n";
            auto old = out.precision(17);
            const PiField* prev = &w;
            for (std::size_t k = 0; k < its.size(); ++k) {
                out << (k + 1);
                for (std::size_t j = 0; j < spec.n(); ++j) {
                    double s = 0.0;
                    for (double v : its[k].values(j)) s = std::max(s, std::abs(v));
                    out << "," << s;
                }
                out << "," << sup_difference(its[k], *prev) << "\n";
                prev = &its[k];
            }
            out.precision(old);
            return 0;
        }

        if (*fts_cmd) {
            FtsOptions fo;
            fo.nx = nx;
            fo.trials = trials;
            fo.tol = tol;
            fo.seed = seed;
            fo.allow_invalid = allow_invalid;
            auto k = power_flag(k_flag, "k");
            FtsVerdict v = criterion == "C0" ? check_C0(spec, T, k, fo) : check_C00(spec, T, k, k_max, fo);
            out << v.to_text();
            return v.passed() ? 0 : 1;
        }

        if (*topt_cmd) {
            FtsOptions fo;
            fo.nx = nx;
            fo.trials = trials;
            fo.tol = tol;
            fo.seed = seed;
            ToptResult res = estimate_Topt(spec, T_max, bisect_tol, fo);
            out << res.to_text();
            return res.certified ? 0 : 1;
        }

        if (*inverse_cmd) {
            auto u0 = split_top_level(u0_list), ur = split_top_level(ur_list);
            auto d0 = u0_deriv.empty() ? std::vector<std::string>{} : split_top_level(u0_deriv);
            auto dr = ur_deriv.empty() ? std::vector<std::string>{} : split_top_level(ur_deriv);
            InverseOptions io;
            io.nx = inv_nx;
            io.nilpotency_T = T_known;
            InverseProblem problem{spec, r, StateData::from_text(u0, d0), StateData::from_text(ur, dr), io};
            SourceResult src = recover_source(problem);
            auto f = open_out(out_path);
            write_profile(f, src.f, "f");

            Profile reached = reconstruct_state(problem, src.f, r);
            Profile target = problem.ur.values(inv_nx);
            out.precision(10);
            out << "branch " << (src.r_below_T ? "r < T" : "r >= T") << "\n"
                << "T_bracket [" << src.T_lo << ", " << src.T << "]\n"
                << "n0 " << src.n0 << "\n"
                << "domain_defect_u0 " << domain_defect(spec, problem.u0.values(inv_nx)) << "\n"
                << "domain_defect_ur " << domain_defect(spec, target) << "\n"
                << "closure_l2 " << l2_norm(reached - target) << "\n";

            if (!states_path.empty()) {
                auto s = open_out(states_path);
                s << "x,t";
                for (std::size_t j = 0; j < spec.n(); ++j) s << ",u" << (j + 1);
                s << "\n";
                s.precision(17);
                for (int q = 0; q <= 4; ++q) {
                    double t = r * q / 4.0;
                    Profile u = q == 4 ? reached : reconstruct_state(problem, src.f, t);
                    for (std::size_t i = 0; i <= u.nx; ++i) {
                        s << static_cast<double>(i) / static_cast<double>(u.nx) << "," << t;
                        for (const auto& c : u.v) s << "," << c[i];
                        s << "\n";
                    }
                }
            }
            return 0;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv;
    argv.push_back("hyperprop");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace hyperprop
