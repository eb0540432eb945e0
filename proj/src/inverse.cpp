#include "hyperprop/inverse.hpp"

#include "hyperprop/error.hpp"
#include "hyperprop/pifield.hpp"
#include "hyperprop/qcalc.hpp"

#include <algorithm>
#include <cmath>

namespace hyperprop {

Profile Profile::zero(std::size_t n, std::size_t nx) {
    return Profile{nx, std::vector<std::vector<double>>(n, std::vector<double>(nx + 1, 0.0))};
}

namespace {

void same_shape(const Profile& a, const Profile& b) {
    if (a.nx != b.nx || a.components() != b.components()) throw Error("profiles differ in shape");
}

double trapezoid_sq(const Profile& p) {
    double sum = 0.0;
    for (const auto& c : p.v)
        for (std::size_t i = 0; i <= p.nx; ++i) sum += (i == 0 || i == p.nx ? 0.5 : 1.0) * c[i] * c[i];
    return sum / static_cast<double>(p.nx);
}

} // namespace

Profile operator+(const Profile& a, const Profile& b) {
    same_shape(a, b);
    Profile r = a;
    for (std::size_t j = 0; j < r.components(); ++j)
        for (std::size_t i = 0; i <= r.nx; ++i) r.v[j][i] += b.v[j][i];
    return r;
}

Profile operator-(const Profile& a, const Profile& b) { return a + (-1.0) * b; }

Profile operator*(double s, const Profile& a) {
    Profile r = a;
    for (auto& c : r.v)
        for (double& x : c) x *= s;
    return r;
}

Profile row_profile(const PiField& u, std::size_t n) {
    Profile p{u.grid().nx, {}};
    for (std::size_t j = 0; j < u.components(); ++j) p.v.push_back(u.row(j, n));
    return p;
}

double l2_norm(const Profile& p) { return std::sqrt(trapezoid_sq(p)); }

double sup_norm(const Profile& p) {
    double s = 0.0;
    for (const auto& c : p.v)
        for (double x : c) s = std::max(s, std::abs(x));
    return s;
}

Profile finite_difference(const Profile& p) {
    const std::size_t N = p.nx;
    if (N < 4) throw Error("finite differences need at least 4 cells");
    const double h12 = 12.0 / static_cast<double>(N);
    Profile d = p;
    for (std::size_t j = 0; j < p.components(); ++j) {
        const auto& f = p.v[j];
        auto& g = d.v[j];
        for (std::size_t i = 2; i + 2 <= N; ++i) g[i] = (-f[i + 2] + 8 * f[i + 1] - 8 * f[i - 1] + f[i - 2]) / h12;
        g[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / h12;
        g[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / h12;
        g[N] = (25 * f[N] - 48 * f[N - 1] + 36 * f[N - 2] - 16 * f[N - 3] + 3 * f[N - 4]) / h12;
        g[N - 1] = (3 * f[N] + 10 * f[N - 1] - 18 * f[N - 2] + 6 * f[N - 3] - f[N - 4]) / h12;
    }
    return d;
}

StateData StateData::from_exprs(std::vector<Expr> values, std::vector<Expr> derivatives) {
    if (!derivatives.empty() && derivatives.size() != values.size())
        throw Error("derivative expressions must match the value expressions");
    StateData s;
    s.values_ = std::move(values);
    s.derivs_ = std::move(derivatives);
    return s;
}

StateData StateData::from_text(const std::vector<std::string>& values, const std::vector<std::string>& derivatives) {
    std::vector<Expr> v, d;
    for (const auto& e : values) v.push_back(parse(e, {"x"}));
    for (const auto& e : derivatives) d.push_back(parse(e, {"x"}));
    return from_exprs(std::move(v), std::move(d));
}

StateData StateData::from_profile(Profile p) {
    StateData s;
    s.samples_ = std::move(p);
    return s;
}

std::size_t StateData::components() const noexcept { return samples_ ? samples_->components() : values_.size(); }

Profile StateData::values(std::size_t nx) const {
    if (samples_) {
        if (samples_->nx != nx) throw Error("sampled state has " + std::to_string(samples_->nx) + " cells, not " +
                                            std::to_string(nx));
        return *samples_;
    }
    Profile p = Profile::zero(values_.size(), nx);
    for (std::size_t j = 0; j < values_.size(); ++j)
        for (std::size_t i = 0; i <= nx; ++i)
            p.v[j][i] = values_[j].eval(std::array{static_cast<double>(i) / static_cast<double>(nx)});
    return p;
}

Profile StateData::derivative(std::size_t nx) const {
    if (samples_) return finite_difference(values(nx));
    Profile p = Profile::zero(values_.size(), nx);
    constexpr double h = 1e-3;
    for (std::size_t j = 0; j < values_.size(); ++j) {
        auto f = [&](double x) { return values_[j].eval(std::array{x}); };
        for (std::size_t i = 0; i <= nx; ++i) {
            double x = static_cast<double>(i) / static_cast<double>(nx);
            double d;
            if (!derivs_.empty()) {
                d = derivs_[j].eval(std::array{x});
            } else if (x - 2 * h >= 0.0 && x + 2 * h <= 1.0) {
                d = (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
            } else if (x < 0.5) {
                d = (-25 * f(x) + 48 * f(x + h) - 36 * f(x + 2 * h) + 16 * f(x + 3 * h) - 3 * f(x + 4 * h)) / (12 * h);
            } else {
                d = (25 * f(x) - 48 * f(x - h) + 36 * f(x - 2 * h) - 16 * f(x - 3 * h) + 3 * f(x - 4 * h)) / (12 * h);
            }
            p.v[j][i] = d;
        }
    }
    return p;
}

double domain_defect(const SystemSpec& spec, const Profile& v) {
    auto d = compatibility_defect(spec, v.as_initial_data());
    double worst = 0.0;
    for (double x : d) worst = std::max(worst, std::abs(x));
    return worst;
}

PiField semigroup_orbit(const SystemSpec& spec, const Profile& v, double horizon, std::size_t nt,
                        const InverseOptions& opts) {
    if (v.components() != spec.n()) throw Error("profile has the wrong number of components");
    Grid g{horizon, v.nx, std::max<std::size_t>(nt, 1)};
    QContext ctx(spec, v.as_initial_data(), g, opts.fts.q);
    PiField w = constant_extension(ctx.phi(), g);
    return q_power(ctx, w, ctx.cached_stabilization_index());
}

namespace {

std::size_t cells_for(double t, std::size_t nx) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(t * static_cast<double>(nx) - 1e-9)));
}

} // namespace

Profile semigroup_apply(const SystemSpec& spec, double t, const Profile& v, const InverseOptions& opts) {
    if (!(t >= 0)) throw Error("semigroup time must be nonnegative");
    require_valid(spec, false);
    double defect = domain_defect(spec, v);
    if (defect > opts.domain_tol)
        throw IncompatibleData("data outside D(A): |v_out - P v_in| = " + std::to_string(defect));
    if (t == 0.0) return v;
    Profile c{v.nx, correct_compatibility(spec, v.v, 0.25)};
    PiField orbit = semigroup_orbit(spec, c, t, cells_for(t, v.nx), opts);
    return row_profile(orbit, orbit.grid().nt);
}

NilpotencyTime nilpotency_time(const SystemSpec& spec, const InverseOptions& opts) {
    auto cert = certify_linear_nilpotent(spec, opts.fts);
    if (!cert) throw InvalidSpec("|P| is not nilpotent");
    ToptResult topt = estimate_Topt(spec, cert->T_bound, opts.bracket, opts.fts);
    if (!topt.certified)
        throw InvalidSpec("no vanishing observed at the certified bound T = " + std::to_string(cert->T_bound));
    return {cert->nu, cert->T_bound, topt.T_lo, topt.T_hi};
}

Profile apply_generator(const SystemSpec& spec, const Profile& values, const Profile& derivative) {
    same_shape(values, derivative);
    if (values.components() != spec.n()) throw Error("profile has the wrong number of components");
    Profile out = values;
    for (std::size_t j = 0; j < spec.n(); ++j)
        for (std::size_t i = 0; i <= values.nx; ++i) {
            double x = static_cast<double>(i) / static_cast<double>(values.nx);
            out.v[j][i] = -spec.speed(j, x, 0.0) * derivative.v[j][i] - spec.damping(j, x, 0.0) * values.v[j][i];
        }
    return out;
}

Profile apply_generator(const SystemSpec& spec, const StateData& v, std::size_t nx, double tol) {
    Profile vals = v.values(nx);
    double defect = domain_defect(spec, vals);
    if (defect > tol) throw IncompatibleData("data outside D(A): |v_out - P v_in| = " + std::to_string(defect));
    return apply_generator(spec, vals, v.derivative(nx));
}

void InverseProblem::check() const {
    if (!spec.autonomous()) throw InvalidSpec("the inverse problem needs an autonomous specification");
    if (!spec.is_linear()) throw InvalidSpec("the inverse problem needs a linear boundary u_out = P u_in");
    if (!nilpotency_index(spec.matrix())) throw InvalidSpec("|P| is not nilpotent");
    if (!(r > 0)) throw Error("r must be positive");
    if (u0.components() != spec.n() || ur.components() != spec.n())
        throw Error("u0 and ur need one component per equation");
    require_valid(spec, false);
    for (const auto* s : {&u0, &ur}) {
        double d = domain_defect(spec, s->values(opts.nx));
        if (d > opts.domain_tol)
            throw IncompatibleData(std::string(s == &u0 ? "u0" : "ur") +
                                   " lies outside D(A): |v_out - P v_in| = " + std::to_string(d));
    }
}

SourceResult recover_source(const InverseProblem& problem) {
    problem.check();
    const auto& spec = problem.spec;
    const std::size_t nx = problem.opts.nx;
    SourceResult res;
    if (problem.opts.nilpotency_T) {
        res.T = res.T_lo = *problem.opts.nilpotency_T;
    } else {
        NilpotencyTime nt = nilpotency_time(spec, problem.opts);
        res.T = nt.T_hi;
        res.T_lo = nt.T_lo;
    }

    Profile ur = problem.ur.values(nx);
    res.f = -1.0 * apply_generator(spec, ur, problem.ur.derivative(nx));
    if (problem.r >= res.T) return res;

    res.r_below_T = true;
    res.n0 = static_cast<std::size_t>(std::ceil(res.T / problem.r - 1e-9)) - 1;
    if (res.n0 == 0) return res;
    Profile d = problem.u0.values(nx) - ur;
    Profile dd = problem.u0.derivative(nx) - problem.ur.derivative(nx);
    Profile g = apply_generator(spec, d, dd);
    const std::size_t per = cells_for(problem.r, nx);
    PiField orbit = semigroup_orbit(spec, g, problem.r * static_cast<double>(res.n0), per * res.n0, problem.opts);
    for (std::size_t k = 1; k <= res.n0; ++k) res.f = res.f + row_profile(orbit, k * per);
    return res;
}

Profile duhamel(const SystemSpec& spec, const Profile& u0, const Profile& f, double t, const InverseOptions& opts) {
    if (!(t >= 0)) throw Error("time must be nonnegative");
    if (t == 0.0) return u0;
    const std::size_t N = std::max({cells_for(t, u0.nx), cells_for(64.0 * t, 1), std::size_t{2}});
    // The free part on its own dt = dx grid keeps characteristic feet on nodes.
    PiField free = semigroup_orbit(spec, u0, t, cells_for(t, u0.nx), opts);
    PiField forced = semigroup_orbit(spec, f, t, N, opts);

    std::vector<double> w(N + 1, 0.0);
    const double h = t / static_cast<double>(N);
    std::size_t simpson = N % 2 == 0 ? N : N - 3;
    for (std::size_t k = 0; k + 2 <= simpson; k += 2) {
        w[k] += h / 3;
        w[k + 1] += 4 * h / 3;
        w[k + 2] += h / 3;
    }
    if (simpson != N) {
        const double c = 3 * h / 8;
        w[simpson] += c;
        w[simpson + 1] += 3 * c;
        w[simpson + 2] += 3 * c;
        w[simpson + 3] += c;
    }
    Profile out = row_profile(free, free.grid().nt);
    for (std::size_t k = 0; k <= N; ++k) out = out + w[k] * row_profile(forced, k);
    return out;
}

Profile reconstruct_state(const InverseProblem& problem, const Profile& f, double t) {
    if (!(t >= 0 && t <= problem.r + 1e-12)) throw Error("reconstruction time must lie in [0, r]");
    return duhamel(problem.spec, problem.u0.values(problem.opts.nx), f, t, problem.opts);
}

} // namespace hyperprop
