#include "hyperprop/system.hpp"

#include "hyperprop/characteristics.hpp"
#include "hyperprop/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace hyperprop {

namespace {

std::string point_text(const char* a, double va, const char* b, double vb) {
    std::ostringstream os;
    os.precision(6);
    os << "(" << a << "=" << va << ", " << b << "=" << vb << ")";
    return os.str();
}

std::string status_text(CheckStatus s) {
    switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "FAIL";
    case CheckStatus::Skipped: return "skipped";
    }
    return "?";
}

// Records a violation if it is worse than what the check already holds.
void note(ValidationCheck& c, double violation, const std::string& where) {
    if (violation > c.worst) {
        c.worst = violation;
        c.location = where;
        c.status = CheckStatus::Fail;
    }
}

} // namespace

SystemSpec::SystemSpec(std::size_t n, std::size_t m, std::vector<Expr> speeds, std::vector<Expr> dampings,
                       BoundaryMap boundary, bool autonomous, double speed_floor, ValidationBox box)
    : n_(n), m_(m), speeds_(std::move(speeds)), dampings_(std::move(dampings)), boundary_(std::move(boundary)),
      autonomous_(autonomous), speed_floor_(speed_floor), box_(box) {
    if (n_ == 0) throw InvalidSpec("system needs at least one component");
    if (m_ > n_) throw InvalidSpec("m must lie in [0, n]");
    if (speeds_.size() != n_ || dampings_.size() != n_)
        throw InvalidSpec("expected " + std::to_string(n_) + " speeds and dampings");
    if (!(speed_floor_ > 0)) throw InvalidSpec("speed floor must be positive");
    if (!(box_.T_max > 0) || !(box_.xi_radius >= 0)) throw InvalidSpec("validation box must be non-empty");
    for (std::size_t j = 0; j < n_; ++j) {
        if (speeds_[j].env() != coefficient_env() || dampings_[j].env() != coefficient_env())
            throw InvalidSpec("coefficient expressions must be parsed over (x, t)");
    }
    if (auto* lin = std::get_if<LinearBoundary>(&boundary_)) {
        if (static_cast<std::size_t>(lin->P.rows()) != n_ || static_cast<std::size_t>(lin->P.cols()) != n_)
            throw InvalidSpec("boundary matrix must be n x n");
    } else {
        const auto& h = std::get<NonlinearBoundary>(boundary_).h;
        if (h.size() != n_) throw InvalidSpec("boundary map needs n components");
        for (const auto& e : h)
            if (e.env() != boundary_env(n_)) throw InvalidSpec("boundary expressions must be parsed over (t, xi1..xin)");
    }
}

std::vector<std::string> SystemSpec::coefficient_env() { return {"x", "t"}; }

std::vector<std::string> SystemSpec::boundary_env(std::size_t n) {
    std::vector<std::string> env{"t"};
    for (std::size_t k = 1; k <= n; ++k) env.push_back("xi" + std::to_string(k));
    return env;
}

namespace {

std::pair<std::vector<Expr>, std::vector<Expr>> parse_coefficients(const std::vector<std::string>& speeds,
                                                                   const std::vector<std::string>& dampings) {
    if (speeds.size() != dampings.size()) throw InvalidSpec("speeds and dampings differ in length");
    std::vector<Expr> a, b;
    for (const auto& s : speeds) a.push_back(parse(s, SystemSpec::coefficient_env()));
    for (const auto& s : dampings) b.push_back(parse(s, SystemSpec::coefficient_env()));
    return {std::move(a), std::move(b)};
}

} // namespace

SystemSpec SystemSpec::from_text(std::size_t m, const std::vector<std::string>& speeds,
                                 const std::vector<std::string>& dampings, const std::vector<std::string>& h,
                                 bool autonomous, double speed_floor, ValidationBox box) {
    auto [a, b] = parse_coefficients(speeds, dampings);
    std::size_t n = a.size();
    NonlinearBoundary nb;
    for (const auto& s : h) nb.h.push_back(parse(s, boundary_env(n)));
    return SystemSpec(n, m, std::move(a), std::move(b), std::move(nb), autonomous, speed_floor, box);
}

SystemSpec SystemSpec::from_text(std::size_t m, const std::vector<std::string>& speeds,
                                 const std::vector<std::string>& dampings, Eigen::MatrixXd P, bool autonomous,
                                 double speed_floor, ValidationBox box) {
    auto [a, b] = parse_coefficients(speeds, dampings);
    std::size_t n = a.size();
    return SystemSpec(n, m, std::move(a), std::move(b), LinearBoundary{std::move(P)}, autonomous, speed_floor, box);
}

double SystemSpec::speed(std::size_t j, double x, double t) const {
    const double xt[2] = {x, t};
    return speeds_[j].eval(xt);
}

double SystemSpec::damping(std::size_t j, double x, double t) const {
    const double xt[2] = {x, t};
    return dampings_[j].eval(xt);
}

const Eigen::MatrixXd& SystemSpec::matrix() const {
    if (auto* lin = std::get_if<LinearBoundary>(&boundary_)) return lin->P;
    throw InvalidSpec("boundary map is not linear");
}

double SystemSpec::boundary_value(std::size_t j, double t, std::span<const double> xi) const {
    if (auto* lin = std::get_if<LinearBoundary>(&boundary_)) {
        double s = 0.0;
        for (std::size_t k = 0; k < n_; ++k) s += lin->P(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) * xi[k];
        return s;
    }
    const auto& h = std::get<NonlinearBoundary>(boundary_).h;
    double buf[17];
    std::vector<double> heap;
    double* args = buf;
    if (n_ + 1 > 17) {
        heap.resize(n_ + 1);
        args = heap.data();
    }
    args[0] = t;
    std::copy(xi.begin(), xi.begin() + static_cast<std::ptrdiff_t>(n_), args + 1);
    return h[j].eval(std::span<const double>(args, n_ + 1));
}

std::vector<double> SystemSpec::boundary_map(double t, std::span<const double> xi) const {
    std::vector<double> out(n_);
    for (std::size_t j = 0; j < n_; ++j) out[j] = boundary_value(j, t, xi);
    return out;
}

bool ValidationReport::ok() const {
    return std::none_of(checks.begin(), checks.end(), [](const auto& c) { return c.status == CheckStatus::Fail; });
}

const ValidationCheck* ValidationReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

std::string ValidationReport::to_text() const {
    std::ostringstream os;
    os.precision(6);
    for (const auto& c : checks) {
        os << c.name << ": " << status_text(c.status);
        if (c.status == CheckStatus::Fail) os << " (worst violation " << c.worst << " at " << c.location << ")";
        os << "\n";
    }
    os << "gradient_sup: " << gradient_sup << "\n";
    os << "overall: " << (ok() ? "pass" : "FAIL") << "\n";
    return os.str();
}

ValidationReport validate(const SystemSpec& spec, const ValidationOptions& opts) {
    ValidationReport report;
    const std::size_t n = spec.n();
    const double a = spec.speed_floor();
    const double Tmax = spec.box().T_max;
    auto t_at = [&](std::size_t k) { return Tmax * static_cast<double>(k) / static_cast<double>(opts.nt); };
    auto x_at = [&](std::size_t i) { return static_cast<double>(i) / static_cast<double>(opts.nx); };

    // Any expression fault while sampling fails the enclosing check.
    auto guarded = [](ValidationCheck& c, const std::function<void()>& body) {
        try {
            body();
        } catch (const DomainError& e) {
            c.status = CheckStatus::Fail;
            c.worst = std::numeric_limits<double>::infinity();
            c.location = e.what();
        }
    };

    ValidationCheck speed{"speed_sign", CheckStatus::Pass, 0.0, ""};
    guarded(speed, [&] {
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k <= opts.nt; ++k)
                for (std::size_t i = 0; i <= opts.nx; ++i) {
                    double x = x_at(i), t = t_at(k);
                    double aj = spec.speed(j, x, t);
                    double violation = spec.rightward(j) ? a - aj : aj + a;
                    if (violation > 0 || !std::isfinite(aj))
                        note(speed, std::isfinite(aj) ? violation : std::numeric_limits<double>::infinity(),
                             "component " + std::to_string(j + 1) + " " + point_text("x", x, "t", t));
                }
    });
    report.checks.push_back(speed);

    ValidationCheck homog{"homogeneity", CheckStatus::Pass, 0.0, ""};
    if (!spec.is_linear()) {
        guarded(homog, [&] {
            std::vector<double> zero(n, 0.0);
            for (std::size_t k = 0; k <= opts.nt; ++k) {
                double t = t_at(k);
                for (std::size_t j = 0; j < n; ++j) {
                    double v = std::abs(spec.boundary_value(j, t, zero));
                    if (v > opts.tolerance)
                        note(homog, v, "h_" + std::to_string(j + 1) + "(t=" + std::to_string(t) + ", 0)");
                }
            }
        });
    }
    report.checks.push_back(homog);

    // Points of the xi box: xi_points per axis on [-R, R].
    std::vector<std::vector<double>> xi_points;
    {
        const std::size_t p = std::max<std::size_t>(opts.xi_points, 1);
        std::size_t total = 1;
        for (std::size_t k = 0; k < n; ++k) total *= p;
        const double R = spec.box().xi_radius;
        for (std::size_t idx = 0; idx < total; ++idx) {
            std::vector<double> xi(n);
            std::size_t r = idx;
            for (std::size_t k = 0; k < n; ++k) {
                std::size_t c = r % p;
                r /= p;
                xi[k] = p == 1 ? 0.0 : -R + 2 * R * static_cast<double>(c) / static_cast<double>(p - 1);
            }
            xi_points.push_back(std::move(xi));
        }
    }

    ValidationCheck auton{"autonomy", CheckStatus::Skipped, 0.0, ""};
    if (spec.autonomous()) {
        auton.status = CheckStatus::Pass;
        guarded(auton, [&] {
            const double t1 = 0.0, t2 = 0.6180339887498949 * Tmax;
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t i = 0; i <= opts.nx; ++i) {
                    double x = x_at(i);
                    double da = std::abs(spec.speed(j, x, t1) - spec.speed(j, x, t2));
                    double db = std::abs(spec.damping(j, x, t1) - spec.damping(j, x, t2));
                    if (da > opts.tolerance) note(auton, da, "a_" + std::to_string(j + 1) + " at x=" + std::to_string(x));
                    if (db > opts.tolerance) note(auton, db, "b_" + std::to_string(j + 1) + " at x=" + std::to_string(x));
                }
            if (!spec.is_linear()) {
                for (const auto& xi : xi_points)
                    for (std::size_t j = 0; j < n; ++j) {
                        double d = std::abs(spec.boundary_value(j, t1, xi) - spec.boundary_value(j, t2, xi));
                        if (d > opts.tolerance) note(auton, d, "h_" + std::to_string(j + 1) + " at a sampled xi");
                    }
            }
        });
    }
    report.checks.push_back(auton);

    ValidationCheck grad{"gradient_bound", CheckStatus::Pass, 0.0, ""};
    guarded(grad, [&] {
        if (spec.is_linear()) {
            report.gradient_sup = spec.matrix().cwiseAbs().maxCoeff();
            return;
        }
        const double hstep = opts.fd_step;
        double sup = 0.0;
        for (std::size_t k = 0; k <= opts.nt; ++k) {
            double t = t_at(k);
            for (const auto& xi0 : xi_points) {
                std::vector<double> xi = xi0;
                for (std::size_t c = 0; c < n; ++c) {
                    xi[c] = xi0[c] + hstep;
                    auto up = spec.boundary_map(t, xi);
                    xi[c] = xi0[c] - hstep;
                    auto dn = spec.boundary_map(t, xi);
                    xi[c] = xi0[c];
                    for (std::size_t j = 0; j < n; ++j) sup = std::max(sup, std::abs(up[j] - dn[j]) / (2 * hstep));
                }
            }
        }
        report.gradient_sup = sup;
        if (!std::isfinite(sup)) note(grad, std::numeric_limits<double>::infinity(), "non-finite gradient sample");
    });
    report.checks.push_back(grad);
    return report;
}

void require_valid(const SystemSpec& spec, bool allow_invalid) {
    if (allow_invalid) return;
    auto report = validate(spec);
    if (!report.ok()) throw InvalidSpec("system failed validation:\n" + report.to_text());
}

std::vector<double> compatibility_defect(const SystemSpec& spec, const InitialData& phi) {
    const std::size_t n = spec.n();
    if (phi.components() != n) throw InvalidSpec("initial data has the wrong number of components");
    std::vector<double> out(n), in(n);
    for (std::size_t j = 0; j < n; ++j) {
        out[j] = phi.value(j, spec.out_end(j));
        in[j] = phi.value(j, spec.in_end(j));
    }
    auto h = spec.boundary_map(0.0, in);
    for (std::size_t j = 0; j < n; ++j) out[j] -= h[j];
    return out;
}

std::optional<std::size_t> nilpotency_index(const Eigen::MatrixXd& P) {
    const auto n = static_cast<std::size_t>(P.rows());
    // Edge k -> j whenever u_out_j depends on u_in_k.
    std::vector<std::vector<std::size_t>> succ(n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
            if (std::abs(P(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k))) > 0) succ[k].push_back(j);

    enum class Mark { White, Grey, Black };
    std::vector<Mark> mark(n, Mark::White);
    std::vector<std::size_t> longest(n, 0);  // edges on the longest path leaving each vertex
    bool cyclic = false;

    std::function<void(std::size_t)> visit = [&](std::size_t v) {
        mark[v] = Mark::Grey;
        for (std::size_t w : succ[v]) {
            if (mark[w] == Mark::Grey) {
                cyclic = true;
                return;
            }
            if (mark[w] == Mark::White) visit(w);
            if (cyclic) return;
            longest[v] = std::max(longest[v], longest[w] + 1);
        }
        mark[v] = Mark::Black;
    };
    for (std::size_t v = 0; v < n && !cyclic; ++v)
        if (mark[v] == Mark::White) visit(v);
    if (cyclic) return std::nullopt;
    std::size_t path = n == 0 ? 0 : *std::max_element(longest.begin(), longest.end());
    return path + 1;
}

CrossingTimes crossing_times(const SystemSpec& spec, double T, std::size_t samples, double step) {
    if (samples < 2) samples = 2;
    CrossingTimes out;
    out.per_component.resize(spec.n());
    out.t_min = std::numeric_limits<double>::infinity();
    out.t_max = 0.0;
    for (std::size_t j = 0; j < spec.n(); ++j) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        std::size_t count = spec.speed_is_constant(j) || spec.autonomous() ? 1 : samples;
        for (std::size_t k = 0; k < count; ++k) {
            double s = count == 1 ? 0.0 : T * static_cast<double>(k) / static_cast<double>(count - 1);
            auto path = forward_path(spec, j, s, step);
            for (const auto& p : path) {
                double aj = std::abs(spec.speed(j, p.xi, p.omega));
                if (aj < spec.speed_floor() * (1 - 1e-12))
                    throw InvalidSpec("crossing-time quadrature failed: |a_" + std::to_string(j + 1) + "| = " +
                                      std::to_string(aj) + " below the speed floor at " +
                                      point_text("x", p.xi, "t", p.omega));
            }
            double d = path.back().omega - s;
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
        out.per_component[j] = {lo, hi};
        out.t_min = std::min(out.t_min, lo);
        out.t_max = std::max(out.t_max, hi);
    }
    return out;
}

} // namespace hyperprop
