#include "hyperprop/grid.hpp"

#include "hyperprop/error.hpp"

#include <algorithm>
#include <cmath>

namespace hyperprop {

Grid Grid::aligned(double T, std::size_t nx) {
    if (!(T > 0)) throw Error("grid horizon must be positive");
    if (nx == 0) throw Error("grid needs at least one cell in x");
    double cells = T * static_cast<double>(nx);
    auto nt = static_cast<std::size_t>(std::ceil(cells - 1e-9));
    return Grid{T, nx, std::max<std::size_t>(1, nt)};
}

std::pair<std::size_t, double> locate(double s, double h, std::size_t cells) {
    double u = s / h;
    if (u <= 0.0) return {0, 0.0};
    if (u >= static_cast<double>(cells)) return {cells, 0.0};
    double base = std::floor(u);
    double frac = u - base;
    auto idx = static_cast<std::size_t>(base);
    if (frac < 1e-9) frac = 0.0;
    if (frac > 1.0 - 1e-9) {
        ++idx;
        frac = 0.0;
    }
    return {idx, frac};
}

PiField::PiField(const Grid& grid, std::size_t components)
    : grid_(grid), data_(components, std::vector<double>(grid.nodes(), 0.0)) {}

double PiField::eval(std::size_t j, double x, double t) const {
    auto [i, fx] = locate(x, grid_.dx(), grid_.nx);
    auto [n, ft] = locate(t, grid_.dt(), grid_.nt);
    std::size_t i1 = std::min(i + 1, grid_.nx);
    std::size_t n1 = std::min(n + 1, grid_.nt);
    double v00 = at(j, i, n), v10 = at(j, i1, n), v01 = at(j, i, n1), v11 = at(j, i1, n1);
    return (1 - fx) * (1 - ft) * v00 + fx * (1 - ft) * v10 + (1 - fx) * ft * v01 + fx * ft * v11;
}

double PiField::column_eval(std::size_t j, std::size_t i, double t) const {
    auto [n, ft] = locate(t, grid_.dt(), grid_.nt);
    if (ft == 0.0) return at(j, i, n);
    return (1 - ft) * at(j, i, n) + ft * at(j, i, n + 1);
}

std::vector<double> PiField::row(std::size_t j, std::size_t n) const {
    auto first = data_[j].begin() + static_cast<std::ptrdiff_t>(grid_.index(0, n));
    return std::vector<double>(first, first + static_cast<std::ptrdiff_t>(grid_.nx + 1));
}

BoundaryTrace::BoundaryTrace(double T, std::size_t nt, std::size_t components)
    : T_(T), nt_(nt), data_(components, std::vector<double>(nt + 1, 0.0)) {}

double BoundaryTrace::eval(std::size_t j, double t) const {
    auto [n, ft] = locate(t, T_ / static_cast<double>(nt_), nt_);
    if (ft == 0.0) return data_[j][n];
    return (1 - ft) * data_[j][n] + ft * data_[j][n + 1];
}

InitialData InitialData::from_exprs(std::vector<Expr> components) {
    InitialData d;
    d.exprs_ = std::move(components);
    return d;
}

InitialData InitialData::from_samples(std::vector<std::vector<double>> samples) {
    for (const auto& s : samples) {
        if (s.size() < 2) throw Error("sampled initial data needs at least two nodes per component");
        if (s.size() != samples.front().size()) throw Error("sampled initial data components differ in length");
        for (double v : s)
            if (!std::isfinite(v)) throw Error("initial data must be finite");
    }
    InitialData d;
    d.samples_ = std::move(samples);
    return d;
}

InitialData InitialData::zero(std::size_t n) {
    return from_samples(std::vector<std::vector<double>>(n, std::vector<double>(2, 0.0)));
}

std::size_t InitialData::components() const noexcept {
    return exprs_.empty() ? samples_.size() : exprs_.size();
}

double InitialData::value(std::size_t j, double x) const {
    if (!exprs_.empty()) {
        double v = exprs_[j].eval(std::span<const double>(&x, 1));
        if (!std::isfinite(v)) throw DomainError("initial data is not finite at x = " + std::to_string(x));
        return v;
    }
    const auto& s = samples_[j];
    std::size_t cells = s.size() - 1;
    auto [i, f] = locate(x, 1.0 / static_cast<double>(cells), cells);
    if (f == 0.0) return s[i];
    return (1 - f) * s[i] + f * s[i + 1];
}

std::vector<std::vector<double>> InitialData::sample(std::size_t nx) const {
    std::vector<std::vector<double>> out(components(), std::vector<double>(nx + 1));
    for (std::size_t j = 0; j < components(); ++j)
        for (std::size_t i = 0; i <= nx; ++i)
            out[j][i] = value(j, static_cast<double>(i) / static_cast<double>(nx));
    return out;
}

} // namespace hyperprop
