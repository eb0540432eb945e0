#pragma once

// Grid-sampled carriers: fields on the strip [0,1] x [0,T], boundary traces
// on [0,T] and initial data on [0,1].

#include "hyperprop/expr.hpp"

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace hyperprop {

/// Uniform tensor grid on [0,1] x [0,T] with nx cells in x and nt in t.
struct Grid {
    double T = 1.0;
    std::size_t nx = 64;
    std::size_t nt = 64;

    /// nt = ceil(T*nx), so dt == dx whenever T*nx is an integer. With unit
    /// speeds the characteristics then pass through nodes.
    static Grid aligned(double T, std::size_t nx);

    double dx() const noexcept { return 1.0 / static_cast<double>(nx); }
    double dt() const noexcept { return T / static_cast<double>(nt); }
    double x(std::size_t i) const noexcept { return static_cast<double>(i) / static_cast<double>(nx); }
    double t(std::size_t n) const noexcept {
        return n == nt ? T : T * static_cast<double>(n) / static_cast<double>(nt);
    }
    std::size_t nodes() const noexcept { return (nx + 1) * (nt + 1); }
    std::size_t index(std::size_t i, std::size_t n) const noexcept { return n * (nx + 1) + i; }
};

/// Cell index and fractional offset of `s` on a uniform grid of `cells`
/// cells of width `h` starting at 0. Offsets within 1e-9 of a node snap to it.
std::pair<std::size_t, double> locate(double s, double h, std::size_t cells);

/// n-component continuous function on [0,1] x [0,T], stored at grid nodes
/// and evaluated by bilinear interpolation.
class PiField {
public:
    PiField() = default;
    PiField(const Grid& grid, std::size_t components);

    const Grid& grid() const noexcept { return grid_; }
    std::size_t components() const noexcept { return data_.size(); }

    double& at(std::size_t j, std::size_t i, std::size_t n) { return data_[j][grid_.index(i, n)]; }
    double at(std::size_t j, std::size_t i, std::size_t n) const { return data_[j][grid_.index(i, n)]; }
    std::span<double> values(std::size_t j) { return data_[j]; }
    std::span<const double> values(std::size_t j) const { return data_[j]; }

    /// Bilinear interpolation; exact at nodes.
    double eval(std::size_t j, double x, double t) const;
    /// Linear interpolation in t along the column x = x(i).
    double column_eval(std::size_t j, std::size_t i, double t) const;

    /// Values of component j on the row t = t(n).
    std::vector<double> row(std::size_t j, std::size_t n) const;

private:
    Grid grid_;
    std::vector<std::vector<double>> data_;
};

/// n-component function of t in [0,T], linearly interpolated.
class BoundaryTrace {
public:
    BoundaryTrace() = default;
    BoundaryTrace(double T, std::size_t nt, std::size_t components);

    double T() const noexcept { return T_; }
    std::size_t nt() const noexcept { return nt_; }
    std::size_t components() const noexcept { return data_.size(); }
    double t(std::size_t n) const noexcept { return n == nt_ ? T_ : T_ * static_cast<double>(n) / static_cast<double>(nt_); }

    double& at(std::size_t j, std::size_t n) { return data_[j][n]; }
    double at(std::size_t j, std::size_t n) const { return data_[j][n]; }
    double eval(std::size_t j, double t) const;

private:
    double T_ = 0.0;
    std::size_t nt_ = 0;
    std::vector<std::vector<double>> data_;
};

/// Initial data phi on [0,1]: either expressions in x (evaluated exactly)
/// or samples on a uniform x-grid (linearly interpolated).
class InitialData {
public:
    InitialData() = default;
    static InitialData from_exprs(std::vector<Expr> components);
    static InitialData from_samples(std::vector<std::vector<double>> samples);
    /// Zero data with n components.
    static InitialData zero(std::size_t n);

    std::size_t components() const noexcept;
    double value(std::size_t j, double x) const;
    /// Samples at the nodes of a uniform grid with nx cells.
    std::vector<std::vector<double>> sample(std::size_t nx) const;
    bool is_sampled() const noexcept { return exprs_.empty(); }

private:
    std::vector<Expr> exprs_;
    std::vector<std::vector<double>> samples_;
};

} // namespace hyperprop
