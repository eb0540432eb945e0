#pragma once

// Propagation operators on grid fields:
//
//   [R u]_j(t)   = h_j(t, u_in(t))
//   [S v]_j(x,t) = c_j v_j(tau_j(x,t))
//   [Q u]_j(x,t) = [S R u]_j(x,t)      where the characteristic exits laterally,
//                  c_j phi_j(x_exit)   where it exits through t = 0.
//
// Characteristic exits depend only on (spec, grid), so a QContext traces
// every node once and shares the table among contexts that differ in phi.

#include "hyperprop/characteristics.hpp"
#include "hyperprop/grid.hpp"
#include "hyperprop/pifield.hpp"
#include "hyperprop/system.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace hyperprop {

struct QOptions {
    TraceOptions trace;
    double stabilization_tol = 1e-10;
    std::size_t witnesses = 8;
    std::uint64_t witness_seed = 0x51ab1e;
    SampleOptions sample;
};

struct NodeExit {
    double x_exit = 0.0;
    double tau = 0.0;
    double weight = 1.0;
    bool lateral = true;
};

/// Exit data for every (component, node) of a grid.
class ExitTable {
public:
    ExitTable(const SystemSpec& spec, const Grid& grid, const TraceOptions& opts);

    const NodeExit& at(std::size_t j, std::size_t i, std::size_t n) const {
        return exits_[j][grid_.index(i, n)];
    }
    const Grid& grid() const noexcept { return grid_; }

private:
    Grid grid_;
    std::vector<std::vector<NodeExit>> exits_;
};

class QContext {
public:
    QContext(SystemSpec spec, InitialData phi, const Grid& grid, QOptions opts = {});

    /// Same spec, grid and exit table with different initial data.
    QContext with_phi(InitialData phi) const;

    const SystemSpec& spec() const noexcept { return *spec_; }
    const InitialData& phi() const noexcept { return phi_; }
    const Grid& grid() const noexcept { return grid_; }
    const QOptions& options() const noexcept { return opts_; }
    const NodeExit& exit(std::size_t j, std::size_t i, std::size_t n) const { return table_->at(j, i, n); }

    /// Max deviation of cached exit data from fresh traces at `samples`
    /// random nodes.
    double verify_exit_cache(std::size_t samples = 32, std::uint64_t seed = 1) const;

    /// Column index of the in end of component j.
    std::size_t in_index(std::size_t j) const noexcept { return spec_->in_end(j) == 0.0 ? 0 : grid_.nx; }

    /// Stabilization index, computed once and shared across with_phi copies.
    std::size_t cached_stabilization_index() const;

private:
    struct Shared;

    std::shared_ptr<const SystemSpec> spec_;
    InitialData phi_;
    Grid grid_;
    QOptions opts_;
    std::shared_ptr<const ExitTable> table_;
    std::shared_ptr<Shared> shared_;
};

/// Upper bound ceil(T / (t_min - dt)) + 1 on the stabilization index. The
/// dt term accounts for linear interpolation reading the node after an
/// off-grid exit time.
std::size_t stabilization_bound(const QContext& ctx);

BoundaryTrace apply_R(const QContext& ctx, const PiField& u);
PiField apply_S(const QContext& ctx, const BoundaryTrace& v);
/// S R u with boundary values interpolated from u's in columns at the exit
/// times; initial-axis exits use v_j(0).
PiField apply_SR(const QContext& ctx, const PiField& u);
PiField apply_Q(const QContext& ctx, const PiField& u);

/// Q^k u. When `iterates` is given it receives Q^1 u .. Q^k u.
PiField q_power(const QContext& ctx, const PiField& u, std::size_t k, std::vector<PiField>* iterates = nullptr);

/// Least q with sup |Q^q w - Q^{q+1} w| <= tol for the context's seeded
/// witness fields w (each with phi = w(., 0)). Throws ConvergenceError if
/// the iteration has not settled by stabilization_bound(ctx).
std::size_t stabilization_index(const QContext& ctx);

/// sup over nodes of |a - b| over all components.
double sup_difference(const PiField& a, const PiField& b);

/// Initial data given by the bottom row of a field.
InitialData initial_slice(const PiField& w);

} // namespace hyperprop
