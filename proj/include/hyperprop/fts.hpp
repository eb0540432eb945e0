#pragma once

// Randomized checks of the finite-time stabilization criteria
//
//   (C0)   [Q^k w](., T) = 0                      for all w in C_h
//   (C00)  [Q^{kq} w](., kT) = 0,  k = 1..k_max    (autonomous problems)
//
// A passing check means no counterexample among the sampled witnesses; it
// is never a proof.

#include "hyperprop/qcalc.hpp"
#include "hyperprop/system.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace hyperprop {

enum class Criterion { C0, C00 };
enum class Outcome { NoCounterexample, Counterexample };

struct Witness {
    std::uint64_t seed = 0;  // sample_Ch seed of the failing trial
    std::size_t j = 0;       // component (0-based)
    double x = 0.0;
    double t = 0.0;
    double value = 0.0;
    std::size_t slice = 1;   // k of the failing slice kT (C00); 1 for C0
};

struct FtsVerdict {
    Criterion criterion = Criterion::C0;
    double T = 0.0;
    std::size_t k = 0;       // power used for C0
    std::size_t q = 0;       // base power for C00
    std::size_t k_max = 1;
    std::size_t trials = 0;
    double tolerance = 0.0;
    std::uint64_t seed = 0;
    std::size_t nx = 0;
    Outcome outcome = Outcome::NoCounterexample;
    std::optional<Witness> witness;

    bool passed() const noexcept { return outcome == Outcome::NoCounterexample; }
    std::string to_text() const;
};

struct FtsOptions {
    std::size_t nx = 64;
    std::size_t trials = 64;
    double tol = 1e-10;
    std::uint64_t seed = 1;
    QOptions q;
    SampleOptions sample;
    bool allow_invalid = false;
};

/// The grid used for a horizon: nt = ceil(T * nx).
Grid fts_grid(double T, std::size_t nx);

/// Trial i uses w = sample_Ch(seed + i) with phi = w(., 0); k = nullopt
/// selects the stabilization index. Refuses (InvalidSpec) a boundary map
/// with h(t, 0) != 0.
FtsVerdict check_C0(const SystemSpec& spec, double T, std::optional<std::size_t> k, const FtsOptions& opts = {});

/// q = nullopt selects the stabilization index on [0, T]. The field lives
/// on [0, k_max T] with k_max * nt(T) time cells so every kT is a grid row.
/// Refuses non-autonomous specs.
FtsVerdict check_C00(const SystemSpec& spec, double T, std::optional<std::size_t> q, std::size_t k_max,
                     const FtsOptions& opts = {});

/// Recomputes the witness value of a counterexample from its seed alone.
double replay(const SystemSpec& spec, const FtsVerdict& verdict, const FtsOptions& opts = {});

struct ToptResult {
    bool certified = false;  // false: check_C0 fails at T_max
    double T_lo = 0.0;       // largest failing probe (0 if none failed)
    double T_hi = 0.0;       // smallest passing probe
    std::size_t probes = 0;
    std::size_t nx = 0;

    std::string to_text() const;
};

/// Bisection for the least passing horizon with k = auto per probe. Probes
/// are restricted to multiples of 1/nx (nx raised to at least 1/bisect_tol)
/// so every probe grid has dt == dx. Assumes pass-monotonicity in T.
ToptResult estimate_Topt(const SystemSpec& spec, double T_max, double bisect_tol, const FtsOptions& opts = {});

struct NilpotentCertificate {
    std::size_t nu = 0;
    double T_bound = 0.0;
    FtsVerdict confirmation;
};

/// For a linear boundary with nilpotent |P|: T_bound = nu * (max crossing
/// time over start times in [0, T_bound]) by fixed-point iteration from
/// nu / speed_floor, confirmed by check_C0 at T_bound. nullopt when |P| is
/// not nilpotent.
std::optional<NilpotentCertificate> certify_linear_nilpotent(const SystemSpec& spec, const FtsOptions& opts = {});

} // namespace hyperprop
