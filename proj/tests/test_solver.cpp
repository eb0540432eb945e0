#include "support.hpp"

#include "hyperprop/error.hpp"

#include <gtest/gtest.h>

using namespace hyperprop;
using namespace hptest;

namespace {

const char* kBump1 = "bump(0.5, 0.2, x)";
const char* kBump2 = "bump(0.4, 0.2, x)";

SolveOptions with_nx(std::size_t nx) {
    SolveOptions o;
    o.nx = nx;
    return o;
}

} // namespace

TEST(SolveQpower, ZeroDataGivesZero) {
    for (const auto& c : solver_matrix()) {
        if (c.allow_invalid) continue;
        PiField u = solve_qpower(c.spec, InitialData::zero(c.spec.n()), std::min(c.T, 2.0), solve_options(c));
        EXPECT_EQ(sup_norm(u), 0.0) << c.name;
    }
}

TEST(SolveQpower, ExactTransportWithAbsorbingEnds) {
    const std::size_t nx = 40;
    PiField u = solve_qpower(absorbing_spec(), exprs({kBump1, kBump2}), 1.5, with_nx(nx));
    const Grid& g = u.grid();
    for (std::size_t k = 0; k <= g.nt; ++k)
        for (std::size_t i = 0; i <= g.nx; ++i) {
            double x = g.x(i), t = g.t(k);
            double u1 = x > t ? bump(0.5, 0.2, x - t) : 0.0;
            double u2 = x + t < 1 ? bump(0.4, 0.2, x + t) : 0.0;
            EXPECT_NEAR(u.at(0, i, k), u1, 1e-12);
            EXPECT_NEAR(u.at(1, i, k), u2, 1e-12);
        }
}

TEST(SolveQpower, Sec32SufficientDataVanishes) {
    // (C0) holds at 2.25 with k = 1 and h(t, 0) = 0 keeps the zero state.
    SystemSpec spec = sec32_spec(Sec32Variant::Suf2);
    for (std::uint64_t seed : {4u, 9u}) {
        PiField u = solve_qpower(spec, seeded_phi(spec, 32, seed), 5.0, with_nx(32));
        EXPECT_GT(sup_norm(u, 0.0, 1.0), 0.0);
        EXPECT_LE(sup_norm(u, 2.25, 5.0), 1e-12);
    }
}

TEST(SolveQpower, IncompatibleDataThrows) {
    EXPECT_THROW(solve_qpower(swap_spec(), exprs({"1", "2"}), 1.0), IncompatibleData);
    EXPECT_NO_THROW(solve_qpower(swap_spec(), exprs({"1", "1"}), 1.0, with_nx(8)));
}

TEST(SolveQpower, InvalidSpecRefusedUnlessAllowed) {
    EXPECT_THROW(solve_qpower(sec33_spec(1.0), InitialData::zero(2), 5.0, with_nx(8)), InvalidSpec);
    SolveOptions o = with_nx(8);
    o.allow_invalid = true;
    EXPECT_NO_THROW(solve_qpower(sec33_spec(1.0), InitialData::zero(2), 5.0, o));
}

TEST(SolveMarching, AgreesWithQpower) {
    for (const auto& c : solver_matrix()) {
        if (c.name.find("variable") != std::string::npos) continue;  // covered by the acceptance run
        InitialData phi = seeded_phi(c.spec, c.nx, 21);
        SolveOptions o = solve_options(c);
        double T = std::min(c.T, 3.0);
        PiField a = solve_qpower(c.spec, phi, T, o);
        PiField b = solve_marching(c.spec, phi, T, o);
        EXPECT_LE(sup_difference(a, b), 1e-9) << c.name;
    }
}

TEST(SolveMarching, Sec33ZeroDataLeavesZero) {
    SolveOptions o = with_nx(32);
    o.allow_invalid = true;
    PiField u = solve_marching(sec33_spec(1.0), InitialData::zero(2), 5.0, o);
    EXPECT_EQ(sup_norm(u, 0.0, 4.0), 0.0);
    // g(t) = exp(-1/(t - 4)) switches on after t = 4.
    EXPECT_GT(sup_norm(u, 4.5, 5.0), 0.1);
}

TEST(SolveMarching, RejectsStepAboveCrossingTime) {
    SystemSpec fast = SystemSpec::from_text(1, {"2", "-2"}, {"0", "0"}, Eigen::MatrixXd::Zero(2, 2), true, 2.0);
    SolveOptions o = with_nx(4);
    o.nt = 2;  // dt = 0.5 = crossing time
    EXPECT_THROW(solve_marching(fast, InitialData::zero(2), 1.0, o), Error);
    o.nt = 4;
    EXPECT_NO_THROW(solve_marching(fast, InitialData::zero(2), 1.0, o));
}

TEST(SolveQpower, SwapIsTwoPeriodic) {
    const std::size_t nx = 24;
    InitialData phi = seeded_phi(swap_spec(), nx, 3);
    PiField u = solve_qpower(swap_spec(), phi, 5.0, with_nx(nx));
    const Grid& g = u.grid();
    const std::size_t shift = 2 * nx;
    for (std::size_t k = 0; k + shift <= g.nt; ++k)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t i = 0; i <= g.nx; ++i) EXPECT_NEAR(u.at(j, i, k + shift), u.at(j, i, k), 1e-12);
}

TEST(SolveQpower, Deterministic) {
    auto c = solver_matrix()[10];
    InitialData phi = seeded_phi(c.spec, c.nx, 8);
    PiField a = solve_qpower(c.spec, phi, c.T, solve_options(c));
    PiField b = solve_qpower(c.spec, phi, c.T, solve_options(c));
    EXPECT_EQ(sup_difference(a, b), 0.0) << c.name;
}

TEST(Residuals, ExactTransportIsClean) {
    InitialData phi = exprs({kBump1, kBump2});
    PiField u = solve_qpower(absorbing_spec(), phi, 2.0, with_nx(40));
    ResidualReport r = residuals(absorbing_spec(), u, phi);
    EXPECT_LE(r.fixed_point, 1e-12);
    EXPECT_LE(r.initial, 1e-15);
    EXPECT_LE(r.boundary, 1e-15);
    EXPECT_LE(r.pde, 1e-9);
    EXPECT_GT(r.pde_nodes, 0u);
    EXPECT_EQ(r.kink_lines, 3u * 2u);
}

TEST(Residuals, PerturbedNodeIsDetected) {
    InitialData phi = exprs({kBump1, kBump2});
    PiField u = solve_qpower(absorbing_spec(), phi, 2.0, with_nx(40));
    // x = 0.5, t = 0.25 sits between kink lines.
    u.at(0, 20, 10) += 1e-3;
    ResidualReport r = residuals(absorbing_spec(), u, phi);
    EXPECT_GE(r.fixed_point, 1e-3 - 1e-12);
    EXPECT_GT(r.pde, 1e-3);
}

TEST(Residuals, ZeroDataAllZero) {
    PiField u = solve_qpower(swap_spec(), InitialData::zero(2), 2.0, with_nx(16));
    ResidualReport r = residuals(swap_spec(), u, InitialData::zero(2));
    EXPECT_EQ(r.fixed_point, 0.0);
    EXPECT_EQ(r.pde, 0.0);
    EXPECT_EQ(r.initial, 0.0);
    EXPECT_EQ(r.boundary, 0.0);
    EXPECT_NE(r.to_text().find("fixed_point 0"), std::string::npos);
}

TEST(KinkTimes, UnitSpeeds) {
    auto k = kink_times(swap_spec(), 3.0);
    ASSERT_EQ(k.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(k[i], double(i), 1e-9);
}

TEST(KinkTimes, MixedSpeeds) {
    SystemSpec s = SystemSpec::from_text(1, {"2", "-1"}, {"0", "0"}, Eigen::MatrixXd::Zero(2, 2), true, 1.0);
    auto k = kink_times(s, 2.0);
    ASSERT_EQ(k.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(k[i], 0.5 * i, 1e-9);
}

TEST(Mollify, PreservesConstantsAndInteriorLines) {
    auto c = mollify(exprs({"2", "3*x - 1"}), 0.1, 20);
    for (std::size_t i = 0; i <= 20; ++i) {
        double x = i / 20.0;
        EXPECT_NEAR(c[0][i], 2.0, 1e-10);
        if (x >= 0.1 && x <= 0.9) EXPECT_NEAR(c[1][i], 3 * x - 1, 1e-10);
    }
    EXPECT_THROW(mollify(exprs({"1"}), 0.0, 4), Error);
}

TEST(Mollify, SmoothsAJump) {
    auto c = mollify(exprs({"if(x <= 0.5, 1, 0)"}), 0.1, 100);
    EXPECT_NEAR(c[0][50], 0.5, 5e-3);
    for (std::size_t i = 1; i <= 100; ++i) EXPECT_LE(c[0][i], c[0][i - 1] + 1e-15);
    EXPECT_NEAR(c[0][30], 1.0, 1e-12);
    EXPECT_NEAR(c[0][70], 0.0, 1e-12);
}

TEST(L2Slices, NormAndDistance) {
    Grid g = Grid::aligned(1.0, 10);
    PiField a(g, 1), b(g, 1);
    for (std::size_t i = 0; i <= 10; ++i) a.at(0, i, 3) = 2.0;
    EXPECT_NEAR(l2_slice_norm(a, 3), 2.0, 1e-14);
    EXPECT_NEAR(l2_slice_distance(a, b, 3), 2.0, 1e-14);
    EXPECT_EQ(l2_slice_norm(a, 4), 0.0);
}

TEST(SolveL2, AbsorbingStepIsMonotone) {
    SolveOptions o = with_nx(128);
    L2Result r = solve_l2(absorbing_spec(), exprs({"if(x <= 0.5, 1, 0)", "0"}), 2.0, {0.025, 0.1, 0.05}, o);
    ASSERT_EQ(r.radii.size(), 3u);
    EXPECT_EQ(r.radii.front(), 0.1);
    EXPECT_EQ(r.slice_times.size(), 4u);
    EXPECT_TRUE(r.monotone()) << r.to_text();
    // Everything has left through the absorbing ends by t = 1.
    for (auto& row : r.distances) EXPECT_EQ(row.back(), 0.0);
    EXPECT_NE(r.to_text().find("monotone yes"), std::string::npos);
}

TEST(SolveL2, ConstantDataIsUnchangedByRadius) {
    // Constant compatible data stays constant under mollification.
    L2Result r = solve_l2(swap_spec(), exprs({"1", "1"}), 2.0, {0.2, 0.1}, with_nx(40));
    for (auto& row : r.distances)
        for (double d : row) EXPECT_LE(d, 1e-12);
    EXPECT_NEAR(sup_norm(r.field), 1.0, 1e-12);
}

TEST(SolveL2, RejectsBadRadii) {
    EXPECT_THROW(solve_l2(swap_spec(), exprs({"1", "1"}), 1.0, {}), Error);
    EXPECT_THROW(solve_l2(swap_spec(), exprs({"1", "1"}), 1.0, {0.6}), Error);
}
