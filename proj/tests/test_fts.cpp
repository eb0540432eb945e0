#include "support.hpp"

#include "hyperprop/error.hpp"
#include "hyperprop/fts.hpp"

#include <gtest/gtest.h>

using namespace hyperprop;
using namespace hptest;

namespace {

FtsOptions quick(std::size_t nx = 32, std::size_t trials = 8) {
    FtsOptions o;
    o.nx = nx;
    o.trials = trials;
    return o;
}

} // namespace

TEST(CheckC0, Sec32SufficientCasePasses) {
    FtsVerdict v = check_C0(sec32_spec(Sec32Variant::Suf2), 2.25, 1, quick(64));
    EXPECT_TRUE(v.passed()) << v.to_text();
    EXPECT_FALSE(v.witness);
    EXPECT_EQ(v.k, 1u);
    EXPECT_EQ(v.trials, 8u);
}

TEST(CheckC0, BaselineHasCounterexample) {
    SystemSpec spec = sec32_spec(Sec32Variant::Baseline);
    FtsOptions o = quick();
    FtsVerdict v = check_C0(spec, 3.0, 1, o);
    ASSERT_FALSE(v.passed());
    ASSERT_TRUE(v.witness);
    EXPECT_GT(std::abs(v.witness->value), o.tol);
    EXPECT_EQ(v.witness->t, 3.0);
    EXPECT_EQ(replay(spec, v, o), v.witness->value);
}

TEST(CheckC0, AbsorbingClearsAfterOneCrossing) {
    EXPECT_TRUE(check_C0(absorbing_spec(), 1.0, 1, quick()).passed());
    EXPECT_FALSE(check_C0(absorbing_spec(), 0.75, 1, quick()).passed());
}

TEST(CheckC0, SwapNeverStabilizes) {
    FtsVerdict v = check_C0(swap_spec(), 3.0, std::nullopt, quick(16, 4));
    EXPECT_FALSE(v.passed());
    EXPECT_GE(v.k, 1u);
}

TEST(CheckC0, RefusesNonhomogeneousBoundary) {
    EXPECT_THROW(check_C0(sec33_spec(1.0), 3.0, 1, quick()), InvalidSpec);
}

TEST(CheckC0, RejectsZeroPower) { EXPECT_THROW(check_C0(swap_spec(), 1.0, 0, quick()), Error); }

TEST(CheckC0, VerdictTextNamesOutcome) {
    FtsVerdict v = check_C0(absorbing_spec(), 1.0, 1, quick());
    EXPECT_NE(v.to_text().find("outcome no-counterexample"), std::string::npos) << v.to_text();
}

TEST(CheckC00, LowerTriangularPassesAllSlices) {
    FtsVerdict v = check_C00(lower_triangular_spec(0.7), 2.5, std::nullopt, 3, quick(16));
    EXPECT_TRUE(v.passed()) << v.to_text();
    EXPECT_EQ(v.k_max, 3u);
    EXPECT_GE(v.q, 1u);
}

TEST(CheckC00, DoubledPowerStillPasses) {
    FtsVerdict a = check_C00(lower_triangular_spec(0.7), 2.5, std::nullopt, 2, quick(16));
    ASSERT_TRUE(a.passed());
    EXPECT_TRUE(check_C00(lower_triangular_spec(0.7), 2.5, 2 * a.q, 2, quick(16)).passed());
}

TEST(CheckC00, SwapFailsOnFirstSlice) {
    FtsVerdict v = check_C00(swap_spec(), 2.0, std::nullopt, 2, quick(16, 4));
    ASSERT_FALSE(v.passed());
    EXPECT_EQ(v.witness->slice, 1u);
}

TEST(CheckC00, RefusesNonAutonomous) {
    EXPECT_THROW(check_C00(sec32_spec(Sec32Variant::Suf2), 2.25, std::nullopt, 2, quick()), InvalidSpec);
    EXPECT_THROW(check_C00(swap_spec(), 1.0, std::nullopt, 0, quick()), Error);
}

TEST(CheckC00, ImpliesC0) {
    for (double T : {1.5, 2.0, 2.5}) {
        FtsVerdict c00 = check_C00(lower_triangular_spec(0.5), T, std::nullopt, 2, quick(16));
        if (c00.passed()) EXPECT_TRUE(check_C0(lower_triangular_spec(0.5), T, c00.q, quick(16)).passed()) << T;
    }
}

TEST(Replay, RequiresWitness) {
    FtsVerdict v = check_C0(absorbing_spec(), 1.0, 1, quick());
    EXPECT_THROW(replay(absorbing_spec(), v, quick()), Error);
}

TEST(Replay, IndependentOfOtherTrials) {
    SystemSpec spec = swap_spec();
    FtsOptions o = quick(16, 4);
    FtsVerdict v = check_C0(spec, 2.0, 2, o);
    ASSERT_TRUE(v.witness);
    // Replaying with a single trial starting at the witness seed.
    FtsOptions one = o;
    one.trials = 1;
    EXPECT_EQ(replay(spec, v, one), v.witness->value);
}

TEST(EstimateTopt, AbsorbingBracketsOne) {
    ToptResult r = estimate_Topt(absorbing_spec(), 3.0, 0.05, quick(16, 4));
    ASSERT_TRUE(r.certified) << r.to_text();
    EXPECT_LE(r.T_lo, 1.0);
    EXPECT_GE(r.T_hi, 1.0);
    EXPECT_LE(r.T_hi - r.T_lo, 0.05 + 1e-12);
    EXPECT_GE(r.nx, 20u);
}

TEST(EstimateTopt, Sec32SufficientBelowBound) {
    ToptResult r = estimate_Topt(sec32_spec(Sec32Variant::Suf2), 3.0, 0.125, quick(32, 4));
    ASSERT_TRUE(r.certified) << r.to_text();
    EXPECT_LE(r.T_hi, 2.5);
}

TEST(EstimateTopt, SwapIsNotCertified) {
    ToptResult r = estimate_Topt(swap_spec(), 2.0, 0.25, quick(8, 2));
    EXPECT_FALSE(r.certified);
    EXPECT_THROW(estimate_Topt(swap_spec(), 0.0, 0.25, quick()), Error);
}

TEST(CertifyNilpotent, LowerTriangular) {
    auto c = certify_linear_nilpotent(lower_triangular_spec(0.9), quick(16, 4));
    ASSERT_TRUE(c);
    EXPECT_EQ(c->nu, 2u);
    EXPECT_NEAR(c->T_bound, 2.0, 1e-9);
    EXPECT_TRUE(c->confirmation.passed());
}

TEST(CertifyNilpotent, CyclicCouplingHasNone) {
    EXPECT_FALSE(certify_linear_nilpotent(swap_spec(), quick()));
    SystemSpec self = transport_pair(Eigen::MatrixXd::Identity(2, 2));
    EXPECT_FALSE(certify_linear_nilpotent(self, quick()));
}

TEST(CertifyNilpotent, ThreeComponentChain) {
    Eigen::MatrixXd P(3, 3);
    P << 0, 1, 1, 0, 0, 1, 0, 0, 0;
    SystemSpec spec = SystemSpec::from_text(2, {"1", "2", "-1"}, {"0", "0", "0"}, P, true, 1.0);
    auto c = certify_linear_nilpotent(spec, quick(16, 4));
    ASSERT_TRUE(c);
    EXPECT_EQ(c->nu, 3u);
    EXPECT_NEAR(c->T_bound, 3.0, 1e-9);
    EXPECT_TRUE(c->confirmation.passed()) << c->confirmation.to_text();
}

TEST(CertifyNilpotent, NonlinearRefused) {
    EXPECT_THROW(certify_linear_nilpotent(sec32_spec(Sec32Variant::Suf2), quick()), InvalidSpec);
}
