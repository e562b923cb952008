#include "tcone/tangentcone.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace tcone;

namespace {

using LK = LimitValue::Kind;
using Fam = LimitDescriptor::Family;

LatticeSpec super_geometric2() { return make_lattice(2.0, KSequence::super_geometric(1.0, 2.0)); }

// Theta-type sequence with theta_i = 4^{sign i}: the gap ratio then tends to 0 or infinity.
SequenceRule drifting_theta(const LatticeSpec& spec, double sign, std::size_t len) {
  std::vector<double> la;
  std::vector<std::size_t> n;
  const auto base = SequenceRule::theta(1.0);
  for (std::size_t i = 1; i <= len; ++i) {
    la.push_back(base.log_a_at(spec, i) - sign * double(i) * std::log(4.0));
    n.push_back(i);
  }
  return SequenceRule::explicit_log_list(la, n);
}

// K_{2m} = 2^{m(m+1)}, K_{2m+1} = 2 K_{2m}: each block has ratio 2 while the gaps grow without bound.
LatticeSpec ratio_two_blocks() {
  std::vector<double> K;
  for (int m = 0; m <= 15; ++m) {
    const double v = std::ldexp(1.0, m * (m + 1));
    K.push_back(v);
    K.push_back(2 * v);
  }
  return make_lattice(2.0, KSequence::explicit_list(K));
}

LimitDescriptor classify(const LatticeSpec& spec, const SequenceRule& r, std::size_t horizon) {
  return classify_limit(limit_invariants(spec, r, horizon), spec);
}

}  // namespace

TEST(Extrapolate, RecognisesZeroInfinityAndFiniteLimits) {
  EXPECT_EQ(extrapolate_log({-5, -10, -20}).kind, LK::Zero);
  EXPECT_EQ(extrapolate_log({5, 10, 20}).kind, LK::Infinite);
  const auto f = extrapolate_log({std::log(3.002), std::log(3.001), std::log(3.0005)});
  ASSERT_EQ(f.kind, LK::Finite);
  EXPECT_NEAR(f.value, 3.0005, 1e-12);
  EXPECT_EQ(extrapolate_log({0.0, -kInf}).kind, LK::Zero);
  EXPECT_EQ(extrapolate_log({0.0, kInf}).kind, LK::Infinite);
}

TEST(Extrapolate, OscillationAndSlowDriftAreInconclusive) {
  EXPECT_EQ(extrapolate_log({1.0, -1.0, 1.0}).kind, LK::Inconclusive);
  EXPECT_EQ(extrapolate_log({1.0, 2.0, 3.0}).kind, LK::Inconclusive);  // growing, still below the threshold
  EXPECT_EQ(extrapolate_log({-20.0, -10.0, -15.0}).kind, LK::Inconclusive);  // small but not monotone
  EXPECT_EQ(extrapolate_log({}).kind, LK::Inconclusive);
}

TEST(SequenceRules, PinnedEndpointsAreExact) {
  const auto spec = super_geometric2();
  for (std::size_t i = 1; i <= 5; ++i) {
    const double c = SequenceRule::pin_lower(1.5).log_a_at(spec, i) / 3.0;
    EXPECT_NEAR(c + spec.K.log_value(2 * i), std::log(1.5), 1e-12);
    const double d = SequenceRule::pin_upper(2.5).log_a_at(spec, i) / 3.0;
    EXPECT_NEAR(d + spec.K.log_value(2 * i + 1), std::log(2.5), 1e-12);
  }
}

TEST(SequenceRules, InvalidArgumentsRejected) {
  EXPECT_THROW(SequenceRule::pin_lower(0.0), std::invalid_argument);
  EXPECT_THROW(SequenceRule::theta(-1.0), std::invalid_argument);
  EXPECT_THROW(SequenceRule::explicit_list({1.0, 2.0}, {1}), std::invalid_argument);
  EXPECT_THROW(SequenceRule::explicit_list({0.0}, {1}), std::invalid_argument);
  EXPECT_THROW(limit_invariants(super_geometric2(), SequenceRule::explicit_list({1e-3, 1e-6}, {1, 2}), 10),
               std::invalid_argument);
}

TEST(Classify, PinLowerGivesHalfLine) {
  const auto spec = super_geometric2();
  const auto inv = limit_invariants(spec, SequenceRule::pin_lower(1.0), 24);
  ASSERT_EQ(inv.L1.kind, LK::Finite);
  EXPECT_NEAR(inv.L1.value, 1.0, 1e-12);
  EXPECT_EQ(inv.L2.kind, LK::Infinite);
  EXPECT_EQ(inv.window[0].kind, LK::Zero);
  const auto d = classify_limit(inv, spec);
  EXPECT_EQ(d.family, Fam::DSInf);
  EXPECT_EQ(d.label(), "d_1^inf");
}

TEST(Classify, PinUpperGivesBoundedSegmentFromOrigin) {
  const auto spec = super_geometric2();
  const auto d = classify(spec, SequenceRule::pin_upper(2.0), 24);
  EXPECT_EQ(d.family, Fam::D0T);
  EXPECT_NEAR(d.T, 2.0, 1e-12);
  EXPECT_EQ(d.label(), "d_0^2");
}

TEST(Classify, ThetaRuleLandsInGapFamilyWithRootTheta) {
  const auto spec = super_geometric2();
  for (double theta : {1.0, 4.0, 9.0}) {
    const auto inv = limit_invariants(spec, SequenceRule::theta(theta), 24);
    EXPECT_EQ(inv.L1.kind, LK::Zero);
    EXPECT_EQ(inv.L2.kind, LK::Zero);
    EXPECT_EQ(inv.L4.kind, LK::Zero);
    EXPECT_EQ(inv.L5.kind, LK::Zero);
    ASSERT_EQ(inv.L3.kind, LK::Finite);
    EXPECT_NEAR(inv.L3.value, std::sqrt(theta), 1e-3 * std::sqrt(theta));
    const auto d = classify_limit(inv, spec);
    EXPECT_EQ(d.family, Fam::Affine);
    EXPECT_EQ(d.normalization, LimitDescriptor::Normalization::UpperGap);
    EXPECT_DOUBLE_EQ(d.metric.c, 1.0);
    EXPECT_NEAR(d.metric.theta, 1.0 / std::sqrt(theta), 1e-3);
  }
}

TEST(Classify, GapRatioToInfinityGivesFlatLimit) {
  const auto spec = super_geometric2();
  const auto inv = limit_invariants(spec, drifting_theta(spec, 1.0, 40), 40);
  EXPECT_EQ(inv.L3.kind, LK::Infinite);
  const auto d = classify_limit(inv, spec);
  EXPECT_EQ(d.family, Fam::Euclidean);
  EXPECT_EQ(d.label(), "h0");
  EXPECT_EQ(d.metric.kind, MetricDescriptor::Kind::AffineConformal);
  EXPECT_DOUBLE_EQ(d.metric.theta, 0.0);
}

TEST(Classify, GapRatioToZeroGivesInverseRadialLimit) {
  const auto spec = super_geometric2();
  const auto inv = limit_invariants(spec, drifting_theta(spec, -1.0, 40), 40);
  EXPECT_EQ(inv.L3.kind, LK::Zero);
  EXPECT_EQ(inv.L4.kind, LK::Zero);
  const auto d = classify_limit(inv, spec);
  EXPECT_EQ(d.family, Fam::InverseRadial);
  EXPECT_EQ(d.normalization, LimitDescriptor::Normalization::LowerGap);
  // too short a horizon leaves T_n undetermined
  EXPECT_EQ(classify(spec, drifting_theta(spec, -1.0, 40), 12).family, Fam::Inconclusive);
}

TEST(Classify, FixedRatioBlocksGiveSegmentLimit) {
  const auto spec = ratio_two_blocks();
  const auto d = classify(spec, SequenceRule::pin_lower(1.0), 24);
  EXPECT_EQ(d.family, Fam::DST);
  EXPECT_DOUBLE_EQ(d.S, 1.0);
  EXPECT_NEAR(d.T, 2.0, 1e-12);
}

TEST(Classify, TwoSurvivingBlocksGiveIntervalUnion) {
  // K = v, 2v, 4v, 8v with v = 2^{4m^2}: two blocks of ratio 2 survive, separated by a growing gap
  std::vector<double> K;
  for (int m = 0; m <= 7; ++m) {
    const double v = std::ldexp(1.0, 4 * m * m);
    for (double f : {1.0, 2.0, 4.0, 8.0}) K.push_back(f * v);
  }
  const auto spec = make_lattice(2.0, KSequence::explicit_list(K));
  std::vector<double> la;
  std::vector<std::size_t> n;
  for (std::size_t i = 1; i <= 6; ++i) {
    la.push_back(-3.0 * std::log(K[4 * i]));
    n.push_back(2 * i);
  }
  auto rule = SequenceRule::explicit_log_list(la, n);
  EXPECT_EQ(classify(spec, rule, 6).family, Fam::Inconclusive);  // one block is not enough to see the union
  rule.blocks = 2;
  const auto d = classify(spec, rule, 6);
  ASSERT_EQ(d.family, Fam::DI);
  ASSERT_EQ(d.intervals.size(), 2u);
  EXPECT_NEAR(d.intervals[0].S, 1.0, 1e-12);
  EXPECT_NEAR(d.intervals[0].T, 2.0, 1e-12);
  EXPECT_NEAR(d.intervals[1].S, 4.0, 1e-12);
  EXPECT_NEAR(d.intervals[1].T, 8.0, 1e-12);
}

TEST(Classify, GeometricLatticeKeepsNeighbouringBlocks) {
  const auto spec = make_lattice(2.0, KSequence::geometric(1.0, 10.0));
  const auto inv = limit_invariants(spec, SequenceRule::pin_lower(1.0), 12);
  ASSERT_EQ(inv.window[0].kind, LK::Finite);
  EXPECT_NEAR(inv.window[0].value, 0.1, 1e-9);
  EXPECT_EQ(classify_limit(inv, spec).family, Fam::Inconclusive);
}

TEST(Classify, NonVanishingScaleIsInconclusive) {
  const auto spec = super_geometric2();
  const auto rule = SequenceRule::explicit_list(std::vector<double>(8, 0.5), {1, 2, 3, 4, 5, 6, 7, 8});
  const auto inv = limit_invariants(spec, rule, 8);
  EXPECT_FALSE(inv.a_to_zero);
  const auto d = classify_limit(inv, spec);
  EXPECT_EQ(d.family, Fam::Inconclusive);
  EXPECT_NE(d.reason.find("a_i"), std::string::npos);
}

TEST(Dilation, TableMatchesReferenceForSeveralAlpha) {
  const auto expected = table1_expected();
  for (double alpha : {1.5, 2.0, 3.0}) {
    const auto t = table1(alpha);
    ASSERT_EQ(t.size(), expected.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
      EXPECT_EQ(t[k].metric, expected[k].metric);
      EXPECT_EQ(t[k].at_origin, expected[k].at_origin) << t[k].metric << " alpha=" << alpha;
      EXPECT_EQ(t[k].at_infinity, expected[k].at_infinity) << t[k].metric << " alpha=" << alpha;
    }
  }
}

TEST(Dilation, ConesDoNotDependOnRepresentative) {
  for (double T : {1.5, 10.0, 1000.0}) {
    const auto d = MetricDescriptor::potential_st(1.0, T, 1.0, 2.0);
    EXPECT_EQ(dilation_limit(d, true).family, Fam::Euclidean);
    EXPECT_EQ(dilation_limit(d, false).family, Fam::InverseRadial);
  }
  EXPECT_EQ(dilation_limit(MetricDescriptor::potential_st(0.5, kInf, 3.0, 2.0), false).family, Fam::D0Inf);
  EXPECT_THROW(dilation_limit(MetricDescriptor::potential_union({{1, 2}, {3, 4}}, 1.0, 2.0), true),
               std::invalid_argument);
}

TEST(Convergence, PinLowerDistortionAndFibersShrink) {
  const auto spec = super_geometric2();
  const auto rule = SequenceRule::pin_lower(1.0);
  const auto lim = classify(spec, rule, 24);
  const auto rec = verify_convergence(spec, rule, lim, 1.0, {1, 2, 3}, convergence_solver_config(), 4, 1);
  ASSERT_EQ(rec.size(), 3u);
  for (std::size_t k = 1; k < rec.size(); ++k) {
    EXPECT_LT(rec[k].distortion, rec[k - 1].distortion);
    EXPECT_LT(rec[k].fiber_sup, rec[k - 1].fiber_sup);
    EXPECT_DOUBLE_EQ(rec[k].P, 1.0);
  }
  EXPECT_LT(rec.back().distortion, 0.01);
  EXPECT_LT(rec.back().fiber_sup, 1e-6);
}

TEST(Convergence, InconclusiveLimitRejected) {
  LimitDescriptor d;
  EXPECT_THROW(verify_convergence(super_geometric2(), SequenceRule::pin_lower(1.0), d, 1.0, {1}), std::domain_error);
}
