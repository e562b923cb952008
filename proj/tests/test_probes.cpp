#include "tcone/bounds.hpp"
#include "tcone/probes.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include <cmath>

using namespace tcone;

namespace {

// Potential of x -> x^2 e1, x >= 0, at (t, delta, 0), integrated directly with the peak at x = sqrt(t) split out.
double curve_potential_alpha2(double t, double delta) {
  using boost::math::quadrature::gauss_kronrod;
  auto f = [&](double x) { return 1.0 / std::hypot(t - x * x, delta); };
  const double m = std::sqrt(t);
  double v = 0.0;
  for (auto [a, b] : {std::pair{0.0, m - 0.05}, {m - 0.05, m}, {m, m + 0.05}, {m + 0.05, m + 1.0}})
    v += gauss_kronrod<double, 61>::integrate(f, a, b, 30, 1e-13);
  v += gauss_kronrod<double, 61>::integrate(f, m + 1.0, std::numeric_limits<double>::infinity(), 30, 1e-13);
  return v;
}

MetricDescriptor psi_s_half_line(double S) {
  const auto ps = psi_s_params(2.0, S, kInf, 1.0, 1.0);
  return MetricDescriptor::potential_st(ps.S_prime, kInf, ps.P, 2.0);
}

}  // namespace

TEST(Isometry, SelfCheckPasses) {
  for (const auto& d : {MetricDescriptor::euclidean(), MetricDescriptor::inverse_radial(1.0),
                        MetricDescriptor::potential_st(1.0, 2.0, 1.0, 2.0)}) {
    const auto res = eps_isometry_check(d, d, 1.0, 0.01, 6);
    EXPECT_TRUE(res.passed) << d.name();
    EXPECT_EQ(res.distortion_observed, 0.0);
    EXPECT_EQ(res.surjectivity_defect, 0.0);
    EXPECT_GT(res.net_points, 0u);
  }
}

TEST(Isometry, FlatAgainstInverseRadialFails) {
  // from the origin the two distances are |x| and 2 sqrt|x|, far apart at scale 1
  const auto res = eps_isometry_check(MetricDescriptor::euclidean(), MetricDescriptor::inverse_radial(1.0), 1.0, 0.05, 20);
  EXPECT_FALSE(res.passed);
  EXPECT_GT(res.distortion_observed, 0.5);
  const auto rev = eps_isometry_check(MetricDescriptor::inverse_radial(1.0), MetricDescriptor::euclidean(), 1.0, 0.05, 20);
  EXPECT_FALSE(rev.passed);
}

TEST(Isometry, SurjectivityDefectSeesSmallerImageBall) {
  // the inverse-radial ball of radius 1 is |z| < 1/4, so most of the flat ball is missed
  const auto res = eps_isometry_check(MetricDescriptor::inverse_radial(1.0), MetricDescriptor::euclidean(), 1.0, 0.05, 4);
  EXPECT_GT(res.surjectivity_defect, 0.5);
}

TEST(Isometry, NormalisedHalfLineApproachesFlat) {
  double prev = kInf;
  for (double S : {8.0, 32.0, 128.0}) {
    const auto res = eps_isometry_check(psi_s_half_line(S), MetricDescriptor::euclidean(), 1.0, 0.01, 10);
    EXPECT_TRUE(res.passed) << "S=" << S;
    EXPECT_LT(res.distortion_observed, prev);
    prev = res.distortion_observed;
  }
}

TEST(Isometry, RadiusMustExceedEpsilon) {
  EXPECT_THROW(eps_isometry_check(MetricDescriptor::euclidean(), MetricDescriptor::euclidean(), 0.1, 0.1, 4),
               std::domain_error);
}

TEST(AxisLength, MatchesDirectQuadrature) {
  const auto out = axis_segment_length(2.0, 0.4, 0.6, {1e-2});
  using boost::math::quadrature::gauss_kronrod;
  const double oracle = gauss_kronrod<double, 31>::integrate(
      [](double t) { return std::sqrt(curve_potential_alpha2(t, 1e-2)); }, 0.4, 0.6, 10, 1e-11);
  EXPECT_NEAR(out[0].second, oracle, 1e-7 * oracle);
}

TEST(AxisLength, StrictlyIncreasingAsOffsetShrinks) {
  for (double alpha : {1.5, 2.0, 3.0}) {
    const auto out = axis_segment_length(alpha, 0.4, 0.6, {1e-1, 1e-2, 1e-3, 1e-4});
    for (std::size_t k = 1; k < out.size(); ++k) EXPECT_GT(out[k].second, out[k - 1].second) << "alpha=" << alpha;
  }
}

TEST(AxisLength, GrowthIsSqrtLog) {
  const auto fit = fit_sqrt_log(axis_segment_length(2.0, 0.4, 0.6, {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}));
  EXPECT_GT(fit.c2, 0.0);
  EXPECT_GE(fit.r2, 0.95);
}

TEST(AxisLength, DegenerateAndInvalidSegments) {
  EXPECT_EQ(axis_segment_length(2.0, 0.5, 0.5, {1e-3})[0].second, 0.0);
  EXPECT_THROW(axis_segment_length(2.0, 0.0, 0.5, {1e-3}), std::domain_error);
  EXPECT_THROW(axis_segment_length(2.0, 0.4, 0.5, {1e-3, 1e-2}), std::invalid_argument);
}

TEST(Fit, RecoversExactCoefficients) {
  std::vector<std::pair<double, double>> d;
  for (double delta : {1e-1, 1e-3, 1e-5}) d.emplace_back(delta, 2.0 + 3.0 * std::sqrt(std::log(1.0 / delta)));
  const auto f = fit_sqrt_log(d);
  EXPECT_NEAR(f.c1, 2.0, 1e-12);
  EXPECT_NEAR(f.c2, 3.0, 1e-12);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
}

TEST(PoleTest, DetourBeatsNearAxisPathsAndProjectionShortens) {
  const auto desc = MetricDescriptor::potential_st(0.0, kInf, 1.0, 2.0);
  SolverConfig coarse;
  coarse.grid_resolution = 0.2;
  const auto res = pole_test_at_origin(desc, {1, 0, 0}, {1e-1, 1e-2, 1e-3, 1e-4}, coarse);
  ASSERT_EQ(res.straight_lengths.size(), 4u);
  for (std::size_t k = 1; k < res.straight_lengths.size(); ++k)
    EXPECT_GT(res.straight_lengths[k].second, res.straight_lengths[k - 1].second);
  EXPECT_TRUE(std::isfinite(res.detour_distance));
  EXPECT_EQ(res.verdict, "no geodesic through the axis");
  EXPECT_TRUE(res.projection_shortens);
  EXPECT_LT(res.projected_length, res.excursion_length);

  // same verdict on the default, twice finer grid
  const auto fine = pole_test_at_origin(desc, {1, 0, 0}, {1e-1, 1e-2, 1e-3, 1e-4});
  EXPECT_EQ(fine.verdict, res.verdict);
  EXPECT_LE(fine.detour_distance, res.detour_distance * (1 + 1e-9));

  // off the axis at the same norm the distance is no larger
  EXPECT_LE(distance(desc, {0, 0, 0}, {0, 1, 0}, coarse).value, res.detour_distance);
}

TEST(PoleTest, RejectsOffAxisPoint) {
  EXPECT_THROW(pole_test_at_origin(MetricDescriptor::potential_st(0.0, kInf, 1.0, 2.0), {1, 1, 0}, {1e-2}),
               std::domain_error);
}
