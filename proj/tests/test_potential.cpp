#include "tcone/potential.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace tcone;

namespace {

constexpr double pi = std::numbers::pi;

/** Independent oracle for the curve integral: tanh-sinh on finite pieces split at the closest approach, exp-sinh on tails. */
double oracle_curve(double S, double T, double P, double alpha, const Point3& z) {
  const double zr = z.zr, rho = z.transverse_norm();
  auto f = [&](double x) {
    const double u = P * std::pow(x, alpha) - zr;
    return 1.0 / std::sqrt(u * u + rho * rho);
  };
  std::vector<double> cuts{S};
  if (zr > 0) {
    const double c = std::pow(zr / P, 1.0 / alpha);
    if (c > S && c < T) cuts.push_back(c);
  }
  double finite_end = T;
  if (std::isinf(T)) finite_end = std::max(cuts.back(), S) + 10.0;
  cuts.push_back(finite_end);
  boost::math::quadrature::tanh_sinh<double> ts;
  double total = 0;
  for (std::size_t i = 1; i < cuts.size(); ++i) total += ts.integrate(f, cuts[i - 1], cuts[i], 1e-14);
  if (std::isinf(T)) {
    boost::math::quadrature::exp_sinh<double> es;
    total += es.integrate([&](double t) { return f(finite_end + t); }, 0.0, std::numeric_limits<double>::infinity(), 1e-14);
  }
  return total;
}

double brute_lattice(const std::vector<std::pair<double, double>>& blocks, double h, double P, double alpha, const Point3& z) {
  long double s = 0;
  for (auto [lo, hi] : blocks)
    for (double k = lo; k < hi; k += 1.0) {
      const double x = k * h;
      const Point3 c{P * std::pow(x, alpha), 0, 0};
      s += h / distance(z, c);
    }
  return double(s);
}

}  // namespace

TEST(PhiST, ArctanOracle) {
  auto r = phi_ST(0.0, kInf, 1.0, 2.0, {-1.0, 0.0, 0.0}, 1e-10);
  EXPECT_NEAR(r.value, pi / 2, 1e-8);
  EXPECT_LE(r.error_bound, 1e-10);
  EXPECT_NEAR(r.value, 1.5707963267948966, 1e-12);  // frozen closed form
}

TEST(PhiST, DomainErrors) {
  EXPECT_THROW(phi_ST(1.0, 1.0, 1.0, 2.0, {0, 1, 0}, 1e-8), std::domain_error);
  EXPECT_THROW(phi_ST(2.0, 1.0, 1.0, 2.0, {0, 1, 0}, 1e-8), std::domain_error);
  EXPECT_THROW(phi_ST(0.0, 1.0, 1.0, 0.5, {0, 1, 0}, 1e-8), std::domain_error);
}

TEST(PhiST, OnCurveIsInfinite) {
  const double S = 0.5, T = 2.0, P = 1.7, alpha = 2.5;
  const Point3 z{P * std::pow(0.5 * (S + T), alpha), 0.0, 0.0};
  EXPECT_TRUE(std::isinf(phi_ST(S, T, P, alpha, z, 1e-8).value));
  // Off the segment on the axis the integral is finite.
  EXPECT_TRUE(std::isfinite(phi_ST(S, T, P, alpha, {P * std::pow(3.0, alpha), 0, 0}, 1e-8).value));
}

TEST(PhiST, MatchesIndependentQuadrature) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (double alpha : {1.5, 2.0, 3.0}) {
    for (int i = 0; i < 12; ++i) {
      const Point3 z{U(rng), U(rng), U(rng)};
      const double S = 0.25 * std::abs(U(rng)), T = (i % 3 == 0) ? kInf : S + 0.1 + std::abs(U(rng));
      const double P = 0.5 + std::abs(U(rng));
      auto r = phi_ST(S, T, P, alpha, z, 1e-10);
      const double o = oracle_curve(S, T, P, alpha, z);
      EXPECT_NEAR(r.value, o, 1e-9 + 1e-10 * o) << "alpha=" << alpha << " i=" << i;
      EXPECT_LE(r.error_bound, 1e-10);
    }
  }
}

TEST(PhiST, NearAxisSpike) {
  for (double rho : {1e-2, 1e-4, 1e-7}) {
    const Point3 z{1.0, rho, 0.0};
    auto r = phi_ST(0.0, kInf, 1.0, 2.0, z, 1e-10);
    const double o = oracle_curve(0.0, kInf, 1.0, 2.0, z);
    EXPECT_NEAR(r.value, o, 1e-8) << rho;
  }
}

TEST(PhiST, SymmetryAndMonotonicity) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    const Point3 z{U(rng), U(rng), U(rng)};
    auto a = phi_ST(0.2, 3.0, 1.0, 2.0, z, 1e-10);
    auto b = phi_ST(0.2, 3.0, 1.0, 2.0, rotate_transverse(z, U(rng)), 1e-10);
    EXPECT_NEAR(a.value, b.value, a.error_bound + b.error_bound + 1e-14 * a.value);
    const Point3 wider{z.zr, 1.5 * z.zc1, 1.5 * z.zc2};
    auto c = phi_ST(0.2, 3.0, 1.0, 2.0, wider, 1e-10);
    EXPECT_LE(c.value, a.value + a.error_bound + c.error_bound);
  }
}

TEST(PhiST, DilationIdentity) {
  // I_sigma^* with sigma = P^{1/(1+alpha)}: P^{-2/(1+alpha)} Phi_S^T(P^{-1/(1+alpha)} z) = Phi_{S',P}^{T'}(z),
  // and P^{-1/alpha} Phi_{S''}^{T''}(z) = Phi_{S',P}^{T'}(z) with S'' = P^{1/(alpha(1+alpha))} S.
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (double alpha : {1.5, 2.0, 3.0}) {
    for (int i = 0; i < 10; ++i) {
      const Point3 z{U(rng), U(rng), U(rng)};
      const double P = std::exp(U(rng)), S = 0.3 * std::abs(U(rng)), T = S + 0.5 + std::abs(U(rng));
      const double sig = std::pow(P, 1.0 / (1.0 + alpha));
      auto lhs = phi_ST(S / sig, T / sig, P, alpha, z, 1e-11);
      auto pull = phi_ST(S, T, 1.0, alpha, z * (1.0 / sig), 1e-11);
      EXPECT_NEAR(lhs.value, pull.value / (sig * sig), 1e-9 * (1 + lhs.value));
      const double s2 = std::pow(P, 1.0 / (alpha * (1.0 + alpha)));
      auto mid = phi_ST(S * s2, T * s2, 1.0, alpha, z, 1e-11);
      EXPECT_NEAR(lhs.value, std::pow(P, -1.0 / alpha) * mid.value, 1e-9 * (1 + lhs.value));
    }
  }
}

TEST(PhiUnion, TwoIntervalOracle) {
  IntervalUnion I{{0.0, 1.0}, {2.0, 3.0}};
  auto r = phi_interval_union(I, 1.0, 2.0, {-1, 0, 0}, 1e-10);
  EXPECT_NEAR(r.value, std::atan(1.0) + std::atan(3.0) - std::atan(2.0), 1e-9);
  EXPECT_NEAR(r.value, 0.9272952180016123, 1e-9);  // frozen
}

TEST(PhiUnion, Additivity) {
  const Point3 z{0.3, 0.7, -0.2};
  auto a = phi_interval_union({{0.0, 1.0}}, 1.3, 2.0, z, 1e-10);
  auto b = phi_interval_union({{1.5, kInf}}, 1.3, 2.0, z, 1e-10);
  auto ab = phi_interval_union({{0.0, 1.0}, {1.5, kInf}}, 1.3, 2.0, z, 1e-10);
  EXPECT_NEAR(ab.value, a.value + b.value, ab.error_bound + a.error_bound + b.error_bound + 1e-14);
  auto single = phi_interval_union({{0.0, kInf}}, 1.0, 2.0, {-1, 0, 0}, 1e-10);
  EXPECT_NEAR(single.value, pi / 2, 1e-9);
  EXPECT_THROW(phi_interval_union({{0.0, 2.0}, {1.0, 3.0}}, 1.0, 2.0, z, 1e-8), std::domain_error);
}

TEST(AST, ClosedFormAndMonotone) {
  EXPECT_NEAR(a_ST(0.0, kInf, 1.0, 2.0), pi / 2, 1e-10);
  EXPECT_EQ(a_ST(1.0, 1.0, 1.0, 2.0), 0.0);
  EXPECT_NEAR(a_ST(0.0, 2.0, 1.0, 2.0), std::atan(2.0), 1e-12);
  EXPECT_NEAR(a_ST(3.0, kInf, 4.0, 2.0), (pi / 2 - std::atan(6.0)) / 2.0, 1e-12);
  double prev = 0.0;
  for (double T : {0.5, 1.0, 2.0, 5.0, 50.0, kInf}) {
    const double v = a_ST(0.1, T, 0.7, 2.5);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(PhiLambda, CothOracle) {
  auto spec = make_lattice(2.0, KSequence::explicit_list({0.0}));
  auto r = phi_lambda(spec, {-1.0, 0.0, 0.0}, 1e-9);
  const double oracle = 0.5 + (pi / 2) / std::tanh(pi);
  EXPECT_NEAR(r.value, oracle, 1e-8);
  EXPECT_NEAR(oracle, 2.0766740474685811, 1e-15);  // frozen
  EXPECT_LE(r.error_bound, 1e-9);
  EXPECT_LE(std::abs(r.value - oracle), r.error_bound + 1e-13);
}

TEST(PhiLambda, LatticePointIsInfinite) {
  auto spec = make_lattice(2.0, KSequence::geometric(3.0, 10.0));
  EXPECT_TRUE(std::isinf(phi_lambda(spec, {9.0, 0.0, 0.0}, 1e-8).value));
  // Between blocks there is no center.
  EXPECT_TRUE(std::isfinite(phi_lambda(spec, {31.0 * 31.0, 0.0, 0.0}, 1e-8).value));
}

TEST(PhiLambda, FiniteListsAgainstBruteForce) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  auto spec = make_lattice(2.0, KSequence::explicit_list({3.0, 4000.0, 9000.0, 20000.0}));
  for (double N : {1.0, 7.3, 150.0, 2500.0}) {
    for (int i = 0; i < 6; ++i) {
      const double scale = 1.0 / N;
      Point3 z{std::abs(U(rng)) * 2.0 * std::pow(4000 * scale, 2.0), U(rng), U(rng)};
      if (i == 0) z = {std::pow(100.5 * scale, 2.0), 1e-4 * scale * scale, 0.0};
      auto r = lattice_sum(spec, scale, 1.0, z, 1e-10);
      const double b = brute_lattice({{3, 4000}, {9000, 20000}}, scale, 1.0, 2.0, z);
      EXPECT_LE(std::abs(r.value - b), r.error_bound + 1e-11 * b) << "N=" << N << " i=" << i;
      EXPECT_LE(r.error_bound, 1e-10);
    }
  }
}

TEST(PhiLambda, SymmetryAndMonotone) {
  auto spec = make_lattice(2.0, KSequence::geometric(1.0, 10.0));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  for (int i = 0; i < 30; ++i) {
    const Point3 z{U(rng) * 10, U(rng), U(rng)};
    auto a = phi_lambda(spec, z, 1e-9);
    auto b = phi_lambda(spec, rotate_transverse(z, U(rng)), 1e-9);
    EXPECT_NEAR(a.value, b.value, a.error_bound + b.error_bound + 1e-13 * a.value);
    auto c = phi_lambda(spec, {z.zr, 2 * z.zc1, 2 * z.zc2}, 1e-9);
    EXPECT_LE(c.value, a.value + a.error_bound + c.error_bound);
  }
}

TEST(PhiA, ScalingIdentity) {
  auto spec = make_lattice(2.0, KSequence::geometric(1.0, 10.0));
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double a = std::pow(10.0, -4.0 + 6.0 * U(rng));
    const Point3 z = Point3{U(rng) * 4 - 2, U(rng) * 4 - 2, U(rng) * 4 - 2} * (a * 3.0);
    auto lhs = phi_dilated_lattice(spec, a, z, 1e-9 / a);
    auto rhs = phi_lambda(spec, z * (1.0 / a), 1e-9);
    EXPECT_LE(std::abs(lhs.value - rhs.value / a), lhs.error_bound + rhs.error_bound / a + 1e-12 * lhs.value) << i;
  }
}

TEST(PhiA, ReducesToPhiLambda) {
  auto spec = make_lattice(2.0, KSequence::geometric(1.0, 10.0));
  const Point3 z{0.5, 0.3, 0.1};
  auto a = phi_a(spec, {1.0, 1.0}, z, 1e-10);
  auto b = phi_lambda(spec, z, 1e-10);
  EXPECT_NEAR(a.value, b.value, a.error_bound + b.error_bound);
}

TEST(PhiA, DirectSummationOracle) {
  auto spec = make_lattice(2.0, KSequence::geometric(1.0, 10.0));
  const RescaleParams rp{1e-6, 1.0};
  const double N = rescale_N(2.0, rp);
  EXPECT_NEAR(N, 100.0, 1e-9);
  const double h = 1.0 / N;
  const Point3 z{0.0, 1.0, 0.0};
  // First 10^6 centers: blocks [1,10), [100,1000), [1e4,1e5) and the start of [1e6,1e7).
  long double s = 0;
  long count = 0;
  double last = 0;
  for (auto [lo, hi] : std::vector<std::pair<double, double>>{{1, 10}, {100, 1000}, {1e4, 1e5}, {1e6, 1e7}})
    for (double k = lo; k < hi && count < 1000000; k += 1.0, ++count) {
      const double x = k * h;
      s += h / std::sqrt(std::pow(x, 4) + 1.0);
      last = k;
    }
  // Remaining centers sit where each term is 1/(h k^2 sqrt(1 + (kh)^-4)); bracket the sum by integrals of 1/(h k^2).
  auto tail = [&](double a, double b) { return (1.0 / a - 1.0 / b) / h; };
  double lo_t = tail(last + 1, 1e7), hi_t = tail(last, 1e7 - 1);
  for (double e = 8; e < 40; e += 2) {
    lo_t += tail(std::pow(10.0, e), std::pow(10.0, e + 1));
    hi_t += tail(std::pow(10.0, e) - 1, std::pow(10.0, e + 1) - 1);
  }
  const double oracle = double(s) + 0.5 * (lo_t + hi_t);
  auto r = phi_a(spec, rp, z, 1e-9);
  EXPECT_NEAR(r.value, oracle, 1e-6);
  EXPECT_LT(hi_t - lo_t, 1e-7);
}

TEST(FiberDiameter, ConsistencyAndCenters) {
  auto spec = make_lattice(2.0, KSequence::geometric(1.0, 10.0));
  const RescaleParams rp{1e-4, 1.0};
  const double N = rescale_N(2.0, rp);
  const Point3 z{0.2, 0.3, 0.0};
  auto d = fiber_diameter(spec, rp, z, 1e-10);
  auto phi = phi_a(spec, rp, z, 1e-10);
  EXPECT_NEAR(d.value * d.value * N * N * phi.value, pi * pi, 1e-9);
  const Point3 center{std::pow(100.0 / N, 2.0), 0.0, 0.0};
  EXPECT_EQ(fiber_diameter(spec, rp, center, 1e-10).value, 0.0);
}

TEST(BlockSums, FiniteListMatchesDirect) {
  auto spec = make_lattice(2.0, KSequence::explicit_list({2.0, 5.0, 40.0, 90.0}));
  const RescaleParams rp{1e-3, 2.0};
  const double N = rescale_N(2.0, rp);
  const Point3 z{0.4, 0.2, 0.1};
  auto s = block_integral_sum(spec, rp, z, 1e-10);
  const double direct = phi_ST(2.0 / N, 5.0 / N, 2.0, 2.0, z, 1e-11).value + phi_ST(40.0 / N, 90.0 / N, 2.0, 2.0, z, 1e-11).value;
  EXPECT_NEAR(s.value, direct, 1e-9);
  auto A = block_a_sum(spec, rp, 1e-10);
  EXPECT_NEAR(A.value, a_ST(2.0 / N, 5.0 / N, 2.0, 2.0) + a_ST(40.0 / N, 90.0 / N, 2.0, 2.0), 1e-10);
}

TEST(KSequence, Rules) {
  auto g = KSequence::geometric(1.0, 10.0);
  EXPECT_EQ(g(0), 1.0);
  EXPECT_EQ(g(3), 1000.0);
  auto s = KSequence::super_geometric(1.0, 2.0);
  EXPECT_EQ(s(3), 512.0);
  EXPECT_NEAR(s.log_value(30), 900 * std::log(2.0), 1e-9);
  auto e = KSequence::explicit_list({1, 4, 9});
  EXPECT_TRUE(std::isinf(e(3)));
  EXPECT_EQ(e.block_count(), 2u);
  EXPECT_THROW(KSequence::explicit_list({3, 2}), std::invalid_argument);
  EXPECT_THROW(make_lattice(1.0, g), std::domain_error);
}
