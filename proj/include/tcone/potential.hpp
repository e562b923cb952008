#pragma once

#include "tcone/geom.hpp"

#include <cstddef>
#include <limits>
#include <vector>

namespace tcone {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/** Value with a bound on its absolute error. value may be +inf (singular point). */
struct EvalResult {
  double value = 0.0;
  double error_bound = 0.0;
};

/** Increasing integer sequence K_0 < K_1 < ... that delimits the lattice blocks. */
class KSequence {
 public:
  enum class Kind { Explicit, Geometric, SuperGeometric };

  static KSequence explicit_list(std::vector<double> values);
  static KSequence geometric(double K0, double beta);
  static KSequence super_geometric(double K0, double beta);

  Kind kind() const { return kind_; }
  double K0() const { return K0_; }
  double beta() const { return beta_; }
  const std::vector<double>& values() const { return values_; }

  /** K_n; +inf past the end of an explicit list or beyond double range. */
  double operator()(std::size_t n) const;
  /** log K_n, finite even where K_n overflows. Requires K_n > 0. */
  double log_value(std::size_t n) const;
  /** True when the rule produces infinitely many blocks. */
  bool unbounded() const { return kind_ != Kind::Explicit; }
  /** Number of blocks [K_{2n}, K_{2n+1}); meaningful only for explicit lists. */
  std::size_t block_count() const;

 private:
  Kind kind_ = Kind::Explicit;
  std::vector<double> values_;
  double K0_ = 1.0;
  double beta_ = 2.0;
};

struct LatticeSpec {
  double alpha;
  KSequence K;
};

LatticeSpec make_lattice(double alpha, KSequence K);

struct RescaleParams {
  double a = 1.0;
  double P = 1.0;
};

/** N = a^{-1/(1+alpha)} P^{1/(1+alpha)}. */
double rescale_N(double alpha, const RescaleParams& rp);
/** Block endpoints K_{2n}/N and K_{2n+1}/N. */
double rescaled_S(const LatticeSpec& spec, const RescaleParams& rp, std::size_t n);
double rescaled_T(const LatticeSpec& spec, const RescaleParams& rp, std::size_t n);

struct Interval {
  double S;
  double T;
};
using IntervalUnion = std::vector<Interval>;

void validate_union(const IntervalUnion& I);

/**
 * Integral of 1/|z - P(x^alpha,0,0)| over x in [lo, hi]; hi may be +inf.
 * Splits at the closest approach and switches to a Legendre expansion once P x^alpha >= 4|z|.
 */
EvalResult curve_integral(double P, double alpha, const Point3& z, double lo, double hi, double tol);

/**
 * Weighted lattice sum sum_{blocks} sum_{K_{2n} <= k < K_{2n+1}} h / |z - P((k h)^alpha, 0, 0)|.
 * phi_lambda, phi_a and the dilated lattice are special cases.
 */
EvalResult lattice_sum(const LatticeSpec& spec, double h, double P, const Point3& z, double tol);

EvalResult phi_lambda(const LatticeSpec& spec, const Point3& z, double tol);
/** Potential of the dilated center set scale * Lambda. */
EvalResult phi_dilated_lattice(const LatticeSpec& spec, double scale, const Point3& z, double tol);
EvalResult phi_a(const LatticeSpec& spec, const RescaleParams& rp, const Point3& z, double tol);
EvalResult phi_ST(double S, double T, double P, double alpha, const Point3& z, double tol);
EvalResult phi_interval_union(const IntervalUnion& I, double P, double alpha, const Point3& z, double tol);

/** Integral of 1/(1 + P x^alpha) over [S, T], relative error below 1e-10. */
double a_ST(double S, double T, double P, double alpha);

/** pi / (N sqrt(Phi_a(z))); 0 at centers. */
EvalResult fiber_diameter(const LatticeSpec& spec, const RescaleParams& rp, const Point3& z, double tol);

/** Upper bound 2 t^{1-alpha} / (P (alpha-1)) for the curve integral over [t, inf), valid for t >= (2|z|/P)^{1/alpha}. */
double curve_tail_bound(double t, double P, double alpha);

/** sum_n Phi_{S_n,P}^{T_n}(z) over all lattice blocks, truncated with the tail bound. */
EvalResult block_integral_sum(const LatticeSpec& spec, const RescaleParams& rp, const Point3& z, double tol);
/** sum_n A_{S_n,P}^{T_n} over all blocks. */
EvalResult block_a_sum(const LatticeSpec& spec, const RescaleParams& rp, double tol);

}  // namespace tcone
