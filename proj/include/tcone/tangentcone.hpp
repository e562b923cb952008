#pragma once

#include "tcone/metric.hpp"
#include "tcone/potential.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace tcone {

/** How the rescaling sequence a_i (and block index n_i) is produced. */
struct SequenceRule {
  enum class Kind { PinLower, PinUpper, Theta, ExplicitList };

  Kind kind = Kind::PinLower;
  double value = 1.0;                // S, T or theta
  std::vector<double> log_a;         // explicit lists only
  std::vector<std::size_t> n;        // explicit lists only
  std::size_t blocks = 1;            // blocks inspected past n_i (more than one pins an interval union)

  /** a_i^{1/(1+alpha)} K_{2i} = S. */
  static SequenceRule pin_lower(double S);
  /** a_i^{1/(1+alpha)} K_{2i+1} = T. */
  static SequenceRule pin_upper(double T);
  /** a_i = theta^{-1} K_{2i+1}^{-2} K_{2i+2}^{1-alpha}. */
  static SequenceRule theta(double theta);
  static SequenceRule explicit_list(const std::vector<double>& a, std::vector<std::size_t> n);
  static SequenceRule explicit_log_list(std::vector<double> log_a, std::vector<std::size_t> n);

  /** log a_i and n_i for index i >= 1. */
  double log_a_at(const LatticeSpec& spec, std::size_t i) const;
  std::size_t n_at(std::size_t i) const;
  std::size_t length() const;  // usable indices are 1 .. length()
  std::string name() const;
};

struct LimitValue {
  enum class Kind { Zero, Finite, Infinite, Inconclusive };
  Kind kind = Kind::Inconclusive;
  double value = 0.0;  // Finite only

  std::string str() const;
};

struct LimitThresholds {
  double zero = 1e-6;
  double infinity = 1e6;
  double agree = 0.01;  // relative agreement of successive values
};

/** Extrapolates a sequence given by its logarithms (+-inf allowed). */
LimitValue extrapolate_log(const std::vector<double>& logs, const LimitThresholds& th = {});

struct LimitInvariants {
  /** Limits of a_i^{1/(1+alpha)} K_j for j = 2n_i - 1, ..., 2n_i + 2*blocks. */
  std::vector<LimitValue> window;
  LimitValue L1, L2;  // window[1], window[2]
  /** sqrt(S_{n+1}^{1-alpha} - T_{n+1}^{1-alpha}) / (T_n - S_n). */
  LimitValue L3;
  /** T_n^alpha (T_n - S_n). */
  LimitValue L4;
  /** S_{n+1}^{-alpha} (S_{n+1}^{1-alpha} - T_{n+1}^{1-alpha})^{-1/2}. */
  LimitValue L5;
  bool a_to_zero = false;
  bool conclusive = false;
  std::string reason;
};

LimitInvariants limit_invariants(const LatticeSpec& spec, const SequenceRule& rule, std::size_t horizon,
                                 const LimitThresholds& th = {});

/** A limit space together with the base-space coordinates in which the rescaled potentials converge to it. */
struct LimitDescriptor {
  enum class Family { DST, DSInf, D0T, D0Inf, Euclidean, InverseRadial, Affine, DI, Inconclusive };
  /** Normalisation of P: 1, P^{1/(1+alpha)} = sqrt(S_{n+1}^{1-alpha} - T_{n+1}^{1-alpha}), or = T_n - S_n. */
  enum class Normalization { Unit, UpperGap, LowerGap };

  Family family = Family::Inconclusive;
  Normalization normalization = Normalization::Unit;
  MetricDescriptor metric;
  double S = 0.0, T = kInf, theta = 0.0;
  IntervalUnion intervals;
  std::string reason;  // set when inconclusive

  /** Family with parameters, e.g. "d_1^inf", "h0", "(1/(alpha-1)+1/(theta|z|))h0 theta=1". */
  std::string label() const;
  /** Family only, e.g. "d_S^T", "d_0^inf", "(1/|z|)h0". */
  std::string family_name() const;
};

LimitDescriptor classify_limit(const LimitInvariants& inv, const LatticeSpec& spec);

struct ConvergenceRecord {
  std::size_t i;
  double a;
  double P;
  double distortion;
  double fiber_sup;
};

/** Looser path quadrature and a single refinement round; tight tolerances stall on dense lattices. */
inline SolverConfig convergence_solver_config() { return SolverConfig{0.1, 1, 1e-5, 0.5}; }

/**
 * For each i, samples points of the d_{a_i} metric ball B(0, r) from a single-source grid solve, then reports the
 * largest |d_{a_i} - d_limit| over `npairs` pairs and the largest fiber diameter pi/(N sqrt(Phi_{a_i})).
 */
std::vector<ConvergenceRecord> verify_convergence(const LatticeSpec& spec, const SequenceRule& rule,
                                                  const LimitDescriptor& limit, double r,
                                                  const std::vector<std::size_t>& i_list,
                                                  const SolverConfig& cfg = convergence_solver_config(),
                                                  std::size_t npairs = 50, std::uint64_t seed = 1);

/** Tangent cone at the origin (zoom in) or at infinity (zoom out) of a closed-form limit metric. */
LimitDescriptor dilation_limit(const MetricDescriptor& desc, bool at_origin, const LimitThresholds& th = {});

struct Table1Row {
  std::string metric;
  std::string at_origin;
  std::string at_infinity;
};

/** The 7 x 2 tangent-cone table, computed by dilation_limit on representative parameters. */
std::vector<Table1Row> table1(double alpha);
/** The reference table the computed one must match. */
std::vector<Table1Row> table1_expected();

}  // namespace tcone
