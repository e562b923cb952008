#pragma once

#include "tcone/geom.hpp"
#include "tcone/metric.hpp"
#include "tcone/potential.hpp"
#include "tcone/util.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tcone {

/** One evaluated sample. margin = rhs - lhs; second is set for pair samples. */
struct BoundSample {
  std::string id;
  Point3 z;
  std::optional<Point3> second;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
};

struct BoundReport {
  std::string bound_id;
  std::size_t samples = 0;
  double worst_margin = kInf;
  Point3 worst_point;
  std::optional<Point3> worst_second;
  std::string notes;
  bool vacuous = false;
  std::vector<BoundSample> rows;

  /** Records lhs <= rhs at z under the sub-identifier `id` (defaults to bound_id). */
  void add(const Point3& z, double lhs, double rhs, const std::string& id = {});
  /** As add, with a margin certified separately (e.g. from a direct integral of rhs - lhs). */
  void add_margin(const Point3& z, double lhs, double rhs, double margin, const std::string& id = {});
  void add_pair(const Point3& x, const Point3& y, double lhs, double rhs, const std::string& id = {});
  /** Minimum margin over rows carrying `id`; +inf when there are none. */
  double worst_margin_of(const std::string& id) const;
  bool passed() const { return !vacuous && samples > 0 && worst_margin >= 0.0; }
};

/** Constants instantiating the four comparison assumptions for a pair (Phi, Phi_inf). */
struct AssumptionWitness {
  double epsilon = 0.0;
  double C0 = 1.0;
  double C1 = 1.0;
  double kappa = 0.0;
  double m = 1.0;
  double R = 1.0;

  void validate() const;
  ConstantsLedger ledger() const;
};

/** Uniform in (zr, |zc|, arg zc) with rejection, followed by fixed points on the boundary of K(R,D). */
std::vector<Point3> sample_krd(double R, double D, std::size_t n, Rng& rng);
/** Uniform in the closed Euclidean ball of radius R, followed by fixed boundary points. */
std::vector<Point3> sample_ball(double R, std::size_t n, Rng& rng);

/** |Phi_a - sum of block integrals| <= 2/(N D) on K(R,D). */
BoundReport check_conv1(const LatticeSpec& spec, const RescaleParams& rp, double R, double D, std::size_t nsamples,
                        std::uint64_t seed = 1);

/** The five lower/upper estimates for Phi_a and the block integrals, ids est1..est5. */
std::vector<BoundReport> check_lower1(const LatticeSpec& spec, const RescaleParams& rp, double R, double D,
                                      std::size_t nsamples, std::uint64_t seed = 1);

/** sup over |z| <= R of 1/(N sqrt(Phi_a)) against (a/P)^{1/(1+alpha)} Q^{-1/2} sqrt(R). */
BoundReport check_a21(const LatticeSpec& spec, const RescaleParams& rp, double R, std::size_t nsamples,
                      std::uint64_t seed = 1);

/** Fiber diameters pi/(N sqrt(Phi_a)) on grid points of the metric ball B(0,r) against pi times the stated bound. */
BoundReport check_fiberdiam(const LatticeSpec& spec, const RescaleParams& rp, double r, std::size_t nsamples,
                            std::uint64_t seed = 1, const SolverConfig& cfg = {});
/** Euclidean radius of a ball about 0 containing the metric ball B(0, r) of the rescaled lattice; +inf when Q <= 0. */
double metric_ball_euclidean_radius(const LatticeSpec& spec, const RescaleParams& rp, double r);
/** The fiber-diameter bound itself; +inf when Q <= 0. */
double fiberdiam_bound(const LatticeSpec& spec, const RescaleParams& rp, double r);

/** Normalisation P^{1/(1+alpha)} = theta sqrt(S^{1-alpha} - T^{1-alpha}) and the resulting S', T'. */
struct PsiSParams {
  double P, S_prime, T_prime, gap;  // gap = sqrt(S^{1-alpha} - T^{1-alpha})
  double scale;                     // R / (theta^3 S^alpha gap), to be multiplied by C R
  bool precondition;                // theta S^alpha gap >= 2R
};
PsiSParams psi_s_params(double alpha, double S, double T, double theta, double R);

/** |Phi_{S',P}^{T'} - 1/(theta^2 (alpha-1))| <= C R / (theta^3 S^alpha gap) on |z| <= R. */
BoundReport check_a3forPsi(double alpha, double S, double T, double theta, double R, std::size_t nsamples,
                           double C_alpha, std::uint64_t seed = 1);

/** Smallest C making the previous bound hold on the samples of every non-vacuous S in S_list, rounded up to 3 digits. */
double calibrate_c_alpha(double alpha, const std::vector<double>& S_list, double T, double theta, double R,
                         std::size_t nsamples, std::uint64_t seed = 1);

/** Both bounds for |Phi_{S',P}^{T'} - 1/(theta |z|)| with P^{1/(1+alpha)} = theta (T - S), on K(R,D). ids .a and .b */
BoundReport check_a3forPsi2(double alpha, double S, double T, double theta, double R, double D, std::size_t nsamples,
                            std::uint64_t seed = 1);

enum class C0C1Variant { Prime, Plain };

/** Lower bound on A_{S',P}^{T'} (id .A) and upper bound on Phi_{S',P}^{T'} (id .Phi) on |z| <= R. */
BoundReport check_C0C1(double alpha, double S, double T, double theta, C0C1Variant variant, double R,
                       std::size_t nsamples, std::uint64_t seed = 1);

/** Witness for Phi_{S',P}^{T'} against the constant 1/(theta^2(alpha-1)), R chosen as rho(u+2)+1. */
AssumptionWitness witness_psi_s(double alpha, double S, double T, double theta, double u, double C_alpha);
/** Witness for Phi_{S',P}^{T'} against 1/(theta |z|), R chosen as rho(u+2)+1. */
AssumptionWitness witness_psi_t(double alpha, double S, double T, double theta, double u);

/** C (1 + sqrt C1)(1 + C0^{-1/2}) R^{1+kappa/2} eps^{1/(2(1+m))}. */
double key_cor_rhs(const AssumptionWitness& w, double C);

/** Deterministic pairs in the open Euclidean ball B(u); the first few straddle the axis. */
std::vector<std::pair<Point3, Point3>> sample_pairs(double u, std::size_t n, Rng& rng);

/** max over sampled pairs in B(u) of |d_A - d_B| against key_cor_rhs(w, C). */
BoundReport check_key_cor(const MetricDescriptor& A, const MetricDescriptor& B, const AssumptionWitness& w, double u,
                          std::size_t npairs, double C, std::uint64_t seed = 1, const SolverConfig& cfg = {});

}  // namespace tcone
