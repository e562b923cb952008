#pragma once

#include "tcone/metric.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace tcone {

struct IsometryCheckResult {
  double r = 0.0;
  double epsilon = 0.0;
  bool passed = false;
  double distortion_observed = 0.0;
  double surjectivity_defect = 0.0;
  std::size_t pairs = 0;
  std::size_t net_points = 0;
  double net_cell = 0.0;  // Euclidean spacing of the sample net
};

/**
 * Tests the identity of R^3 as an (r, epsilon)-isometry from (d_A, 0) to (d_B, 0). Distortion is sampled over pairs of
 * grid points of B_A(0, r). The surjectivity defect of a net point q of B_B(0, r - epsilon) is bounded by the d_B
 * length of its grid geodesic back to the last node inside B_A(0, r).
 */
IsometryCheckResult eps_isometry_check(const MetricDescriptor& A, const MetricDescriptor& B, double r, double epsilon,
                                       std::size_t nsamples, const SolverConfig& cfg = {}, std::uint64_t seed = 1);

/** Length of the segment t -> (t, delta, 0), t in [t0, t1], under the potential of the whole curve x^alpha e1. */
std::vector<std::pair<double, double>> axis_segment_length(double alpha, double t0, double t1,
                                                           const std::vector<double>& delta_list);

/** Least-squares fit length = c1 + c2 sqrt(log(1/delta)). */
struct SqrtLogFit {
  double c1 = 0.0, c2 = 0.0, r2 = 0.0;
};
SqrtLogFit fit_sqrt_log(const std::vector<std::pair<double, double>>& delta_length);

struct PoleTestResult {
  std::vector<std::pair<double, double>> straight_lengths;  // (D, length of 0 -> (0,D,0) -> (p_r,D,0) -> p)
  double detour_distance = 0.0;
  std::string verdict;
  double slab_D = 0.0;              // slab used for the projection check
  double excursion_length = 0.0;    // last slab excursion of the witness
  double projected_length = 0.0;    // the same excursion after project_path
  bool projection_shortens = false;
};

/** Compares near-axis approximations of [0, p] with the solver distance d(0, p). p must lie on the positive axis. */
PoleTestResult pole_test_at_origin(const MetricDescriptor& desc, const Point3& p, const std::vector<double>& D_list,
                                   const SolverConfig& cfg = {});

}  // namespace tcone
