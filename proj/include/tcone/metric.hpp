#pragma once

#include "tcone/geom.hpp"
#include "tcone/potential.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace tcone {

/** A conformal multiple Phi * h0 of the Euclidean metric. */
struct MetricDescriptor {
  enum class Kind { Euclidean, InverseRadial, AffineConformal, PotentialST, PotentialUnion, RescaledLattice };

  Kind kind = Kind::Euclidean;
  double theta = 0.0;  // radial kinds
  double c = 0.0;      // affine constant
  double S = 0.0, T = kInf, P = 1.0, alpha = 2.0;
  IntervalUnion intervals;
  LatticeSpec lattice{2.0, KSequence::geometric(1.0, 10.0)};
  RescaleParams rp;

  static MetricDescriptor euclidean();
  static MetricDescriptor inverse_radial(double theta);
  static MetricDescriptor affine(double c, double theta);
  static MetricDescriptor potential_st(double S, double T, double P, double alpha);
  static MetricDescriptor potential_union(IntervalUnion I, double P, double alpha);
  static MetricDescriptor rescaled_lattice(LatticeSpec spec, RescaleParams rp);

  /** Stable text key covering every parameter (hex floats). */
  std::string fingerprint() const;
  /** Short human-readable label. */
  std::string name() const;
};

struct SolverConfig {
  double grid_resolution = 0.1;  // cell size relative to |x - y|
  int refinement_rounds = 3;
  double quadrature_tol = 1e-8;
  double domain_padding = 0.5;  // box padding relative to |x - y|

  void validate() const;
};

struct DistanceResult {
  double value = 0.0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  Polyline witness;
};

EvalResult conformal_factor(const MetricDescriptor& desc, const Point3& z, double tol);

/** Length of the straight segment [a, b]; +inf only when a positive-length piece lies in the singular set. */
EvalResult segment_length(const MetricDescriptor& desc, const Point3& a, const Point3& b, double tol);
EvalResult path_length(const MetricDescriptor& desc, const Polyline& gamma, double tol);

/** Closed-form distance in (theta/|z|) h0: a flat cone over a sphere of radius 1/2. */
double cone_oracle_distance(double theta, const Point3& x, const Point3& y);

/** Exact distance where a closed form exists (Euclidean, InverseRadial, constant AffineConformal). */
std::optional<double> exact_distance(const MetricDescriptor& desc, const Point3& x, const Point3& y);

/** Analytic lower bound on the distance; 0 when none is available. */
double distance_lower_bound(const MetricDescriptor& desc, const Point3& x, const Point3& y);

/** Grid shortest path followed by polyline refinement. value is the length of the returned witness. */
DistanceResult distance(const MetricDescriptor& desc, const Point3& x, const Point3& y, const SolverConfig& cfg = {});

/** As distance, with every admissible path confined to `region`. Throws invalid_argument if x or y lies outside. */
DistanceResult distance_restricted(const MetricDescriptor& desc, const Point3& x, const Point3& y, const Region& region,
                                   const SolverConfig& cfg = {});

/** Replaces the transverse component by its value at the first vertex. Requires |gamma_C(first)| = D. */
Polyline project_path(const Polyline& gamma, double D);

/**
 * Removes every excursion into the open slab |z_C| < D: each excursion is projected onto the slab boundary, the rest
 * of the path is rotated to stay continuous, and a boundary arc undoes the accumulated rotation after the last exit.
 */
Polyline modify_path(const Polyline& gamma, double D);

/** (z_R, D z_C / |z_C|), or (z_R, D, 0) on the axis. */
Point3 lift_point(const Point3& z, double D);

/** Single-source shortest paths on a Cartesian grid with 26-neighbour connectivity. */
class GridGraph {
 public:
  GridGraph(const MetricDescriptor& desc, const Point3& lo, const Point3& hi, double cell, double tol,
            const Region* region = nullptr);

  /** Adds a free node joined to the grid nodes at the corners of its cell. Returns its index. */
  std::size_t add_node(const Point3& p);

  /** Runs Dijkstra from `source`; stops early once `target` is settled when given. Ties break by node index. */
  void solve(std::size_t source, std::optional<std::size_t> target = std::nullopt);

  std::size_t node_count() const { return positions_.size(); }
  const Point3& position(std::size_t i) const { return positions_[i]; }
  bool active(std::size_t i) const { return active_[i]; }
  double dist(std::size_t i) const { return dist_[i]; }
  Polyline path_to(std::size_t i) const;
  /** Node indices of the shortest path from the source to i. */
  std::vector<std::size_t> path_nodes(std::size_t i) const;
  bool on_box_boundary(std::size_t i) const;

 private:
  double sqrt_phi(std::size_t i);
  double edge_weight(std::size_t a, std::size_t b);
  bool edge_allowed(const Point3& a, const Point3& b) const;
  template <class F>
  void for_each_neighbor(std::size_t i, F&& f);

  const MetricDescriptor& desc_;
  Point3 lo_;
  double cell_;
  double tol_;
  const Region* region_;
  std::size_t nx_, ny_, nz_, grid_count_;
  std::vector<Point3> positions_;
  std::vector<bool> active_;
  std::vector<double> sqrt_phi_;
  std::vector<double> dist_;
  std::vector<std::size_t> parent_;
  std::vector<std::vector<std::size_t>> extra_links_;
};

}  // namespace tcone
