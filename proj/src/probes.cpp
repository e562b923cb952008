#include "tcone/probes.hpp"

#include "tcone/util.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tcone {

namespace {

constexpr int kMaxBoxDoublings = 6;

double pair_distance(const MetricDescriptor& d, const Point3& x, const Point3& y, const SolverConfig& cfg) {
  if (auto e = exact_distance(d, x, y)) return *e;
  return distance(d, x, y, cfg).value;
}

// true when some node on the box boundary is closer than `radius` to the source
bool ball_touches_box(const GridGraph& g, double radius) {
  for (std::size_t i = 0; i < g.node_count(); ++i)
    if (g.on_box_boundary(i) && g.dist(i) < radius) return true;
  return false;
}

// first point with |z_C| = D on the segment from a (outside) to b (inside), by bisection
Point3 slab_crossing(const Point3& a, const Point3& b, double D) {
  double lo = 0.0, hi = 1.0;
  for (int k = 0; k < 80; ++k) {
    const double mid = 0.5 * (lo + hi);
    if ((a + (b - a) * mid).transverse_norm() >= D)
      lo = mid;
    else
      hi = mid;
  }
  return lift_point(a + (b - a) * lo, D);
}

}  // namespace

IsometryCheckResult eps_isometry_check(const MetricDescriptor& A, const MetricDescriptor& B, double r, double epsilon,
                                       std::size_t nsamples, const SolverConfig& cfg, std::uint64_t seed) {
  if (!(epsilon > 0) || !(r > epsilon)) throw std::domain_error("isometry check needs r > epsilon > 0");
  if (nsamples == 0) throw std::invalid_argument("isometry check needs samples");
  cfg.validate();
  const double tol = std::max(cfg.quadrature_tol, 1e-6);

  IsometryCheckResult out;
  out.r = r;
  out.epsilon = epsilon;

  // grow the box until both balls sit strictly inside it
  double u = std::max(r, 1.0);
  for (int round = 0;; ++round) {
    const double cell = 0.5 * u * cfg.grid_resolution;
    GridGraph ga(A, {-u, -u, -u}, {u, u, u}, cell, tol);
    GridGraph gb(B, {-u, -u, -u}, {u, u, u}, cell, tol);
    const std::size_t sa = ga.add_node({0, 0, 0}), sb = gb.add_node({0, 0, 0});
    ga.solve(sa);
    gb.solve(sb);
    if ((ball_touches_box(ga, r) || ball_touches_box(gb, r - epsilon)) && round < kMaxBoxDoublings) {
      u *= 2.0;
      continue;
    }
    out.net_cell = cell;

    // distortion over pairs drawn from B_A(0, r)
    std::vector<std::size_t> inside;
    for (std::size_t i = 0; i < ga.node_count(); ++i)
      if (i != sa && ga.dist(i) < r) inside.push_back(i);
    Rng rng(derive_seed(seed, "isometry"));
    const std::size_t want = std::min(inside.size(), 2 * nsamples);
    for (std::size_t k = 0; k < want; ++k) std::swap(inside[k], inside[k + rng.next() % (inside.size() - k)]);
    inside.resize(want);
    std::vector<std::pair<Point3, Point3>> pairs;
    for (std::size_t k = 0; k + 1 < inside.size(); k += 2) pairs.emplace_back(ga.position(inside[k]), ga.position(inside[k + 1]));
    if (!inside.empty()) pairs.emplace_back(Point3{0, 0, 0}, ga.position(inside.front()));
    const auto diffs = parallel_map(pairs.size(), [&](std::size_t k) {
      return std::abs(pair_distance(A, pairs[k].first, pairs[k].second, cfg) -
                      pair_distance(B, pairs[k].first, pairs[k].second, cfg));
    });
    out.pairs = pairs.size();
    for (double d : diffs) out.distortion_observed = std::max(out.distortion_observed, d);

    // surjectivity: every net point of B_B(0, r - epsilon) needs an image point within epsilon
    for (std::size_t q = 0; q < gb.node_count(); ++q) {
      if (!(gb.dist(q) < r - epsilon)) continue;
      ++out.net_points;
      if (ga.dist(q) < r) continue;
      const auto path = gb.path_nodes(q);
      double defect = gb.dist(q);  // the source itself is always an image point
      for (auto it = path.rbegin(); it != path.rend(); ++it)
        if (ga.dist(*it) < r) {
          defect = gb.dist(q) - gb.dist(*it);
          break;
        }
      out.surjectivity_defect = std::max(out.surjectivity_defect, defect);
    }
    break;
  }
  out.passed = out.distortion_observed < epsilon && out.surjectivity_defect < epsilon;
  return out;
}

std::vector<std::pair<double, double>> axis_segment_length(double alpha, double t0, double t1,
                                                           const std::vector<double>& delta_list) {
  if (!(t0 > 0) || !(t1 >= t0)) throw std::domain_error("axis segment needs 0 < t0 <= t1");
  for (std::size_t k = 0; k < delta_list.size(); ++k) {
    if (!(delta_list[k] > 0)) throw std::domain_error("offsets must be positive");
    if (k > 0 && !(delta_list[k] < delta_list[k - 1])) throw std::invalid_argument("offsets must decrease");
  }
  const auto desc = MetricDescriptor::potential_st(0.0, kInf, 1.0, alpha);
  std::vector<std::pair<double, double>> out;
  for (double delta : delta_list)
    out.emplace_back(delta, segment_length(desc, {t0, delta, 0}, {t1, delta, 0}, 1e-10).value);
  return out;
}

SqrtLogFit fit_sqrt_log(const std::vector<std::pair<double, double>>& data) {
  if (data.size() < 2) throw std::invalid_argument("fit needs two points");
  const double n = double(data.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (auto [delta, len] : data) {
    const double x = std::sqrt(std::log(1.0 / delta));
    sx += x;
    sy += len;
    sxx += x * x;
    sxy += x * len;
    syy += len * len;
  }
  const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
  if (!(vx > 0)) throw std::invalid_argument("fit needs distinct offsets");
  SqrtLogFit f;
  f.c2 = cxy / vx;
  f.c1 = (sy - f.c2 * sx) / n;
  f.r2 = vy > 0 ? cxy * cxy / (vx * vy) : 1.0;
  return f;
}

PoleTestResult pole_test_at_origin(const MetricDescriptor& desc, const Point3& p, const std::vector<double>& D_list,
                                   const SolverConfig& cfg) {
  if (!(p.zr > 0) || p.transverse_norm() != 0.0) throw std::domain_error("pole test needs p on the positive axis");
  if (D_list.empty()) throw std::invalid_argument("pole test needs offsets");
  const double tol = std::max(cfg.quadrature_tol, 1e-10);
  PoleTestResult out;
  double smallest = kInf, at_smallest = kInf;
  for (double D : D_list) {
    if (!(D > 0)) throw std::domain_error("offsets must be positive");
    const Polyline near_axis({{0, 0, 0}, {0, D, 0}, {p.zr, D, 0}, p});
    const double len = path_length(desc, near_axis, tol).value;
    out.straight_lengths.emplace_back(D, len);
    if (D < smallest) {
      smallest = D;
      at_smallest = len;
    }
  }
  const auto res = distance(desc, {0, 0, 0}, p, cfg);
  out.detour_distance = res.value;
  out.verdict = std::isfinite(res.value) && res.value < at_smallest ? "no geodesic through the axis" : "inconclusive";

  // last slab excursion of the witness, entering through |z_C| = D
  const auto& w = res.witness.vertices;
  double cmax = 0.0;
  for (const auto& v : w) cmax = std::max(cmax, v.transverse_norm());
  if (cmax > 0) {
    const double D = 0.5 * cmax;
    out.slab_D = D;
    std::size_t enter = w.size();
    for (std::size_t k = 1; k < w.size(); ++k)
      if (w[k - 1].transverse_norm() >= D && w[k].transverse_norm() < D) enter = k;
    if (enter < w.size()) {
      std::vector<Point3> ex{slab_crossing(w[enter - 1], w[enter], D)};
      for (std::size_t k = enter; k < w.size() && w[k].transverse_norm() < D; ++k) ex.push_back(w[k]);
      const Polyline excursion(ex);
      out.excursion_length = path_length(desc, excursion, tol).value;
      out.projected_length = path_length(desc, project_path(excursion, D), tol).value;
      out.projection_shortens = out.projected_length < out.excursion_length;
    }
  }
  return out;
}

}  // namespace tcone
