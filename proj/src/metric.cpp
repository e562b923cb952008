#include "tcone/metric.hpp"

#include "tcone/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cstdio>
#include <functional>
#include <numbers>
#include <queue>
#include <stdexcept>

namespace tcone {

namespace {

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string ksequence_text(const KSequence& K, bool exact) {
  auto f = [&](double v) { return exact ? hex(v) : num(v); };
  switch (K.kind()) {
    case KSequence::Kind::Geometric:
      return "geometric," + f(K.K0()) + "," + f(K.beta());
    case KSequence::Kind::SuperGeometric:
      return "supergeometric," + f(K.K0()) + "," + f(K.beta());
    case KSequence::Kind::Explicit: {
      std::string s = "list";
      for (double v : K.values()) s += "," + f(v);
      return s;
    }
  }
  return {};
}

std::string descriptor_text(const MetricDescriptor& d, bool exact) {
  auto f = [&](double v) { return exact ? hex(v) : num(v); };
  using K = MetricDescriptor::Kind;
  switch (d.kind) {
    case K::Euclidean:
      return "euclidean";
    case K::InverseRadial:
      return "inverse-radial:" + f(d.theta);
    case K::AffineConformal:
      return "affine:" + f(d.c) + ":" + f(d.theta);
    case K::PotentialST:
      return "st:" + f(d.S) + ":" + f(d.T) + ":" + f(d.P) + ":" + f(d.alpha);
    case K::PotentialUnion: {
      std::string s = "union:" + f(d.alpha) + ":" + f(d.P) + ":";
      for (std::size_t i = 0; i < d.intervals.size(); ++i)
        s += (i ? ";" : "") + f(d.intervals[i].S) + "," + f(d.intervals[i].T);
      return s;
    }
    case K::RescaledLattice:
      return "lattice:" + f(d.lattice.alpha) + ":" + f(d.rp.a) + ":" + f(d.rp.P) + ":" + ksequence_text(d.lattice.K, exact);
  }
  return {};
}

double radial_factor(double c, double theta, const Point3& z) {
  const double r = z.norm();
  if (theta == 0.0) return c;
  if (r == 0.0) return kInf;
  return c + theta / r;
}

Point3 normalized(const Point3& p) {
  const double n = p.norm();
  return n > 0 ? p * (1.0 / n) : Point3{1, 0, 0};
}

Point3 cross(const Point3& a, const Point3& b) {
  return {a.zc1 * b.zc2 - a.zc2 * b.zc1, a.zc2 * b.zr - a.zr * b.zc2, a.zr * b.zc1 - a.zc1 * b.zr};
}

/** Five-point Gauss-Legendre length of a segment; used as the refinement objective. */
double gl_segment(const MetricDescriptor& desc, const Point3& a, const Point3& b, double tol) {
  using G = boost::math::quadrature::gauss<double, 5>;
  const double L = distance(a, b);
  if (L == 0.0) return 0.0;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  const Point3 m = (a + b) * 0.5, h = (b - a) * 0.5;
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) {
      s += w[i] * std::sqrt(conformal_factor(desc, m, tol).value);
    } else {
      s += w[i] * (std::sqrt(conformal_factor(desc, m + h * x[i], tol).value) +
                   std::sqrt(conformal_factor(desc, m - h * x[i], tol).value));
    }
  }
  return 0.5 * L * s;
}

bool segment_in_region(const Region* region, const Point3& a, const Point3& b) {
  if (!region) return true;
  for (double t : {0.0, 0.25, 0.5, 0.75, 1.0})
    if (!contains(*region, a + (b - a) * t)) return false;
  return true;
}

Polyline resample(const Polyline& p, std::size_t n) {
  std::vector<double> cum{0.0};
  for (std::size_t i = 1; i < p.size(); ++i) cum.push_back(cum.back() + distance(p.vertices[i - 1], p.vertices[i]));
  const double L = cum.back();
  std::vector<Point3> out{p.front()};
  std::size_t j = 1;
  for (std::size_t k = 1; k < n; ++k) {
    const double s = L * double(k) / double(n);
    while (j + 1 < p.size() && cum[j] < s) ++j;
    const double seg = cum[j] - cum[j - 1];
    const double t = seg > 0 ? (s - cum[j - 1]) / seg : 0.0;
    out.push_back(p.vertices[j - 1] + (p.vertices[j] - p.vertices[j - 1]) * t);
  }
  out.push_back(p.back());
  return Polyline(std::move(out));
}

Polyline subdivide(const Polyline& p) {
  std::vector<Point3> out{p.front()};
  for (std::size_t i = 1; i < p.size(); ++i) {
    out.push_back((p.vertices[i - 1] + p.vertices[i]) * 0.5);
    out.push_back(p.vertices[i]);
  }
  return Polyline(std::move(out));
}

bool polyline_in_region(const Region* region, const Polyline& p) {
  for (std::size_t i = 1; i < p.size(); ++i)
    if (!segment_in_region(region, p.vertices[i - 1], p.vertices[i])) return false;
  return true;
}

/** Gauss-Seidel sweeps of per-vertex transverse Newton steps on the discrete length. */
void relax(const MetricDescriptor& desc, std::vector<Point3>& v, double h, double tol, const Region* region) {
  const std::size_t n = v.size();
  if (n < 3) return;
  std::vector<double> seg(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) seg[i] = gl_segment(desc, v[i], v[i + 1], tol);
  const double delta = 1e-3 * h;
  for (int sweep = 0; sweep < 40; ++sweep) {
    double total = 0.0, gain = 0.0;
    for (double s : seg) total += s;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      auto obj = [&](const Point3& p, double* l, double* r) {
        *l = gl_segment(desc, v[i - 1], p, tol);
        *r = gl_segment(desc, p, v[i + 1], tol);
        return *l + *r;
      };
      const double f0 = seg[i - 1] + seg[i];
      if (!std::isfinite(f0)) continue;
      const Point3 t = normalized(v[i + 1] - v[i - 1]);
      Point3 e1 = cross(t, std::abs(t.zr) < 0.9 ? Point3{1, 0, 0} : Point3{0, 1, 0});
      e1 = normalized(e1);
      const Point3 e2 = cross(t, e1);
      Point3 step{};
      bool ok = true;
      for (const Point3& e : {e1, e2}) {
        double l, r;
        const double fp = obj(v[i] + e * delta, &l, &r), fm = obj(v[i] - e * delta, &l, &r);
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
          ok = false;
          break;
        }
        const double g = (fp - fm) / (2 * delta), H = (fp - 2 * f0 + fm) / (delta * delta);
        double s = 0.0;
        if (H > 0) s = -g / H;
        else if (g != 0) s = -std::copysign(0.25 * h, g);
        step = step + e * s;
      }
      if (!ok) continue;
      const double len = step.norm();
      if (len == 0.0) continue;
      if (len > 0.5 * h) step = step * (0.5 * h / len);
      for (int k = 0; k < 5; ++k, step = step * 0.5) {
        const Point3 q = v[i] + step;
        if (region && (!segment_in_region(region, v[i - 1], q) || !segment_in_region(region, q, v[i + 1]))) continue;
        double l, r;
        const double f1 = obj(q, &l, &r);
        if (f1 < f0) {
          v[i] = q;
          seg[i - 1] = l;
          seg[i] = r;
          gain += f0 - f1;
          break;
        }
      }
    }
    if (gain <= 1e-11 * total) break;
  }
}

Polyline refine(const MetricDescriptor& desc, const Polyline& raw, double cell, const SolverConfig& cfg,
                const Region* region) {
  const double L = raw.euclidean_length();
  if (L == 0.0) return raw;
  const double tol = 1e-2 * cfg.quadrature_tol;
  std::size_t n = 4;
  Polyline cur;
  cur = resample(raw, n);
  if (region && !polyline_in_region(region, cur)) {
    // Coarse chords can leave a non-convex region: retry at grid spacing, then fall back to the grid path.
    while (L / double(n) > cell) n *= 2;
    cur = resample(raw, n);
    if (!polyline_in_region(region, cur)) cur = raw;
  }
  double h = L / double(cur.size() - 1);
  int fine_rounds = 0;
  while (true) {
    relax(desc, cur.vertices, h, tol, region);
    if (h <= cell * (1 + 1e-12)) ++fine_rounds;
    if (fine_rounds >= cfg.refinement_rounds) break;
    cur = subdivide(cur);
    h *= 0.5;
  }
  return cur;
}

DistanceResult solve_distance(const MetricDescriptor& desc, const Point3& x, const Point3& y, const SolverConfig& cfg,
                              const Region* region) {
  cfg.validate();
  DistanceResult out;
  out.witness = Polyline({x, y});
  const double L = distance(x, y);
  if (L == 0.0) return out;
  const double cell = cfg.grid_resolution * L, pad = cfg.domain_padding * L;
  const Point3 lo{std::min(x.zr, y.zr) - pad, std::min(x.zc1, y.zc1) - pad, std::min(x.zc2, y.zc2) - pad};
  const Point3 hi{std::max(x.zr, y.zr) + pad, std::max(x.zc1, y.zc1) + pad, std::max(x.zc2, y.zc2) + pad};
  GridGraph g(desc, lo, hi, cell, std::max(cfg.quadrature_tol, 1e-6), region);
  const std::size_t sx = g.add_node(x), sy = g.add_node(y);
  g.solve(sx, sy);
  if (!std::isfinite(g.dist(sy))) {
    out.value = out.upper_bound = kInf;
    out.lower_bound = distance_lower_bound(desc, x, y);
    return out;
  }
  const Polyline raw = g.path_to(sy);
  const Polyline refined = refine(desc, raw, cell, cfg, region);
  const double raw_len = path_length(desc, raw, cfg.quadrature_tol).value;
  double best = raw_len;
  out.witness = raw;
  if (!region || polyline_in_region(region, refined)) {
    const double ref_len = path_length(desc, refined, cfg.quadrature_tol).value;
    if (ref_len < best) {
      best = ref_len;
      out.witness = refined;
    }
  }
  out.value = out.upper_bound = best;
  out.lower_bound = std::min(distance_lower_bound(desc, x, y), best);
  return out;
}

}  // namespace

MetricDescriptor MetricDescriptor::euclidean() { return {}; }

MetricDescriptor MetricDescriptor::inverse_radial(double theta) {
  if (!(theta > 0)) throw std::invalid_argument("inverse-radial metric needs theta > 0");
  MetricDescriptor d;
  d.kind = Kind::InverseRadial;
  d.theta = theta;
  return d;
}

MetricDescriptor MetricDescriptor::affine(double c, double theta) {
  if (!(c >= 0) || !(theta >= 0) || !(c + theta > 0)) throw std::invalid_argument("affine metric needs c, theta >= 0 and c + theta > 0");
  MetricDescriptor d;
  d.kind = Kind::AffineConformal;
  d.c = c;
  d.theta = theta;
  return d;
}

MetricDescriptor MetricDescriptor::potential_st(double S, double T, double P, double alpha) {
  if (!(alpha > 1)) throw std::domain_error("alpha must exceed 1");
  if (!(S >= 0) || !(T > S) || !(P > 0)) throw std::domain_error("need 0 <= S < T and P > 0");
  MetricDescriptor d;
  d.kind = Kind::PotentialST;
  d.S = S;
  d.T = T;
  d.P = P;
  d.alpha = alpha;
  return d;
}

MetricDescriptor MetricDescriptor::potential_union(IntervalUnion I, double P, double alpha) {
  if (!(alpha > 1)) throw std::domain_error("alpha must exceed 1");
  if (!(P > 0)) throw std::domain_error("P must be positive");
  validate_union(I);
  MetricDescriptor d;
  d.kind = Kind::PotentialUnion;
  d.intervals = std::move(I);
  d.P = P;
  d.alpha = alpha;
  return d;
}

MetricDescriptor MetricDescriptor::rescaled_lattice(LatticeSpec spec, RescaleParams rp) {
  if (!(rp.a > 0) || !(rp.P > 0)) throw std::domain_error("a and P must be positive");
  MetricDescriptor d;
  d.kind = Kind::RescaledLattice;
  d.alpha = spec.alpha;
  d.lattice = std::move(spec);
  d.rp = rp;
  return d;
}

std::string MetricDescriptor::fingerprint() const { return descriptor_text(*this, true); }
std::string MetricDescriptor::name() const { return descriptor_text(*this, false); }

void SolverConfig::validate() const {
  if (!(grid_resolution > 0) || refinement_rounds < 1 || !(quadrature_tol > 0) || !(domain_padding > 0))
    throw std::invalid_argument("solver configuration values must be positive");
}

EvalResult conformal_factor(const MetricDescriptor& desc, const Point3& z, double tol) {
  using K = MetricDescriptor::Kind;
  switch (desc.kind) {
    case K::Euclidean:
      return {1.0, 0.0};
    case K::InverseRadial:
      return {radial_factor(0.0, desc.theta, z), 0.0};
    case K::AffineConformal:
      return {radial_factor(desc.c, desc.theta, z), 0.0};
    case K::PotentialST:
      return phi_ST(desc.S, desc.T, desc.P, desc.alpha, z, tol);
    case K::PotentialUnion:
      return phi_interval_union(desc.intervals, desc.P, desc.alpha, z, tol);
    case K::RescaledLattice:
      return phi_a(desc.lattice, desc.rp, z, tol);
  }
  return {kInf, 0.0};
}

EvalResult segment_length(const MetricDescriptor& desc, const Point3& a, const Point3& b, double tol) {
  const Point3 d = b - a;
  const double L = d.norm();
  if (L == 0.0) return {};
  if (desc.kind == MetricDescriptor::Kind::Euclidean) return {L, 0.0};
  const double phi_tol = std::max(tol, 1e-13);
  auto f = [&](double t) { return std::sqrt(conformal_factor(desc, a + d * t, phi_tol).value) * L; };

  std::vector<double> cuts{0.0, 1.0};
  const double t_origin = -dot(a, d) / (L * L);
  if (t_origin > 0 && t_origin < 1) cuts.push_back(t_origin);
  const double dc2 = d.zc1 * d.zc1 + d.zc2 * d.zc2;
  if (dc2 > 0) {
    const double t_axis = -(a.zc1 * d.zc1 + a.zc2 * d.zc2) / dc2;
    if (t_axis > 0 && t_axis < 1) cuts.push_back(t_axis);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  EvalResult out;
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    const double t0 = cuts[i - 1], t1 = cuts[i], w = t1 - t0;
    if (!(w > 0)) continue;
    if (std::isinf(f(t0 + 0.25 * w)) && std::isinf(f(t0 + 0.5 * w)) && std::isinf(f(t0 + 0.75 * w))) return {kInf, 0.0};
    const double share = tol * w;
    QuadResult q;
    const bool singular_end = std::isinf(conformal_factor(desc, a + d * t0, phi_tol).value) ||
                              std::isinf(conformal_factor(desc, a + d * t1, phi_tol).value);
    q = integrate_adaptive(f, t0, t1, share, 4000);
    if (singular_end && !(q.error <= 10 * share)) {
      // Points are built from the nearer endpoint so that rounding never lands on the singular point itself.
      const Point3 e0 = t0 == 0.0 ? a : a + d * t0, e1 = t1 == 1.0 ? b : a + d * t1;
      auto g = [&](double, double tc) {
        const Point3 p = tc < 0 ? e0 + d * (-tc) : e1 - d * tc;
        return std::sqrt(conformal_factor(desc, p, phi_tol).value) * L;
      };
      try {
        auto ts = integrate_endpoint_singular(g, t0, t1, 1e-10);
        ts.error = std::max(ts.error, 1e-10 * std::abs(ts.value));
        if (std::isfinite(ts.value) && ts.error < q.error) q = ts;
      } catch (const std::exception&) {
      }
    }
    if (!std::isfinite(q.value)) return {kInf, 0.0};
    out.value += q.value;
    out.error_bound += q.error;
  }
  return out;
}

EvalResult path_length(const MetricDescriptor& desc, const Polyline& gamma, double tol) {
  const double L = gamma.euclidean_length();
  EvalResult out;
  if (L == 0.0) return out;
  for (std::size_t i = 1; i < gamma.size(); ++i) {
    const double seg = distance(gamma.vertices[i - 1], gamma.vertices[i]);
    if (seg == 0.0) continue;
    auto r = segment_length(desc, gamma.vertices[i - 1], gamma.vertices[i], tol * seg / L);
    if (std::isinf(r.value)) return {kInf, 0.0};
    out.value += r.value;
    out.error_bound += r.error_bound;
  }
  return out;
}

double cone_oracle_distance(double theta, const Point3& x, const Point3& y) {
  if (!(theta > 0)) throw std::invalid_argument("theta must be positive");
  const double rx = x.norm(), ry = y.norm();
  const double Rx = 2.0 * std::sqrt(theta * rx), Ry = 2.0 * std::sqrt(theta * ry);
  double angle = 0.0;
  if (rx > 0 && ry > 0) angle = std::acos(std::clamp(dot(x, y) / (rx * ry), -1.0, 1.0));
  const double link = std::min(0.5 * angle, std::numbers::pi);
  return std::sqrt(std::max(0.0, Rx * Rx + Ry * Ry - 2.0 * Rx * Ry * std::cos(link)));
}

std::optional<double> exact_distance(const MetricDescriptor& desc, const Point3& x, const Point3& y) {
  switch (desc.kind) {
    case MetricDescriptor::Kind::Euclidean:
      return distance(x, y);
    case MetricDescriptor::Kind::InverseRadial:
      return cone_oracle_distance(desc.theta, x, y);
    case MetricDescriptor::Kind::AffineConformal:
      if (desc.theta == 0.0) return std::sqrt(desc.c) * distance(x, y);
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

double distance_lower_bound(const MetricDescriptor& desc, const Point3& x, const Point3& y) {
  switch (desc.kind) {
    case MetricDescriptor::Kind::Euclidean:
    case MetricDescriptor::Kind::InverseRadial:
      return *exact_distance(desc, x, y);
    case MetricDescriptor::Kind::AffineConformal: {
      // Phi >= c and Phi >= theta/|z| pointwise.
      double lb = std::sqrt(desc.c) * distance(x, y);
      if (desc.theta > 0) lb = std::max(lb, cone_oracle_distance(desc.theta, x, y));
      return lb;
    }
    default:
      return 0.0;
  }
}

DistanceResult distance(const MetricDescriptor& desc, const Point3& x, const Point3& y, const SolverConfig& cfg) {
  return solve_distance(desc, x, y, cfg, nullptr);
}

DistanceResult distance_restricted(const MetricDescriptor& desc, const Point3& x, const Point3& y, const Region& region,
                                   const SolverConfig& cfg) {
  if (!contains(region, x) || !contains(region, y)) throw std::invalid_argument("endpoints must lie in the region");
  return solve_distance(desc, x, y, cfg, &region);
}

Polyline project_path(const Polyline& gamma, double D) {
  if (gamma.size() == 0) throw std::invalid_argument("empty path");
  const Point3& p0 = gamma.front();
  if (std::abs(p0.transverse_norm() - D) > 1e-9 * std::max(1.0, D))
    throw std::invalid_argument("path must start on the slab boundary");
  std::vector<Point3> v;
  v.reserve(gamma.size());
  for (const auto& p : gamma.vertices) v.push_back({p.zr, p0.zc1, p0.zc2});
  return Polyline(std::move(v), gamma.params);
}

Point3 lift_point(const Point3& z, double D) {
  if (!(D > 0)) throw std::invalid_argument("D must be positive");
  const double r = z.transverse_norm();
  if (r == 0.0) return {z.zr, D, 0.0};
  return {z.zr, D * z.zc1 / r, D * z.zc2 / r};
}

Polyline modify_path(const Polyline& gamma, double D) {
  if (gamma.size() < 2) throw std::invalid_argument("path needs two vertices");
  if (gamma.front().transverse_norm() < D || gamma.back().transverse_norm() < D)
    throw std::invalid_argument("endpoints must lie outside the open slab");

  // Insert the slab-boundary crossings so that every excursion starts and ends at a vertex.
  std::vector<Point3> v{gamma.front()};
  std::vector<bool> on_boundary{false};
  for (std::size_t i = 1; i < gamma.size(); ++i) {
    const Point3 a = gamma.vertices[i - 1], b = gamma.vertices[i], d = b - a;
    const double A = d.zc1 * d.zc1 + d.zc2 * d.zc2, B = 2 * (a.zc1 * d.zc1 + a.zc2 * d.zc2),
                 C = a.zc1 * a.zc1 + a.zc2 * a.zc2 - D * D;
    std::vector<double> roots;
    if (A > 0) {
      const double disc = B * B - 4 * A * C;
      if (disc > 0) {
        const double s = std::sqrt(disc);
        for (double t : {(-B - s) / (2 * A), (-B + s) / (2 * A)})
          if (t > 0 && t < 1) roots.push_back(t);
      }
    }
    for (double t : roots) {
      Point3 p = a + d * t;
      p = lift_point(p, D);  // remove rounding off the circle
      v.push_back(p);
      on_boundary.push_back(true);
    }
    v.push_back(b);
    on_boundary.push_back(std::abs(b.transverse_norm() - D) <= 1e-12 * D);
  }
  on_boundary[0] = std::abs(v[0].transverse_norm() - D) <= 1e-12 * D;

  auto inside = [&](const Point3& p) { return p.transverse_norm() < D * (1 - 1e-12); };
  std::vector<Point3> out;
  double rot = 0.0;
  std::size_t last_exit = v.size();
  std::size_t i = 0;
  while (i < v.size()) {
    const bool enters = i + 1 < v.size() && on_boundary[i] && inside((v[i] + v[i + 1]) * 0.5);
    if (!enters) {
      out.push_back(rotate_transverse(v[i], rot));
      ++i;
      continue;
    }
    // Excursion from v[i] (entry) to the next boundary vertex v[j] (exit).
    std::size_t j = i + 1;
    while (j < v.size() && !on_boundary[j]) ++j;
    if (j == v.size()) throw std::invalid_argument("path ends inside the slab");
    const Point3 entry = rotate_transverse(v[i], rot);
    for (std::size_t k = i; k < j; ++k) out.push_back({v[k].zr, entry.zc1, entry.zc2});
    rot += std::atan2(v[i].zc2, v[i].zc1) - std::atan2(v[j].zc2, v[j].zc1);
    last_exit = j;
    i = j;
  }
  if (last_exit == v.size()) return Polyline(std::move(out));

  // out[last_exit] is the rotated exit point; unwind the rotation along the boundary circle there.
  double turn = std::remainder(rot, 2 * std::numbers::pi);
  std::vector<Point3> result(out.begin(), out.begin() + std::ptrdiff_t(last_exit) + 1);
  if (std::abs(turn) > 0) {
    const int pieces = std::max(2, int(std::ceil(std::abs(turn) / (std::numbers::pi / 64))));
    const double dth = turn / pieces;
    const double radius = D / std::cos(0.5 * std::abs(dth));  // chords stay outside the open slab
    const Point3& e = v[last_exit];
    const double base = std::atan2(e.zc2, e.zc1);
    for (int k = pieces; k >= 0; --k) {
      const double ang = base + dth * k;
      result.push_back({e.zr, radius * std::cos(ang), radius * std::sin(ang)});
    }
  }
  for (std::size_t k = last_exit; k < v.size(); ++k) result.push_back(v[k]);
  return Polyline(std::move(result));
}

GridGraph::GridGraph(const MetricDescriptor& desc, const Point3& lo, const Point3& hi, double cell, double tol,
                     const Region* region)
    : desc_(desc), lo_(lo), cell_(cell), tol_(tol), region_(region) {
  if (!(cell > 0)) throw std::invalid_argument("grid cell must be positive");
  auto count = [&](double a, double b) { return std::size_t(std::ceil((b - a) / cell - 1e-9)) + 1; };
  nx_ = std::max<std::size_t>(2, count(lo.zr, hi.zr));
  ny_ = std::max<std::size_t>(2, count(lo.zc1, hi.zc1));
  nz_ = std::max<std::size_t>(2, count(lo.zc2, hi.zc2));
  grid_count_ = nx_ * ny_ * nz_;
  positions_.resize(grid_count_);
  active_.resize(grid_count_);
  for (std::size_t k = 0; k < nz_; ++k)
    for (std::size_t j = 0; j < ny_; ++j)
      for (std::size_t i = 0; i < nx_; ++i) {
        const std::size_t id = i + nx_ * (j + ny_ * k);
        auto snap = [&](double v) { return std::abs(v) < 1e-9 * cell ? 0.0 : v; };
        positions_[id] = {snap(lo.zr + cell * double(i)), snap(lo.zc1 + cell * double(j)), snap(lo.zc2 + cell * double(k))};
        active_[id] = !region || contains(*region, positions_[id]);
      }
  sqrt_phi_.assign(grid_count_, -1.0);
  extra_links_.resize(grid_count_);
}

std::size_t GridGraph::add_node(const Point3& p) {
  const std::size_t id = positions_.size();
  positions_.push_back(p);
  active_.push_back(!region_ || contains(*region_, p));
  sqrt_phi_.push_back(-1.0);
  extra_links_.emplace_back();
  auto cell_index = [&](double x, double lo, std::size_t n) {
    const double c = std::floor((x - lo) / cell_);
    return std::size_t(std::clamp(c, 0.0, double(n - 2)));
  };
  const std::size_t ci = cell_index(p.zr, lo_.zr, nx_), cj = cell_index(p.zc1, lo_.zc1, ny_),
                    ck = cell_index(p.zc2, lo_.zc2, nz_);
  for (std::size_t dk = 0; dk < 2; ++dk)
    for (std::size_t dj = 0; dj < 2; ++dj)
      for (std::size_t di = 0; di < 2; ++di) {
        const std::size_t g = (ci + di) + nx_ * ((cj + dj) + ny_ * (ck + dk));
        if (!active_[g]) continue;
        extra_links_[id].push_back(g);
        extra_links_[g].push_back(id);
      }
  // Free nodes sharing a cell are joined directly.
  for (std::size_t other = grid_count_; other < id; ++other) {
    if (distance(positions_[other], p) <= cell_ * std::sqrt(3.0)) {
      extra_links_[id].push_back(other);
      extra_links_[other].push_back(id);
    }
  }
  return id;
}

double GridGraph::sqrt_phi(std::size_t i) {
  if (sqrt_phi_[i] < 0) sqrt_phi_[i] = std::sqrt(conformal_factor(desc_, positions_[i], tol_).value);
  return sqrt_phi_[i];
}

bool GridGraph::edge_allowed(const Point3& a, const Point3& b) const { return segment_in_region(region_, a, b); }

double GridGraph::edge_weight(std::size_t a, std::size_t b) {
  double va = sqrt_phi(a), vb = sqrt_phi(b);
  const double len = distance(positions_[a], positions_[b]);
  if (len == 0.0) return 0.0;
  if (std::isinf(va) && std::isinf(vb)) return kInf;
  if (std::max(va, vb) <= 4.0 * std::min(va, vb)) return 0.5 * (va + vb) * len;
  // Graded rule toward the larger end: t = 1 - s^2 absorbs an inverse-square-root spike there.
  Point3 p = positions_[a], q = positions_[b];
  if (va > vb) std::swap(p, q);
  using G = boost::math::quadrature::gauss<double, 10>;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (double sgn : {-1.0, 1.0}) {
      const double s = 0.5 * (1.0 + sgn * x[i]);
      sum += 0.5 * w[i] * 2.0 * s * std::sqrt(conformal_factor(desc_, q + (p - q) * (s * s), tol_).value);
    }
  return sum * len;
}

template <class F>
void GridGraph::for_each_neighbor(std::size_t id, F&& f) {
  if (id < grid_count_) {
    const std::size_t i = id % nx_, j = (id / nx_) % ny_, k = id / (nx_ * ny_);
    for (int dk = -1; dk <= 1; ++dk)
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          if (!di && !dj && !dk) continue;
          const long ii = long(i) + di, jj = long(j) + dj, kk = long(k) + dk;
          if (ii < 0 || jj < 0 || kk < 0 || ii >= long(nx_) || jj >= long(ny_) || kk >= long(nz_)) continue;
          f(std::size_t(ii) + nx_ * (std::size_t(jj) + ny_ * std::size_t(kk)));
        }
  }
  for (std::size_t n : extra_links_[id]) f(n);
}

void GridGraph::solve(std::size_t source, std::optional<std::size_t> target) {
  const std::size_t n = positions_.size();
  dist_.assign(n, kInf);
  parent_.assign(n, n);
  std::vector<bool> done(n, false);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist_[source] = 0.0;
  queue.push({0.0, source});
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (done[u]) continue;
    done[u] = true;
    if (target && u == *target) break;
    for_each_neighbor(u, [&](std::size_t w) {
      if (done[w] || !active_[w]) return;
      if (!edge_allowed(positions_[u], positions_[w])) return;
      const double nd = d + edge_weight(u, w);
      if (nd < dist_[w]) {
        dist_[w] = nd;
        parent_[w] = u;
        queue.push({nd, w});
      }
    });
  }
}

std::vector<std::size_t> GridGraph::path_nodes(std::size_t i) const {
  if (!std::isfinite(dist_[i])) throw std::runtime_error("node not reached");
  std::vector<std::size_t> v;
  for (std::size_t c = i; c != positions_.size(); c = parent_[c]) v.push_back(c);
  std::reverse(v.begin(), v.end());
  return v;
}

bool GridGraph::on_box_boundary(std::size_t i) const {
  if (i >= grid_count_) return false;
  const std::size_t x = i % nx_, y = (i / nx_) % ny_, z = i / (nx_ * ny_);
  return x == 0 || y == 0 || z == 0 || x + 1 == nx_ || y + 1 == ny_ || z + 1 == nz_;
}

Polyline GridGraph::path_to(std::size_t i) const {
  if (!std::isfinite(dist_[i])) throw std::runtime_error("node not reached");
  std::vector<Point3> v;
  for (std::size_t c = i; c != positions_.size(); c = parent_[c]) v.push_back(positions_[c]);
  std::reverse(v.begin(), v.end());
  if (v.size() == 1) v.push_back(v.front());
  return Polyline(std::move(v));
}

}  // namespace tcone
