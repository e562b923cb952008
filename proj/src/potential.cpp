#include "tcone/potential.hpp"

#include "tcone/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tcone {

// ---------------------------------------------------------------- K sequences

KSequence KSequence::explicit_list(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("K sequence: empty list");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0) || std::floor(values[i]) != values[i])
      throw std::invalid_argument("K sequence: entries must be nonnegative integers");
    if (i > 0 && !(values[i] > values[i - 1])) throw std::invalid_argument("K sequence: must increase strictly");
  }
  KSequence k;
  k.kind_ = Kind::Explicit;
  k.values_ = std::move(values);
  return k;
}

KSequence KSequence::geometric(double K0, double beta) {
  if (!(K0 >= 1.0) || !(beta > 1.0)) throw std::invalid_argument("geometric K: need K0 >= 1, beta > 1");
  KSequence k;
  k.kind_ = Kind::Geometric;
  k.K0_ = K0;
  k.beta_ = beta;
  return k;
}

KSequence KSequence::super_geometric(double K0, double beta) {
  if (!(K0 >= 1.0) || !(beta > 1.0)) throw std::invalid_argument("super-geometric K: need K0 >= 1, beta > 1");
  KSequence k;
  k.kind_ = Kind::SuperGeometric;
  k.K0_ = K0;
  k.beta_ = beta;
  return k;
}

double KSequence::operator()(std::size_t n) const {
  if (kind_ == Kind::Explicit) return n < values_.size() ? values_[n] : kInf;
  const double lg = log_value(n);
  if (lg > 700.0) return kInf;
  const double exponent = kind_ == Kind::Geometric ? double(n) : double(n) * double(n);
  // ceil of K0 beta^e; the product is exact enough below 2^53, and above that ceil is the identity.
  return std::ceil(K0_ * std::pow(beta_, exponent) * (1.0 - 4e-16));
}

double KSequence::log_value(std::size_t n) const {
  if (kind_ == Kind::Explicit) {
    const double v = (*this)(n);
    if (!(v > 0.0)) throw std::domain_error("log of nonpositive K");
    return std::log(v);
  }
  const double exponent = kind_ == Kind::Geometric ? double(n) : double(n) * double(n);
  const double lg = std::log(K0_) + exponent * std::log(beta_);
  if (lg < 36.0) return std::log(std::ceil(K0_ * std::pow(beta_, exponent) * (1.0 - 4e-16)));
  return lg;
}

std::size_t KSequence::block_count() const {
  if (kind_ != Kind::Explicit) return static_cast<std::size_t>(-1);
  return (values_.size() + 1) / 2;
}

LatticeSpec make_lattice(double alpha, KSequence K) {
  if (!(alpha > 1.0)) throw std::domain_error("lattice requires alpha > 1");
  return LatticeSpec{alpha, std::move(K)};
}

double rescale_N(double alpha, const RescaleParams& rp) {
  if (!(rp.a > 0.0) || !(rp.P > 0.0)) throw std::domain_error("rescaling requires a > 0 and P > 0");
  return std::pow(rp.P / rp.a, 1.0 / (1.0 + alpha));
}

double rescaled_S(const LatticeSpec& spec, const RescaleParams& rp, std::size_t n) {
  return spec.K(2 * n) / rescale_N(spec.alpha, rp);
}

double rescaled_T(const LatticeSpec& spec, const RescaleParams& rp, std::size_t n) {
  return spec.K(2 * n + 1) / rescale_N(spec.alpha, rp);
}

void validate_union(const IntervalUnion& I) {
  if (I.empty()) throw std::domain_error("interval union is empty");
  for (std::size_t i = 0; i < I.size(); ++i) {
    if (!(I[i].S >= 0.0) || !(I[i].T > I[i].S)) throw std::domain_error("interval union: need 0 <= S < T");
    if (i > 0 && !(I[i].S > I[i - 1].T)) throw std::domain_error("interval union: intervals must be sorted and disjoint");
    if (std::isinf(I[i].T) && i + 1 != I.size()) throw std::domain_error("interval union: only the last interval may be unbounded");
  }
}

// ------------------------------------------------------------ curve kernel

namespace {

/** g(x) = 1/|z - P(x^alpha,0,0)| written with u = P x^alpha - zr and rho = |z_C|. */
struct CurveKernel {
  double P, alpha, zr, rho;

  double operator()(double x) const {
    const double u = P * std::pow(x, alpha) - zr;
    return 1.0 / std::sqrt(u * u + rho * rho);
  }
  double deriv(double x) const {
    if (x <= 0.0) return 0.0;
    const double w = P * std::pow(x, alpha);
    const double u = w - zr;
    const double q = u * u + rho * rho;
    return -u * (alpha * w / x) / (q * std::sqrt(q));
  }
};

double kahan_add(double& sum, double& comp, double v) {
  const double t = sum + v;
  if (std::abs(sum) >= std::abs(v))
    comp += (sum - t) + v;
  else
    comp += (v - t) + sum;
  sum = t;
  return sum;
}

/** Integral of g over [L, H] (H may be inf) by the expansion 1/|w e1 - z| = sum |z|^n P_n(cos) / w^{n+1}. */
EvalResult far_series(double P, double alpha, double zr, double norm, double L, double H) {
  if (norm == 0.0) {
    const double hi = std::isinf(H) ? 0.0 : std::pow(H, 1.0 - alpha);
    return {(std::pow(L, 1.0 - alpha) - hi) / (P * (alpha - 1.0)), 0.0};
  }
  const double c = std::clamp(zr / norm, -1.0, 1.0);
  const double q = norm / (P * std::pow(L, alpha));
  const double pref = std::pow(L, 1.0 - alpha) / P;
  const double ratio = std::isinf(H) ? 0.0 : L / H;
  const double ratio_a = std::pow(ratio, alpha);
  double p_prev = 1.0, p_cur = c;  // P_0, P_1
  double qn = 1.0, ran = ratio_a;   // q^n and ratio^{alpha (n+1)}
  double sum = 0.0, comp = 0.0;
  int n = 0;
  for (;; ++n) {
    const double pn = (n == 0) ? 1.0 : p_cur;
    const double k = alpha * (n + 1) - 1.0;
    const double endfac = ratio > 0.0 ? 1.0 - ran / ratio : 1.0;
    kahan_add(sum, comp, pref * qn * pn * endfac / k);
    if (n >= 1) {
      const double p_next = ((2.0 * n + 1.0) * c * p_cur - n * p_prev) / (n + 1.0);
      p_prev = p_cur;
      p_cur = p_next;
    }
    qn *= q;
    ran *= ratio_a;
    if (qn < 1e-18 || n > 200) break;
  }
  const double remainder = pref * qn / ((alpha * (n + 2) - 1.0) * (1.0 - q));
  return {sum + comp, remainder};
}

EvalResult near_integral(const CurveKernel& g, double norm, double a, double b, double tol) {
  std::vector<double> pts{a, b};
  auto add = [&](double x) {
    if (x > a && x < b) pts.push_back(x);
  };
  double center = 0.0, width = 0.0;
  if (g.zr > 0.0) {
    center = std::pow(g.zr / g.P, 1.0 / g.alpha);
    if (g.rho == 0.0 && center >= a && center <= b) return {kInf, 0.0};
    const double slope = g.P * g.alpha * std::pow(center, g.alpha - 1.0);
    width = slope > 0.0 ? g.rho / slope : 0.0;
    if (width == 0.0) width = std::max(a - center, center - b);  // rho = 0 with the spike outside [a, b]
    add(center);
  } else {
    if (norm == 0.0 && a == 0.0) return {kInf, 0.0};
    width = std::pow(norm / g.P, 1.0 / g.alpha);
  }
  if (width > 0.0) {
    const double span = 2.0 * (b - a);
    for (double d = width; d < span; d *= 4.0) {
      add(center - d);
      add(center + d);
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const double panel_tol = tol / double(pts.size());
  EvalResult out;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    auto r = integrate_adaptive(g, pts[i - 1], pts[i], panel_tol);
    if (std::isinf(r.value)) return {kInf, 0.0};
    out.value += r.value;
    out.error_bound += r.error;
  }
  return out;
}

}  // namespace

double curve_tail_bound(double t, double P, double alpha) { return 2.0 * std::pow(t, 1.0 - alpha) / (P * (alpha - 1.0)); }

EvalResult curve_integral(double P, double alpha, const Point3& z, double lo, double hi, double tol) {
  if (!(hi > lo)) return {};
  const double zr = z.zr, rho = z.transverse_norm(), norm = z.norm();
  const CurveKernel g{P, alpha, zr, rho};
  const double x_far = std::pow(4.0 * norm / P, 1.0 / alpha);
  EvalResult out;
  const double near_hi = std::min(hi, x_far);
  if (near_hi > lo) {
    out = near_integral(g, norm, lo, near_hi, 0.5 * tol);
    if (std::isinf(out.value)) return out;
  }
  if (hi > x_far) {
    const double L = std::max(lo, x_far);
    if (L == 0.0) return {kInf, 0.0};  // z = 0 with the curve starting at the origin
    auto f = far_series(P, alpha, zr, norm, L, hi);
    out.value += f.value;
    out.error_bound += f.error_bound;
  }
  return out;
}

// ------------------------------------------------------------ lattice sums

namespace {

/** Real roots of a3 u^3 + a2 u^2 + a1 u + a0 (a3 > 0), found by bracketing between critical points. */
std::vector<double> cubic_roots(double a3, double a2, double a1, double a0) {
  auto f = [&](double u) { return ((a3 * u + a2) * u + a1) * u + a0; };
  const double bound = 1.0 + std::max({std::abs(a2 / a3), std::abs(a1 / a3), std::abs(a0 / a3)});
  std::vector<double> edges{-bound};
  const double disc = a2 * a2 - 3.0 * a3 * a1;
  if (disc > 0.0) {
    const double s = std::sqrt(disc);
    double c1 = (-a2 - s) / (3.0 * a3), c2 = (-a2 + s) / (3.0 * a3);
    if (c1 > c2) std::swap(c1, c2);
    edges.push_back(c1);
    edges.push_back(c2);
  }
  edges.push_back(bound);
  std::vector<double> roots;
  for (std::size_t i = 1; i < edges.size(); ++i) {
    double lo = edges[i - 1], hi = edges[i];
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) {
      roots.push_back(lo);
      continue;
    }
    if ((flo < 0.0) == (fhi < 0.0)) continue;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (!(mid > lo && mid < hi)) break;
      const double fm = f(mid);
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    roots.push_back(0.5 * (lo + hi));
  }
  return roots;
}

/**
 * Points x > 0 where g changes monotonicity or convexity. With w = P x^alpha and u = w - zr,
 * sign g'' = sign of (alpha+1)u^3 + 2 alpha zr u^2 - (2alpha-1) rho^2 u - alpha zr rho^2.
 */
std::vector<double> kernel_breakpoints(const CurveKernel& g) {
  std::vector<double> xs;
  const double a = g.alpha, r2 = g.rho * g.rho;
  for (double u : cubic_roots(a + 1.0, 2.0 * a * g.zr, -(2.0 * a - 1.0) * r2, -a * g.zr * r2)) {
    const double w = u + g.zr;
    if (w > 0.0) xs.push_back(std::pow(w / g.P, 1.0 / a));
  }
  if (g.zr > 0.0) xs.push_back(std::pow(g.zr / g.P, 1.0 / a));
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

struct Segment {
  double j0, j1;  // inclusive index range, j1 may be inf
};

double direct_sum(const CurveKernel& g, double h, double j0, double j1) {
  double sum = 0.0, comp = 0.0;
  for (double k = j0; k <= j1; k += 1.0) kahan_add(sum, comp, h * g(k * h));
  return sum + comp;
}

/** Trapezoid form of the sum over [k0, k1] on a piece where g is monotone with fixed convexity. */
EvalResult em_sum(const CurveKernel& g, double h, double k0, double k1, double qtol, const Point3& z) {
  const double x0 = k0 * h;
  const double x1 = std::isinf(k1) ? kInf : k1 * h;
  const double g0 = g(x0), g1 = std::isinf(k1) ? 0.0 : g(x1);
  const double d0 = g.deriv(x0), d1 = std::isinf(k1) ? 0.0 : g.deriv(x1);
  auto I = curve_integral(g.P, g.alpha, z, x0, x1, qtol);
  const double corr = h * h * (d1 - d0) / 16.0;
  return {I.value + 0.5 * h * (g0 + g1) + corr, I.error_bound + std::abs(corr)};
}

constexpr double kMaxDirectTerms = 4.0e6;

EvalResult sum_segment(const CurveKernel& g, double h, const Segment& s, double tau, double qtol, const Point3& z) {
  if (!std::isinf(s.j1) && s.j1 - s.j0 < 48.0) return {direct_sum(g, h, s.j0, s.j1), 0.0};
  const double limit = 16.0 * tau / (h * h);  // |g'| below this keeps the trapezoid remainder under tau
  auto small = [&](double k) { return std::abs(g.deriv(k * h)) <= limit; };
  const double d0 = std::abs(g.deriv(s.j0 * h));
  const double d1 = std::isinf(s.j1) ? 0.0 : std::abs(g.deriv(s.j1 * h));
  EvalResult out;
  if (d0 >= d1) {
    // |g'| decreases along the piece: direct terms first, then the trapezoid form.
    double k = s.j0;
    if (!small(k)) {
      double step = 1.0;
      double lo = s.j0, hi;
      for (;;) {
        hi = s.j0 + step;
        if (!std::isinf(s.j1) && hi >= s.j1) {
          hi = s.j1;
          break;
        }
        if (small(hi)) break;
        lo = hi;
        step *= 2.0;
      }
      while (hi - lo > 1.0) {
        const double mid = std::floor(0.5 * (lo + hi));
        if (small(mid))
          hi = mid;
        else
          lo = mid;
      }
      k = hi;
    }
    if (k - s.j0 > kMaxDirectTerms) k = s.j0 + kMaxDirectTerms;
    if (k > s.j0) out.value += direct_sum(g, h, s.j0, k - 1.0);
    if (k == s.j1) {
      out.value += h * g(k * h);
    } else {
      auto e = em_sum(g, h, k, s.j1, qtol, z);
      out.value += e.value;
      out.error_bound += e.error_bound;
    }
  } else {
    // |g'| increases toward the finite right end.
    double k = s.j1;
    if (!small(k)) {
      double lo = s.j0, hi = s.j1;  // small(lo) unknown; search the last small index
      if (!small(lo)) {
        lo = s.j0 - 1.0;
      }
      while (hi - lo > 1.0) {
        const double mid = std::floor(0.5 * (lo + hi));
        if (small(mid))
          lo = mid;
        else
          hi = mid;
      }
      k = lo;
    }
    if (s.j1 - k > kMaxDirectTerms) k = s.j1 - kMaxDirectTerms;
    if (k < s.j1) out.value += direct_sum(g, h, std::max(k + 1.0, s.j0), s.j1);
    if (k >= s.j0) {
      if (k == s.j0) {
        out.value += h * g(k * h);
      } else {
        auto e = em_sum(g, h, s.j0, k, qtol, z);
        out.value += e.value;
        out.error_bound += e.error_bound;
      }
    }
  }
  return out;
}

bool index_in_blocks(const KSequence& K, double k) {
  for (std::size_t n = 0;; ++n) {
    const double lo = K(2 * n);
    if (std::isinf(lo) || lo > k) return false;
    if (k < K(2 * n + 1)) return true;
  }
}

}  // namespace

EvalResult lattice_sum(const LatticeSpec& spec, double h, double P, const Point3& z, double tol) {
  if (!(spec.alpha > 1.0)) throw std::domain_error("lattice requires alpha > 1");
  if (!(h > 0.0) || !(P > 0.0)) throw std::domain_error("lattice sum requires h > 0 and P > 0");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const double alpha = spec.alpha;
  const double rho = z.transverse_norm(), norm = z.norm();
  const CurveKernel g{P, alpha, z.zr, rho};

  if (rho == 0.0 && z.zr >= 0.0) {
    const double k = std::pow(z.zr / P, 1.0 / alpha) / h;
    const double kr = std::round(k);
    if (std::abs(k - kr) <= 1e-12 * std::max(1.0, k) && index_in_blocks(spec.K, kr)) return {kInf, 0.0};
  }

  std::vector<double> edges{0.0};
  for (double x : kernel_breakpoints(g)) edges.push_back(x);
  edges.push_back(kInf);
  const double decreasing_from = std::max(edges[edges.size() - 2], std::pow(2.0 * norm / P, 1.0 / alpha));

  std::vector<Segment> segs;
  EvalResult out;
  const std::size_t max_blocks = spec.K.unbounded() ? 4096 : spec.K.block_count();
  for (std::size_t n = 0; n < max_blocks; ++n) {
    const double klo = spec.K(2 * n);
    if (std::isinf(klo)) break;
    if (spec.K.unbounded() && klo * h >= decreasing_from) {
      const double x = klo * h;
      auto tail = curve_integral(P, alpha, z, x, kInf, 1e-3 * tol);
      const double bound = h * g(x) + tail.value + tail.error_bound;
      if (bound <= 0.125 * tol || n + 1 == max_blocks) {
        out.value += 0.5 * bound;
        out.error_bound += 0.5 * bound;
        break;
      }
    }
    const double khi = spec.K(2 * n + 1);
    const double last = std::isinf(khi) ? kInf : khi - 1.0;
    for (std::size_t j = 0; j + 1 < edges.size(); ++j) {
      const double a = std::max(klo, std::ceil(edges[j] / h));
      const double b = std::isinf(edges[j + 1]) ? last : std::min(last, std::ceil(edges[j + 1] / h) - 1.0);
      if (b >= a) segs.push_back({a, b});
    }
  }

  const double share = 0.25 * tol / double(std::max<std::size_t>(1, segs.size()));
  double sum = out.value, comp = 0.0;
  for (const auto& s : segs) {
    auto r = sum_segment(g, h, s, share, share, z);
    if (std::isinf(r.value)) return {kInf, 0.0};
    kahan_add(sum, comp, r.value);
    out.error_bound += r.error_bound;
  }
  out.value = sum + comp;
  return out;
}

EvalResult phi_lambda(const LatticeSpec& spec, const Point3& z, double tol) { return lattice_sum(spec, 1.0, 1.0, z, tol); }

EvalResult phi_dilated_lattice(const LatticeSpec& spec, double scale, const Point3& z, double tol) {
  if (!(scale > 0.0)) throw std::domain_error("dilation factor must be positive");
  return lattice_sum(spec, 1.0, scale, z, tol);
}

EvalResult phi_a(const LatticeSpec& spec, const RescaleParams& rp, const Point3& z, double tol) {
  const double N = rescale_N(spec.alpha, rp);
  return lattice_sum(spec, 1.0 / N, rp.P, z, tol);
}

EvalResult phi_ST(double S, double T, double P, double alpha, const Point3& z, double tol) {
  if (!(alpha > 1.0)) throw std::domain_error("phi_ST requires alpha > 1");
  if (!(P > 0.0)) throw std::domain_error("phi_ST requires P > 0");
  if (!(S >= 0.0) || !(T > S)) throw std::domain_error("phi_ST requires 0 <= S < T");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  return curve_integral(P, alpha, z, S, T, tol);
}

EvalResult phi_interval_union(const IntervalUnion& I, double P, double alpha, const Point3& z, double tol) {
  validate_union(I);
  EvalResult out;
  const double share = tol / double(I.size());
  for (const auto& iv : I) {
    auto r = phi_ST(iv.S, iv.T, P, alpha, z, share);
    if (std::isinf(r.value)) return {kInf, 0.0};
    out.value += r.value;
    out.error_bound += r.error_bound;
  }
  return out;
}

double a_ST(double S, double T, double P, double alpha) {
  if (!(alpha > 1.0)) throw std::domain_error("a_ST requires alpha > 1");
  if (!(P > 0.0)) throw std::domain_error("a_ST requires P > 0");
  if (!(S >= 0.0) || !(T >= S)) throw std::domain_error("a_ST requires 0 <= S <= T");
  if (T == S) return 0.0;
  // 1/(1 + P x^alpha) is the curve kernel at z = (-1, 0, 0).
  const Point3 z{-1.0, 0.0, 0.0};
  const double rough = curve_integral(P, alpha, z, S, T, 1e-6).value;
  return curve_integral(P, alpha, z, S, T, 1e-12 * rough).value;
}

EvalResult fiber_diameter(const LatticeSpec& spec, const RescaleParams& rp, const Point3& z, double tol) {
  const double N = rescale_N(spec.alpha, rp);
  auto phi = phi_a(spec, rp, z, tol);
  if (std::isinf(phi.value)) return {0.0, 0.0};
  const double d = std::numbers::pi / (N * std::sqrt(phi.value));
  const double lower_phi = phi.value - phi.error_bound;
  const double d_hi = lower_phi > 0.0 ? std::numbers::pi / (N * std::sqrt(lower_phi)) : kInf;
  return {d, d_hi - d};
}

EvalResult block_integral_sum(const LatticeSpec& spec, const RescaleParams& rp, const Point3& z, double tol) {
  const double alpha = spec.alpha;
  const double x_dec = std::pow(2.0 * z.norm() / rp.P, 1.0 / alpha);
  EvalResult out;
  std::vector<std::pair<double, double>> blocks;
  for (std::size_t n = 0;; ++n) {
    const double S = rescaled_S(spec, rp, n);
    if (std::isinf(S)) break;
    if (spec.K.unbounded() && S >= x_dec) {
      const double b = curve_tail_bound(S, rp.P, alpha);
      if (b <= 0.25 * tol || n > 4096) {
        out.value += 0.5 * b;
        out.error_bound += 0.5 * b;
        break;
      }
    }
    blocks.emplace_back(S, rescaled_T(spec, rp, n));
  }
  const double share = 0.5 * tol / double(std::max<std::size_t>(1, blocks.size()));
  for (auto [S, T] : blocks) {
    auto r = curve_integral(rp.P, alpha, z, S, T, share);
    if (std::isinf(r.value)) return {kInf, 0.0};
    out.value += r.value;
    out.error_bound += r.error_bound;
  }
  return out;
}

EvalResult block_a_sum(const LatticeSpec& spec, const RescaleParams& rp, double tol) {
  const double alpha = spec.alpha;
  EvalResult out;
  for (std::size_t n = 0;; ++n) {
    const double S = rescaled_S(spec, rp, n);
    if (std::isinf(S)) break;
    if (spec.K.unbounded() && S > 0.0) {
      const double b = std::pow(S, 1.0 - alpha) / (rp.P * (alpha - 1.0));
      if (b <= 0.25 * tol || n > 4096) {
        out.value += 0.5 * b;
        out.error_bound += 0.5 * b;
        break;
      }
    }
    const double v = a_ST(S, rescaled_T(spec, rp, n), rp.P, alpha);
    out.value += v;
    out.error_bound += 1e-10 * v;
  }
  return out;
}

}  // namespace tcone
