#include "tcone/bounds.hpp"
#include "tcone/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace tcone {

namespace {

constexpr double kEvalTol = 1e-10;
constexpr double kARelErr = 1e-10;  // a_ST relative accuracy

struct Block {
  double S, T;
};

/** Blocks n < n_max whose left end is finite and at most s_cap. */
std::vector<Block> leading_blocks(const LatticeSpec& spec, const RescaleParams& rp, std::size_t n_max, double s_cap) {
  std::vector<Block> out;
  for (std::size_t n = 0; n < n_max; ++n) {
    const double S = rescaled_S(spec, rp, n);
    if (!std::isfinite(S) || (n > 0 && S > s_cap)) break;
    out.push_back({S, rescaled_T(spec, rp, n)});
  }
  return out;
}

/** sum_{n >= n0} Phi_n with the est4 tail bound added once it is tiny; returns value and error. */
EvalResult tail_block_sum(const LatticeSpec& spec, const RescaleParams& rp, const Point3& z, std::size_t n0) {
  EvalResult out;
  for (std::size_t n = n0;; ++n) {
    const double S = rescaled_S(spec, rp, n);
    if (!std::isfinite(S)) break;
    if (n > n0 && spec.K.unbounded()) {
      const double b = curve_tail_bound(S, rp.P, spec.alpha);
      if (b <= 1e-13 || n > n0 + 4096) {
        out.error_bound += b;  // the remainder is in [0, b]
        break;
      }
    }
    auto r = curve_integral(rp.P, spec.alpha, z, S, rescaled_T(spec, rp, n), kEvalTol);
    if (std::isinf(r.value)) return {kInf, 0.0};
    out.value += r.value;
    out.error_bound += r.error_bound;
  }
  return out;
}

double quotient_q(const LatticeSpec& spec, const RescaleParams& rp, double* err) {
  const auto A = block_a_sum(spec, rp, kEvalTol);
  if (err) *err = A.error_bound + kARelErr * A.value;
  return A.value - 2.0 * std::pow(rp.a / rp.P, 1.0 / (1.0 + spec.alpha));
}

std::string fmt_notes(std::initializer_list<std::pair<const char*, double>> kv) {
  std::ostringstream os;
  bool first = true;
  for (auto& [k, v] : kv) {
    if (!first) os << "; ";
    os << k << "=" << fmt12(v);
    first = false;
  }
  return os.str();
}

void validate_rd(double R, double D) {
  if (!(R >= 1.0) || !(D > 0.0) || !(D <= 1.0)) throw std::domain_error("bounds require R >= 1 >= D > 0");
}

double min_one(const Point3& z) { return std::min(1.0 / z.norm(), 1.0); }

/** Integral over [S, T] of 1/|z - P(x^alpha,0,0)| - w/(1 + P x^alpha). */
QuadResult block_difference(double P, double alpha, const Point3& z, double w, double S, double T, double abs_tol) {
  auto f = [&](double x) {
    const double c = P * std::pow(x, alpha);
    return 1.0 / std::hypot(z.zr - c, z.zc1, z.zc2) - w / (1.0 + c);
  };
  if (std::isfinite(T)) return integrate_adaptive(f, S, T, abs_tol, 20000);
  auto g = [&](double t) {  // x = S + t/(1-t)
    const double s = 1.0 - t;
    return f(S + t / s) / (s * s);
  };
  return integrate_adaptive(g, 0.0, 1.0, abs_tol, 20000);
}

}  // namespace

void BoundReport::add(const Point3& z, double lhs, double rhs, const std::string& id) {
  double margin;
  if (std::isinf(rhs) && rhs > 0)
    margin = kInf;
  else if (std::isinf(lhs) && lhs > 0)
    margin = -kInf;
  else
    margin = rhs - lhs;
  if (std::isnan(margin)) margin = -kInf;
  add_margin(z, lhs, rhs, margin, id);
}

void BoundReport::add_margin(const Point3& z, double lhs, double rhs, double margin, const std::string& id) {
  if (rows.empty() || margin < worst_margin) {
    worst_margin = margin;
    worst_point = z;
    worst_second.reset();
  }
  ++samples;
  rows.push_back({id.empty() ? bound_id : id, z, std::nullopt, lhs, rhs, margin});
}

void BoundReport::add_pair(const Point3& x, const Point3& y, double lhs, double rhs, const std::string& id) {
  add(x, lhs, rhs, id);
  rows.back().second = y;
  if (worst_point == x && worst_margin == rows.back().margin) worst_second = y;
}

double BoundReport::worst_margin_of(const std::string& id) const {
  double w = kInf;
  for (const auto& r : rows)
    if (r.id == id) w = std::min(w, r.margin);
  return w;
}

void AssumptionWitness::validate() const {
  if (!(epsilon > 0) || !(C0 > 0) || !(C1 > 0) || !(m > 0) || !(R > 0) || !(kappa >= 0))
    throw std::invalid_argument("assumption witness constants must be positive (kappa >= 0)");
}

ConstantsLedger AssumptionWitness::ledger() const { return ConstantsLedger::make(C0, C1, kappa, m, epsilon); }

std::vector<Point3> sample_krd(double R, double D, std::size_t n, Rng& rng) {
  if (!(D <= R) || !(D > 0) || !(R > 0)) throw std::domain_error("K(R,D) has no admissible points");
  const Region K = make_krd(R, D);
  std::vector<Point3> out;
  std::size_t attempts = 0;
  while (out.size() < n) {
    if (++attempts > 1000 * n + 1000) throw std::domain_error("K(R,D) sampling rejected every candidate");
    const double zr = rng.uniform(-R, R), rho = rng.uniform(0.0, R), phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const Point3 p{zr, rho * std::cos(phi), rho * std::sin(phi)};
    if (contains(K, p)) out.push_back(p);
  }
  // worst cases sit on the boundary: |z_C| = D above the axis, |z| = D behind the origin, |z| = R
  const double zmax = std::sqrt(std::max(0.0, R * R - D * D));
  const double c = std::cos(0.7), s = std::sin(0.7);
  const Point3 fixed[] = {
      {0.0, D, 0.0},
      {0.5 * zmax, D * c, D * s},
      {zmax, D, 0.0},
      {-D, 0.0, 0.0},
      {-D * c, D * s, 0.0},
      {-R, 0.0, 0.0},
      {0.0, 0.0, R},
      {R * c, R * s, 0.0},
  };
  for (const auto& p : fixed)
    if (contains(K, p)) out.push_back(p);
  return out;
}

std::vector<Point3> sample_ball(double R, std::size_t n, Rng& rng) {
  if (!(R > 0)) throw std::domain_error("ball radius must be positive");
  std::vector<Point3> out;
  while (out.size() < n) {
    const Point3 p{rng.uniform(-R, R), rng.uniform(-R, R), rng.uniform(-R, R)};
    if (p.norm() <= R) out.push_back(p);
  }
  const double c = std::cos(0.7), s = std::sin(0.7);
  const Point3 fixed[] = {{R, 0.0, 0.0}, {-R, 0.0, 0.0}, {0.0, R, 0.0}, {R * c, 0.0, R * s}, {0.5 * R, 0.01 * R, 0.0}};
  out.insert(out.end(), std::begin(fixed), std::end(fixed));
  return out;
}

BoundReport check_conv1(const LatticeSpec& spec, const RescaleParams& rp, double R, double D, std::size_t nsamples,
                        std::uint64_t seed) {
  validate_rd(R, D);
  BoundReport rep;
  rep.bound_id = "conv1";
  Rng rng(derive_seed(seed, rep.bound_id));
  const double N = rescale_N(spec.alpha, rp);
  const double rhs = 2.0 / (N * D);
  for (const auto& z : sample_krd(R, D, nsamples, rng)) {
    const auto f = phi_a(spec, rp, z, kEvalTol);
    const auto g = block_integral_sum(spec, rp, z, kEvalTol);
    rep.add(z, std::abs(f.value - g.value) + f.error_bound + g.error_bound, rhs);
  }
  rep.notes = fmt_notes({{"N", N}, {"rhs", rhs}});
  return rep;
}

std::vector<BoundReport> check_lower1(const LatticeSpec& spec, const RescaleParams& rp, double R, double D,
                                      std::size_t nsamples, std::uint64_t seed) {
  validate_rd(R, D);
  const double alpha = spec.alpha, P = rp.P;
  std::vector<BoundReport> reps(5);
  for (int i = 0; i < 5; ++i) reps[i].bound_id = "est" + std::to_string(i + 1);
  Rng rng(derive_seed(seed, "lower1"));
  const auto pts = sample_krd(R, D, nsamples, rng);

  const auto blocks = leading_blocks(spec, rp, 64, 1e6 * R);
  std::vector<double> A(blocks.size());
  for (std::size_t n = 0; n < blocks.size(); ++n) A[n] = a_ST(blocks[n].S, blocks[n].T, P, alpha);
  double q_err = 0.0;
  const double Q = quotient_q(spec, rp, &q_err);
  const double c3 = std::pow(P, -1.0 / alpha) * alpha * std::pow(2.0, 1.0 / alpha) / (alpha - 1.0);
  const std::size_t n5 = std::min<std::size_t>(blocks.size(), 6);

  for (const auto& z : pts) {
    std::vector<EvalResult> phi(blocks.size());
    for (std::size_t n = 0; n < blocks.size(); ++n) phi[n] = curve_integral(P, alpha, z, blocks[n].S, blocks[n].T, kEvalTol);
    const double w = min_one(z);

    // est1: worst block
    {
      double worst = kInf, l = 0, r = 0;
      for (std::size_t n = 0; n < blocks.size(); ++n) {
        const double lhs = A[n] * w, rhs = phi[n].value;
        double margin = rhs - phi[n].error_bound - lhs * (1.0 + kARelErr);
        if (margin < 0.0) {
          // near-ties in far blocks: integrate the pointwise difference, whose cancellation is benign
          const auto d = block_difference(P, alpha, z, w, blocks[n].S, blocks[n].T, 1e-14 * A[n]);
          margin = d.value - d.error;
        }
        if (margin < worst) worst = margin, l = lhs, r = rhs;
      }
      reps[0].add_margin(z, l, r, worst);
    }
    // est2
    if (Q - q_err > 0.0) {
      const auto f = phi_a(spec, rp, z, kEvalTol);
      reps[1].add(z, (Q + q_err) * w, f.value - f.error_bound);
    }
    // est3
    {
      const auto s = block_integral_sum(spec, rp, z, kEvalTol);
      reps[2].add(z, s.value + s.error_bound, c3 * std::pow(z.norm(), 1.0 / alpha) / z.transverse_norm());
    }
    // est4: the first three admissible n0
    {
      const double x_dec = std::pow(2.0 * z.norm() / P, 1.0 / alpha);
      std::size_t n0 = 0;
      while (std::isfinite(rescaled_S(spec, rp, n0)) && rescaled_S(spec, rp, n0) < x_dec && n0 < 4096) ++n0;
      double worst = kInf, l = 0, r = 0;
      for (std::size_t k = n0; k < n0 + 3; ++k) {
        const double S = rescaled_S(spec, rp, k);
        if (!std::isfinite(S) || S < x_dec) break;
        const auto t = tail_block_sum(spec, rp, z, k);
        const double lhs = t.value + t.error_bound, rhs = curve_tail_bound(S, P, alpha);
        if (rhs - lhs < worst) worst = rhs - lhs, l = lhs, r = rhs;
      }
      if (std::isfinite(worst)) reps[3].add(z, l, r);
    }
    // est5: partial sums up to n0 < 6
    {
      double worst = kInf, l = 0, r = 0, acc = 0, acc_err = 0;
      for (std::size_t n = 0; n < n5; ++n) {
        acc += phi[n].value;
        acc_err += phi[n].error_bound;
        const double lhs = acc + acc_err, rhs = blocks[n].T / D;
        if (rhs - lhs < worst) worst = rhs - lhs, l = lhs, r = rhs;
      }
      reps[4].add(z, l, r);
    }
  }
  if (reps[1].samples == 0) {
    reps[1].vacuous = true;
    reps[1].notes = "sum of A minus 2(a/P)^{1/(1+alpha)} is not positive; " + fmt_notes({{"Q", Q}});
  } else {
    reps[1].notes = fmt_notes({{"Q", Q}});
  }
  if (reps[3].samples == 0) {
    reps[3].vacuous = true;
    reps[3].notes = "no block start beyond (2|z|/P)^{1/alpha} at any sample";
  }
  reps[0].notes = fmt_notes({{"blocks", double(blocks.size())}});
  reps[2].notes = fmt_notes({{"constant", c3}});
  reps[4].notes = fmt_notes({{"partial_sums", double(n5)}});
  return reps;
}

BoundReport check_a21(const LatticeSpec& spec, const RescaleParams& rp, double R, std::size_t nsamples,
                      std::uint64_t seed) {
  if (!(R >= 1.0)) throw std::domain_error("a2.1 requires R >= 1");
  BoundReport rep;
  rep.bound_id = "a2.1";
  double q_err = 0.0;
  const double Q = quotient_q(spec, rp, &q_err) - q_err;
  if (!(Q > 0)) {
    rep.vacuous = true;
    rep.notes = "sum of A minus 2(a/P)^{1/(1+alpha)} is not positive";
    return rep;
  }
  Rng rng(derive_seed(seed, rep.bound_id));
  const double N = rescale_N(spec.alpha, rp);
  const double rhs = std::pow(rp.a / rp.P, 1.0 / (1.0 + spec.alpha)) / std::sqrt(Q) * std::sqrt(R);
  for (const auto& z : sample_ball(R, nsamples, rng)) {
    const auto f = phi_a(spec, rp, z, kEvalTol);
    const double lo = f.value - f.error_bound;
    rep.add(z, lo > 0 ? 1.0 / (N * std::sqrt(lo)) : kInf, rhs);
  }
  rep.notes = fmt_notes({{"Q", Q}, {"rhs", rhs}});
  return rep;
}

double fiberdiam_bound(const LatticeSpec& spec, const RescaleParams& rp, double r) {
  double q_err = 0.0;
  const double Q = quotient_q(spec, rp, &q_err) - q_err;
  if (!(Q > 0)) return kInf;
  return std::pow(rp.a / rp.P, 1.0 / (1.0 + spec.alpha)) / std::sqrt(Q) * (1.0 + r / (2.0 * std::sqrt(Q)));
}

double metric_ball_euclidean_radius(const LatticeSpec& spec, const RescaleParams& rp, double r) {
  double q_err = 0.0;
  const double Q = quotient_q(spec, rp, &q_err) - q_err;
  if (!(Q > 0)) return kInf;
  // d(0,z) >= 2 sqrt(Q) (sqrt|z| - 1) once |z| >= 1
  return std::pow(1.0 + r / (2.0 * std::sqrt(Q)), 2.0);
}

BoundReport check_fiberdiam(const LatticeSpec& spec, const RescaleParams& rp, double r, std::size_t nsamples,
                            std::uint64_t seed, const SolverConfig& cfg) {
  if (!(r > 0)) throw std::domain_error("fiber-diameter check needs r > 0");
  cfg.validate();
  BoundReport rep;
  rep.bound_id = "fiberdiam";
  const double bound = fiberdiam_bound(spec, rp, r);
  if (std::isinf(bound)) {
    rep.vacuous = true;
    rep.notes = "sum of A minus 2(a/P)^{1/(1+alpha)} is not positive";
    return rep;
  }
  double q_err = 0.0;
  const double Q = quotient_q(spec, rp, &q_err) - q_err;
  const double u = metric_ball_euclidean_radius(spec, rp, r);
  const MetricDescriptor desc = MetricDescriptor::rescaled_lattice(spec, rp);
  const double cell = 0.5 * u * cfg.grid_resolution;
  GridGraph g(desc, {-u, -u, -u}, {u, u, u}, cell, std::max(cfg.quadrature_tol, 1e-6));
  const std::size_t src = g.add_node({0.0, 0.0, 0.0});
  g.solve(src);
  std::vector<std::size_t> inside;
  for (std::size_t i = 0; i < g.node_count(); ++i)
    if (g.dist(i) < r) inside.push_back(i);
  Rng rng(derive_seed(seed, rep.bound_id));
  if (inside.size() > nsamples) {
    // partial Fisher-Yates keeps the draw deterministic
    for (std::size_t k = 0; k < nsamples; ++k) std::swap(inside[k], inside[k + rng.next() % (inside.size() - k)]);
    inside.resize(nsamples);
    std::sort(inside.begin(), inside.end());
  }
  const double rhs = std::numbers::pi * bound;
  for (std::size_t i : inside) {
    const auto fd = fiber_diameter(spec, rp, g.position(i), kEvalTol);
    rep.add(g.position(i), fd.value + fd.error_bound, rhs);
  }
  rep.notes = fmt_notes({{"Q", Q}, {"euclidean_radius", u}, {"rhs", rhs}});
  return rep;
}

PsiSParams psi_s_params(double alpha, double S, double T, double theta, double R) {
  if (!(alpha > 1)) throw std::domain_error("alpha must exceed 1");
  if (!(S > 0) || !(T > S)) throw std::domain_error("need 0 < S < T");
  if (!(theta > 0) || !(R > 0)) throw std::domain_error("theta and R must be positive");
  PsiSParams p{};
  p.gap = std::sqrt(std::pow(S, 1.0 - alpha) - (std::isinf(T) ? 0.0 : std::pow(T, 1.0 - alpha)));
  const double p1 = theta * p.gap;  // P^{1/(1+alpha)}
  p.P = std::pow(p1, 1.0 + alpha);
  p.S_prime = S / p1;
  p.T_prime = T / p1;
  p.scale = R / (std::pow(theta, 3.0) * std::pow(S, alpha) * p.gap);
  p.precondition = theta * std::pow(S, alpha) * p.gap >= 2.0 * R && R >= 1.0;
  return p;
}

namespace {

/** Conservative |Phi - 1/(theta^2 (alpha-1))| at each sample. */
std::vector<std::pair<Point3, double>> psi_s_deviation(double alpha, const PsiSParams& p, double theta, double R,
                                                       std::size_t nsamples, Rng& rng) {
  const double target = 1.0 / (theta * theta * (alpha - 1.0));
  std::vector<std::pair<Point3, double>> out;
  for (const auto& z : sample_ball(R, nsamples, rng)) {
    const auto f = phi_ST(p.S_prime, p.T_prime, p.P, alpha, z, kEvalTol);
    out.emplace_back(z, std::abs(f.value - target) + f.error_bound);
  }
  return out;
}

}  // namespace

BoundReport check_a3forPsi(double alpha, double S, double T, double theta, double R, std::size_t nsamples,
                           double C_alpha, std::uint64_t seed) {
  const auto p = psi_s_params(alpha, S, T, theta, R);
  BoundReport rep;
  rep.bound_id = "a3forPsi";
  if (!p.precondition) {
    rep.vacuous = true;
    rep.notes = "precondition theta S^alpha sqrt(S^{1-alpha}-T^{1-alpha}) >= 2R >= 2 fails";
    return rep;
  }
  Rng rng(derive_seed(seed, rep.bound_id));
  const double rhs = C_alpha * p.scale;
  for (const auto& [z, lhs] : psi_s_deviation(alpha, p, theta, R, nsamples, rng)) rep.add(z, lhs, rhs);
  rep.notes = fmt_notes({{"C_alpha", C_alpha}, {"rhs", rhs}, {"P", p.P}});
  return rep;
}

double calibrate_c_alpha(double alpha, const std::vector<double>& S_list, double T, double theta, double R,
                         std::size_t nsamples, std::uint64_t seed) {
  double C = 0.0;
  bool any = false;
  for (double S : S_list) {
    const auto p = psi_s_params(alpha, S, T, theta, R);
    if (!p.precondition) continue;
    any = true;
    Rng rng(derive_seed(seed, "calibrate_c_alpha"));
    // denser than the verification draw
    for (const auto& [z, lhs] : psi_s_deviation(alpha, p, theta, R, 4 * nsamples, rng)) C = std::max(C, lhs / p.scale);
  }
  if (!any) throw std::domain_error("no calibration point satisfies the precondition");
  const double e = std::pow(10.0, std::floor(std::log10(C)) - 2.0);
  return std::ceil(C / e) * e;
}

BoundReport check_a3forPsi2(double alpha, double S, double T, double theta, double R, double D, std::size_t nsamples,
                            std::uint64_t seed) {
  if (!(alpha > 1)) throw std::domain_error("alpha must exceed 1");
  if (!(S >= 0) || !(T > S) || !std::isfinite(T)) throw std::domain_error("need 0 <= S < T < inf");
  if (!(theta > 0)) throw std::domain_error("theta must be positive");
  if (!(D > 0) || !(D <= R)) throw std::domain_error("need 0 < D <= R");
  BoundReport rep;
  rep.bound_id = "a3forPsi2";
  const double p1 = theta * (T - S), P = std::pow(p1, 1.0 + alpha);
  const double Sp = S / p1, Tp = T / p1;
  const double e = std::pow(T, alpha) * (T - S);
  const double rhs_a = 2.0 / (theta * D);
  const double rhs_b = (1.0 + theta * e) * e / (D * D * D);
  Rng rng(derive_seed(seed, rep.bound_id));
  for (const auto& z : sample_krd(R, D, nsamples, rng)) {
    const auto f = phi_ST(Sp, Tp, P, alpha, z, kEvalTol);
    const double lhs = std::abs(f.value - 1.0 / (theta * z.norm())) + f.error_bound;
    rep.add(z, lhs, rhs_a, "a3forPsi2.a");
    rep.add(z, lhs, rhs_b, "a3forPsi2.b");
  }
  rep.notes = fmt_notes({{"P", P}, {"T^alpha(T-S)", e}, {"worst_a", rep.worst_margin_of("a3forPsi2.a")},
                         {"worst_b", rep.worst_margin_of("a3forPsi2.b")}});
  return rep;
}

BoundReport check_C0C1(double alpha, double S, double T, double theta, C0C1Variant variant, double R,
                       std::size_t nsamples, std::uint64_t seed) {
  if (!(alpha > 1)) throw std::domain_error("alpha must exceed 1");
  if (!(theta > 0) || !(R > 0)) throw std::domain_error("theta and R must be positive");
  BoundReport rep;
  double P, Sp, Tp, a_lower;
  std::function<double(const Point3&)> phi_upper;
  if (variant == C0C1Variant::Prime) {
    rep.bound_id = "C0C1prime";
    const auto p = psi_s_params(alpha, S, T, theta, R);
    if (!p.precondition) {
      rep.vacuous = true;
      rep.notes = "precondition theta S^alpha sqrt(S^{1-alpha}-T^{1-alpha}) >= 2R >= 2 fails";
      return rep;
    }
    P = p.P, Sp = p.S_prime, Tp = p.T_prime;
    const double k = theta * theta * (alpha - 1.0);
    a_lower = 1.0 / (2.0 * k);
    phi_upper = [k](const Point3& z) { return 2.0 * z.norm() / (k * z.transverse_norm()); };
  } else {
    rep.bound_id = "C0C1";
    if (!(S >= 0) || !(T > S) || !std::isfinite(T)) throw std::domain_error("need 0 <= S < T < inf");
    const double p1 = theta * (T - S);
    P = std::pow(p1, 1.0 + alpha), Sp = S / p1, Tp = T / p1;
    a_lower = 1.0 / (theta * (1.0 + theta * std::pow(T, alpha) * (T - S)));
    phi_upper = [theta](const Point3& z) { return 1.0 / (theta * z.transverse_norm()); };
  }
  const double A = a_ST(Sp, Tp, P, alpha);
  rep.add({0.0, 0.0, 0.0}, a_lower, A * (1.0 - kARelErr), rep.bound_id + ".A");
  Rng rng(derive_seed(seed, rep.bound_id));
  for (const auto& z : sample_ball(R, nsamples, rng)) {
    if (z.transverse_norm() == 0.0) continue;  // the upper bound is +inf on the axis
    const auto f = phi_ST(Sp, Tp, P, alpha, z, kEvalTol);
    rep.add(z, f.value + f.error_bound, phi_upper(z), rep.bound_id + ".Phi");
  }
  rep.notes = fmt_notes({{"A", A}, {"A_lower", a_lower}, {"P", P}});
  return rep;
}

AssumptionWitness witness_psi_s(double alpha, double S, double T, double theta, double u, double C_alpha) {
  AssumptionWitness w;
  w.m = 1.0;
  w.kappa = 1.0;
  w.C0 = 1.0 / (2.0 * theta * theta * (alpha - 1.0));
  w.C1 = std::max(1.0 / (alpha - 1.0), C_alpha / 2.0) / (theta * theta);
  w.epsilon = 1.0;  // placeholder for rho, which does not depend on epsilon
  w.R = ledger_rho(w.ledger(), u + 2.0) + 1.0;
  w.epsilon = C_alpha * psi_s_params(alpha, S, T, theta, w.R).scale;
  return w;
}

AssumptionWitness witness_psi_t(double alpha, double S, double T, double theta, double u) {
  if (!(T > S) || !(S >= 0) || !std::isfinite(T)) throw std::domain_error("need 0 <= S < T < inf");
  (void)alpha;
  AssumptionWitness w;
  const double e = std::pow(T, alpha) * (T - S);
  w.m = 3.0;
  w.kappa = 0.0;
  w.epsilon = (1.0 + theta * e) * e;
  w.C0 = 1.0 / (theta * (1.0 + theta * e));
  w.C1 = 2.0 / theta;
  w.R = ledger_rho(w.ledger(), u + 2.0) + 1.0;
  return w;
}

double key_cor_rhs(const AssumptionWitness& w, double C) {
  return C * (1.0 + std::sqrt(w.C1)) * (1.0 + 1.0 / std::sqrt(w.C0)) * std::pow(w.R, 1.0 + w.kappa / 2.0) *
         std::pow(w.epsilon, 1.0 / (2.0 * (1.0 + w.m)));
}

std::vector<std::pair<Point3, Point3>> sample_pairs(double u, std::size_t n, Rng& rng) {
  auto in_ball = [&] {
    for (;;) {
      const Point3 p{rng.uniform(-u, u), rng.uniform(-u, u), rng.uniform(-u, u)};
      if (p.norm() < u) return p;
    }
  };
  std::vector<std::pair<Point3, Point3>> out;
  const std::size_t straddle = std::min<std::size_t>(n, std::max<std::size_t>(5, n / 10));
  while (out.size() < straddle) {
    // opposite sides of the axis, near it
    const double zr1 = rng.uniform(0.0, 0.8 * u), zr2 = rng.uniform(0.0, 0.8 * u);
    const double r1 = rng.uniform(0.02, 0.3) * u, r2 = rng.uniform(0.02, 0.3) * u, phi = rng.uniform(0.0, 2 * std::numbers::pi);
    const Point3 x{zr1, r1 * std::cos(phi), r1 * std::sin(phi)};
    const Point3 y{zr2, -r2 * std::cos(phi), -r2 * std::sin(phi)};
    if (x.norm() < u && y.norm() < u) out.emplace_back(x, y);
  }
  while (out.size() < n) {
    const Point3 x = in_ball();
    out.emplace_back(x, in_ball());
  }
  return out;
}

BoundReport check_key_cor(const MetricDescriptor& A, const MetricDescriptor& B, const AssumptionWitness& w, double u,
                          std::size_t npairs, double C, std::uint64_t seed, const SolverConfig& cfg) {
  w.validate();
  BoundReport rep;
  rep.bound_id = "key_cor";
  if (!(u >= 1.0)) throw std::domain_error("key corollary needs u >= 1");
  const double need = ledger_rho(w.ledger(), u + 2.0) + 1.0;
  if (need > w.R * (1.0 + 1e-12) || w.epsilon > 1.0) {
    rep.vacuous = true;
    rep.notes = "precondition rho(u+2)+1 <= R and epsilon <= 1 fails; " + fmt_notes({{"rho(u+2)+1", need}, {"R", w.R}, {"epsilon", w.epsilon}});
    return rep;
  }
  Rng rng(derive_seed(seed, rep.bound_id));
  const auto pairs = sample_pairs(u, npairs, rng);
  const bool same = A.fingerprint() == B.fingerprint();
  auto dist = [&](const MetricDescriptor& d, const Point3& x, const Point3& y) {
    if (auto e = exact_distance(d, x, y)) return *e;
    return distance(d, x, y, cfg).value;
  };
  const auto diffs = parallel_map(pairs.size(), [&](std::size_t i) {
    if (same) return 0.0;
    return std::abs(dist(A, pairs[i].first, pairs[i].second) - dist(B, pairs[i].first, pairs[i].second));
  });
  const double rhs = key_cor_rhs(w, C);
  for (std::size_t i = 0; i < pairs.size(); ++i) rep.add_pair(pairs[i].first, pairs[i].second, diffs[i], rhs);
  rep.notes = fmt_notes({{"C", C}, {"rhs", rhs}, {"epsilon", w.epsilon}, {"R", w.R}}) +
              "; distances are solver best estimates";
  return rep;
}

}  // namespace tcone
