#include "tcone/tangentcone.hpp"

#include "tcone/bounds.hpp"
#include "tcone/util.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tcone {

namespace {

constexpr double kNegInf = -kInf;

// log K_j with K_{-1} = 0 and entries past an explicit list at +inf
double log_k(const KSequence& K, long j) {
  if (j < 0) return kNegInf;
  if (K.unbounded()) return K.log_value(static_cast<std::size_t>(j));
  const double v = K(static_cast<std::size_t>(j));
  if (std::isinf(v)) return kInf;
  if (v == 0.0) return kNegInf;
  return K.log_value(static_cast<std::size_t>(j));
}

// log(e^x - e^y) for x > y
double log_diff(double x, double y) {
  if (std::isinf(x) && x > 0) return kInf;
  if (y == kNegInf) return x;
  if (!(x > y)) return std::nan("");
  return x + std::log1p(-std::exp(y - x));
}

// 0.5 log(S^{1-alpha} - T^{1-alpha}) from log S, log T
double log_gap(double alpha, double lS, double lT) {
  if (lS == kInf) return kNegInf;
  if (lS == kNegInf) return kInf;
  const double x = (1.0 - alpha) * lS;
  if (lT == kInf) return 0.5 * x;
  return 0.5 * log_diff(x, (1.0 - alpha) * lT);
}

double safe_sub(double x, double y) {
  if (std::isinf(x) && std::isinf(y) && (x > 0) == (y > 0)) return std::nan("");
  return x - y;
}

bool non_increasing(const std::vector<double>& t) {
  for (std::size_t k = 1; k < t.size(); ++k)
    if (t[k] > t[k - 1] + 1e-12 * std::max(1.0, std::abs(t[k - 1]))) return false;
  return true;
}

bool non_decreasing(const std::vector<double>& t) {
  for (std::size_t k = 1; k < t.size(); ++k)
    if (t[k] < t[k - 1] - 1e-12 * std::max(1.0, std::abs(t[k - 1]))) return false;
  return true;
}

std::string short_num(double v) {
  if (std::isinf(v)) return "inf";
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

bool is(const LimitValue& v, LimitValue::Kind k) { return v.kind == k; }

double finite_or(const LimitValue& v, double zero_value, double inf_value) {
  if (v.kind == LimitValue::Kind::Zero) return zero_value;
  if (v.kind == LimitValue::Kind::Infinite) return inf_value;
  return v.value;
}

LimitDescriptor inconclusive(std::string why) {
  LimitDescriptor d;
  d.family = LimitDescriptor::Family::Inconclusive;
  d.reason = std::move(why);
  return d;
}

LimitDescriptor single_interval(double S, double T, double alpha) {
  using F = LimitDescriptor::Family;
  LimitDescriptor d;
  d.S = S;
  d.T = T;
  if (S == 0.0)
    d.family = std::isinf(T) ? F::D0Inf : F::D0T;
  else
    d.family = std::isinf(T) ? F::DSInf : F::DST;
  d.metric = MetricDescriptor::potential_st(S, T, 1.0, alpha);
  return d;
}

LimitDescriptor euclidean_limit() {
  LimitDescriptor d;
  d.family = LimitDescriptor::Family::Euclidean;
  d.metric = MetricDescriptor::euclidean();
  return d;
}

LimitDescriptor inverse_radial_limit() {
  LimitDescriptor d;
  d.family = LimitDescriptor::Family::InverseRadial;
  d.metric = MetricDescriptor::inverse_radial(1.0);
  return d;
}

}  // namespace

// ---- sequence rules --------------------------------------------------------------------------------------------

SequenceRule SequenceRule::pin_lower(double S) {
  if (!(S > 0) || std::isinf(S)) throw std::invalid_argument("pin-lower rule needs a finite S > 0");
  SequenceRule r;
  r.kind = Kind::PinLower;
  r.value = S;
  return r;
}

SequenceRule SequenceRule::pin_upper(double T) {
  if (!(T > 0) || std::isinf(T)) throw std::invalid_argument("pin-upper rule needs a finite T > 0");
  SequenceRule r;
  r.kind = Kind::PinUpper;
  r.value = T;
  return r;
}

SequenceRule SequenceRule::theta(double theta) {
  if (!(theta > 0) || std::isinf(theta)) throw std::invalid_argument("theta rule needs a finite theta > 0");
  SequenceRule r;
  r.kind = Kind::Theta;
  r.value = theta;
  return r;
}

SequenceRule SequenceRule::explicit_list(const std::vector<double>& a, std::vector<std::size_t> n) {
  std::vector<double> la;
  la.reserve(a.size());
  for (double v : a) {
    if (!(v > 0) || std::isinf(v)) throw std::invalid_argument("explicit a_i must be finite and positive");
    la.push_back(std::log(v));
  }
  return explicit_log_list(std::move(la), std::move(n));
}

SequenceRule SequenceRule::explicit_log_list(std::vector<double> log_a, std::vector<std::size_t> n) {
  if (log_a.empty() || log_a.size() != n.size())
    throw std::invalid_argument("explicit rule needs equally long, nonempty a and n lists");
  for (double v : log_a)
    if (!std::isfinite(v)) throw std::invalid_argument("explicit log a_i must be finite");
  SequenceRule r;
  r.kind = Kind::ExplicitList;
  r.log_a = std::move(log_a);
  r.n = std::move(n);
  return r;
}

std::size_t SequenceRule::length() const {
  return kind == Kind::ExplicitList ? log_a.size() : static_cast<std::size_t>(-1);
}

std::size_t SequenceRule::n_at(std::size_t i) const {
  if (i < 1 || i > length()) throw std::out_of_range("sequence index out of range");
  return kind == Kind::ExplicitList ? n[i - 1] : i;
}

double SequenceRule::log_a_at(const LatticeSpec& spec, std::size_t i) const {
  if (i < 1 || i > length()) throw std::out_of_range("sequence index out of range");
  const double al = spec.alpha;
  const long j = static_cast<long>(i);
  switch (kind) {
    case Kind::PinLower:
      return (1.0 + al) * (std::log(value) - log_k(spec.K, 2 * j));
    case Kind::PinUpper:
      return (1.0 + al) * (std::log(value) - log_k(spec.K, 2 * j + 1));
    case Kind::Theta:
      return -std::log(value) - 2.0 * log_k(spec.K, 2 * j + 1) + (1.0 - al) * log_k(spec.K, 2 * j + 2);
    case Kind::ExplicitList:
      return log_a[i - 1];
  }
  return std::nan("");
}

std::string SequenceRule::name() const {
  switch (kind) {
    case Kind::PinLower:
      return "pin_lower(" + short_num(value) + ")";
    case Kind::PinUpper:
      return "pin_upper(" + short_num(value) + ")";
    case Kind::Theta:
      return "theta(" + short_num(value) + ")";
    case Kind::ExplicitList:
      return "explicit(" + std::to_string(log_a.size()) + ")";
  }
  return "?";
}

// ---- limits ----------------------------------------------------------------------------------------------------

std::string LimitValue::str() const {
  switch (kind) {
    case Kind::Zero:
      return "0";
    case Kind::Finite:
      return fmt12(value);
    case Kind::Infinite:
      return "inf";
    case Kind::Inconclusive:
      return "?";
  }
  return "?";
}

LimitValue extrapolate_log(const std::vector<double>& logs, const LimitThresholds& th) {
  LimitValue out;
  if (logs.empty()) return out;
  const double last = logs.back();
  if (std::isnan(last)) return out;
  if (last == kNegInf) return {LimitValue::Kind::Zero, 0.0};
  if (last == kInf) return {LimitValue::Kind::Infinite, 0.0};
  const std::size_t m = std::min<std::size_t>(3, logs.size());
  const std::vector<double> tail(logs.end() - static_cast<long>(m), logs.end());
  if (std::any_of(tail.begin(), tail.end(), [](double v) { return std::isnan(v); })) return out;
  if (m >= 2 && last < std::log(th.zero) && non_increasing(tail)) return {LimitValue::Kind::Zero, 0.0};
  if (m >= 2 && last > std::log(th.infinity) && non_decreasing(tail)) return {LimitValue::Kind::Infinite, 0.0};
  if (m >= 2 && std::all_of(tail.begin(), tail.end(), [](double v) { return std::isfinite(v); })) {
    bool agree = true;
    for (std::size_t k = 1; k < m; ++k)
      if (std::abs(tail[k] - tail[k - 1]) > std::log1p(th.agree)) agree = false;
    if (agree) return {LimitValue::Kind::Finite, std::exp(last)};
  }
  return out;
}

LimitInvariants limit_invariants(const LatticeSpec& spec, const SequenceRule& rule, std::size_t horizon,
                                 const LimitThresholds& th) {
  if (rule.blocks < 1) throw std::invalid_argument("rule must inspect at least one block");
  const double al = spec.alpha;
  const long b = static_cast<long>(rule.blocks);
  const std::size_t H = std::min(horizon, rule.length());

  std::vector<std::vector<double>> wlog(static_cast<std::size_t>(2 * b + 2));
  std::vector<double> la_seq, l3, l4, l5;
  for (std::size_t i = 1; i <= H; ++i) {
    const long n = static_cast<long>(rule.n_at(i));
    // stop once the window runs past the end of an explicit K list
    if (!spec.K.unbounded() && static_cast<std::size_t>(std::max(2 * n + 2 * b, 2 * n + 3)) >= spec.K.values().size())
      break;
    const double la = rule.log_a_at(spec, i);
    const double c = la / (1.0 + al);
    la_seq.push_back(la);
    for (long j = 0; j < 2 * b + 2; ++j) wlog[static_cast<std::size_t>(j)].push_back(c + log_k(spec.K, 2 * n - 1 + j));
    const double lS = c + log_k(spec.K, 2 * n), lT = c + log_k(spec.K, 2 * n + 1);
    const double lS1 = c + log_k(spec.K, 2 * n + 2), lT1 = c + log_k(spec.K, 2 * n + 3);
    const double g = log_gap(al, lS1, lT1);
    const double d = log_diff(lT, lS);
    l3.push_back(safe_sub(g, d));
    l4.push_back(al * lT + d);
    l5.push_back(safe_sub(-al * lS1, g));
  }
  if (la_seq.size() < 3) throw std::invalid_argument("need at least three usable sequence indices");

  LimitInvariants inv;
  for (const auto& w : wlog) inv.window.push_back(extrapolate_log(w, th));
  inv.L1 = inv.window[1];
  inv.L2 = inv.window[2];
  inv.L3 = extrapolate_log(l3, th);
  inv.L4 = extrapolate_log(l4, th);
  inv.L5 = extrapolate_log(l5, th);
  inv.a_to_zero = is(extrapolate_log(la_seq, th), LimitValue::Kind::Zero);
  inv.conclusive = inv.a_to_zero;
  if (!inv.a_to_zero) inv.reason = "a_i does not tend to 0";
  for (std::size_t j = 0; j < inv.window.size() && inv.conclusive; ++j)
    if (is(inv.window[j], LimitValue::Kind::Inconclusive)) {
      inv.conclusive = false;
      inv.reason = "limit of a^{1/(1+alpha)} K_{2n" + std::string(j == 0 ? "-1" : "+" + std::to_string(j - 1)) +
                   "} not determined";
    }
  return inv;
}

// ---- classification --------------------------------------------------------------------------------------------

std::string LimitDescriptor::family_name() const {
  switch (family) {
    case Family::DST:
      return "d_S^T";
    case Family::DSInf:
      return "d_S^inf";
    case Family::D0T:
      return "d_0^T";
    case Family::D0Inf:
      return "d_0^inf";
    case Family::Euclidean:
      return "h0";
    case Family::InverseRadial:
      return "(1/|z|)h0";
    case Family::Affine:
      return "(1/(alpha-1)+1/(theta|z|))h0";
    case Family::DI:
      return "d_I";
    case Family::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

std::string LimitDescriptor::label() const {
  switch (family) {
    case Family::DST:
    case Family::DSInf:
    case Family::D0T:
    case Family::D0Inf:
      return "d_" + short_num(S) + "^" + short_num(T);
    case Family::Affine:
      return family_name() + " theta=" + short_num(theta);
    case Family::DI: {
      std::string s = "d_I I=";
      for (std::size_t k = 0; k < intervals.size(); ++k)
        s += (k ? "u[" : "[") + short_num(intervals[k].S) + "," + short_num(intervals[k].T) + "]";
      return s;
    }
    case Family::Inconclusive:
      return "inconclusive: " + reason;
    default:
      return family_name();
  }
}

LimitDescriptor classify_limit(const LimitInvariants& inv, const LatticeSpec& spec) {
  using K = LimitValue::Kind;
  if (!inv.conclusive) return inconclusive(inv.reason);
  const auto& w = inv.window;
  const double al = spec.alpha;

  // skip blocks collapsing onto the origin
  std::size_t k = 1;
  while (k + 1 < w.size() && is(w[k], K::Zero) && is(w[k + 1], K::Zero)) k += 2;

  if (k > 1) {
    if (k >= w.size() || !is(w[k], K::Infinite))
      return inconclusive("blocks past n_i neither survive nor escape within the window; increase blocks");
    if (k != 3) return inconclusive("more than one block collapses; choose n_i as the last collapsing block");
    // block n collapses and block n+1 escapes: the gap invariants decide
    if (is(inv.L3, K::Finite)) {
      if (!is(inv.L4, K::Zero) || !is(inv.L5, K::Zero))
        return inconclusive("finite L3 needs T^alpha(T-S) -> 0 and S_{n+1}^{-alpha}(...)^{-1/2} -> 0");
      LimitDescriptor d;
      d.family = LimitDescriptor::Family::Affine;
      d.normalization = LimitDescriptor::Normalization::UpperGap;
      d.theta = inv.L3.value;
      d.metric = MetricDescriptor::affine(1.0 / (al - 1.0), 1.0 / inv.L3.value);
      return d;
    }
    if (is(inv.L3, K::Infinite)) {
      if (!is(inv.L5, K::Zero)) return inconclusive("infinite L3 needs S_{n+1}^{-alpha}(...)^{-1/2} -> 0");
      LimitDescriptor d = euclidean_limit();
      d.normalization = LimitDescriptor::Normalization::UpperGap;
      d.metric = MetricDescriptor::affine(1.0 / (al - 1.0), 0.0);
      return d;
    }
    if (is(inv.L3, K::Zero)) {
      if (!is(inv.L4, K::Zero) || !is(inv.L5, K::Zero))
        return inconclusive("vanishing L3 needs T^alpha(T-S) -> 0 and S_{n+1}^{-alpha}(...)^{-1/2} -> 0");
      LimitDescriptor d = inverse_radial_limit();
      d.normalization = LimitDescriptor::Normalization::LowerGap;
      return d;
    }
    return inconclusive("L3 not determined");
  }

  if (is(w[1], K::Infinite)) return inconclusive("pinned block escapes to infinity");
  if (!is(w[0], K::Zero)) return inconclusive("the previous block survives; window starts too late");

  IntervalUnion I;
  bool closed = false;
  std::size_t j = 1;
  for (; j + 1 < w.size(); j += 2) {
    if (is(w[j], K::Infinite)) {
      closed = true;
      break;
    }
    I.push_back({finite_or(w[j], 0.0, kInf), finite_or(w[j + 1], 0.0, kInf)});
    if (is(w[j + 1], K::Infinite)) {
      closed = true;
      break;
    }
  }
  if (!closed && j < w.size() && is(w[j], K::Infinite)) closed = true;
  if (!closed) return inconclusive("surviving blocks extend past the window; increase blocks");
  if (I.size() == 1) return single_interval(I[0].S, I[0].T, al);
  LimitDescriptor d;
  d.family = LimitDescriptor::Family::DI;
  d.intervals = I;
  d.S = I.front().S;
  d.T = I.back().T;
  d.metric = MetricDescriptor::potential_union(I, 1.0, al);
  return d;
}

// ---- convergence -----------------------------------------------------------------------------------------------

std::vector<ConvergenceRecord> verify_convergence(const LatticeSpec& spec, const SequenceRule& rule,
                                                  const LimitDescriptor& limit, double r,
                                                  const std::vector<std::size_t>& i_list, const SolverConfig& cfg,
                                                  std::size_t npairs, std::uint64_t seed) {
  using N = LimitDescriptor::Normalization;
  if (limit.family == LimitDescriptor::Family::Inconclusive)
    throw std::domain_error("cannot verify convergence to an inconclusive limit");
  if (!(r > 0)) throw std::domain_error("verification needs r > 0");
  if (npairs == 0) throw std::invalid_argument("verification needs at least one pair");
  cfg.validate();
  const double al = spec.alpha;
  const double tol = std::max(cfg.quadrature_tol, 1e-6);

  std::vector<ConvergenceRecord> out;
  for (std::size_t i : i_list) {
    const double la = rule.log_a_at(spec, i);
    const long n = static_cast<long>(rule.n_at(i));
    const double c = la / (1.0 + al);
    double logP = 0.0;
    if (limit.normalization == N::UpperGap)
      logP = (1.0 + al) * log_gap(al, c + log_k(spec.K, 2 * n + 2), c + log_k(spec.K, 2 * n + 3));
    else if (limit.normalization == N::LowerGap)
      logP = (1.0 + al) * log_diff(c + log_k(spec.K, 2 * n + 1), c + log_k(spec.K, 2 * n));
    const RescaleParams rp{std::exp(la), std::exp(logP)};
    if (!std::isnormal(rp.a) || !std::isnormal(rp.P))
      throw std::domain_error("a_i or P_i leaves double range at i=" + std::to_string(i));

    const MetricDescriptor desc = MetricDescriptor::rescaled_lattice(spec, rp);
    double u = metric_ball_euclidean_radius(spec, rp, r);
    if (std::isinf(u)) u = 2.0 * std::max(r, 1.0);  // no a priori containment; the sample stays inside the box
    GridGraph g(desc, {-u, -u, -u}, {u, u, u}, 0.5 * u * cfg.grid_resolution, tol);
    const std::size_t src = g.add_node({0.0, 0.0, 0.0});
    g.solve(src);
    std::vector<std::size_t> inside;
    for (std::size_t k = 0; k < g.node_count(); ++k)
      if (k != src && g.dist(k) < r) inside.push_back(k);
    if (inside.size() < 2) throw std::domain_error("metric ball too small for the grid; decrease grid_resolution");
    Rng rng(derive_seed(seed, "converge:" + std::to_string(i)));
    const std::size_t want = std::min(inside.size(), 2 * npairs);
    for (std::size_t k = 0; k < want; ++k) std::swap(inside[k], inside[k + rng.next() % (inside.size() - k)]);
    inside.resize(want);

    std::vector<std::pair<Point3, Point3>> pairs;
    for (std::size_t k = 0; k + 1 < inside.size(); k += 2) pairs.emplace_back(g.position(inside[k]), g.position(inside[k + 1]));
    auto dist_of = [&](const MetricDescriptor& d, const Point3& x, const Point3& y) {
      if (auto e = exact_distance(d, x, y)) return *e;
      return distance(d, x, y, cfg).value;
    };
    const auto diffs = parallel_map(pairs.size(), [&](std::size_t k) {
      return std::abs(dist_of(desc, pairs[k].first, pairs[k].second) -
                      dist_of(limit.metric, pairs[k].first, pairs[k].second));
    });
    double fiber = 0.0;
    for (std::size_t k : inside) fiber = std::max(fiber, fiber_diameter(spec, rp, g.position(k), tol).value);
    out.push_back({i, rp.a, rp.P, *std::max_element(diffs.begin(), diffs.end()), fiber});
  }
  return out;
}

// ---- dilations -------------------------------------------------------------------------------------------------

LimitDescriptor dilation_limit(const MetricDescriptor& desc, bool at_origin, const LimitThresholds& th) {
  using MK = MetricDescriptor::Kind;
  using K = LimitValue::Kind;
  constexpr int kSteps = 13;
  const double step = std::log(10.0);
  switch (desc.kind) {
    case MK::Euclidean:
      return euclidean_limit();
    case MK::InverseRadial:
      if (!(desc.theta > 0)) throw std::domain_error("inverse radial metric needs theta > 0");
      return inverse_radial_limit();
    case MK::AffineConformal: {
      if (!(desc.c >= 0) || !(desc.theta >= 0) || !(desc.c + desc.theta > 0))
        throw std::domain_error("affine metric needs c, theta >= 0, not both zero");
      if (desc.c == 0) return inverse_radial_limit();
      if (desc.theta == 0) return euclidean_limit();
      // dilating by lambda turns theta into theta / (c lambda)
      std::vector<double> lt;
      for (int k = 0; k < kSteps; ++k) {
        const double log_lambda = (at_origin ? -1.0 : 1.0) * k * step;
        lt.push_back(std::log(desc.theta / desc.c) - log_lambda);
      }
      const auto t = extrapolate_log(lt, th);
      if (is(t, K::Infinite)) return inverse_radial_limit();
      if (is(t, K::Zero)) return euclidean_limit();
      return inconclusive("theta/(c lambda) not determined");
    }
    case MK::PotentialST: {
      const double al = desc.alpha;
      // Phi_{S,P}^T is a multiple of Phi_{S P^{1/alpha},1}^{T P^{1/alpha}}; dilating by lambda multiplies both
      // endpoints by sigma = lambda^{-1/alpha}
      const double lp = std::log(desc.P) / al;
      const double lS0 = desc.S > 0 ? std::log(desc.S) + lp : kNegInf;
      const double lT0 = std::isinf(desc.T) ? kInf : std::log(desc.T) + lp;
      std::vector<double> ls, lt, lg, le;
      for (int k = 0; k < kSteps; ++k) {
        const double log_sigma = (at_origin ? 1.0 : -1.0) * k * step;
        const double lS = lS0 + log_sigma, lT = lT0 + log_sigma;
        ls.push_back(lS);
        lt.push_back(lT);
        // S^alpha sqrt(S^{1-alpha} - T^{1-alpha}) and T^alpha (T - S)
        lg.push_back(lS == kNegInf ? kNegInf : al * lS + log_gap(al, lS, lT));
        le.push_back(lT == kInf ? kInf : al * lT + log_diff(lT, lS));
      }
      if (is(extrapolate_log(lg, th), K::Infinite)) return euclidean_limit();
      if (is(extrapolate_log(le, th), K::Zero)) return inverse_radial_limit();
      const auto S = extrapolate_log(ls, th), T = extrapolate_log(lt, th);
      if (is(S, K::Inconclusive) || is(T, K::Inconclusive) || is(S, K::Infinite) || is(T, K::Zero))
        return inconclusive("endpoint limits not determined");
      return single_interval(finite_or(S, 0.0, kInf), finite_or(T, 0.0, kInf), al);
    }
    case MK::PotentialUnion:
    case MK::RescaledLattice:
      break;
  }
  throw std::invalid_argument("tangent cones are computed for closed-form limit metrics only");
}

std::vector<Table1Row> table1(double alpha) {
  if (!(alpha > 1)) throw std::domain_error("table needs alpha > 1");
  const std::vector<std::pair<std::string, MetricDescriptor>> rows{
      {"d_S^T", MetricDescriptor::potential_st(1.0, 2.0, 1.0, alpha)},
      {"d_S^inf", MetricDescriptor::potential_st(1.0, kInf, 1.0, alpha)},
      {"d_0^T", MetricDescriptor::potential_st(0.0, 1.0, 1.0, alpha)},
      {"d_0^inf", MetricDescriptor::potential_st(0.0, kInf, 1.0, alpha)},
      {"h0", MetricDescriptor::euclidean()},
      {"(1/|z|)h0", MetricDescriptor::inverse_radial(1.0)},
      {"(1+theta/|z|)h0", MetricDescriptor::affine(1.0, 1.0)},
  };
  std::vector<Table1Row> out;
  for (const auto& [name, d] : rows)
    out.push_back({name, dilation_limit(d, true).family_name(), dilation_limit(d, false).family_name()});
  return out;
}

std::vector<Table1Row> table1_expected() {
  return {
      {"d_S^T", "h0", "(1/|z|)h0"},
      {"d_S^inf", "h0", "d_0^inf"},
      {"d_0^T", "d_0^inf", "(1/|z|)h0"},
      {"d_0^inf", "d_0^inf", "d_0^inf"},
      {"h0", "h0", "h0"},
      {"(1/|z|)h0", "(1/|z|)h0", "(1/|z|)h0"},
      {"(1+theta/|z|)h0", "(1/|z|)h0", "h0"},
  };
}

}  // namespace tcone
