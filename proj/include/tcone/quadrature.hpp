#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace tcone {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

namespace detail {

/** One Gauss-Kronrod 15 panel; the error is |K15 - G7|, which overestimates the K15 error on smooth panels. */
template <class F>
QuadResult gk15_panel(F& f, double a, double b) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  using G = boost::math::quadrature::gauss<double, 7>;
  const auto& xk = GK::abscissa();
  const auto& wk = GK::weights();
  const auto& wg = G::weights();
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double k = fc * wk[0], g = fc * wg[0];
  for (std::size_t i = 1; i < xk.size(); ++i) {
    const double d = h * xk[i];
    const double s = f(c - d) + f(c + d);
    k += wk[i] * s;
    if (i % 2 == 0) g += wg[i / 2] * s;
  }
  return {k * h, std::abs((k - g) * h)};
}

}  // namespace detail

/**
 * Globally adaptive Gauss-Kronrod on [a, b] with an absolute tolerance.
 * Bisects the panel with the largest error estimate until the total estimate meets `abs_tol`.
 */
template <class F>
QuadResult integrate_adaptive(F&& f, double a, double b, double abs_tol, int max_panels = 2000) {
  if (!(b > a)) return {};
  struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
  };
  std::priority_queue<Panel> queue;
  auto first = detail::gk15_panel(f, a, b);
  if (!std::isfinite(first.value)) return {std::numeric_limits<double>::infinity(), 0.0};
  queue.push({a, b, first.value, first.error});
  double total_err = first.error;
  int panels = 1;
  std::vector<Panel> frozen;
  while (!queue.empty() && total_err > abs_tol && panels < max_panels) {
    Panel p = queue.top();
    queue.pop();
    const double m = 0.5 * (p.a + p.b);
    if (!(m > p.a && m < p.b)) {
      frozen.push_back(p);
      continue;
    }
    auto l = detail::gk15_panel(f, p.a, m);
    auto r = detail::gk15_panel(f, m, p.b);
    if (!std::isfinite(l.value) || !std::isfinite(r.value)) return {std::numeric_limits<double>::infinity(), 0.0};
    total_err += l.error + r.error - p.error;
    queue.push({p.a, m, l.value, l.error});
    queue.push({m, p.b, r.value, r.error});
    ++panels;
  }
  QuadResult out;
  for (const auto& p : frozen) {
    out.value += p.value;
    out.error += p.error;
  }
  while (!queue.empty()) {
    out.value += queue.top().value;
    out.error += queue.top().error;
    queue.pop();
  }
  return out;
}

/** Double-exponential rule for integrands with integrable endpoint singularities. */
template <class F>
QuadResult integrate_endpoint_singular(F&& f, double a, double b, double rel_tol = 1e-10) {
  if (!(b > a)) return {};
  static thread_local boost::math::quadrature::tanh_sinh<double> integrator(12);
  double err = 0.0, l1 = 0.0;
  const double v = integrator.integrate(f, a, b, rel_tol, &err, &l1);
  return {v, err};
}

}  // namespace tcone
