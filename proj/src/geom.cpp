#include "tcone/geom.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <numbers>
#include <stdexcept>

namespace tcone {

double dist_to_half_axis(const Point3& p) { return p.zr >= 0.0 ? p.transverse_norm() : p.norm(); }

Point3 rotate_transverse(const Point3& p, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {p.zr, c * p.zc1 - s * p.zc2, s * p.zc1 + c * p.zc2};
}

Region make_krd(double R, double D) {
  if (!(D >= 0.0) || !(R >= D)) throw std::invalid_argument("K(R,D) requires R >= D >= 0");
  return KRD{R, D};
}

Region make_slab(double D) {
  if (!(D > 0.0)) throw std::invalid_argument("L(D) requires D > 0");
  return SlabL{D};
}

Region make_ball(double u) {
  if (!(u > 0.0)) throw std::invalid_argument("B(u) requires u > 0");
  return Ball{u};
}

Region make_metric_ball(const Point3& center, double r, std::function<double(const Point3&, const Point3&)> dist) {
  if (!(r > 0.0)) throw std::invalid_argument("metric ball requires r > 0");
  if (!dist) throw std::invalid_argument("metric ball requires a distance function");
  return MetricBall{center, r, std::move(dist)};
}

bool contains(const Region& region, const Point3& p) {
  struct Visitor {
    const Point3& p;
    bool operator()(const KRD& k) const { return p.norm() <= k.R && dist_to_half_axis(p) >= k.D; }
    bool operator()(const SlabL& s) const { return p.transverse_norm() < s.D; }
    bool operator()(const Ball& b) const { return p.norm() < b.u; }
    bool operator()(const MetricBall& m) const { return m.dist(m.center, p) < m.r; }
  };
  return std::visit(Visitor{p}, region);
}

Polyline::Polyline(std::vector<Point3> v) : vertices(std::move(v)) {
  params.resize(vertices.size());
  for (std::size_t i = 0; i < params.size(); ++i) params[i] = static_cast<double>(i);
}

Polyline::Polyline(std::vector<Point3> v, std::vector<double> t) : vertices(std::move(v)), params(std::move(t)) {
  if (vertices.size() != params.size()) throw std::invalid_argument("polyline: vertex/parameter count mismatch");
  for (std::size_t i = 1; i < params.size(); ++i)
    if (!(params[i] > params[i - 1])) throw std::invalid_argument("polyline: parameters must increase strictly");
}

double Polyline::euclidean_length() const {
  double s = 0.0;
  for (std::size_t i = 1; i < vertices.size(); ++i) s += distance(vertices[i - 1], vertices[i]);
  return s;
}

double inverse_sqrt_cos_integral() {
  // Symmetric about pi/2; the substitution inside tanh-sinh clusters nodes at the singular endpoint.
  static const double value = [] {
    boost::math::quadrature::tanh_sinh<double> integrator;
    auto f = [](double t, double tc) {
      // tc is the distance to the nearer endpoint; near pi/2, cos t = sin(pi/2 - t) is evaluated accurately.
      const double d = (t > std::numbers::pi / 4) ? tc : std::numbers::pi / 2 - t;
      return 1.0 / std::sqrt(std::sin(d));
    };
    return 2.0 * integrator.integrate(f, 0.0, std::numbers::pi / 2);
  }();
  return value;
}

ConstantsLedger ConstantsLedger::make(double C0, double C1, double kappa, double m, double epsilon) {
  if (!(C0 > 0.0) || !(C1 > 0.0)) throw std::invalid_argument("ledger: C0, C1 must be positive");
  if (!(kappa >= 0.0)) throw std::invalid_argument("ledger: kappa must be nonnegative");
  if (!(m > 0.0)) throw std::invalid_argument("ledger: m must be positive");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("ledger: epsilon must be nonnegative");
  ConstantsLedger c;
  c.C0 = C0;
  c.C1 = C1;
  c.kappa = kappa;
  c.kappa_prime = (1.0 + kappa) / 2.0;
  c.m = m;
  c.epsilon = epsilon;
  c.C2 = (2.0 + inverse_sqrt_cos_integral()) * std::sqrt(C1);
  c.C3 = 3.0 * c.C2 / (2.0 * std::sqrt(C0));
  return c;
}

double ledger_rho(const ConstantsLedger& c, double t) {
  const double q = 1.0 + c.C3 * std::pow(t, c.kappa_prime);
  return std::max(t - 1.0, q * q);
}

double ledger_u_of_r(const ConstantsLedger& c, double r) {
  const double q = 1.0 + r / (2.0 * std::sqrt(c.C0));
  return q * q;
}

double ledger_xi(const ConstantsLedger& c, double u) {
  const double far = ledger_rho(c, u + 1.0) + 1.0;
  return std::sqrt(c.C1 * (1.0 + std::pow(far, c.kappa))) + 8.0 * std::sqrt(c.C1 * (1.0 + std::pow(u + 1.0, c.kappa))) +
         2.0;
}

double ledger_xi_inf(const ConstantsLedger& c, double u) {
  const double far = ledger_rho(c, u + 1.0) + 1.0;
  return std::sqrt(c.C1 * std::pow(far, c.kappa)) + 8.0 * std::sqrt(c.C1 * std::pow(u + 1.0, c.kappa)) + 2.0;
}

LedgerValues ledger_functions(const ConstantsLedger& c, double u, double r) {
  if (!(u >= 1.0)) throw std::domain_error("ledger functions require u >= 1");
  if (!(r > 0.0)) throw std::domain_error("ledger functions require r > 0");
  return {ledger_rho(c, u), ledger_u_of_r(c, r), ledger_xi(c, u), ledger_xi_inf(c, u)};
}

}  // namespace tcone
