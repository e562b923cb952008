#pragma once

#include <cmath>
#include <functional>
#include <variant>
#include <vector>

namespace tcone {

/** A point of R^3 = R + C: axial coordinate zr and transverse plane vector (zc1, zc2). */
struct Point3 {
  double zr = 0.0;
  double zc1 = 0.0;
  double zc2 = 0.0;

  double norm() const { return std::hypot(zr, zc1, zc2); }
  double transverse_norm() const { return std::hypot(zc1, zc2); }

  Point3 operator+(const Point3& o) const { return {zr + o.zr, zc1 + o.zc1, zc2 + o.zc2}; }
  Point3 operator-(const Point3& o) const { return {zr - o.zr, zc1 - o.zc1, zc2 - o.zc2}; }
  Point3 operator*(double s) const { return {zr * s, zc1 * s, zc2 * s}; }
  bool operator==(const Point3& o) const = default;
};

inline double dot(const Point3& a, const Point3& b) { return a.zr * b.zr + a.zc1 * b.zc1 + a.zc2 * b.zc2; }
inline double distance(const Point3& a, const Point3& b) { return (a - b).norm(); }

/** Euclidean distance to the closed half-axis l = {(t,0,0) : t >= 0}. */
double dist_to_half_axis(const Point3& p);

/** Rotates the transverse component by `angle` (the S^1 action fixing the axis). */
Point3 rotate_transverse(const Point3& p, double angle);

struct KRD {
  double R;
  double D;
};
struct SlabL {
  double D;
};
struct Ball {
  double u;
};
struct MetricBall {
  Point3 center;
  double r;
  std::function<double(const Point3&, const Point3&)> dist;
};
using Region = std::variant<KRD, SlabL, Ball, MetricBall>;

Region make_krd(double R, double D);
Region make_slab(double D);
Region make_ball(double u);
Region make_metric_ball(const Point3& center, double r, std::function<double(const Point3&, const Point3&)> dist);

/** K(R,D) is closed, L(D) and B(u) are open, metric balls are open. */
bool contains(const Region& region, const Point3& p);

/** Piecewise-linear path with strictly increasing parameters. */
struct Polyline {
  std::vector<Point3> vertices;
  std::vector<double> params;

  Polyline() = default;
  explicit Polyline(std::vector<Point3> v);  // params 0, 1, ..., n-1
  Polyline(std::vector<Point3> v, std::vector<double> t);

  std::size_t size() const { return vertices.size(); }
  const Point3& front() const { return vertices.front(); }
  const Point3& back() const { return vertices.back(); }
  double euclidean_length() const;
};

struct ConstantsLedger {
  double C0 = 1.0;
  double C1 = 1.0;
  double C2 = 0.0;
  double C3 = 0.0;
  double kappa = 0.0;
  double kappa_prime = 0.5;
  double m = 1.0;
  double epsilon = 0.0;

  /** Derives C2, C3 and kappa' from the primary constants. */
  static ConstantsLedger make(double C0, double C1, double kappa, double m = 1.0, double epsilon = 0.0);
};

/** The improper integral of |cos t|^{-1/2} over [0, pi], computed once. */
double inverse_sqrt_cos_integral();

struct LedgerValues {
  double rho_u;
  double u_of_r;
  double xi_u;
  double xi_inf_u;
};

double ledger_rho(const ConstantsLedger& c, double t);
double ledger_u_of_r(const ConstantsLedger& c, double r);
double ledger_xi(const ConstantsLedger& c, double u);
double ledger_xi_inf(const ConstantsLedger& c, double u);
LedgerValues ledger_functions(const ConstantsLedger& c, double u, double r);

}  // namespace tcone
