#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "wavefronts/calculus.hpp"
#include "wavefronts/errors.hpp"

namespace wavefront {

/// Coefficient triple of u_t + f(u)_x = (D(u) u_x)_x + g(u) together with the
/// marked zeros: D vanishes at alpha and beta (negative in between), g
/// vanishes at 0, gamma and 1 (negative before gamma, positive after).
struct EquationTriple {
  calculus::ScalarFn f;
  calculus::ScalarFn D;
  calculus::ScalarFn g;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;

  /// Product D*g with its exact derivative.
  calculus::ScalarFn Dg() const {
    auto Df = D, gf = g;
    return calculus::ScalarFn{
        [Df, gf](double u) { return Df(u) * gf(u); },
        [Df, gf](double u) { return Df.d(u) * gf(u) + Df(u) * gf.d(u); }};
  }
};

struct ShapeReport {
  bool order_ok = false;       // 0 < alpha < gamma < beta < 1
  bool D_shape = false;        // D > 0 on [0,a) u (b,1], D < 0 on (a,b), D(a)=D(b)=0
  bool g_shape = false;        // g < 0 on (0,c), g > 0 on (c,1), g(0)=g(c)=g(1)=0
  std::string detail;

  bool ok() const { return order_ok && D_shape && g_shape; }
};

/// Grid check of the sign assumptions on D and g.
inline ShapeReport check_shape(const EquationTriple& t, int grid = 2000) {
  ShapeReport r;
  r.order_ok = 0.0 < t.alpha && t.alpha < t.gamma && t.gamma < t.beta && t.beta < 1.0;
  if (!r.order_ok) {
    r.detail = "marked zeros are not ordered 0 < alpha < gamma < beta < 1";
    return r;
  }
  auto near = [](double a, double b) { return std::abs(a - b) <= 1e-9 * (1.0 + std::abs(a)); };
  const double margin = 1.0 / (4.0 * grid);
  bool d_ok = near(t.D(t.alpha), 0.0) && near(t.D(t.beta), 0.0);
  bool g_ok = near(t.g(0.0), 0.0) && near(t.g(t.gamma), 0.0) && near(t.g(1.0), 0.0);
  for (int i = 0; i <= grid && (d_ok || g_ok); ++i) {
    const double u = static_cast<double>(i) / grid;
    if (d_ok) {
      const double Du = t.D(u);
      if (u < t.alpha - margin || u > t.beta + margin) d_ok = d_ok && Du > 0.0;
      if (u > t.alpha + margin && u < t.beta - margin) d_ok = d_ok && Du < 0.0;
    }
    if (g_ok) {
      const double gu = t.g(u);
      if (u > margin && u < t.gamma - margin) g_ok = g_ok && gu < 0.0;
      if (u > t.gamma + margin && u < 1.0 - margin) g_ok = g_ok && gu > 0.0;
    }
  }
  r.D_shape = d_ok;
  r.g_shape = g_ok;
  if (!d_ok) r.detail += "D does not match the forward-backward-forward sign pattern; ";
  if (!g_ok) r.detail += "g does not match the bistable sign pattern; ";
  return r;
}

/// Dense-coefficient polynomial, lowest degree first.
struct Polynomial {
  std::vector<double> c;

  double operator()(double x) const {
    double v = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) v = v * x + c[i];
    return v;
  }
  Polynomial derivative() const {
    if (c.size() <= 1) return Polynomial{{0.0}};
    std::vector<double> d(c.size() - 1);
    for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = c[i] * static_cast<double>(i);
    return Polynomial{std::move(d)};
  }
  calculus::ScalarFn fn() const {
    Polynomial p = *this, dp = derivative();
    return calculus::ScalarFn{[p](double x) { return p(x); }, [dp](double x) { return dp(x); }};
  }
};

inline EquationTriple make_polynomial_triple(Polynomial f, Polynomial D, Polynomial g, double alpha,
                                             double beta, double gamma) {
  EquationTriple t;
  t.f = f.fn();
  t.D = D.fn();
  t.g = g.fn();
  t.alpha = alpha;
  t.beta = beta;
  t.gamma = gamma;
  return t;
}

/// Adds a drift wedge to f: slope +lambda left of gamma, -lambda right of it,
/// with a C^1 quadratic turn of half-width w (keeps assumption (f) intact).
inline EquationTriple with_drift_wedge(const EquationTriple& t, double lambda, double w = -1.0) {
  if (w <= 0.0) w = 0.25 * std::min(t.gamma - t.alpha, t.beta - t.gamma);
  const double gamma = t.gamma;
  auto slope = [gamma, w](double u) {
    if (u <= gamma - w) return 1.0;
    if (u >= gamma + w) return -1.0;
    return (gamma - u) / w;
  };
  auto wedge = [gamma, w, slope](double u) {
    if (u <= gamma - w) return u;
    const double s0 = gamma - w;
    if (u <= gamma + w) {
      // integral of (gamma - t)/w from s0 to u
      return s0 + (gamma * (u - s0) - 0.5 * (u * u - s0 * s0)) / w;
    }
    const double s1 = gamma - w + (gamma * (2.0 * w) - 0.5 * ((gamma + w) * (gamma + w) -
                                                              (gamma - w) * (gamma - w))) /
                                      w;
    return s1 - (u - gamma - w);
  };
  EquationTriple out = t;
  auto f0 = t.f;
  out.f = calculus::ScalarFn{
      [f0, wedge, lambda](double u) { return f0(u) + lambda * wedge(u); },
      [f0, slope, lambda](double u) { return f0.d(u) + lambda * slope(u); }};
  return out;
}

}  // namespace wavefront
