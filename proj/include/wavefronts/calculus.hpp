#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "wavefronts/errors.hpp"

namespace wavefront::calculus {

using Fn = std::function<double(double)>;

inline double central_difference(const Fn& f, double x, double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Scalar function with an optional exact derivative. When no derivative is
/// supplied, a central difference with step 1e-6 is used.
struct ScalarFn {
  Fn value;
  Fn deriv;

  double operator()(double x) const { return value(x); }
  double d(double x) const { return deriv ? deriv(x) : central_difference(value, x); }
};

/// (F(phi) - F(phi0)) / (phi - phi0), extended by F'(phi0) across the
/// removable singularity at phi = phi0.
inline double diff_quotient(const ScalarFn& F, double phi0, double phi) {
  const double scale = std::max({1.0, std::abs(phi), std::abs(phi0)});
  if (std::abs(phi - phi0) <= 1e-12 * scale) return F.d(phi0);
  return (F(phi) - F(phi0)) / (phi - phi0);
}

struct QuadratureOptions {
  double abs_tol = 1e-10;
  int max_depth = 48;
};

namespace detail {

inline double adapt_simpson(const Fn& f, double a, double fa, double b, double fb, double m,
                            double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double err = left + right - whole;
  if (std::abs(err) <= 15.0 * tol || std::abs(b - a) <= 1e-14 * (1.0 + std::abs(a) + std::abs(b)))
    return left + right + err / 15.0;
  if (depth <= 0) throw NumericalError("adaptive quadrature did not converge");
  return adapt_simpson(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adapt_simpson(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b]; a > b flips the sign.
inline double integrate(const Fn& f, double a, double b, QuadratureOptions opt = {}) {
  if (a == b) return 0.0;
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return sign * detail::adapt_simpson(f, a, fa, b, fb, m, fm, whole, opt.abs_tol, opt.max_depth);
}

/// Integral mean of the difference quotient of F with base point phi0,
/// evaluated at phi; equals F'(phi0) at phi = phi0.
inline double integral_mean(const ScalarFn& F, double phi0, double phi,
                            double quadrature_tol = 1e-10) {
  const double scale = std::max({1.0, std::abs(phi), std::abs(phi0)});
  if (std::abs(phi - phi0) <= 1e-12 * scale) return F.d(phi0);
  Fn dq = [&F, phi0](double psi) { return diff_quotient(F, phi0, psi); };
  QuadratureOptions opt;
  opt.abs_tol = quadrature_tol * std::abs(phi - phi0);
  const double val = integrate(dq, phi0, phi, opt);
  return val / (phi - phi0);
}

/// Difference quotient and its integral mean anchored at a base point.
struct QuotientProfile {
  ScalarFn F;
  double phi0 = 0.0;

  double delta(double phi) const { return diff_quotient(F, phi0, phi); }
  double mean(double phi, double tol = 1e-10) const { return integral_mean(F, phi0, phi, tol); }
};

enum class Kind { Sup, Inf };
enum class Quotient { Difference, IntegralMean };

struct Extremum {
  double value = 0.0;
  double at = 0.0;
};

/// Supremum of f over [a, b]: dense uniform scan plus a golden-section polish
/// around the best node. Reliable for the low-degree composites used here.
inline Extremum sup_of(const Fn& f, double a, double b, int grid = 4096) {
  if (!(b > a)) {
    if (a == b) return {f(a), a};
    std::swap(a, b);
  }
  const double h = (b - a) / grid;
  double best = -std::numeric_limits<double>::infinity();
  int best_i = 0;
  for (int i = 0; i <= grid; ++i) {
    const double x = (i == grid) ? b : a + i * h;
    const double v = f(x);
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  double lo = a + std::max(0, best_i - 1) * h;
  double hi = std::min(b, a + (best_i + 1) * h);
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 80 && (hi - lo) > 1e-14 * (1.0 + std::abs(lo) + std::abs(hi)); ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    }
  }
  const double xm = 0.5 * (lo + hi);
  const double vm = f(xm);
  if (vm > best) return {vm, xm};
  return {best, a + best_i * h};
}

inline Extremum extremum_of(Kind kind, const Fn& f, double a, double b, int grid = 4096) {
  if (kind == Kind::Sup) return sup_of(f, a, b, grid);
  Fn neg = [&f](double x) { return -f(x); };
  Extremum e = sup_of(neg, a, b, grid);
  return {-e.value, e.at};
}

/// Certified extremum of a difference quotient or of its integral mean over
/// [a, b]; the base point may lie inside the interval (the continuous
/// extension applies there).
inline Extremum extremum(Kind kind, Quotient q, const ScalarFn& F, double phi0, double a, double b,
                         int grid = 4096, double quad_tol = 1e-10) {
  if (q == Quotient::Difference) {
    Fn e = [&F, phi0](double x) { return diff_quotient(F, phi0, x); };
    return extremum_of(kind, e, a, b, grid);
  }
  Fn e = [&F, phi0, quad_tol](double x) { return integral_mean(F, phi0, x, quad_tol); };
  return extremum_of(kind, e, a, b, grid);
}

}  // namespace wavefront::calculus
