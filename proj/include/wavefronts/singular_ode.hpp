#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "wavefronts/calculus.hpp"
#include "wavefronts/errors.hpp"

namespace wavefront::singular_ode {

using calculus::Fn;

/// Half-interval singular problem z' = h(phi) - c - Q(phi)/z with z < 0 on
/// (sigma1, sigma2) and Q > 0 inside, Q(sigma1) = Q(sigma2) = 0.
struct SingularProblem {
  Fn h;
  Fn Q;
  double sigma1 = 0.0;
  double sigma2 = 1.0;
  double dQ_sigma1 = 0.0;  // Q'(sigma1) >= 0
  double dQ_sigma2 = 0.0;  // Q'(sigma2) <= 0
  double q_max = 1.0;      // max |Q| on the interval, used for zero bands

  double span() const { return sigma2 - sigma1; }
};

/// Builds a problem, filling endpoint derivatives (one-sided differences when
/// no exact derivative is supplied) and checking the sign invariants.
inline SingularProblem make_problem(Fn h, Fn Q, double sigma1, double sigma2,
                                    std::optional<Fn> dQ = std::nullopt) {
  if (!(sigma2 > sigma1)) throw InvalidInputError("make_problem: requires sigma1 < sigma2");
  SingularProblem p;
  p.h = std::move(h);
  p.Q = std::move(Q);
  p.sigma1 = sigma1;
  p.sigma2 = sigma2;
  const double hstep = 1e-7 * p.span();
  if (dQ) {
    p.dQ_sigma1 = (*dQ)(sigma1);
    p.dQ_sigma2 = (*dQ)(sigma2);
  } else {
    p.dQ_sigma1 = (p.Q(sigma1 + hstep) - p.Q(sigma1)) / hstep;
    p.dQ_sigma2 = (p.Q(sigma2) - p.Q(sigma2 - hstep)) / hstep;
  }
  p.q_max = 0.0;
  const int n = 2000;
  for (int i = 0; i <= n; ++i) {
    const double x = sigma1 + p.span() * i / n;
    const double q = p.Q(x);
    if (i > 0 && i < n && q <= 0.0)
      throw InvalidInputError("make_problem: Q must be positive inside (sigma1, sigma2)");
    p.q_max = std::max(p.q_max, std::abs(q));
  }
  const double ends_tol = 1e-12 * std::max(1.0, p.q_max);
  if (std::abs(p.Q(sigma1)) > ends_tol || std::abs(p.Q(sigma2)) > ends_tol)
    throw InvalidInputError("make_problem: Q must vanish at both endpoints");
  return p;
}

enum class Terminal {
  ReachesNegative,      // z(sigma1) < 0 strictly: the speed is below threshold
  TouchesZeroInterior,  // entered the zero band while Q was still of size
  TouchesZeroAtSigma1,  // entered the zero band at the degenerate endpoint
};

struct Classification {
  Terminal kind = Terminal::ReachesNegative;
  double z_at_sigma1 = 0.0;  // meaningful for ReachesNegative
  double phi_stop = 0.0;     // where the zero band was entered
};

struct Sample {
  double phi = 0.0;
  double z = 0.0;
  double dz = 0.0;
};

struct IntegrateOptions {
  double eps_start_rel = 1e-6;  // indicial start offset, relative to the span
  double rtol = 1e-10;
  double atol = 1e-12;
  double delta_zero = -1.0;    // zero band; < 0 selects 1e-9 * q_max / span
  double eps_Q_rel = 1e-7;     // interior-touch test: Q > eps_Q_rel * q_max
  double max_step_rel = 1.5e-3;  // keeps the Hermite dense output at full accuracy
  std::size_t max_steps = 2000000;
};

struct BranchSolution {
  double c = 0.0;
  double indicial_slope = 0.0;
  std::vector<Sample> samples;  // ascending phi
  Classification term;

  /// Cubic Hermite interpolation over the stored samples.
  double z_at(double phi) const {
    if (samples.empty()) throw NumericalError("z_at: empty branch");
    if (phi <= samples.front().phi) return samples.front().z;
    if (phi >= samples.back().phi) return samples.back().z;
    std::size_t lo = 0, hi = samples.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      if (samples[mid].phi <= phi)
        lo = mid;
      else
        hi = mid;
    }
    const Sample& a = samples[lo];
    const Sample& b = samples[hi];
    const double h = b.phi - a.phi;
    if (h <= 0.0) return a.z;
    const double t = (phi - a.phi) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * a.z + (t3 - 2 * t2 + t) * h * a.dz +
           (-2 * t3 + 3 * t2) * b.z + (t3 - t2) * h * b.dz;
  }
};

namespace detail {

struct StepperResult {
  bool banded = false;   // stopped because z entered the zero band
  double phi_end = 0.0;
  double z_end = 0.0;
};

/// Dormand-Prince 5(4) with PI step control for the scalar equation
/// z' = h(phi) - c - Q(phi)/z. Integration stops at phi_to or when z rises
/// into the band [-delta_zero, 0).
inline StepperResult integrate_banded(const SingularProblem& p, double c, double phi_from,
                                      double z_from, double phi_to, double delta_zero,
                                      const IntegrateOptions& o, std::vector<Sample>& out) {
  auto rhs = [&p, c](double phi, double z) { return p.h(phi) - c - p.Q(phi) / z; };

  const double dir = (phi_to > phi_from) ? 1.0 : -1.0;
  const double total = std::abs(phi_to - phi_from);
  double x = phi_from;
  double z = z_from;
  double k1 = rhs(x, z);
  out.push_back({x, z, k1});

  const double hmax = o.max_step_rel * p.span();
  double h = dir * std::min(hmax, 0.5 * total);
  const double hmin = 1e-15 * p.span();
  StepperResult res;

  for (std::size_t step = 0; step < o.max_steps; ++step) {
    if (dir * (phi_to - x) <= 0.0) {
      res.phi_end = x;
      res.z_end = z;
      return res;
    }
    if (std::abs(h) > hmax) h = dir * hmax;
    if (std::abs(h) > std::abs(phi_to - x)) h = phi_to - x;
    if (std::abs(h) < hmin) throw NumericalError("integrate: step size underflow");

    const double k2 = rhs(x + h * 0.2, z + h * 0.2 * k1);
    const double k3 = rhs(x + h * 0.3, z + h * (3.0 / 40 * k1 + 9.0 / 40 * k2));
    const double k4 = rhs(x + h * 0.8, z + h * (44.0 / 45 * k1 - 56.0 / 15 * k2 + 32.0 / 9 * k3));
    const double k5 = rhs(x + h * (8.0 / 9),
                          z + h * (19372.0 / 6561 * k1 - 25360.0 / 2187 * k2 +
                                   64448.0 / 6561 * k3 - 212.0 / 729 * k4));
    const double k6 = rhs(x + h, z + h * (9017.0 / 3168 * k1 - 355.0 / 33 * k2 +
                                          46732.0 / 5247 * k3 + 49.0 / 176 * k4 -
                                          5103.0 / 18656 * k5));
    const double z5 = z + h * (35.0 / 384 * k1 + 500.0 / 1113 * k3 + 125.0 / 192 * k4 -
                               2187.0 / 6784 * k5 + 11.0 / 84 * k6);
    const double k7 = rhs(x + h, z5);
    const double z4 = z + h * (5179.0 / 57600 * k1 + 7571.0 / 16695 * k3 + 393.0 / 640 * k4 -
                               92097.0 / 339200 * k5 + 187.0 / 2100 * k6 + 1.0 / 40 * k7);
    const double sk = o.atol + o.rtol * std::max(std::abs(z), std::abs(z5));
    const double err = std::abs(z5 - z4) / sk;

    if (err <= 1.0) {
      // accepted; locate a band crossing inside the step if one occurred
      if (z5 >= -delta_zero) {
        double lo_t = 0.0, hi_t = 1.0;
        auto hermite = [&](double t) {
          const double t2 = t * t, t3 = t2 * t;
          return (2 * t3 - 3 * t2 + 1) * z + (t3 - 2 * t2 + t) * h * k1 +
                 (-2 * t3 + 3 * t2) * z5 + (t3 - t2) * h * k7;
        };
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo_t + hi_t);
          if (hermite(mid) >= -delta_zero)
            hi_t = mid;
          else
            lo_t = mid;
        }
        const double tc = hi_t;
        res.banded = true;
        res.phi_end = x + tc * h;
        res.z_end = hermite(tc);
        out.push_back({res.phi_end, res.z_end, rhs(res.phi_end, std::min(res.z_end, -1e-300))});
        return res;
      }
      x += h;
      z = z5;
      k1 = k7;  // FSAL
      out.push_back({x, z, k1});
    }
    const double fac = std::clamp(0.9 * std::pow(1.0 / std::max(err, 1e-10), 0.2), 0.2, 5.0);
    h *= fac;
  }
  throw NumericalError("integrate: step budget exhausted");
}

inline double resolve_delta_zero(const SingularProblem& p, const IntegrateOptions& o) {
  return o.delta_zero > 0.0 ? o.delta_zero : 1e-9 * p.q_max / p.span();
}

inline void sort_ascending(std::vector<Sample>& s) {
  if (s.size() > 1 && s.front().phi > s.back().phi) std::reverse(s.begin(), s.end());
}

}  // namespace detail

/// Nonnegative root of  y^2 - (h(sigma2) - c) y + Q'(sigma2) = 0, the slope of
/// the extremal solution leaving the degenerate right endpoint.
inline double indicial_slope_sigma2(const SingularProblem& p, double c) {
  const double hc = p.h(p.sigma2) - c;
  const double disc = hc * hc - 4.0 * p.dQ_sigma2;
  if (disc < 0.0)
    throw NumericalError("indicial root complex at sigma2; Q'(sigma2) <= 0 is violated");
  return 0.5 * (hc + std::sqrt(disc));
}

/// Roots at the left endpoint, where Q'(sigma1) >= 0. Both roots are negative
/// once c exceeds h(sigma1) + 2 sqrt(Q'(sigma1)); empty below that.
inline std::optional<std::pair<double, double>> indicial_roots_sigma1(const SingularProblem& p,
                                                                      double c) {
  const double hc = p.h(p.sigma1) - c;
  const double disc = hc * hc - 4.0 * p.dQ_sigma1;
  if (disc < 0.0) return std::nullopt;
  const double r = std::sqrt(disc);
  return std::make_pair(0.5 * (hc - r), 0.5 * (hc + r));  // {fast, slow}
}

/// The extremal solution anchored at (sigma2, 0), integrated leftward, with a
/// terminal classification of what happened at or before sigma1.
inline BranchSolution integrate_zeta(const SingularProblem& p, double c, IntegrateOptions o = {}) {
  const double delta_zero = detail::resolve_delta_zero(p, o);
  const double eps = o.eps_start_rel * p.span();
  const double lam = indicial_slope_sigma2(p, c);

  BranchSolution br;
  br.c = c;
  br.indicial_slope = lam;

  const double z0 = -lam * eps;
  if (z0 >= -2.0 * delta_zero) {
    // the extremal solution hugs the zero band from the start: far above threshold
    br.term.kind = Terminal::TouchesZeroAtSigma1;
    br.term.phi_stop = p.sigma2 - eps;
    br.samples.push_back({p.sigma2 - eps, z0, 0.0});
    return br;
  }

  std::vector<Sample> raw;
  auto res = detail::integrate_banded(p, c, p.sigma2 - eps, z0, p.sigma1, delta_zero, o, raw);
  detail::sort_ascending(raw);
  br.samples = std::move(raw);

  if (res.banded) {
    br.term.phi_stop = res.phi_end;
    const bool interior = p.Q(res.phi_end) > o.eps_Q_rel * p.q_max &&
                          (res.phi_end - p.sigma1) > 1e-3 * p.span();
    br.term.kind = interior ? Terminal::TouchesZeroInterior : Terminal::TouchesZeroAtSigma1;
  } else {
    br.term.kind = Terminal::ReachesNegative;
    br.term.z_at_sigma1 = res.z_end;
    br.term.phi_stop = res.phi_end;
  }
  return br;
}

struct ThresholdBounds {
  double lower = 0.0;  // max{ sup of the running mean of h, h(s1) + 2 sqrt(Q'(s1)) }
  double upper = 0.0;  // sup mean(h) + 2 sup sqrt(integral-mean quotient of Q)
};

/// Two-sided analytic estimate of the threshold speed for the problem.
inline ThresholdBounds analytic_threshold_bounds(const SingularProblem& p,
                                                 int grid = 4096) {
  const double s1 = p.sigma1, s2 = p.sigma2;
  Fn mean_h = [&p, s1](double phi) {
    if (std::abs(phi - s1) <= 1e-12 * (1.0 + std::abs(s1))) return p.h(s1);
    return calculus::integrate(p.h, s1, phi, {1e-11 * std::abs(phi - s1), 48}) / (phi - s1);
  };
  const double sup_mean_h = calculus::sup_of(mean_h, s1, s2, grid).value;

  const double dq1 = std::max(0.0, p.dQ_sigma1);
  Fn delta_Q = [&p, s1](double psi) {
    if (std::abs(psi - s1) <= 1e-12 * (1.0 + std::abs(s1))) return p.dQ_sigma1;
    return p.Q(psi) / (psi - s1);
  };
  Fn mean_Q = [&p, s1, &delta_Q](double phi) {
    if (std::abs(phi - s1) <= 1e-12 * (1.0 + std::abs(s1))) return p.dQ_sigma1;
    return calculus::integrate(delta_Q, s1, phi, {1e-11 * std::abs(phi - s1), 48}) / (phi - s1);
  };
  const double sup_mean_Q = std::max(0.0, calculus::sup_of(mean_Q, s1, s2, grid).value);

  ThresholdBounds b;
  b.lower = std::max(sup_mean_h, p.h(s1) + 2.0 * std::sqrt(dq1));
  b.upper = sup_mean_h + 2.0 * std::sqrt(sup_mean_Q);
  return b;
}

struct ThresholdCertificate {
  double lower_bound = 0.0;  // analytic sandwich
  double upper_bound = 0.0;
  double bracket_lo = 0.0;   // final bisection bracket
  double bracket_hi = 0.0;
  double raw_mid = 0.0;      // plain bisection estimate before clamping
  int iterations = 0;
  bool clamped = false;
  bool monotone_ok = true;
  int interior_touches = 0;  // anomaly counter
};

struct ThresholdResult {
  double c_star = 0.0;
  ThresholdCertificate cert;
};

struct ThresholdOptions {
  double bisect_tol = 1e-6;
  IntegrateOptions integ;
  std::optional<ThresholdBounds> bounds;  // externally supplied sandwich
  bool validate_monotone = false;
  int monotone_scan = 50;
};

/// Threshold speed c*: the extremal solution undershoots (z(sigma1) < 0) for
/// c below c* and closes the connection (z -> 0 at sigma1) at and above it.
/// Bisection on that dichotomy, with the result clamped into the analytic
/// sandwich: near pulled thresholds the undershoot decays faster than any
/// zero band can resolve, while the sandwich stays exact.
inline ThresholdResult threshold_cstar(const SingularProblem& p, ThresholdOptions o = {}) {
  const ThresholdBounds b = o.bounds ? *o.bounds : analytic_threshold_bounds(p);
  ThresholdResult out;
  out.cert.lower_bound = b.lower;
  out.cert.upper_bound = b.upper;

  int touches = 0;
  auto below = [&](double c) {
    const BranchSolution zb = integrate_zeta(p, c, o.integ);
    if (zb.term.kind == Terminal::TouchesZeroInterior) ++touches;
    return zb.term.kind == Terminal::ReachesNegative;
  };

  double lo = b.lower - 1.0;
  double hi = b.upper + 1.0;
  if (!below(lo) || below(hi))
    throw NumericalError("threshold bisection: bracket endpoints classify identically");

  int it = 0;
  while (hi - lo > o.bisect_tol && it < 200) {
    const double mid = 0.5 * (lo + hi);
    if (below(mid))
      lo = mid;
    else
      hi = mid;
    ++it;
  }
  const double raw = 0.5 * (lo + hi);
  out.cert.bracket_lo = lo;
  out.cert.bracket_hi = hi;
  out.cert.raw_mid = raw;
  out.cert.iterations = it;
  out.cert.interior_touches = touches;

  if (raw > b.upper + std::max(10.0 * o.bisect_tol, 1e-9))
    throw NumericalError("threshold bisection exceeded the analytic upper bound");
  out.c_star = std::clamp(raw, b.lower, b.upper);
  out.cert.clamped = out.c_star != raw;

  if (o.validate_monotone) {
    const double w = 10.0 * o.bisect_tol;
    bool prev = true;
    bool ok = true;
    for (int i = 0; i <= o.monotone_scan; ++i) {
      const double c = raw - w + 2.0 * w * i / o.monotone_scan;
      const bool be = below(c);
      if (!prev && be) ok = false;  // switched back from "at/above" to "below"
      prev = be;
    }
    out.cert.monotone_ok = ok;
    if (!ok) throw NumericalError("threshold bisection: classification is not monotone in c");
  }
  return out;
}

enum class Direction { TowardSigma1, TowardSigma2 };

struct EndpointHit {
  bool hit = false;
  double phi_stop = 0.0;
  double z_end = 0.0;
};

struct InteriorBranch {
  BranchSolution branch;
  EndpointHit report;
};

/// Integrates from an interior anchor (phi_a, z_a < 0) toward one endpoint and
/// reports whether the solution closed into the degenerate corner there.
inline InteriorBranch branch_from_interior(const SingularProblem& p, double c, double phi_a,
                                           double z_a, Direction dir, IntegrateOptions o = {}) {
  if (!(z_a < 0.0)) throw InvalidInputError("branch_from_interior: anchor value must be negative");
  if (!(phi_a > p.sigma1 && phi_a <= p.sigma2))
    throw InvalidInputError("branch_from_interior: anchor out of range");
  const double delta_zero = detail::resolve_delta_zero(p, o);
  const double target = dir == Direction::TowardSigma1 ? p.sigma1 : p.sigma2;

  InteriorBranch out;
  out.branch.c = c;
  std::vector<Sample> raw;
  auto res = detail::integrate_banded(p, c, phi_a, z_a, target, delta_zero, o, raw);
  detail::sort_ascending(raw);
  out.branch.samples = std::move(raw);

  out.report.phi_stop = res.phi_end;
  out.report.z_end = res.z_end;
  if (res.banded) {
    const bool near_end = std::abs(res.phi_end - target) <= 1e-3 * p.span() ||
                          p.Q(res.phi_end) <= o.eps_Q_rel * p.q_max * 10.0;
    out.report.hit = near_end;
    out.branch.term.kind =
        near_end ? Terminal::TouchesZeroAtSigma1 : Terminal::TouchesZeroInterior;
    out.branch.term.phi_stop = res.phi_end;
  } else {
    out.report.hit = false;
    out.branch.term.kind = Terminal::ReachesNegative;
    out.branch.term.z_at_sigma1 = res.z_end;
    out.branch.term.phi_stop = res.phi_end;
  }
  return out;
}

/// The fast solution leaving the left endpoint with the steeper indicial
/// slope; it bounds the family of connections from below, so its value at
/// sigma2 is the most negative attachable boundary value.
inline BranchSolution fast_separatrix(const SingularProblem& p, double c, IntegrateOptions o = {}) {
  const auto roots = indicial_roots_sigma1(p, c);
  if (!roots)
    throw NumericalError("fast_separatrix: no real indicial root at sigma1 (speed below the linear threshold)");
  const double mu_fast = roots->first;
  if (!(mu_fast < 0.0))
    throw NumericalError("fast_separatrix: fast indicial root is not negative");
  const double eps = o.eps_start_rel * p.span();
  const double delta_zero = detail::resolve_delta_zero(p, o);

  BranchSolution br;
  br.c = c;
  br.indicial_slope = mu_fast;
  std::vector<Sample> raw;
  auto res = detail::integrate_banded(p, c, p.sigma1 + eps, mu_fast * eps, p.sigma2, delta_zero, o,
                                      raw);
  detail::sort_ascending(raw);
  br.samples = std::move(raw);
  br.term.kind = res.banded ? Terminal::TouchesZeroInterior : Terminal::ReachesNegative;
  br.term.z_at_sigma1 = res.z_end;
  br.term.phi_stop = res.phi_end;
  return br;
}

/// Max-norm defect of the integral identity
///   z(b) - z(a) = int (h - c) - int Q/z
/// over sample pairs away from the degenerate endpoints.
inline double integral_form_residual(const SingularProblem& p, const BranchSolution& br,
                                     double margin_rel = 1e-3) {
  if (br.samples.size() < 3) return 0.0;
  const double lo = p.sigma1 + margin_rel * p.span();
  const double hi = p.sigma2 - margin_rel * p.span();
  // 5-point Gauss-Legendre nodes on [0,1]
  static const double xs[5] = {0.04691007703066800, 0.23076534494715845, 0.5,
                               0.76923465505284155, 0.95308992296933200};
  static const double ws[5] = {0.11846344252809454, 0.23931433524968324, 0.28444444444444444,
                               0.23931433524968324, 0.11846344252809454};
  double worst = 0.0;
  double acc = 0.0;
  std::optional<double> z_ref;
  for (std::size_t i = 0; i + 1 < br.samples.size(); ++i) {
    const auto& a = br.samples[i];
    const auto& b = br.samples[i + 1];
    if (a.phi < lo || b.phi > hi) continue;
    if (!z_ref) {
      z_ref = a.z;
      acc = 0.0;
    }
    const double h = b.phi - a.phi;
    for (int k = 0; k < 5; ++k) {
      const double x = a.phi + xs[k] * h;
      const double z = br.z_at(x);
      acc += ws[k] * h * (p.h(x) - br.c - p.Q(x) / z);
    }
    worst = std::max(worst, std::abs(b.z - (*z_ref + acc)));
  }
  return worst;
}

}  // namespace wavefront::singular_ode
