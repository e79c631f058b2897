#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <string>

#include "wavefronts/calculus.hpp"
#include "wavefronts/equation.hpp"
#include "wavefronts/errors.hpp"
#include "wavefronts/singular_ode.hpp"

namespace wavefront::thresholds {

enum class SubInterval { OuterLeft, InnerLeft, InnerRight, OuterRight };

inline const char* to_string(SubInterval s) {
  switch (s) {
    case SubInterval::OuterLeft: return "0-alpha";
    case SubInterval::InnerLeft: return "alpha-gamma";
    case SubInterval::InnerRight: return "gamma-beta";
    case SubInterval::OuterRight: return "beta-1";
  }
  return "?";
}

/// One of the four half-interval problems the full connection splits into.
/// The transform is (optional reflection about `center`, optional sign flips
/// of z and of the speed); applying it twice is the identity.
struct SubproblemMap {
  SubInterval which = SubInterval::OuterRight;
  double lo = 0.0, hi = 0.0;  // original sub-interval
  bool reflect = false;
  double center = 0.0;  // phi_original = center - phi_native when reflecting
  bool negate_z = false;
  bool negate_speed = false;  // native speed is -c; threshold bounds c from above
  singular_ode::SingularProblem native;

  double to_native_speed(double c) const { return negate_speed ? -c : c; }
  double to_original_threshold(double native_cstar) const {
    return negate_speed ? -native_cstar : native_cstar;
  }
  double to_original_phi(double native_phi) const {
    return reflect ? center - native_phi : native_phi;
  }
  double to_native_phi(double original_phi) const {
    return reflect ? center - original_phi : original_phi;
  }
  double to_original_z(double w) const { return negate_z ? -w : w; }
};

/// Splits the full problem at alpha, gamma, beta. The native unknown is
/// negative on each piece and the native Q = (transformed D)(transformed g)
/// is positive inside with simple zeros at the ends.
inline std::array<SubproblemMap, 4> build_subproblems(const EquationTriple& triple) {
  const ShapeReport shape = check_shape(triple);
  if (!shape.ok()) throw InvalidInputError("build_subproblems: " + shape.detail);

  auto t = std::make_shared<const EquationTriple>(triple);
  const double a = t->alpha, b = t->beta, g = t->gamma;

  auto dgv = [t](double u) { return t->D(u) * t->g(u); };
  auto dgd = [t](double u) { return t->D.d(u) * t->g(u) + t->D(u) * t->g.d(u); };

  std::array<SubproblemMap, 4> out;

  {  // [0, alpha]: reflected about alpha, speed negated
    SubproblemMap m;
    m.which = SubInterval::OuterLeft;
    m.lo = 0.0;
    m.hi = a;
    m.reflect = true;
    m.center = a;
    m.negate_z = false;
    m.negate_speed = true;
    singular_ode::Fn h = [t, a](double x) { return -t->f.d(a - x); };
    singular_ode::Fn Q = [dgv, a](double x) { return -dgv(a - x); };
    singular_ode::Fn dQ = [dgd, a](double x) { return dgd(a - x); };
    m.native = singular_ode::make_problem(h, Q, 0.0, a, dQ);
    out[0] = m;
  }
  {  // [alpha, gamma]: z negated, speed negated
    SubproblemMap m;
    m.which = SubInterval::InnerLeft;
    m.lo = a;
    m.hi = g;
    m.negate_z = true;
    m.negate_speed = true;
    singular_ode::Fn h = [t](double x) { return -t->f.d(x); };
    singular_ode::Fn Q = [dgv](double x) { return dgv(x); };
    singular_ode::Fn dQ = [dgd](double x) { return dgd(x); };
    m.native = singular_ode::make_problem(h, Q, a, g, dQ);
    out[1] = m;
  }
  {  // [gamma, beta]: reflected about gamma + beta, z negated
    SubproblemMap m;
    m.which = SubInterval::InnerRight;
    m.lo = g;
    m.hi = b;
    m.reflect = true;
    m.center = g + b;
    m.negate_z = true;
    singular_ode::Fn h = [t, g, b](double x) { return t->f.d(g + b - x); };
    singular_ode::Fn Q = [dgv, g, b](double x) { return -dgv(g + b - x); };
    singular_ode::Fn dQ = [dgd, g, b](double x) { return dgd(g + b - x); };
    m.native = singular_ode::make_problem(h, Q, g, b, dQ);
    out[2] = m;
  }
  {  // [beta, 1]: untransformed
    SubproblemMap m;
    m.which = SubInterval::OuterRight;
    m.lo = b;
    m.hi = 1.0;
    singular_ode::Fn h = [t](double x) { return t->f.d(x); };
    singular_ode::Fn Q = [dgv](double x) { return dgv(x); };
    singular_ode::Fn dQ = [dgd](double x) { return dgd(x); };
    m.native = singular_ode::make_problem(h, Q, b, 1.0, dQ);
    out[3] = m;
  }
  return out;
}

struct Bounds {
  double s = 0.0;      // lower bound on the threshold
  double Sigma = 0.0;  // upper bound
};

struct AnalyticBounds {
  Bounds zero_alpha, alpha_gamma, gamma_beta, beta_one;

  const Bounds& of(SubInterval w) const {
    switch (w) {
      case SubInterval::OuterLeft: return zero_alpha;
      case SubInterval::InnerLeft: return alpha_gamma;
      case SubInterval::InnerRight: return gamma_beta;
      case SubInterval::OuterRight: return beta_one;
    }
    return beta_one;
  }
};

namespace detail {

inline double endpoint_radicand(const EquationTriple& t, double at) {
  const double v = t.D.d(at) * t.g(at);
  if (v < -1e-9 * (1.0 + std::abs(v)))
    throw NumericalError("negative radicand at a degeneracy point: shape violation");
  return std::max(0.0, v);
}

inline double sup_sqrt_mean(const EquationTriple& t, double base, double a, double b) {
  const auto e = calculus::extremum(calculus::Kind::Sup, calculus::Quotient::IntegralMean, t.Dg(),
                                    base, a, b);
  return std::sqrt(std::max(0.0, e.value));
}

}  // namespace detail

/// The four threshold sandwiches in original variables.
inline AnalyticBounds analytic_bounds(const EquationTriple& t) {
  using calculus::Kind;
  using calculus::Quotient;
  const double a = t.alpha, b = t.beta, g = t.gamma;
  const double ea = t.f.d(a) - 2.0 * std::sqrt(detail::endpoint_radicand(t, a));
  const double eb = t.f.d(b) + 2.0 * std::sqrt(detail::endpoint_radicand(t, b));

  AnalyticBounds out;
  {
    const double inf_d = calculus::extremum(Kind::Inf, Quotient::Difference, t.f, a, 0.0, a).value;
    const double sup_m = detail::sup_sqrt_mean(t, a, 0.0, a);
    out.zero_alpha = {inf_d - 2.0 * sup_m, std::min(inf_d, ea)};
  }
  {
    const double inf_d = calculus::extremum(Kind::Inf, Quotient::Difference, t.f, a, a, g).value;
    const double sup_m = detail::sup_sqrt_mean(t, a, a, g);
    out.alpha_gamma = {inf_d - 2.0 * sup_m, std::min(inf_d, ea)};
  }
  {
    const double sup_d = calculus::extremum(Kind::Sup, Quotient::Difference, t.f, b, g, b).value;
    const double sup_m = detail::sup_sqrt_mean(t, b, g, b);
    out.gamma_beta = {std::max(sup_d, eb), sup_d + 2.0 * sup_m};
  }
  {
    const double sup_d = calculus::extremum(Kind::Sup, Quotient::Difference, t.f, b, b, 1.0).value;
    const double sup_m = detail::sup_sqrt_mean(t, b, b, 1.0);
    out.beta_one = {std::max(sup_d, eb), sup_d + 2.0 * sup_m};
  }
  return out;
}

enum class Verdict { Exists, NotExists, Inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Exists: return "exists";
    case Verdict::NotExists: return "not-exists";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct SubThreshold {
  SubInterval which = SubInterval::OuterRight;
  double c_star = 0.0;  // in original speed orientation
  Bounds bounds;        // original-orientation sandwich
  singular_ode::ThresholdCertificate cert;
};

struct ThresholdReport {
  SubThreshold zero_alpha, alpha_gamma, gamma_beta, beta_one;
  double c0 = 0.0;  // min of the two upper-side thresholds
  double c1 = 0.0;  // max of the two lower-side thresholds
  double bisect_tol = 1e-6;
  Verdict verdict = Verdict::Inconclusive;
  std::optional<std::pair<double, double>> admissible;  // open interval (c1, c0)

  const SubThreshold& of(SubInterval w) const {
    switch (w) {
      case SubInterval::OuterLeft: return zero_alpha;
      case SubInterval::InnerLeft: return alpha_gamma;
      case SubInterval::InnerRight: return gamma_beta;
      case SubInterval::OuterRight: return beta_one;
    }
    return beta_one;
  }
};

struct ThresholdRunOptions {
  double bisect_tol = 1e-6;
  singular_ode::IntegrateOptions integ;
};

/// Numeric thresholds for the four pieces, assembled into the existence
/// verdict: wavefronts exist for every speed strictly inside (c1, c0).
inline ThresholdReport numeric_thresholds(const EquationTriple& triple,
                                          ThresholdRunOptions opt = {}) {
  const auto maps = build_subproblems(triple);
  const AnalyticBounds ab = analytic_bounds(triple);

  ThresholdReport rep;
  rep.bisect_tol = opt.bisect_tol;

  auto solve_one = [&](const SubproblemMap& m) {
    const Bounds& orig = ab.of(m.which);
    singular_ode::ThresholdOptions to;
    to.bisect_tol = opt.bisect_tol;
    to.integ = opt.integ;
    // map the sandwich into the native orientation
    singular_ode::ThresholdBounds nb;
    if (m.negate_speed) {
      nb.lower = -orig.Sigma;
      nb.upper = -orig.s;
    } else {
      nb.lower = orig.s;
      nb.upper = orig.Sigma;
    }
    to.bounds = nb;
    const auto res = singular_ode::threshold_cstar(m.native, to);
    SubThreshold st;
    st.which = m.which;
    st.c_star = m.to_original_threshold(res.c_star);
    st.bounds = orig;
    st.cert = res.cert;
    return st;
  };

  rep.zero_alpha = solve_one(maps[0]);
  rep.alpha_gamma = solve_one(maps[1]);
  rep.gamma_beta = solve_one(maps[2]);
  rep.beta_one = solve_one(maps[3]);

  rep.c0 = std::min(rep.zero_alpha.c_star, rep.alpha_gamma.c_star);
  rep.c1 = std::max(rep.gamma_beta.c_star, rep.beta_one.c_star);
  const double gap = rep.c0 - rep.c1;
  if (gap > 2.0 * opt.bisect_tol) {
    rep.verdict = Verdict::Exists;
    rep.admissible = std::make_pair(rep.c1, rep.c0);
  } else if (gap < -2.0 * opt.bisect_tol) {
    rep.verdict = Verdict::NotExists;
  } else {
    rep.verdict = Verdict::Inconclusive;
  }
  return rep;
}

struct NecessaryConditions {
  bool nec0 = false;  // min{inf d(f,a), f'(a)-2 sqrt(D'(a)g(a))} >= max{sup d(f,b), f'(b)+2 sqrt(D'(b)g(b))}
  bool nec1 = false;  // f'(a) - f'(b) >= 2 sqrt(D'(a)g(a)) + 2 sqrt(D'(b)g(b))
  bool nec2 = false;  // inf d(f,a) on [0,g] >= sup d(f,b) on [g,1]
  double inf_delta_f_alpha = 0.0;
  double sup_delta_f_beta = 0.0;
  double edge_alpha = 0.0;  // f'(a) - 2 sqrt(D'(a) g(a))
  double edge_beta = 0.0;   // f'(b) + 2 sqrt(D'(b) g(b))
};

inline NecessaryConditions necessary_conditions(const EquationTriple& t) {
  using calculus::Kind;
  using calculus::Quotient;
  NecessaryConditions nc;
  const double ra = std::sqrt(detail::endpoint_radicand(t, t.alpha));
  const double rb = std::sqrt(detail::endpoint_radicand(t, t.beta));
  nc.inf_delta_f_alpha =
      calculus::extremum(Kind::Inf, Quotient::Difference, t.f, t.alpha, 0.0, t.gamma).value;
  nc.sup_delta_f_beta =
      calculus::extremum(Kind::Sup, Quotient::Difference, t.f, t.beta, t.gamma, 1.0).value;
  nc.edge_alpha = t.f.d(t.alpha) - 2.0 * ra;
  nc.edge_beta = t.f.d(t.beta) + 2.0 * rb;
  nc.nec0 = std::min(nc.inf_delta_f_alpha, nc.edge_alpha) >=
            std::max(nc.sup_delta_f_beta, nc.edge_beta);
  nc.nec1 = t.f.d(t.alpha) - t.f.d(t.beta) >= 2.0 * ra + 2.0 * rb;
  nc.nec2 = nc.inf_delta_f_alpha - nc.sup_delta_f_beta >= 0.0;
  return nc;
}

struct SsigmaParts {
  double lhs = 0.0;  // inf d(f,alpha) on [0,g]  -  sup d(f,beta) on [g,1]
  double rhs = 0.0;  // 2 sup sqrt(mean(Dg,alpha)) + 2 sup sqrt(mean(Dg,beta))
  bool holds() const { return lhs > rhs; }
};

/// Sufficient-condition margin: lhs > rhs guarantees a nonempty admissible
/// speed interval.
inline SsigmaParts ssigma_parts(const EquationTriple& t) {
  using calculus::Kind;
  using calculus::Quotient;
  SsigmaParts s;
  const double infd =
      calculus::extremum(Kind::Inf, Quotient::Difference, t.f, t.alpha, 0.0, t.gamma).value;
  const double supd =
      calculus::extremum(Kind::Sup, Quotient::Difference, t.f, t.beta, t.gamma, 1.0).value;
  s.lhs = infd - supd;
  s.rhs = 2.0 * detail::sup_sqrt_mean(t, t.alpha, 0.0, t.gamma) +
          2.0 * detail::sup_sqrt_mean(t, t.beta, t.gamma, 1.0);
  return s;
}

enum class SpeedSign { AllPositiveOrEmpty, AllNegativeOrEmpty, Indeterminate };

inline const char* to_string(SpeedSign s) {
  switch (s) {
    case SpeedSign::AllPositiveOrEmpty: return "all-positive-or-empty";
    case SpeedSign::AllNegativeOrEmpty: return "all-negative-or-empty";
    case SpeedSign::Indeterminate: return "indeterminate";
  }
  return "?";
}

struct SpeedSignReport {
  SpeedSign sign = SpeedSign::Indeterminate;
  bool positive_condition = false;  // forces c1 > 0
  bool negative_condition = false;  // forces c0 < 0
  bool c0_positive_condition = false;
  bool consistent = true;
};

/// Sign information about the admissible speeds, cross-checked against the
/// numeric interval when the verdict is Exists.
inline SpeedSignReport speed_sign(const EquationTriple& t, const ThresholdReport& rep) {
  const NecessaryConditions nc = necessary_conditions(t);
  SpeedSignReport out;
  out.positive_condition = std::max(nc.sup_delta_f_beta, nc.edge_beta) > 0.0;
  out.negative_condition = std::min(nc.inf_delta_f_alpha, nc.edge_alpha) < 0.0;
  out.c0_positive_condition =
      nc.inf_delta_f_alpha >
      2.0 * detail::sup_sqrt_mean(t, t.alpha, 0.0, t.gamma);
  if (out.positive_condition)
    out.sign = SpeedSign::AllPositiveOrEmpty;
  else if (out.negative_condition)
    out.sign = SpeedSign::AllNegativeOrEmpty;
  else
    out.sign = SpeedSign::Indeterminate;

  if (rep.verdict == Verdict::Exists) {
    const double slack = 10.0 * rep.bisect_tol;
    if (out.positive_condition && rep.c1 < -slack) out.consistent = false;
    if (out.negative_condition && rep.c0 > slack) out.consistent = false;
    if (out.c0_positive_condition && rep.c0 < -slack) out.consistent = false;
    if (!out.consistent)
      throw NumericalError("speed_sign: analytic sign condition contradicts the numeric interval");
  }
  return out;
}

}  // namespace wavefront::thresholds
