#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wavefronts/errors.hpp"
#include "wavefronts/model.hpp"
#include "wavefronts/thresholds.hpp"

namespace wavefront::regions {

using model::Convexity;
using model::ConvexityClass;
using model::DerivedParams;
using model::ModelParams;

/// tau(omega, gamma, sd): the drift margin at low density, in units of
/// |C_g| D_g / 9. Implemented in the grouped form; the expanded form is
/// tau(omega,gamma,0) + sd * dtau_dsd(omega,gamma).
inline double tau(double omega, double gamma, double sd) {
  return (1.0 - sd) * (omega * omega + 9.0 * gamma * gamma - 3.0 * omega * gamma) +
         (5.0 - 2.0 * sd) * omega - 3.0 * (7.0 - 4.0 * sd) * gamma + 4.0 - sd;
}

inline double tau_at_sd0(double omega, double gamma) {
  return omega * omega + 9.0 * gamma * gamma - 3.0 * omega * gamma + 5.0 * omega - 21.0 * gamma +
         4.0;
}

inline double dtau_dsd(double omega, double gamma) {
  return -omega * omega - 9.0 * gamma * gamma + 3.0 * omega * gamma - 2.0 * omega + 12.0 * gamma -
         1.0;
}

inline double H1(double omega, double gamma) {
  return -gamma * gamma - gamma * (omega - 7.0) / 3.0 + 10.0 * omega / 9.0;
}
inline double H2(double omega, double gamma) {
  return gamma * gamma + gamma * (omega - 4.0) / 3.0 - 4.0 * omega / 9.0;
}
inline double H1_tilde(double omega, double gamma) {
  return gamma * gamma - gamma * (omega + 7.0) / 3.0 + 7.0 * omega / 9.0 + 4.0 / 3.0;
}
inline double H2_tilde(double omega, double gamma) {
  return -gamma * gamma + gamma * (omega + 4.0) / 3.0 - omega / 9.0 - 1.0 / 3.0;
}

/// Allee parameter implied by an inflection of f at gamma.
inline double gamma_from_sd(double sd) { return (3.0 - 2.0 * sd) / (3.0 * (1.0 - sd)); }

struct SetS {
  double lower = 0.0, upper = 0.0;  // bounds on sd at fixed omega
};
inline SetS s_window(double omega) {
  return {1.0 + 1.0 / omega, 12.0 * (2.0 + 3.0 * omega) / ((4.0 + omega) * (4.0 + omega))};
}
inline SetS s_tilde_window(double omega) {
  return {-16.0 * omega / ((omega + 2.0) * (omega + 2.0)), 1.0 - 1.0 / omega};
}

namespace detail {

inline double poly_root_in_01(const std::function<double(double)>& f) {
  double lo = 1e-9, hi = 1.0 - 1e-9;
  double flo = f(lo);
  // scan for the first sign change
  const int n = 2000;
  double a = lo;
  for (int i = 1; i <= n; ++i) {
    const double b = lo + (hi - lo) * i / n;
    const double fb = f(b);
    if (flo * fb <= 0.0) {
      hi = b;
      break;
    }
    a = b;
    flo = fb;
  }
  double fa = f(a);
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + hi);
    const double fm = f(m);
    if (fa * fm <= 0.0)
      hi = m;
    else {
      a = m;
      fa = fm;
    }
  }
  return 0.5 * (a + hi);
}

inline bool near_boundary(double x, double lo, double hi) {
  const double tol = 1e-12 * std::max(1.0, std::abs(x));
  return std::abs(x - lo) <= tol || std::abs(x - hi) <= tol;
}

}  // namespace detail

/// omega where the two boundaries of S cross (root of w^3 - 27 w^2 + 16).
inline double s_boundary_crossing() {
  return detail::poly_root_in_01([](double w) { return w * w * w - 27.0 * w * w + 16.0; });
}
/// omega where the boundaries of S-tilde cross (root of w^3 + 19 w^2 - 4).
inline double s_tilde_boundary_crossing() {
  return detail::poly_root_in_01([](double w) { return w * w * w + 19.0 * w * w - 4.0; });
}

enum class Outcome { AppliesYes, AppliesNo, HypothesesUnmet };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::AppliesYes: return "applies-yes";
    case Outcome::AppliesNo: return "applies-no";
    case Outcome::HypothesesUnmet: return "hypotheses-unmet";
  }
  return "?";
}

struct RegionVerdict {
  // closed-form region memberships (all inequalities strict)
  bool in_T = false;        // 0 < omega < 1, gamma between (2-w)/3 and (2+w)/3
  bool in_R = false;        // sqrt(3)-1 < omega < 1, (2-w)/3 < gamma < 1 - 1/sqrt(3)
  bool in_R_tilde = false;  // 1/(sqrt(3)-1) < lambda_g/r_i < (1+w)/(2-w)
  bool in_T_g = false;      // mu window and the concave-case size condition
  bool in_S = false;
  bool in_S_tilde = false;
  bool boundary = false;  // within 1e-12 of any of the above boundaries

  double tau_value = 0.0;
  double H1_value = 0.0, H2_value = 0.0;
  double H1_tilde_value = 0.0, H2_tilde_value = 0.0;
  std::optional<double> ssigma_lhs;  // filled by evaluate()
  std::optional<double> ssigma_rhs;

  Outcome mainmodel = Outcome::HypothesesUnmet;
  Outcome lmmk = Outcome::HypothesesUnmet;
  Outcome allk = Outcome::HypothesesUnmet;
  Outcome model_negative = Outcome::HypothesesUnmet;
  Outcome messi = Outcome::HypothesesUnmet;
  Outcome convconc_exist = Outcome::HypothesesUnmet;
  Outcome concconv_exist = Outcome::HypothesesUnmet;
};

/// Size condition of the concave case: existence holds on the triangle it
/// carves out of the (r_i, lambda_g) quadrant.
inline bool lpoi_holds(const DerivedParams& dp) {
  const double lhs = std::sqrt(dp.mu * (2.0 + dp.omega) + (1.0 + dp.omega)) * (dp.d - 1.0) /
                     std::sqrt(dp.d - 4.0);
  return lhs < 4.0 / (9.0 * std::sqrt(2.0)) * dp.E_g;
}

/// Sharper concave-case sufficient inequality.
inline bool restr3_holds(const DerivedParams& dp) {
  const double sd = dp.sd();
  if (!std::isfinite(sd)) return false;
  const double denom = 2.0 * dp.mu + 5.0 + sd * (dp.mu - 2.0);
  if (denom <= 0.0) return false;
  const double lhs = (dp.d - 1.0) / std::sqrt(dp.d - 4.0) *
                     (std::sqrt(dp.mu * (2.0 + dp.omega)) + std::sqrt(1.0 + dp.omega)) / denom *
                     (dp.mu + 1.0);
  return lhs < 2.0 / 9.0 * dp.E_g;
}

/// Positive-speed size condition, requires tau > 0.
inline bool ppoo_holds(const DerivedParams& dp) {
  const double sd = dp.s ? dp.sd() : 0.0;
  const double tv = tau(dp.omega, dp.gamma, sd);
  if (tv <= 0.0) return false;
  return 18.0 * std::sqrt(dp.mu * (dp.d - 1.0)) / tv < dp.E_g;
}

/// Negative-speed condition, written so that a nonpositive left side is
/// automatically satisfied.
inline bool negspeeds_holds(const DerivedParams& dp) {
  const double sd = dp.s ? dp.sd() : 0.0;
  const double E = (1.0 + dp.omega) * (1.0 + dp.omega) + sd * (1.0 - dp.omega * dp.omega) - 3.0;
  const double radicand = (dp.d - 1.0) * dp.omega * (1.0 + dp.omega) * (2.0 - dp.omega) *
                          ((1.0 + dp.omega) * dp.mu - (2.0 - dp.omega));
  if (radicand <= 0.0) return false;
  return dp.E_g * E < std::sqrt(radicand);
}

/// Region memberships from the dimensionless diagnostics alone.
inline RegionVerdict membership(const DerivedParams& dp) {
  RegionVerdict v;
  const double w = dp.omega, g = dp.gamma;
  const double tlo = (2.0 - w) / 3.0, thi = (2.0 + w) / 3.0;
  v.in_T = 0.0 < w && w < 1.0 && tlo < g && g < thi;
  const double rlo = std::sqrt(3.0) - 1.0;
  const double rghi = 1.0 - 1.0 / std::sqrt(3.0);
  v.in_R = rlo < w && w < 1.0 && tlo < g && g < rghi;
  if (dp.r_i > 0.0) {
    const double ratio = 1.0 / dp.mu;  // lambda_g / r_i
    const double lo = 1.0 / (std::sqrt(3.0) - 1.0);
    const double hi = (1.0 + w) / (2.0 - w);
    v.in_R_tilde = lo < ratio && ratio < hi;
    v.boundary = v.boundary || detail::near_boundary(ratio, lo, hi);
  }
  {
    auto [mlo, mhi] = dp.mu_window();
    v.in_T_g = mlo < dp.mu && dp.mu < mhi && lpoi_holds(dp);
    v.boundary = v.boundary || detail::near_boundary(dp.mu, mlo, mhi);
  }
  if (dp.s) {
    const double sd = dp.sd();
    const SetS sw = s_window(w);
    const SetS stw = s_tilde_window(w);
    v.in_S = sw.lower < sd && sd < sw.upper;
    v.in_S_tilde = stw.lower < sd && sd < stw.upper;
    v.boundary = v.boundary || detail::near_boundary(sd, sw.lower, sw.upper) ||
                 detail::near_boundary(sd, stw.lower, stw.upper);
    const double gi = gamma_from_sd(sd);  // the inflection-at-gamma convention
    v.tau_value = tau(w, g, sd);
    v.H1_value = H1(w, gi);
    v.H2_value = H2(w, gi);
    v.H1_tilde_value = H1_tilde(w, gi);
    v.H2_tilde_value = H2_tilde(w, gi);
  } else {
    v.tau_value = tau(w, g, 0.0);
    v.H1_value = H1(w, g);
    v.H2_value = H2(w, g);
    v.H1_tilde_value = H1_tilde(w, g);
    v.H2_tilde_value = H2_tilde(w, g);
  }
  v.boundary = v.boundary || detail::near_boundary(w, rlo, 1.0) ||
               detail::near_boundary(g, tlo, thi) || detail::near_boundary(g, tlo, rghi);
  return v;
}

/// Theorem outcomes for one parameter point. All existence statements here
/// are sufficient conditions only.
inline RegionVerdict sufficient_conditions(const ModelParams& m, const DerivedParams& dp,
                                           const Convexity& cv) {
  RegionVerdict v = membership(dp);
  const model::ValidityReport val = model::validate(m);
  const bool base = val.all();
  const bool concave = cv.cls == ConvexityClass::StrictlyConcave;

  auto gate = [](bool hyp, bool cond) {
    if (!hyp) return Outcome::HypothesesUnmet;
    return cond ? Outcome::AppliesYes : Outcome::AppliesNo;
  };

  v.mainmodel = gate(base && concave, restr3_holds(dp));
  v.lmmk = gate(base && concave, lpoi_holds(dp));
  v.allk = gate(base && concave && v.in_R_tilde && dp.omega > std::sqrt(3.0) - 1.0,
                ppoo_holds(dp));
  v.model_negative = gate(base && concave, negspeeds_holds(dp));
  v.messi = gate(base && concave, dp.d < 0.5 * (5.0 + 2.0 * std::sqrt(3.0)));

  bool cc_hyp = false, xc_hyp = false;
  if (base && dp.s) {
    const double sd = dp.sd();
    if (cv.cls == ConvexityClass::ConvexConcave || cv.cls == ConvexityClass::ConcaveConvex) {
      try {
        const auto match = model::inflection_matches_gamma(m, 1e-8);
        if (match.matches) {
          cc_hyp = cv.cls == ConvexityClass::ConvexConcave && v.in_S;
          xc_hyp = cv.cls == ConvexityClass::ConcaveConvex && v.in_S_tilde;
        }
      } catch (const InvalidInputError&) {
        // sd = 1 or similar degeneracy: hypotheses unmet
      }
    }
    const double gi = gamma_from_sd(sd);
    const double comb = H1(dp.omega, gi) + sd * H2(dp.omega, gi);
    const double comb_t = H1_tilde(dp.omega, gi) + sd * H2_tilde(dp.omega, gi);
    v.convconc_exist =
        gate(cc_hyp, comb > 0.0 && std::sqrt(dp.d - 1.0) / comb < dp.E_g / 4.0);
    v.concconv_exist = gate(xc_hyp, comb_t > 0.0 && 5.0 * std::sqrt(dp.d - 1.0) /
                                                            ((1.0 - dp.omega) * comb_t) <
                                                        dp.E_g);
  } else {
    v.convconc_exist = Outcome::HypothesesUnmet;
    v.concconv_exist = Outcome::HypothesesUnmet;
  }
  return v;
}

/// Full per-point evaluation including the sufficient-condition margin that
/// needs the coefficient functions.
inline RegionVerdict evaluate(const ModelParams& m) {
  const DerivedParams dp = model::derive(m);
  const Convexity cv = model::classify_convexity(m);
  RegionVerdict v = sufficient_conditions(m, dp, cv);
  if (model::validate(m).shapes_ok()) {
    const EquationTriple t = model::coefficients(m);
    const auto parts = thresholds::ssigma_parts(t);
    v.ssigma_lhs = parts.lhs;
    v.ssigma_rhs = parts.rhs;
  }
  return v;
}

struct GridAxis {
  std::string name;  // one of r_i, lambda_g, d, mu, sd, E_g
  double lo = 0.0, hi = 1.0;
  int n = 2;

  double at(int i) const { return n <= 1 ? lo : lo + (hi - lo) * i / (n - 1); }
};

struct GridSpec {
  GridAxis a1, a2;
  bool with_thresholds = false;  // expensive numeric verdict per cell
  double bisect_tol = 1e-4;
};

struct GridCell {
  int i = 0, j = 0;
  double x = 0.0, y = 0.0;
  ModelParams params;
  bool valid = false;
  std::optional<DerivedParams> derived;
  std::optional<RegionVerdict> verdict;
  std::optional<Convexity> convexity;
  std::optional<thresholds::Verdict> wave_verdict;
  double c0 = 0.0, c1 = 0.0;
};

/// Realizes one parameter point from the base set and named overrides.
/// Order: d fixes D_i from D_g; mu or r_i fixes k_i from lambda_i;
/// E_g fixes C_g (negative); sd fixes C_i.
inline ModelParams realize(const ModelParams& base, const std::vector<std::pair<std::string, double>>& sets) {
  ModelParams m = base;
  auto find = [&sets](const char* k) -> std::optional<double> {
    for (const auto& [n, v] : sets)
      if (n == k) return v;
    return std::nullopt;
  };
  if (auto v = find("d")) m.D_i = *v * m.D_g;
  if (auto v = find("lambda_g")) m.lambda_g = *v;
  if (find("mu") && find("r_i"))
    throw InvalidInputError("grid: mu and r_i cannot both be axes/overrides");
  if (auto v = find("mu")) m.k_i = m.lambda_i + *v * m.lambda_g;
  if (auto v = find("r_i")) m.k_i = m.lambda_i + *v;
  if (auto v = find("E_g")) {
    if (m.D_g <= 0.0 || m.lambda_g <= 0.0)
      throw InvalidInputError("grid: E_g override requires D_g > 0 and lambda_g > 0");
    m.C_g = -*v * std::sqrt(m.lambda_g / m.D_g);
  }
  if (auto v = find("sd")) {
    const double d = m.D_i / m.D_g;
    m.C_i = (*v / d) * std::abs(m.C_g);
  }
  return m;
}

inline bool axis_name_ok(const std::string& n) {
  return n == "r_i" || n == "lambda_g" || n == "d" || n == "mu" || n == "sd" || n == "E_g";
}

/// Row-major classification of a rectangular parameter grid.
inline std::vector<GridCell> classify_grid(const GridSpec& spec, const ModelParams& base) {
  if (!axis_name_ok(spec.a1.name) || !axis_name_ok(spec.a2.name) || spec.a1.name == spec.a2.name)
    throw InvalidInputError("grid: invalid axis choice");
  std::vector<GridCell> cells;
  cells.reserve(static_cast<std::size_t>(spec.a1.n) * spec.a2.n);
  for (int i = 0; i < spec.a1.n; ++i) {
    for (int j = 0; j < spec.a2.n; ++j) {
      GridCell cell;
      cell.i = i;
      cell.j = j;
      cell.x = spec.a1.at(i);
      cell.y = spec.a2.at(j);
      cell.params = realize(base, {{spec.a1.name, cell.x}, {spec.a2.name, cell.y}});
      const auto val = model::validate(cell.params);
      cell.valid = val.all();
      if (val.shapes_ok()) {
        cell.derived = model::derive(cell.params);
        cell.convexity = model::classify_convexity(cell.params);
        cell.verdict = sufficient_conditions(cell.params, *cell.derived, *cell.convexity);
        if (spec.with_thresholds && cell.valid) {
          const EquationTriple t = model::coefficients(cell.params);
          thresholds::ThresholdRunOptions opt;
          opt.bisect_tol = spec.bisect_tol;
          const auto rep = thresholds::numeric_thresholds(t, opt);
          cell.wave_verdict = rep.verdict;
          cell.c0 = rep.c0;
          cell.c1 = rep.c1;
        }
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

}  // namespace wavefront::regions
