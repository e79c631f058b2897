#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "wavefronts/equation.hpp"
#include "wavefronts/errors.hpp"

namespace wavefront::model {

/// The eight raw parameters of the biased-movement population model.
/// Any values are accepted at construction; validity is a report.
struct ModelParams {
  double C_i = 0.0;       // bias strength, isolated individuals (any sign)
  double C_g = 0.0;       // bias strength, grouped individuals (any sign)
  double D_i = 0.0;       // diffusivity, isolated
  double D_g = 0.0;       // diffusivity, grouped
  double lambda_i = 0.0;  // birth rate, isolated
  double lambda_g = 0.0;  // birth rate, grouped
  double k_i = 0.0;       // death rate, isolated
  double k_g = 0.0;       // death rate, grouped

  double r_i() const { return k_i - lambda_i; }
  double p() const { return C_i * D_i + C_g * D_g; }
  double q() const { return C_g * D_g; }
};

struct ValidityCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ValidityReport {
  bool d_shape = false;        // D_i > 4 D_g > 0
  bool g_shape = false;        // k_g = 0, lambda_g > 0, r_i > 0
  bool gamma_between = false;  // gamma strictly between alpha and beta
  bool cg_negative = false;    // necessary for wavefront existence
  std::vector<ValidityCheck> checks;

  bool all() const { return d_shape && g_shape && gamma_between && cg_negative; }
  bool shapes_ok() const { return d_shape && g_shape; }
};

/// Dimensionless diagnostics derived from valid parameters.
struct DerivedParams {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double omega = 0.0;
  double d = 0.0;    // D_i / D_g
  double mu = 0.0;   // r_i / lambda_g
  double E_g = 0.0;  // |C_g| sqrt(D_g / lambda_g)
  double p = 0.0;
  double q = 0.0;
  double r_i = 0.0;
  std::optional<double> s;  // C_i / |C_g|, defined only when C_g != 0

  double sd() const { return s ? *s * d : std::numeric_limits<double>::quiet_NaN(); }
  /// Window of mu for which gamma lies strictly between alpha and beta.
  std::pair<double, double> mu_window() const {
    return {(2.0 - omega) / (1.0 + omega), (2.0 + omega) / (1.0 - omega)};
  }
};

inline ValidityReport validate(const ModelParams& m) {
  ValidityReport r;
  r.d_shape = m.D_g > 0.0 && m.D_i > 4.0 * m.D_g;
  r.checks.push_back({"D-shape", r.d_shape, "requires D_i > 4 D_g > 0 (strict)"});

  const double ri = m.r_i();
  r.g_shape = m.k_g == 0.0 && m.lambda_g > 0.0 && ri > 0.0;
  r.checks.push_back({"g-shape", r.g_shape, "requires k_g = 0, lambda_g > 0, k_i - lambda_i > 0"});

  if (r.d_shape && r.g_shape) {
    const double omega = std::sqrt((m.D_i - 4.0 * m.D_g) / (m.D_i - m.D_g));
    const double ratio = m.lambda_g / ri;
    r.gamma_between = (1.0 - omega) / (2.0 + omega) < ratio && ratio < (1.0 + omega) / (2.0 - omega);
  }
  r.checks.push_back(
      {"gamma-in-(alpha,beta)", r.gamma_between, "lambda_g/r_i must lie strictly inside the omega window"});

  r.cg_negative = m.C_g < 0.0;
  r.checks.push_back({"C_g-negative", r.cg_negative, "decreasing wavefronts require C_g < 0"});
  return r;
}

inline DerivedParams derive(const ModelParams& m) {
  if (m.D_g <= 0.0) throw InvalidInputError("derive: D_g must be positive");
  const double d = m.D_i / m.D_g;
  if (d <= 4.0) throw InvalidInputError("derive: requires d = D_i/D_g > 4");
  if (m.lambda_g <= 0.0) throw InvalidInputError("derive: requires lambda_g > 0");

  DerivedParams out;
  out.d = d;
  out.omega = std::sqrt((d - 4.0) / (d - 1.0));
  out.alpha = 2.0 / 3.0 - out.omega / 3.0;
  out.beta = 2.0 / 3.0 + out.omega / 3.0;
  out.r_i = m.r_i();
  out.gamma = out.r_i / (out.r_i + m.lambda_g);
  out.mu = out.r_i / m.lambda_g;
  out.E_g = std::abs(m.C_g) * std::sqrt(m.D_g / m.lambda_g);
  out.p = m.p();
  out.q = m.q();
  if (m.C_g != 0.0) out.s = m.C_i / std::abs(m.C_g);
  return out;
}

/// Evaluable coefficient triple of the model with exact derivatives.
/// Requires the shape flags to pass (alpha, beta, gamma must exist).
inline EquationTriple coefficients(const ModelParams& m) {
  const ValidityReport v = validate(m);
  if (!v.shapes_ok()) throw InvalidInputError("coefficients: D-shape or g-shape condition fails");
  const DerivedParams dp = derive(m);

  const double p = m.p(), q = m.q();
  const double Di = m.D_i, Dg = m.D_g;
  const double lg = m.lambda_g, li = m.lambda_i, ki = m.k_i, kg = m.k_g;
  const double L = li - lg - (ki - kg);

  EquationTriple t;
  t.alpha = dp.alpha;
  t.beta = dp.beta;
  t.gamma = dp.gamma;
  t.f = calculus::ScalarFn{
      [p, q](double u) { return -p * u * (1.0 - u) * (1.0 - u) - q * u * (1.0 - u); },
      [p, q](double u) { return -p * (1.0 - u) * (1.0 - 3.0 * u) - q * (1.0 - 2.0 * u); }};
  t.D = calculus::ScalarFn{
      [Di, Dg](double u) { return Di * (1.0 - 4.0 * u + 3.0 * u * u) + Dg * (4.0 * u - 3.0 * u * u); },
      [Di, Dg](double u) { return -(Di - Dg) * (4.0 - 6.0 * u); }};
  t.g = calculus::ScalarFn{
      [lg, kg, L](double u) {
        return lg * u * (1.0 - u) + L * u * (1.0 - u) * (1.0 - u) - kg * u;
      },
      [lg, kg, L](double u) {
        return lg * (1.0 - 2.0 * u) + L * (1.0 - u) * (1.0 - 3.0 * u) - kg;
      }};
  return t;
}

enum class ConvexityClass {
  StrictlyConcave,
  StrictlyConvex,
  ConvexConcave,  // convex first, concave past the inflection
  ConcaveConvex,
  Affine,
};

struct Convexity {
  ConvexityClass cls = ConvexityClass::Affine;
  std::optional<double> inflection;  // 2/3 + q/(3p), when the concavity changes
};

inline const char* to_string(ConvexityClass c) {
  switch (c) {
    case ConvexityClass::StrictlyConcave: return "strictly-concave";
    case ConvexityClass::StrictlyConvex: return "strictly-convex";
    case ConvexityClass::ConvexConcave: return "convex-concave";
    case ConvexityClass::ConcaveConvex: return "concave-convex";
    case ConvexityClass::Affine: return "affine";
  }
  return "?";
}

/// Classifies the convective term by the sign pattern of
/// f''(u) = -6 p u + 4 p + 2 q on (0,1).
inline Convexity classify_convexity(const ModelParams& m) {
  const double p = m.p(), q = m.q();
  Convexity out;
  if (p == 0.0 && q == 0.0) {
    out.cls = ConvexityClass::Affine;
    return out;
  }
  if (p == 0.0) {
    out.cls = q < 0.0 ? ConvexityClass::StrictlyConcave : ConvexityClass::StrictlyConvex;
    return out;
  }
  const double at0 = 4.0 * p + 2.0 * q;   // f'' at u = 0
  const double at1 = -2.0 * p + 2.0 * q;  // f'' at u = 1
  if (at0 <= 0.0 && at1 <= 0.0) {
    out.cls = ConvexityClass::StrictlyConcave;
  } else if (at0 >= 0.0 && at1 >= 0.0) {
    out.cls = ConvexityClass::StrictlyConvex;
  } else {
    out.cls = at0 > 0.0 ? ConvexityClass::ConvexConcave : ConvexityClass::ConcaveConvex;
    out.inflection = 2.0 / 3.0 + q / (3.0 * p);
  }
  return out;
}

struct InflectionMatch {
  bool matches = false;
  double gamma_inflection = 0.0;  // (3 - 2 sd) / (3 (1 - sd))
  double implied_r_i = 0.0;       // (2 - 3/sd) lambda_g
  bool implied_valid = false;     // implied r_i > 0
};

/// Tests whether the model's Allee parameter coincides with the inflection
/// point of f, and reports the r_i that would realize the coincidence.
inline InflectionMatch inflection_matches_gamma(const ModelParams& m, double tol = 1e-9) {
  const Convexity cv = classify_convexity(m);
  if (cv.cls != ConvexityClass::ConvexConcave && cv.cls != ConvexityClass::ConcaveConvex)
    throw InvalidInputError("inflection_matches_gamma: f does not change concavity");
  const DerivedParams dp = derive(m);
  if (!dp.s) throw InvalidInputError("inflection_matches_gamma: s undefined (C_g = 0)");
  const double sd = dp.sd();
  if (std::abs(sd - 1.0) < 1e-12)
    throw InvalidInputError("inflection_matches_gamma: singular at sd = 1");
  InflectionMatch out;
  out.gamma_inflection = (3.0 - 2.0 * sd) / (3.0 * (1.0 - sd));
  out.matches = std::abs(dp.gamma - out.gamma_inflection) <= tol;
  if (sd != 0.0) {
    out.implied_r_i = (2.0 - 3.0 / sd) * m.lambda_g;
    out.implied_valid = out.implied_r_i > 0.0;
  }
  return out;
}

}  // namespace wavefront::model
