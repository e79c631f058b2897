#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "wavefronts/errors.hpp"
#include "wavefronts/model.hpp"

namespace wavefront::lattice {

/// Occupancies on a periodic 1-D array with spacing l and time step tau = l^2.
struct LatticeState {
  std::vector<double> c;
  double l = 1.0;

  double tau() const { return l * l; }
  std::size_t size() const { return c.size(); }
};

struct StepProbabilities {
  double Pm_i = 0.0, Pm_g = 0.0;  // movement
  double Pb_i = 0.0, Pb_g = 0.0;  // birth
  double Pd_i = 0.0, Pd_g = 0.0;  // death
};

/// Jump weights; `a` weights leftward jumps and `b` rightward ones, a + b = 2.
struct Biases {
  double a_i = 1.0, b_i = 1.0;
  double a_g = 1.0, b_g = 1.0;
};

/// One deterministic mean-field update: per-site increments of the occupancy
/// over a single time step. Movement redistributes mass exactly; the grouped
/// movement is the excluded-volume rule minus its isolated-configuration
/// part, and deaths split into isolated deaths on isolated configurations and
/// grouped deaths on the complement.
inline std::vector<double> lattice_step(const LatticeState& st, const StepProbabilities& P,
                                        const Biases& B) {
  auto in01 = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in01(P.Pm_i) || !in01(P.Pm_g) || !in01(P.Pb_i) || !in01(P.Pb_g) || !in01(P.Pd_i) ||
      !in01(P.Pd_g))
    throw InvalidInputError("lattice_step: transition probabilities must lie in [0,1]");
  if (std::abs(B.a_i + B.b_i - 2.0) > 1e-12 || std::abs(B.a_g + B.b_g - 2.0) > 1e-12)
    throw InvalidInputError("lattice_step: bias weights must satisfy a + b = 2");
  if (B.a_i < 0.0 || B.b_i < 0.0 || B.a_g < 0.0 || B.b_g < 0.0)
    throw InvalidInputError("lattice_step: bias weights must be nonnegative");

  const std::size_t n = st.size();
  if (n < 5) throw InvalidInputError("lattice_step: need at least 5 sites");
  const std::vector<double>& c = st.c;
  auto at = [&](std::ptrdiff_t j) {
    const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(n);
    return c[static_cast<std::size_t>(((j % m) + m) % m)];
  };

  std::vector<double> delta(n, 0.0);
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(n); ++j) {
    const double cm2 = at(j - 2), cm1 = at(j - 1), c0 = at(j), cp1 = at(j + 1), cp2 = at(j + 2);

    // isolated movement: gains require the target's far neighbor empty
    const double iso_gain_left = cm1 * (1.0 - c0) * (1.0 - cm2);   // arrival from the left
    const double iso_gain_right = cp1 * (1.0 - c0) * (1.0 - cp2);  // arrival from the right
    const double iso_loss = c0 * (1.0 - cm1) * (1.0 - cp1);
    const double move_i = 0.5 * P.Pm_i *
                          (B.b_i * (iso_gain_left - iso_loss) + B.a_i * (iso_gain_right - iso_loss));

    // grouped movement: plain exclusion minus the isolated-configuration part
    const double ex_gain_left = cm1 * (1.0 - c0);
    const double ex_gain_right = cp1 * (1.0 - c0);
    const double ex_loss_left = c0 * (1.0 - cm1);   // jump to the left needs j-1 empty
    const double ex_loss_right = c0 * (1.0 - cp1);
    const double move_g_ex = 0.5 * P.Pm_g * (B.b_g * (ex_gain_left - ex_loss_right) +
                                             B.a_g * (ex_gain_right - ex_loss_left));
    const double move_g_iso = 0.5 * P.Pm_g * (B.a_g * (iso_gain_left - iso_loss) +
                                              B.b_g * (iso_gain_right - iso_loss));

    // reactions: births from either neighbour, deaths by configuration
    const double birth_i = 0.5 * P.Pb_i * (iso_gain_left + iso_gain_right);
    const double birth_g = 0.5 * P.Pb_g * (ex_gain_left + ex_gain_right) -
                           0.5 * P.Pb_g * (iso_gain_left + iso_gain_right);
    const double death = -0.5 * P.Pd_i * iso_loss - 0.5 * P.Pd_g * c0 + 0.5 * P.Pd_g * iso_loss;

    delta[static_cast<std::size_t>(j)] = move_i + move_g_ex - move_g_iso + birth_i + birth_g +
                                         death;
  }
  return delta;
}

/// Smooth periodic initial profile on [0,1) with exact derivatives.
struct InitialProfile {
  std::function<double(double)> value;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
};

inline InitialProfile default_profile() {
  const double two_pi = 2.0 * std::acos(-1.0);
  return {
      [two_pi](double x) { return 0.5 + 0.25 * std::sin(two_pi * x); },
      [two_pi](double x) { return 0.25 * two_pi * std::cos(two_pi * x); },
      [two_pi](double x) { return -0.25 * two_pi * two_pi * std::sin(two_pi * x); },
  };
}

struct ConsistencyRow {
  int level = 0;
  double l = 0.0;
  double max_error = 0.0;
  double observed_order = 0.0;  // log2 ratio against the previous level
};

struct ConsistencyResult {
  std::vector<ConsistencyRow> rows;
  double slope = 0.0;       // least-squares order over all levels
  double time_scale = 1.0;  // internal rescale keeping probabilities in range
};

/// Refinement study of the update rule against the continuum right-hand side.
/// Time units are rescaled internally (all of D, lambda, k by time_scale) so
/// that the movement probabilities stay inside [0,1]; the rescale leaves every
/// dimensionless quantity and the convergence order unchanged.
inline ConsistencyResult consistency_order(const model::ModelParams& m0,
                                           const InitialProfile& profile, int levels,
                                           double l0 = 1.0 / 64.0) {
  if (levels < 2) throw InvalidInputError("consistency_order: need at least 2 levels");
  const auto validity = model::validate(m0);
  if (!validity.shapes_ok())
    throw InvalidInputError("consistency_order: parameters fail the shape conditions");

  ConsistencyResult out;
  const double dmax = std::max(m0.D_i, m0.D_g);
  out.time_scale = std::min(1.0, 1.0 / (4.0 * dmax));
  const double s = out.time_scale;

  model::ModelParams m = m0;
  m.D_i *= s;
  m.D_g *= s;
  m.lambda_i *= s;
  m.lambda_g *= s;
  m.k_i *= s;
  m.k_g *= s;
  const EquationTriple t = model::coefficients(m);

  const int n0 = static_cast<int>(std::lround(1.0 / l0));
  for (int lev = 0; lev < levels; ++lev) {
    const int n = n0 << lev;
    LatticeState st;
    st.l = 1.0 / n;
    const double tau = st.tau();
    const double rt = std::sqrt(tau);

    StepProbabilities P;
    P.Pm_i = 2.0 * m.D_i;  // tau / l^2 = 1
    P.Pm_g = 2.0 * m.D_g;
    P.Pb_i = tau * m.lambda_i;
    P.Pb_g = tau * m.lambda_g;
    P.Pd_i = 2.0 * tau * m.k_i;
    P.Pd_g = 2.0 * tau * m.k_g;
    Biases B;
    B.a_i = 1.0 + 0.5 * m.C_i * rt;
    B.b_i = 1.0 - 0.5 * m.C_i * rt;
    B.a_g = 1.0 + 0.5 * m.C_g * rt;
    B.b_g = 1.0 - 0.5 * m.C_g * rt;
    if (B.a_i < 0.0 || B.b_i < 0.0 || B.a_g < 0.0 || B.b_g < 0.0)
      throw InfeasibleError("consistency_order: bias weights leave [0,2] at the requested l0");
    auto in01 = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!in01(P.Pm_i) || !in01(P.Pm_g) || !in01(P.Pb_i) || !in01(P.Pb_g) || !in01(P.Pd_i) ||
        !in01(P.Pd_g))
      throw InfeasibleError("consistency_order: a transition probability leaves [0,1]");

    st.c.resize(n);
    for (int j = 0; j < n; ++j) st.c[j] = profile.value(j * st.l);

    const auto delta = lattice_step(st, P, B);
    double err = 0.0;
    for (int j = 0; j < n; ++j) {
      const double x = j * st.l;
      const double u = profile.value(x);
      const double ux = profile.d1(x);
      const double uxx = profile.d2(x);
      const double rhs = -t.f.d(u) * ux + t.D.d(u) * ux * ux + t.D(u) * uxx + t.g(u);
      err = std::max(err, std::abs(delta[j] / tau - rhs));
    }
    ConsistencyRow row;
    row.level = lev;
    row.l = st.l;
    row.max_error = err;
    row.observed_order =
        lev == 0 ? 0.0 : std::log2(out.rows.back().max_error / std::max(err, 1e-300));
    out.rows.push_back(row);
  }

  // least-squares slope of log2(err) against the level index
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& r : out.rows) {
    const double x = r.level, y = std::log2(std::max(r.max_error, 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(out.rows.size());
  out.slope = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
  return out;
}

}  // namespace wavefront::lattice
