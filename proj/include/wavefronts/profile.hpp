#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "wavefronts/equation.hpp"
#include "wavefronts/errors.hpp"
#include "wavefronts/singular_ode.hpp"
#include "wavefronts/thresholds.hpp"

namespace wavefront::profile {

using singular_ode::Sample;
using thresholds::SubInterval;

namespace detail {

inline double hermite_z(const std::vector<Sample>& s, double phi) {
  std::size_t lo = 0, hi = s.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (s[mid].phi <= phi)
      lo = mid;
    else
      hi = mid;
  }
  const Sample& a = s[lo];
  const Sample& b = s[hi];
  const double h = b.phi - a.phi;
  if (h <= 0.0) return a.z;
  const double t = (phi - a.phi) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * a.z + (t3 - 2 * t2 + t) * h * a.dz + (-2 * t3 + 3 * t2) * b.z +
         (t3 - t2) * h * b.dz;
}

}  // namespace detail

/// One quarter of the reduced solution, in original variables.
struct ZPiece {
  SubInterval which = SubInterval::OuterRight;
  double lo = 0.0, hi = 0.0;
  std::vector<Sample> samples;  // ascending phi, original coordinates
  bool vanishes_lo = false;     // z -> 0 at the lo endpoint
  bool vanishes_hi = false;
  double slope_lo = 0.0;  // dz/dphi at the endpoints (indicial when vanishing)
  double slope_hi = 0.0;

  double z_at(double phi) const {
    if (samples.empty()) return 0.0;
    if (phi <= samples.front().phi)
      return vanishes_lo ? slope_lo * (phi - lo) : samples.front().z;
    if (phi >= samples.back().phi)
      return vanishes_hi ? slope_hi * (phi - hi) : samples.back().z;
    return detail::hermite_z(samples, phi);
  }
};

/// The reduced solution on [0,1]: negative on the outer pieces, positive on
/// (alpha, beta), vanishing at 0, alpha, beta, 1 and matched to z(gamma) > 0.
struct ZAssembly {
  double c = 0.0;
  double z_gamma = 0.0;
  double z_gamma_max = 0.0;  // numerically observed attachable bound
  double alpha = 0.0, beta = 0.0, gamma = 0.0;
  std::array<ZPiece, 4> pieces;  // OuterLeft, InnerLeft, InnerRight, OuterRight

  const ZPiece& piece_at(double phi) const {
    if (phi < alpha) return pieces[0];
    if (phi < gamma) return pieces[1];
    if (phi < beta) return pieces[2];
    return pieces[3];
  }
  double z_at(double phi) const { return piece_at(phi).z_at(phi); }
};

struct AssemblyOptions {
  std::optional<double> z_gamma;  // default: half the attachable maximum
  singular_ode::IntegrateOptions integ;
};

namespace detail {

inline double slow_root(const singular_ode::SingularProblem& p, double c) {
  const auto roots = singular_ode::indicial_roots_sigma1(p, c);
  if (!roots) throw NumericalError("assembly: no indicial root at a pasting point");
  return roots->second;
}

/// Maps a native branch into original coordinates (ascending phi).
inline std::vector<Sample> map_samples(const thresholds::SubproblemMap& m,
                                       const std::vector<Sample>& native) {
  std::vector<Sample> out;
  out.reserve(native.size());
  const double sz = m.negate_z ? -1.0 : 1.0;
  const double mp = m.reflect ? -1.0 : 1.0;
  for (const Sample& s : native)
    out.push_back({m.to_original_phi(s.phi), sz * s.z, sz * s.dz * mp});
  if (out.size() > 1 && out.front().phi > out.back().phi) std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// Builds the full z-solution at an admissible speed. The outer pieces are the
/// extremal solutions of their half-interval problems; the middle pieces are
/// grown from the interior anchor (gamma, z_gamma) toward alpha and beta and
/// must close into the corners there.
inline ZAssembly assemble_z(const EquationTriple& triple, const thresholds::ThresholdReport& rep,
                            double c, AssemblyOptions opt = {}) {
  if (rep.verdict != thresholds::Verdict::Exists)
    throw InfeasibleError("assemble_z: no admissible speed interval");
  if (!(c > rep.c1 + rep.bisect_tol && c < rep.c0 - rep.bisect_tol))
    throw InfeasibleError("assemble_z: speed outside the admissible interval");

  const auto maps = thresholds::build_subproblems(triple);
  ZAssembly out;
  out.c = c;
  out.alpha = triple.alpha;
  out.beta = triple.beta;
  out.gamma = triple.gamma;

  auto native_speed = [&](int i) { return maps[i].to_native_speed(c); };

  // outer connections
  auto zeta_left = singular_ode::integrate_zeta(maps[0].native, native_speed(0), opt.integ);
  auto zeta_right = singular_ode::integrate_zeta(maps[3].native, native_speed(3), opt.integ);
  const double dz0 = singular_ode::detail::resolve_delta_zero(maps[0].native, opt.integ);
  const double dz3 = singular_ode::detail::resolve_delta_zero(maps[3].native, opt.integ);
  if (zeta_left.term.kind == singular_ode::Terminal::ReachesNegative &&
      std::abs(zeta_left.term.z_at_sigma1) > 100.0 * dz0)
    throw NumericalError("assemble_z: the [0,alpha] connection failed to close");
  if (zeta_right.term.kind == singular_ode::Terminal::ReachesNegative &&
      std::abs(zeta_right.term.z_at_sigma1) > 100.0 * dz3)
    throw NumericalError("assemble_z: the [beta,1] connection failed to close");

  // attachable range at gamma from the two fast separatrices
  auto eta_left = singular_ode::fast_separatrix(maps[1].native, native_speed(1), opt.integ);
  auto eta_right = singular_ode::fast_separatrix(maps[2].native, native_speed(2), opt.integ);
  const double zmax_left = -eta_left.samples.back().z;
  const double zmax_right = -eta_right.samples.back().z;
  out.z_gamma_max = std::min(zmax_left, zmax_right);
  if (!(out.z_gamma_max > 0.0))
    throw NumericalError("assemble_z: degenerate attachable range at gamma");

  out.z_gamma = opt.z_gamma.value_or(0.5 * out.z_gamma_max);
  if (!(out.z_gamma > 0.0) || out.z_gamma >= out.z_gamma_max)
    throw InfeasibleError("assemble_z: attachment infeasible for the requested z(gamma)");

  // middle branches, anchored at the native right endpoints (original gamma)
  auto mid_left = singular_ode::branch_from_interior(maps[1].native, native_speed(1),
                                                     maps[1].native.sigma2, -out.z_gamma,
                                                     singular_ode::Direction::TowardSigma1,
                                                     opt.integ);
  auto mid_right = singular_ode::branch_from_interior(maps[2].native, native_speed(2),
                                                      maps[2].native.sigma2, -out.z_gamma,
                                                      singular_ode::Direction::TowardSigma1,
                                                      opt.integ);
  if (!mid_left.report.hit || !mid_right.report.hit)
    throw InfeasibleError("assemble_z: middle branch missed its pasting corner");

  // slow indicial roots at the pasting points, mapped to original slopes
  const double muL = detail::slow_root(maps[0].native, native_speed(0));   // far end of [0,a]
  const double mu2 = detail::slow_root(maps[1].native, native_speed(1));   // at alpha
  const double mu3 = detail::slow_root(maps[2].native, native_speed(2));   // at beta
  const double mu4 = detail::slow_root(maps[3].native, native_speed(3));   // at beta

  {  // [0, alpha]
    ZPiece p;
    p.which = SubInterval::OuterLeft;
    p.lo = 0.0;
    p.hi = triple.alpha;
    p.samples = detail::map_samples(maps[0], zeta_left.samples);
    p.vanishes_lo = p.vanishes_hi = true;
    p.slope_lo = -zeta_left.indicial_slope;  // z ~ -lambda * phi
    p.slope_hi = -muL;
    out.pieces[0] = p;
  }
  {  // [alpha, gamma]
    ZPiece p;
    p.which = SubInterval::InnerLeft;
    p.lo = triple.alpha;
    p.hi = triple.gamma;
    p.samples = detail::map_samples(maps[1], mid_left.branch.samples);
    p.vanishes_lo = true;
    p.slope_lo = -mu2;
    p.slope_hi = 0.0;
    out.pieces[1] = p;
  }
  {  // [gamma, beta]
    ZPiece p;
    p.which = SubInterval::InnerRight;
    p.lo = triple.gamma;
    p.hi = triple.beta;
    p.samples = detail::map_samples(maps[2], mid_right.branch.samples);
    p.vanishes_hi = true;
    p.slope_hi = mu3;  // z ~ -mu (beta - phi)
    p.slope_lo = 0.0;
    out.pieces[2] = p;
  }
  {  // [beta, 1]
    ZPiece p;
    p.which = SubInterval::OuterRight;
    p.lo = triple.beta;
    p.hi = 1.0;
    p.samples = detail::map_samples(maps[3], zeta_right.samples);
    p.vanishes_lo = p.vanishes_hi = true;
    p.slope_lo = mu4;
    p.slope_hi = zeta_right.indicial_slope;
    out.pieces[3] = p;
  }
  return out;
}

struct ProfileOptions {
  double boundary_tol = 1e-4;  // truncation distance from the equilibria
  int min_nodes_per_piece = 600;
};

struct ProfileSample {
  double xi = 0.0;
  double phi = 0.0;
  double z = 0.0;
};

/// Monotone wavefront profile: phi strictly decreasing in xi, junctions at
/// finite abscissas, shifted so that phi(0) = gamma.
struct WaveProfile {
  double c = 0.0;
  double z_gamma = 0.0;
  double xi_alpha = 0.0;
  double xi_gamma = 0.0;
  double xi_beta = 0.0;
  double slope_at_gamma = 0.0;  // z(gamma)/D(gamma) < 0
  double phi_at_xi_min = 0.0;   // truncation values; the equilibria are
  double phi_at_xi_max = 0.0;   // attained only asymptotically
  std::vector<ProfileSample> samples;  // ascending xi
};

namespace detail {

struct PatchedIntegrand {
  const EquationTriple* t = nullptr;
  const ZAssembly* a = nullptr;
  // K = D/z with exact finite limits at the pasting points, where D and z
  // vanish together; at the equilibria 0 and 1 the integrand truly diverges
  // and is never evaluated (the tails are truncated before them).
  double operator()(double phi) const {
    const ZPiece& p = a->piece_at(phi);
    const double tolp = 1e-13;
    if (p.vanishes_lo && std::abs(phi - p.lo) < tolp && std::abs(t->D(p.lo)) < 1e-9)
      return t->D.d(p.lo) / p.slope_lo;
    if (p.vanishes_hi && std::abs(phi - p.hi) < tolp && std::abs(t->D(p.hi)) < 1e-9)
      return t->D.d(p.hi) / p.slope_hi;
    return t->D(phi) / p.z_at(phi);
  }
};

/// Piece grid: ODE sample nodes, uniform fill, geometric clustering at the
/// degenerate ends, clipped to [lo, hi].
inline std::vector<double> piece_grid(const ZPiece& p, double lo, double hi, int min_nodes) {
  std::vector<double> g;
  g.push_back(lo);
  g.push_back(hi);
  for (const Sample& s : p.samples)
    if (s.phi > lo && s.phi < hi) g.push_back(s.phi);
  const double span = hi - lo;
  for (int i = 1; i < min_nodes; ++i) g.push_back(lo + span * i / min_nodes);
  auto cluster = [&](double end, double dir) {
    for (int k = 4; k < 44; ++k) {
      const double x = end + dir * span * std::pow(0.5, k);
      if (x > lo && x < hi) g.push_back(x);
    }
  };
  if (p.vanishes_lo && p.lo >= lo - 1e-15) cluster(p.lo, 1.0);
  if (p.vanishes_hi && p.hi <= hi + 1e-15) cluster(p.hi, -1.0);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end(),
                      [](double x, double y) { return std::abs(x - y) < 1e-15; }),
          g.end());
  return g;
}

/// Simpson cumulative of K over the grid; returns xi values with xi = 0 at
/// the anchor node (which must be a grid point).
inline std::vector<double> cumulative_xi(const PatchedIntegrand& K, const std::vector<double>& grid,
                                         double anchor) {
  std::vector<double> acc(grid.size(), 0.0);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double a = grid[i], b = grid[i + 1];
    const double m = 0.5 * (a + b);
    acc[i + 1] = acc[i] + (b - a) / 6.0 * (K(a) + 4.0 * K(m) + K(b));
  }
  double at_anchor = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d = std::abs(grid[i] - anchor);
    if (d < best) {
      best = d;
      at_anchor = acc[i];
    }
  }
  for (double& v : acc) v -= at_anchor;
  return acc;
}

}  // namespace detail

/// Integrates xi(phi) = int D/z piecewise and pastes the four pieces into a
/// single profile with phi(0) = gamma. The integrand has finite one-sided
/// limits at alpha and beta; the tails toward 0 and 1 are truncated at
/// boundary_tol (the exact profile only reaches the equilibria as xi -> inf).
inline WaveProfile build_profile(const EquationTriple& triple, const ZAssembly& A,
                                 ProfileOptions opt = {}) {
  detail::PatchedIntegrand K{&triple, &A};
  WaveProfile w;
  w.c = A.c;
  w.z_gamma = A.z_gamma;
  w.xi_gamma = 0.0;
  w.slope_at_gamma = A.z_gamma / triple.D(A.gamma);

  struct PieceXi {
    std::vector<double> phi;
    std::vector<double> xi;
  };
  std::array<PieceXi, 4> px;

  {  // [gamma, beta], anchored at gamma
    auto grid = detail::piece_grid(A.pieces[2], A.gamma, A.beta, opt.min_nodes_per_piece);
    auto xi = detail::cumulative_xi(K, grid, A.gamma);
    px[2] = {grid, xi};
    w.xi_beta = xi.back();
  }
  {  // [beta, 1 - boundary_tol], continued across beta
    auto grid =
        detail::piece_grid(A.pieces[3], A.beta, 1.0 - opt.boundary_tol, opt.min_nodes_per_piece);
    auto xi = detail::cumulative_xi(K, grid, A.beta);
    for (double& v : xi) v += w.xi_beta;
    px[3] = {grid, xi};
  }
  {  // [alpha, gamma], anchored at gamma
    auto grid = detail::piece_grid(A.pieces[1], A.alpha, A.gamma, opt.min_nodes_per_piece);
    auto xi = detail::cumulative_xi(K, grid, A.gamma);
    px[1] = {grid, xi};
    w.xi_alpha = xi.front();
  }
  {  // [boundary_tol, alpha], continued across alpha
    auto grid =
        detail::piece_grid(A.pieces[0], opt.boundary_tol, A.alpha, opt.min_nodes_per_piece);
    auto xi = detail::cumulative_xi(K, grid, A.alpha);
    for (double& v : xi) v += w.xi_alpha;
    px[0] = {grid, xi};
  }

  for (int pi = 3; pi >= 0; --pi) {  // descending phi = ascending xi
    const auto& P = px[pi];
    for (std::size_t i = P.phi.size(); i-- > 0;) {
      const double phi = P.phi[i];
      if (!w.samples.empty() && !(P.xi[i] > w.samples.back().xi)) continue;
      w.samples.push_back({P.xi[i], phi, A.z_at(phi)});
    }
  }
  for (std::size_t i = 1; i < w.samples.size(); ++i)
    if (!(w.samples[i].phi < w.samples[i - 1].phi))
      throw NumericalError("build_profile: profile is not strictly decreasing");
  w.phi_at_xi_min = w.samples.front().phi;
  w.phi_at_xi_max = w.samples.back().phi;
  return w;
}

struct ResidualStats {
  double classical_max = 0.0;  // |(D phi')' + (c - f'(phi)) phi' + g(phi)| off the bands
  double classical_l2 = 0.0;
  double integral_max = 0.0;  // defect of z = f - c phi - int D g / z on [0,1]
  int n_classical = 0;
  double band = 0.0;
};

/// Finite-difference residual of the wave equation at the profile samples
/// plus the global integral-form defect of the underlying z (valid across
/// alpha, beta). Only the sampled (xi, phi) pairs enter the classical check;
/// derivatives come from non-uniform three-point stencils.
inline ResidualStats residual_check(const EquationTriple& triple, const ZAssembly& A,
                                    const WaveProfile& w, double band = 1e-2) {
  ResidualStats out;
  out.band = band;
  const std::size_t n = w.samples.size();
  if (n < 5) throw InvalidInputError("residual_check: profile is not sampled densely enough");

  // phi(xi) interpolant over the samples; the slope z/D has finite limits at
  // the pasting points
  detail::PatchedIntegrand Kxi{&triple, &A};
  auto slope_at = [&](double phi_v) {
    const double k = Kxi(phi_v);
    return k != 0.0 ? 1.0 / k : 0.0;
  };
  auto phi_of_xi = [&](double xi) {
    std::size_t lo = 0, hi = n - 1;
    if (xi <= w.samples.front().xi) return w.samples.front().phi;
    if (xi >= w.samples.back().xi) return w.samples.back().phi;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      if (w.samples[mid].xi <= xi)
        lo = mid;
      else
        hi = mid;
    }
    const auto& a = w.samples[lo];
    const auto& b = w.samples[hi];
    const double hx = b.xi - a.xi;
    const double t = (xi - a.xi) / hx;
    const double da = slope_at(a.phi), db = slope_at(b.phi);
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * a.phi + (t3 - 2 * t2 + t) * hx * da +
           (-2 * t3 + 3 * t2) * b.phi + (t3 - t2) * hx * db;
  };

  // locally uniform five-point stencils centered at the samples; the local
  // step follows the sample spacing with an absolute floor against roundoff
  const double span = w.samples.back().xi - w.samples.front().xi;
  const double thin = std::max(1e-5, span / 2e5);
  const double h_floor = 1e-5;
  double sumsq = 0.0;
  double last_xi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double p = w.samples[i].phi;
    const double xi = w.samples[i].xi;
    if (xi - last_xi < thin) continue;
    last_xi = xi;
    if (std::abs(p - triple.alpha) < band || std::abs(p - triple.beta) < band) continue;
    const double gap =
        std::max(w.samples[i].xi - w.samples[i - 1].xi, w.samples[i + 1].xi - w.samples[i].xi);
    const double h = std::max(h_floor, gap);
    if (xi - 2.0 * h < w.samples.front().xi || xi + 2.0 * h > w.samples.back().xi) continue;
    const double pm2 = phi_of_xi(xi - 2.0 * h), pm1 = phi_of_xi(xi - h);
    const double pp1 = phi_of_xi(xi + h), pp2 = phi_of_xi(xi + 2.0 * h);
    const double dphi = (pp1 - pm1) / (2.0 * h);
    const double Wm = triple.D(pm1) * (p - pm2) / (2.0 * h);
    const double Wp = triple.D(pp1) * (pp2 - p) / (2.0 * h);
    const double dW = (Wp - Wm) / (2.0 * h);
    const double r = dW + (A.c - triple.f.d(p)) * dphi + triple.g(p);
    out.classical_max = std::max(out.classical_max, std::abs(r));
    sumsq += r * r;
    ++out.n_classical;
  }
  out.classical_l2 = out.n_classical > 0 ? std::sqrt(sumsq / out.n_classical) : 0.0;

  // integral identity from 0, across the degeneracies; the limit of Dg/z at
  // a zero of z is the product-rule derivative of Dg over the z slope
  auto integrand = [&](double phi_v) {
    const ZPiece& p = A.piece_at(phi_v);
    const double tolp = 1e-13;
    auto limit = [&](double at, double slope) {
      return (triple.D.d(at) * triple.g(at) + triple.D(at) * triple.g.d(at)) / slope;
    };
    if (p.vanishes_lo && std::abs(phi_v - p.lo) < tolp) return limit(p.lo, p.slope_lo);
    if (p.vanishes_hi && std::abs(phi_v - p.hi) < tolp) return limit(p.hi, p.slope_hi);
    return triple.D(phi_v) * triple.g(phi_v) / p.z_at(phi_v);
  };
  // quadrature grid: uniform nodes, geometric clustering at the five points
  // where the integrand turns over quickly, and the assembly's own sample
  // locations so that panels align with the interpolation intervals
  std::vector<double> grid;
  const int nq = 4000;
  for (int i = 0; i <= nq; ++i) grid.push_back(static_cast<double>(i) / nq);
  for (double center : {0.0, A.alpha, A.gamma, A.beta, 1.0}) {
    for (int k = 3; k < 40; ++k) {
      const double d = std::pow(0.5, k);
      if (center - d > 0.0) grid.push_back(center - d);
      if (center + d < 1.0) grid.push_back(center + d);
    }
  }
  for (const ZPiece& p : A.pieces)
    for (const Sample& s : p.samples)
      if (s.phi > 0.0 && s.phi < 1.0) grid.push_back(s.phi);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-14; }),
             grid.end());

  double acc = 0.0;
  double prev_phi = grid.front();
  double prev_val = integrand(prev_phi);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double phi_v = grid[i];
    const double mid = 0.5 * (prev_phi + phi_v);
    const double vm = integrand(mid);
    const double vb = integrand(phi_v);
    acc += (phi_v - prev_phi) / 6.0 * (prev_val + 4.0 * vm + vb);
    const double model = triple.f(phi_v) - A.c * phi_v - acc;
    const double zv = (i + 1 == grid.size()) ? 0.0 : A.z_at(phi_v);
    out.integral_max = std::max(out.integral_max, std::abs(zv - model));
    prev_phi = phi_v;
    prev_val = vb;
  }
  return out;
}

}  // namespace wavefront::profile
