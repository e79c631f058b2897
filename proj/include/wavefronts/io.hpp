#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavefronts/errors.hpp"
#include "wavefronts/lattice.hpp"
#include "wavefronts/model.hpp"
#include "wavefronts/profile.hpp"
#include "wavefronts/regions.hpp"
#include "wavefronts/thresholds.hpp"

namespace wavefront::io {

using json = nlohmann::ordered_json;

/// Fixed-width decimal form that round-trips doubles exactly.
inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Parameter files carry exactly the eight model keys, all numbers.
inline model::ModelParams parse_model_params(const json& j) {
  static const char* keys[8] = {"C_i", "C_g", "D_i", "D_g", "lambda_i", "lambda_g", "k_i", "k_g"};
  if (!j.is_object()) throw InvalidInputError("parameter file: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) throw InvalidInputError("parameter file: unknown key '" + key + "'");
    if (!value.is_number())
      throw InvalidInputError("parameter file: key '" + key + "' is not a number");
  }
  for (const char* k : keys)
    if (!j.contains(k)) throw InvalidInputError(std::string("parameter file: missing key '") + k + "'");
  model::ModelParams m;
  m.C_i = j["C_i"].get<double>();
  m.C_g = j["C_g"].get<double>();
  m.D_i = j["D_i"].get<double>();
  m.D_g = j["D_g"].get<double>();
  m.lambda_i = j["lambda_i"].get<double>();
  m.lambda_g = j["lambda_g"].get<double>();
  m.k_i = j["k_i"].get<double>();
  m.k_g = j["k_g"].get<double>();
  return m;
}

inline model::ModelParams load_model_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open input file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw InvalidInputError(std::string("input is not valid JSON: ") + e.what());
  }
  return parse_model_params(j);
}

inline json to_json(const model::ValidityReport& v) {
  json checks = json::array();
  for (const auto& c : v.checks)
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  return {{"all", v.all()},
          {"d_shape", v.d_shape},
          {"g_shape", v.g_shape},
          {"gamma_between", v.gamma_between},
          {"cg_negative", v.cg_negative},
          {"checks", checks}};
}

inline json to_json(const model::DerivedParams& d) {
  json j = {{"alpha", d.alpha}, {"beta", d.beta},   {"gamma", d.gamma}, {"omega", d.omega},
            {"d", d.d},         {"mu", d.mu},       {"E_g", d.E_g},     {"p", d.p},
            {"q", d.q},         {"r_i", d.r_i}};
  if (d.s) {
    j["s"] = *d.s;
    j["sd"] = d.sd();
  }
  const auto [lo, hi] = d.mu_window();
  j["mu_window"] = {lo, hi};
  return j;
}

inline json to_json(const model::Convexity& c) {
  json j = {{"class", model::to_string(c.cls)}};
  if (c.inflection) j["inflection"] = *c.inflection;
  return j;
}

inline json to_json(const thresholds::Bounds& b) { return {{"s", b.s}, {"Sigma", b.Sigma}}; }

inline json to_json(const thresholds::AnalyticBounds& ab) {
  return {{"zero_alpha", to_json(ab.zero_alpha)},
          {"alpha_gamma", to_json(ab.alpha_gamma)},
          {"gamma_beta", to_json(ab.gamma_beta)},
          {"beta_one", to_json(ab.beta_one)}};
}

inline json to_json(const singular_ode::ThresholdCertificate& c) {
  return {{"lower_bound", c.lower_bound},
          {"upper_bound", c.upper_bound},
          {"bracket_lo", c.bracket_lo},
          {"bracket_hi", c.bracket_hi},
          {"raw_mid", c.raw_mid},
          {"iterations", c.iterations},
          {"clamped", c.clamped},
          {"interior_touches", c.interior_touches}};
}

inline json to_json(const thresholds::SubThreshold& st) {
  return {{"interval", thresholds::to_string(st.which)},
          {"c_star", st.c_star},
          {"bounds", to_json(st.bounds)},
          {"certificate", to_json(st.cert)}};
}

inline json to_json(const thresholds::ThresholdReport& r) {
  json j = {{"zero_alpha", to_json(r.zero_alpha)},
            {"alpha_gamma", to_json(r.alpha_gamma)},
            {"gamma_beta", to_json(r.gamma_beta)},
            {"beta_one", to_json(r.beta_one)},
            {"c0", r.c0},
            {"c1", r.c1},
            {"bisect_tol", r.bisect_tol},
            {"verdict", thresholds::to_string(r.verdict)}};
  if (r.admissible) {
    j["admissible_interval"] = {r.admissible->first, r.admissible->second};
    j["endpoint_status"] = "unknown";  // existence at c1 and c0 is not claimed
  }
  return j;
}

inline json to_json(const thresholds::NecessaryConditions& nc) {
  return {{"nec0", nc.nec0},
          {"nec1", nc.nec1},
          {"nec2", nc.nec2},
          {"inf_delta_f_alpha", nc.inf_delta_f_alpha},
          {"sup_delta_f_beta", nc.sup_delta_f_beta},
          {"edge_alpha", nc.edge_alpha},
          {"edge_beta", nc.edge_beta}};
}

inline json to_json(const thresholds::SpeedSignReport& s) {
  return {{"sign", thresholds::to_string(s.sign)},
          {"positive_condition", s.positive_condition},
          {"negative_condition", s.negative_condition},
          {"c0_positive_condition", s.c0_positive_condition},
          {"consistent", s.consistent}};
}

inline json to_json(const regions::RegionVerdict& v) {
  json j = {{"in_T", v.in_T},
            {"in_R", v.in_R},
            {"in_R_tilde", v.in_R_tilde},
            {"in_T_g", v.in_T_g},
            {"in_S", v.in_S},
            {"in_S_tilde", v.in_S_tilde},
            {"boundary", v.boundary},
            {"tau", v.tau_value},
            {"H1", v.H1_value},
            {"H2", v.H2_value},
            {"H1_tilde", v.H1_tilde_value},
            {"H2_tilde", v.H2_tilde_value},
            {"mainmodel", regions::to_string(v.mainmodel)},
            {"lmmk", regions::to_string(v.lmmk)},
            {"allk", regions::to_string(v.allk)},
            {"model_negative", regions::to_string(v.model_negative)},
            {"messi", regions::to_string(v.messi)},
            {"convconc_exist", regions::to_string(v.convconc_exist)},
            {"concconv_exist", regions::to_string(v.concconv_exist)}};
  if (v.ssigma_lhs) j["ssigma_lhs"] = *v.ssigma_lhs;
  if (v.ssigma_rhs) j["ssigma_rhs"] = *v.ssigma_rhs;
  return j;
}

inline json to_json(const profile::ResidualStats& r) {
  return {{"classical_max", r.classical_max},
          {"classical_l2", r.classical_l2},
          {"integral_max", r.integral_max},
          {"n_classical", r.n_classical},
          {"band", r.band}};
}

/// Profile CSV: header comment with the speed, z(gamma) and junction
/// abscissas, then xi, phi, z and the pointwise classical residual.
inline std::string profile_csv(const EquationTriple& t, const profile::ZAssembly& A,
                               const profile::WaveProfile& w) {
  std::ostringstream os;
  os << "# c=" << num(w.c) << " z_gamma=" << num(w.z_gamma) << " xi_alpha=" << num(w.xi_alpha)
     << " xi_gamma=" << num(w.xi_gamma) << " xi_beta=" << num(w.xi_beta) << "\n";
  os << "xi,phi,z,residual\n";
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    const auto& s = w.samples[i];
    double res = 0.0;
    if (i > 0 && i + 1 < w.samples.size()) {
      // along the wave, D(phi) phi' equals z, so (D phi')' is dz/dxi
      const auto& a = w.samples[i - 1];
      const auto& b = w.samples[i + 1];
      const double dphi = (b.phi - a.phi) / (b.xi - a.xi);
      const double dW = (b.z - a.z) / (b.xi - a.xi);
      res = dW + (A.c - t.f.d(s.phi)) * dphi + t.g(s.phi);
    }
    os << num(s.xi) << ',' << num(s.phi) << ',' << num(s.z) << ',' << num(res) << "\n";
  }
  return os.str();
}

inline std::string lattice_csv(const lattice::ConsistencyResult& r) {
  std::ostringstream os;
  os << "level,l,max_error,observed_order\n";
  for (const auto& row : r.rows) {
    os << row.level << ',' << num(row.l) << ',' << num(row.max_error) << ','
       << (row.level == 0 ? std::string("nan") : num(row.observed_order)) << "\n";
  }
  return os.str();
}

/// Atlas CSV, row-major in the two axes.
inline std::string atlas_csv(const regions::GridSpec& spec,
                             const std::vector<regions::GridCell>& cells) {
  std::ostringstream os;
  os << spec.a1.name << ',' << spec.a2.name
     << ",valid,omega,gamma,mu,sd,E_g,d,convexity,in_T,in_R,in_R_tilde,in_T_g,in_S,in_S_tilde,"
        "boundary,tau,mainmodel,lmmk,allk,model_negative,messi,convconc_exist,concconv_exist";
  if (spec.with_thresholds) os << ",verdict,c1,c0";
  os << "\n";
  for (const auto& c : cells) {
    os << num(c.x) << ',' << num(c.y) << ',' << (c.valid ? 1 : 0);
    if (c.derived) {
      const auto& d = *c.derived;
      os << ',' << num(d.omega) << ',' << num(d.gamma) << ',' << num(d.mu) << ','
         << (d.s ? num(d.sd()) : "nan") << ',' << num(d.E_g) << ',' << num(d.d);
    } else {
      os << ",nan,nan,nan,nan,nan,nan";
    }
    os << ',' << (c.convexity ? model::to_string(c.convexity->cls) : "n/a");
    if (c.verdict) {
      const auto& v = *c.verdict;
      os << ',' << v.in_T << ',' << v.in_R << ',' << v.in_R_tilde << ',' << v.in_T_g << ','
         << v.in_S << ',' << v.in_S_tilde << ',' << v.boundary << ',' << num(v.tau_value) << ','
         << regions::to_string(v.mainmodel) << ',' << regions::to_string(v.lmmk) << ','
         << regions::to_string(v.allk) << ',' << regions::to_string(v.model_negative) << ','
         << regions::to_string(v.messi) << ',' << regions::to_string(v.convconc_exist) << ','
         << regions::to_string(v.concconv_exist);
    } else {
      os << ",0,0,0,0,0,0,0,nan,n/a,n/a,n/a,n/a,n/a,n/a,n/a";
    }
    if (spec.with_thresholds) {
      if (c.wave_verdict)
        os << ',' << thresholds::to_string(*c.wave_verdict) << ',' << num(c.c1) << ','
           << num(c.c0);
      else
        os << ",n/a,nan,nan";
    }
    os << "\n";
  }
  return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInputError("cannot open output file: " + path);
  out << content;
}

}  // namespace wavefront::io
