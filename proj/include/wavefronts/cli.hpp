#pragma once

#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <mutex>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "wavefronts/io.hpp"
#include "wavefronts/wavefronts.hpp"

namespace wavefront::cli {

struct RunConfig {
  std::string command;  // analyze | threshold | profile | scan | lattice-check | generic
  std::string input;
  std::string output;
  std::optional<double> c;
  std::optional<double> z_gamma;
  double bisect_tol = 1e-6;
  double residual_band = 1e-2;
  double boundary_tol = 1e-4;
  std::string grid;  // "axis1=lo:hi:n,axis2=lo:hi:n"
  int workers = 1;
  int levels = 4;
  double l0 = 1.0 / 64.0;
};

namespace detail {

inline regions::GridSpec parse_grid(const std::string& s) {
  regions::GridSpec spec;
  std::vector<regions::GridAxis> axes;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw InvalidInputError("grid: expected axis=lo:hi:n");
    regions::GridAxis ax;
    ax.name = part.substr(0, eq);
    const std::string range = part.substr(eq + 1);
    std::stringstream rs(range);
    std::string p1, p2, p3;
    if (!std::getline(rs, p1, ':') || !std::getline(rs, p2, ':') || !std::getline(rs, p3, ':'))
      throw InvalidInputError("grid: expected axis=lo:hi:n");
    try {
      ax.lo = std::stod(p1);
      ax.hi = std::stod(p2);
      ax.n = std::stoi(p3);
    } catch (const std::exception&) {
      throw InvalidInputError("grid: malformed number in '" + part + "'");
    }
    if (ax.n < 1) throw InvalidInputError("grid: axis needs at least one sample");
    axes.push_back(ax);
  }
  if (axes.size() != 2) throw InvalidInputError("grid: exactly two axes required");
  spec.a1 = axes[0];
  spec.a2 = axes[1];
  return spec;
}

inline io::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open input file: " + path);
  io::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw InvalidInputError(std::string("input is not valid JSON: ") + e.what());
  }
  return j;
}

inline Polynomial parse_poly(const io::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array())
    throw InvalidInputError(std::string("generic: missing coefficient array '") + key + "'");
  Polynomial p;
  for (const auto& v : j[key]) {
    if (!v.is_number()) throw InvalidInputError("generic: coefficients must be numbers");
    p.c.push_back(v.get<double>());
  }
  if (p.c.empty()) throw InvalidInputError("generic: empty coefficient array");
  return p;
}

inline int run_analyze(const RunConfig& cfg) {
  const model::ModelParams m = io::load_model_params(cfg.input);
  io::json out;
  out["params"] = {{"C_i", m.C_i},         {"C_g", m.C_g},
                   {"D_i", m.D_i},         {"D_g", m.D_g},
                   {"lambda_i", m.lambda_i}, {"lambda_g", m.lambda_g},
                   {"k_i", m.k_i},         {"k_g", m.k_g}};
  const auto validity = model::validate(m);
  out["validity"] = io::to_json(validity);
  if (validity.shapes_ok()) {
    const auto derived = model::derive(m);
    out["derived"] = io::to_json(derived);
    out["convexity"] = io::to_json(model::classify_convexity(m));
    out["regions"] = io::to_json(regions::evaluate(m));
    const EquationTriple t = model::coefficients(m);
    out["analytic_bounds"] = io::to_json(thresholds::analytic_bounds(t));
    out["necessary_conditions"] = io::to_json(thresholds::necessary_conditions(t));
  }
  io::write_file(cfg.output, out.dump(2) + "\n");
  return 0;
}

inline int run_threshold(const RunConfig& cfg) {
  const model::ModelParams m = io::load_model_params(cfg.input);
  if (!model::validate(m).shapes_ok())
    throw InvalidInputError("threshold: parameters fail the shape conditions");
  const EquationTriple t = model::coefficients(m);
  thresholds::ThresholdRunOptions opt;
  opt.bisect_tol = cfg.bisect_tol;
  const auto rep = thresholds::numeric_thresholds(t, opt);
  io::json out = io::to_json(rep);
  out["speed_sign"] = io::to_json(thresholds::speed_sign(t, rep));
  io::write_file(cfg.output, out.dump(2) + "\n");
  return 0;
}

inline int run_profile(const RunConfig& cfg) {
  const model::ModelParams m = io::load_model_params(cfg.input);
  if (!model::validate(m).shapes_ok())
    throw InvalidInputError("profile: parameters fail the shape conditions");
  const EquationTriple t = model::coefficients(m);
  thresholds::ThresholdRunOptions topt;
  topt.bisect_tol = cfg.bisect_tol;
  const auto rep = thresholds::numeric_thresholds(t, topt);
  if (rep.verdict != thresholds::Verdict::Exists)
    throw InfeasibleError("profile: no admissible speed interval for these parameters");
  const double c = cfg.c.value_or(0.5 * (rep.c1 + rep.c0));

  profile::AssemblyOptions aopt;
  aopt.z_gamma = cfg.z_gamma;
  const auto A = profile::assemble_z(t, rep, c, aopt);
  profile::ProfileOptions popt;
  popt.boundary_tol = cfg.boundary_tol;
  const auto w = profile::build_profile(t, A, popt);
  const auto stats = profile::residual_check(t, A, w, cfg.residual_band);

  io::write_file(cfg.output, io::profile_csv(t, A, w));
  io::json rj = io::to_json(stats);
  rj["c"] = c;
  rj["z_gamma"] = A.z_gamma;
  rj["z_gamma_max"] = A.z_gamma_max;
  rj["xi_alpha"] = w.xi_alpha;
  rj["xi_beta"] = w.xi_beta;
  rj["slope_at_gamma"] = w.slope_at_gamma;
  io::write_file(cfg.output + ".residual.json", rj.dump(2) + "\n");
  return 0;
}

inline int run_scan(const RunConfig& cfg) {
  const model::ModelParams base = io::load_model_params(cfg.input);
  regions::GridSpec spec = parse_grid(cfg.grid);
  spec.bisect_tol = cfg.bisect_tol;

  if (!regions::axis_name_ok(spec.a1.name) || !regions::axis_name_ok(spec.a2.name) ||
      spec.a1.name == spec.a2.name)
    throw InvalidInputError("grid: invalid axis choice");
  if ((spec.a1.name == "mu" && spec.a2.name == "r_i") ||
      (spec.a1.name == "r_i" && spec.a2.name == "mu"))
    throw InvalidInputError("grid: mu and r_i cannot both be axes");

  std::vector<regions::GridCell> cells;
  if (cfg.workers <= 1) {
    cells = regions::classify_grid(spec, base);
  } else {
    // cells are independent; workers pull indices and results keep row-major
    // order regardless of scheduling
    cells.resize(static_cast<std::size_t>(spec.a1.n) * spec.a2.n);
    std::atomic<int> next{0};
    std::mutex err_mu;
    std::exception_ptr first_error;
    auto work = [&]() {
      try {
        for (;;) {
          const int idx = next.fetch_add(1);
          if (idx >= spec.a1.n * spec.a2.n) return;
          const int i = idx / spec.a2.n;
          const int j = idx % spec.a2.n;
          regions::GridSpec one = spec;
          one.a1.lo = one.a1.hi = spec.a1.at(i);
          one.a1.n = 1;
          one.a2.lo = one.a2.hi = spec.a2.at(j);
          one.a2.n = 1;
          auto sub = regions::classify_grid(one, base);
          sub[0].i = i;
          sub[0].j = j;
          sub[0].x = spec.a1.at(i);
          sub[0].y = spec.a2.at(j);
          cells[static_cast<std::size_t>(idx)] = std::move(sub[0]);
        }
      } catch (...) {
        std::scoped_lock lock(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    };
    std::vector<std::thread> pool;
    for (int k = 0; k < cfg.workers; ++k) pool.emplace_back(work);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }
  io::write_file(cfg.output, io::atlas_csv(spec, cells));
  return 0;
}

inline int run_lattice_check(const RunConfig& cfg) {
  const model::ModelParams m = io::load_model_params(cfg.input);
  const auto res = lattice::consistency_order(m, lattice::default_profile(), cfg.levels, cfg.l0);
  io::write_file(cfg.output, io::lattice_csv(res));
  return 0;
}

inline int run_generic(const RunConfig& cfg) {
  const io::json j = load_json(cfg.input);
  io::json out;
  if (j.contains("h") && j.contains("Q")) {
    // a single half-interval problem
    const Polynomial h = parse_poly(j, "h");
    const Polynomial Q = parse_poly(j, "Q");
    if (!j.contains("sigma1") || !j.contains("sigma2"))
      throw InvalidInputError("generic: missing sigma1/sigma2");
    const double s1 = j["sigma1"].get<double>();
    const double s2 = j["sigma2"].get<double>();
    const Polynomial dQ = Q.derivative();
    const auto problem = singular_ode::make_problem(
        [h](double x) { return h(x); }, [Q](double x) { return Q(x); }, s1, s2,
        singular_ode::Fn([dQ](double x) { return dQ(x); }));
    singular_ode::ThresholdOptions opt;
    opt.bisect_tol = cfg.bisect_tol;
    const auto res = singular_ode::threshold_cstar(problem, opt);
    out["c_star"] = res.c_star;
    out["certificate"] = io::to_json(res.cert);
  } else if (j.contains("f") && j.contains("D") && j.contains("g")) {
    for (const char* k : {"alpha", "beta", "gamma"})
      if (!j.contains(k)) throw InvalidInputError("generic: missing marked zero");
    const EquationTriple t =
        make_polynomial_triple(parse_poly(j, "f"), parse_poly(j, "D"), parse_poly(j, "g"),
                               j["alpha"].get<double>(), j["beta"].get<double>(),
                               j["gamma"].get<double>());
    const ShapeReport shape = check_shape(t);
    out["shape"] = {{"ok", shape.ok()},
                    {"order_ok", shape.order_ok},
                    {"D_shape", shape.D_shape},
                    {"g_shape", shape.g_shape}};
    if (!shape.ok()) throw InvalidInputError("generic: " + shape.detail);
    thresholds::ThresholdRunOptions opt;
    opt.bisect_tol = cfg.bisect_tol;
    const auto rep = thresholds::numeric_thresholds(t, opt);
    out["report"] = io::to_json(rep);
    out["analytic_bounds"] = io::to_json(thresholds::analytic_bounds(t));
    out["necessary_conditions"] = io::to_json(thresholds::necessary_conditions(t));
    out["speed_sign"] = io::to_json(thresholds::speed_sign(t, rep));
  } else {
    throw InvalidInputError("generic: provide either {h,Q,sigma1,sigma2} or {f,D,g,alpha,beta,gamma}");
  }
  io::write_file(cfg.output, out.dump(2) + "\n");
  return 0;
}

}  // namespace detail

/// Executes one command. Exit status: 0 success, 1 invalid input,
/// 2 infeasible request, 3 numerical failure (certificate on stderr).
inline int run(const RunConfig& cfg) {
  try {
    if (cfg.bisect_tol <= 0.0 || cfg.residual_band <= 0.0 || cfg.boundary_tol <= 0.0)
      throw InvalidInputError("tolerances must be strictly positive");
    if (cfg.c && cfg.command != "profile")
      throw InvalidInputError("--c is accepted only by the profile command");
    if (cfg.output.empty()) throw InvalidInputError("--output is required");

    if (cfg.command == "analyze") return detail::run_analyze(cfg);
    if (cfg.command == "threshold") return detail::run_threshold(cfg);
    if (cfg.command == "profile") return detail::run_profile(cfg);
    if (cfg.command == "scan") return detail::run_scan(cfg);
    if (cfg.command == "lattice-check") return detail::run_lattice_check(cfg);
    if (cfg.command == "generic") return detail::run_generic(cfg);
    throw InvalidInputError("unknown command: " + cfg.command);
  } catch (const InvalidInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

inline int main(int argc, char** argv) {
  CLI::App app{"wavefront existence, thresholds and profiles for biased-movement population models"};
  RunConfig cfg;
  double c_val = 0.0, zg_val = 0.0;
  app.add_option("--command", cfg.command,
                 "analyze | threshold | profile | scan | lattice-check | generic")
      ->required();
  app.add_option("--input", cfg.input, "input JSON file")->required();
  app.add_option("--output", cfg.output, "output file (JSON or CSV by command)")->required();
  auto* copt = app.add_option("--c", c_val, "wave speed override (profile only)");
  auto* zopt = app.add_option("--zgamma", zg_val, "z(gamma) override (profile only)");
  app.add_option("--bisect-tol", cfg.bisect_tol, "threshold bisection tolerance");
  app.add_option("--residual-band", cfg.residual_band, "half-width of the bands around alpha/beta");
  app.add_option("--boundary-tol", cfg.boundary_tol, "profile truncation distance");
  app.add_option("--grid", cfg.grid, "scan axes, e.g. r_i=0.1:3:50,lambda_g=0.1:3:50");
  app.add_option("--workers", cfg.workers, "worker threads for scan");
  app.add_option("--levels", cfg.levels, "refinement levels for lattice-check");
  app.add_option("--l0", cfg.l0, "coarsest lattice spacing");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (copt->count() > 0) cfg.c = c_val;
  if (zopt->count() > 0) cfg.z_gamma = zg_val;
  return run(cfg);
}

}  // namespace wavefront::cli
