#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "wavefronts/cli.hpp"

using namespace wavefront;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
  const auto dir = fs::temp_directory_path() / "wavefronts-cli-tests";
  fs::create_directories(dir);
  return dir;
}

std::string write_tmp(const std::string& name, const std::string& content) {
  const auto p = tmp_dir() / name;
  std::ofstream out(p);
  out << content;
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* valid_params =
    R"({"C_i": 0, "C_g": -30, "D_i": 8, "D_g": 1, "lambda_i": 0, "lambda_g": 1, "k_i": 1, "k_g": 0})";

}  // namespace

TEST_CASE("parameter files are parsed strictly") {
  io::json j = io::json::parse(valid_params);
  CHECK_NOTHROW(io::parse_model_params(j));

  j["extra"] = 1.0;
  CHECK_THROWS_AS(io::parse_model_params(j), InvalidInputError);

  io::json missing = io::json::parse(valid_params);
  missing.erase("k_g");
  CHECK_THROWS_AS(io::parse_model_params(missing), InvalidInputError);

  io::json wrong = io::json::parse(valid_params);
  wrong["D_i"] = "8";
  CHECK_THROWS_AS(io::parse_model_params(wrong), InvalidInputError);
}

TEST_CASE("exit codes follow the contract") {
  cli::RunConfig cfg;
  cfg.command = "analyze";
  cfg.input = (tmp_dir() / "missing.json").string();
  cfg.output = (tmp_dir() / "out.json").string();
  CHECK(cli::run(cfg) == 1);

  cfg.input = write_tmp("bad.json", "{\"C_i\": 0, \"oops\": 1}");
  CHECK(cli::run(cfg) == 1);

  cfg.input = write_tmp("notjson.json", "hello");
  CHECK(cli::run(cfg) == 1);

  // speed override is only meaningful for profiles
  cfg.input = write_tmp("ok.json", valid_params);
  cfg.c = 1.0;
  CHECK(cli::run(cfg) == 1);
  cfg.c.reset();

  // infeasible: no wavefronts with a positive grouped bias
  cli::RunConfig prof;
  prof.command = "profile";
  prof.input = write_tmp(
      "positive.json",
      R"({"C_i": 0, "C_g": 30, "D_i": 8, "D_g": 1, "lambda_i": 0, "lambda_g": 1, "k_i": 1, "k_g": 0})");
  prof.output = (tmp_dir() / "prof.csv").string();
  CHECK(cli::run(prof) == 2);

  prof.input = write_tmp("ok2.json", valid_params);
  prof.c = 100.0;  // far outside the admissible interval
  CHECK(cli::run(prof) == 2);
}

TEST_CASE("analyze output is deterministic") {
  cli::RunConfig cfg;
  cfg.command = "analyze";
  cfg.input = write_tmp("p.json", valid_params);
  cfg.output = (tmp_dir() / "a1.json").string();
  REQUIRE(cli::run(cfg) == 0);
  const auto first = slurp(cfg.output);
  cfg.output = (tmp_dir() / "a2.json").string();
  REQUIRE(cli::run(cfg) == 0);
  CHECK(first == slurp(cfg.output));

  const auto j = io::json::parse(first);
  CHECK(j["derived"]["gamma"].get<double>() == 0.5);
  CHECK(j["derived"]["sd"].get<double>() == 0.0);
  CHECK(j["convexity"]["class"].get<std::string>() == "strictly-concave");
  CHECK(j["validity"]["all"].get<bool>());
  CHECK(j.contains("regions"));
  CHECK(j.contains("analytic_bounds"));
  CHECK(j.contains("necessary_conditions"));
}

TEST_CASE("generic command computes the quadratic-source threshold") {
  cli::RunConfig cfg;
  cfg.command = "generic";
  cfg.input =
      write_tmp("fisher.json", R"({"h": [0], "Q": [0, 1, -1], "sigma1": 0, "sigma2": 1})");
  cfg.output = (tmp_dir() / "fisher_out.json").string();
  REQUIRE(cli::run(cfg) == 0);
  const auto out = io::json::parse(slurp(cfg.output));
  CHECK(std::abs(out["c_star"].get<double>() - 2.0) <= 1e-3);
}

TEST_CASE("generic command accepts a polynomial triple") {
  // the validated concave model written out as polynomials
  // f = 30u(1-u)^2 + 30u(1-u),  D = 8 - 28u + 21u^2,  g = 2u(1-u)(u-1/2)
  io::json j;
  j["f"] = {0.0, 60.0, -90.0, 30.0};
  j["D"] = {8.0, -28.0, 21.0};
  j["g"] = {0.0, -1.0, 3.0, -2.0};
  j["alpha"] = 0.41469035132718185;
  j["beta"] = 0.9186429820061515;
  j["gamma"] = 0.5;
  cli::RunConfig cfg;
  cfg.command = "generic";
  cfg.input = write_tmp("triple.json", j.dump());
  cfg.output = (tmp_dir() / "triple_out.json").string();
  REQUIRE(cli::run(cfg) == 0);
  const auto out = io::json::parse(slurp(cfg.output));
  CHECK(out["shape"]["ok"].get<bool>());
  CHECK(out["report"]["verdict"].get<std::string>() == "exists");
}

TEST_CASE("scan output is byte-identical across worker counts") {
  cli::RunConfig cfg;
  cfg.command = "scan";
  cfg.input = write_tmp(
      "base.json",
      R"({"C_i": 0, "C_g": -6, "D_i": 8, "D_g": 1, "lambda_i": 0, "lambda_g": 1, "k_i": 1, "k_g": 0})");
  cfg.grid = "r_i=0.01:0.1:9,lambda_g=0.01:0.1:9";
  cfg.output = (tmp_dir() / "scan1.csv").string();
  cfg.workers = 1;
  REQUIRE(cli::run(cfg) == 0);
  const auto one = slurp(cfg.output);
  cfg.output = (tmp_dir() / "scan4.csv").string();
  cfg.workers = 4;
  REQUIRE(cli::run(cfg) == 0);
  CHECK(one == slurp(cfg.output));
  CHECK(one.find("r_i,lambda_g,valid") == 0);

  cfg.grid = "r_i=0.01:0.1:9";
  CHECK(cli::run(cfg) == 1);
  cfg.grid = "r_i=0.01:0.1:9,mu=1:2:3";  // r_i and mu cannot be combined
  CHECK(cli::run(cfg) == 1);
}

TEST_CASE("profile command writes the sample table and residual summary") {
  cli::RunConfig cfg;
  cfg.command = "profile";
  cfg.input = write_tmp("p3.json", valid_params);
  cfg.output = (tmp_dir() / "wave.csv").string();
  REQUIRE(cli::run(cfg) == 0);
  const auto csv = slurp(cfg.output);
  CHECK(csv.rfind("# c=", 0) == 0);
  CHECK(csv.find("xi,phi,z,residual") != std::string::npos);
  const auto rj = io::json::parse(slurp(cfg.output + ".residual.json"));
  CHECK(rj["classical_max"].get<double>() <= 1e-3);
  CHECK(rj["integral_max"].get<double>() <= 1e-5);
}

TEST_CASE("lattice-check emits the refinement table") {
  cli::RunConfig cfg;
  cfg.command = "lattice-check";
  cfg.input = write_tmp(
      "lat.json",
      R"({"C_i": 0, "C_g": -6, "D_i": 8, "D_g": 1, "lambda_i": 1, "lambda_g": 1, "k_i": 2, "k_g": 0})");
  cfg.output = (tmp_dir() / "lat.csv").string();
  cfg.levels = 3;
  REQUIRE(cli::run(cfg) == 0);
  const auto csv = slurp(cfg.output);
  CHECK(csv.rfind("level,l,max_error,observed_order", 0) == 0);
}
