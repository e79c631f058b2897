#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "wavefronts/singular_ode.hpp"

using namespace wavefront;
namespace so = singular_ode;

namespace {

so::SingularProblem fisher() {
  return so::make_problem([](double) { return 0.0; },
                          [](double x) { return x * (1.0 - x); }, 0.0, 1.0,
                          so::Fn([](double x) { return 1.0 - 2.0 * x; }));
}

// Independent fixed-step RK4 oracle for the extremal solution, valid away
// from the stiff slaved regime (small speeds).
double rk4_zeta_at_sigma1(const so::SingularProblem& p, double c, double eps, int nsteps) {
  auto rhs = [&](double phi, double z) { return p.h(phi) - c - p.Q(phi) / z; };
  const double lam = so::indicial_slope_sigma2(p, c);
  double x = p.sigma2 - eps;
  double z = -lam * eps;
  const double h = (p.sigma1 + eps - x) / nsteps;
  for (int i = 0; i < nsteps; ++i) {
    const double k1 = rhs(x, z);
    const double k2 = rhs(x + h / 2, z + h / 2 * k1);
    const double k3 = rhs(x + h / 2, z + h / 2 * k2);
    const double k4 = rhs(x + h, z + h * k3);
    z += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    x += h;
  }
  return z;
}

}  // namespace

TEST_CASE("fisher indicial slopes") {
  const auto p = fisher();
  CHECK(so::indicial_slope_sigma2(p, 2.0) == Catch::Approx(0.414214).margin(1e-6));
  CHECK(so::indicial_slope_sigma2(p, 5.0 / std::sqrt(6.0)) ==
        Catch::Approx(1.0 / std::sqrt(6.0)).margin(1e-12));
}

TEST_CASE("fisher extremal solution matches the closed form at c = 5/sqrt(6)") {
  const auto p = fisher();
  const double c = 5.0 / std::sqrt(6.0);
  const auto br = so::integrate_zeta(p, c);
  CHECK(br.term.kind == so::Terminal::TouchesZeroAtSigma1);
  for (double phi = 0.02; phi < 0.99; phi += 0.013) {
    const double exact = -(2.0 / std::sqrt(6.0)) * phi * (1.0 - std::sqrt(phi));
    CHECK(br.z_at(phi) == Catch::Approx(exact).margin(1e-8));
  }
}

TEST_CASE("fisher classification by speed") {
  const auto p = fisher();

  // below threshold: strict undershoot, value checked against an independent
  // fixed-step integration
  const auto below = so::integrate_zeta(p, 1.0);
  REQUIRE(below.term.kind == so::Terminal::ReachesNegative);
  const double oracle = rk4_zeta_at_sigma1(p, 1.0, 1e-6, 2000000);
  CHECK(below.term.z_at_sigma1 == Catch::Approx(oracle).margin(1e-6));

  // above threshold: the connection closes at the left corner
  const auto above = so::integrate_zeta(p, 3.0);
  CHECK(above.term.kind == so::Terminal::TouchesZeroAtSigma1);
}

TEST_CASE("fisher threshold speed") {
  const auto p = fisher();
  const auto res = so::threshold_cstar(p);
  CHECK(res.c_star == Catch::Approx(2.0).margin(1e-3));
  CHECK(res.cert.lower_bound == Catch::Approx(2.0).margin(1e-8));
  CHECK(res.cert.upper_bound == Catch::Approx(2.0).margin(1e-7));
}

TEST_CASE("constant drift shifts the threshold exactly") {
  for (double m : {-0.8, 0.7}) {
    const auto p = so::make_problem([m](double) { return m; },
                                    [](double x) { return x * (1.0 - x); }, 0.0, 1.0,
                                    so::Fn([](double x) { return 1.0 - 2.0 * x; }));
    const auto res = so::threshold_cstar(p);
    CHECK(res.c_star == Catch::Approx(2.0 + m).margin(2e-6));
  }
}

TEST_CASE("scaling the source rescales the threshold by its square root") {
  for (double k : {0.25, 4.0}) {
    const auto p = so::make_problem([](double) { return 0.0; },
                                    [k](double x) { return k * x * (1.0 - x); }, 0.0, 1.0,
                                    so::Fn([k](double x) { return k * (1.0 - 2.0 * x); }));
    const auto res = so::threshold_cstar(p);
    CHECK(res.c_star == Catch::Approx(2.0 * std::sqrt(k)).margin(2e-6));
  }

  // joint covariance: Q -> k Q together with h -> sqrt(k) h scales c* by sqrt(k)
  const double k = 4.0, m = 0.5;
  const auto scaled = so::make_problem([=](double) { return std::sqrt(k) * m; },
                                       [=](double x) { return k * x * (1.0 - x); }, 0.0, 1.0,
                                       so::Fn([=](double x) { return k * (1.0 - 2.0 * x); }));
  const auto res = so::threshold_cstar(scaled);
  CHECK(res.c_star == Catch::Approx(std::sqrt(k) * (2.0 + m)).margin(4e-6));
}

TEST_CASE("threshold sandwich on random polynomial problems") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int rep = 0; rep < 12; ++rep) {
    const double a0 = U(rng), a1 = U(rng), a2 = U(rng);
    const double k = 0.5 + 1.5 * std::abs(U(rng));
    const double s = 0.5 * std::abs(U(rng));  // skews Q while keeping positivity
    auto h = [a0, a1, a2](double x) { return a0 + a1 * x + a2 * x * x; };
    auto Q = [k, s](double x) { return k * x * (1.0 - x) * (1.0 + s * x); };
    auto dQ = [k, s](double x) {
      return k * ((1.0 - 2.0 * x) * (1.0 + s * x) + x * (1.0 - x) * s);
    };
    const auto p = so::make_problem(h, Q, 0.0, 1.0, so::Fn(dQ));
    const auto res = so::threshold_cstar(p);
    CHECK(res.c_star >= res.cert.lower_bound - 2e-6);
    CHECK(res.c_star <= res.cert.upper_bound + 2e-6);
    // translation covariance
    const double m = 0.6;
    auto hm = [h, m](double x) { return h(x) + m; };
    const auto pm = so::make_problem(hm, Q, 0.0, 1.0, so::Fn(dQ));
    const auto resm = so::threshold_cstar(pm);
    CHECK(resm.c_star - res.c_star == Catch::Approx(m).margin(2e-6));
  }
}

TEST_CASE("interior branches close or undershoot as anchored") {
  const auto p = fisher();
  const double c = 2.0;
  const auto zeta = so::integrate_zeta(p, c);
  const double z_half = zeta.z_at(0.5);

  // anchored on the extremal solution toward the left corner: closes
  auto left = so::branch_from_interior(p, c, 0.5, z_half, so::Direction::TowardSigma1);
  CHECK(left.report.hit);

  // far below any attachable value: strict undershoot at sigma1
  auto miss = so::branch_from_interior(p, c, 0.5, -1.0, so::Direction::TowardSigma1);
  CHECK_FALSE(miss.report.hit);
  CHECK(miss.report.z_end < 0.0);

  // toward sigma2 the branch retraces the extremal solution
  auto re = so::branch_from_interior(p, c, 0.5, z_half, so::Direction::TowardSigma2);
  for (double phi = 0.55; phi <= 0.9; phi += 0.05)
    CHECK(re.branch.z_at(phi) == Catch::Approx(zeta.z_at(phi)).margin(1e-6));

  CHECK_THROWS_AS(so::branch_from_interior(p, c, 0.5, +0.1, so::Direction::TowardSigma1),
                  InvalidInputError);
}

TEST_CASE("integral-form residual of returned branches") {
  const auto p = fisher();
  for (double c : {2.0, 2.5, 5.0 / std::sqrt(6.0)}) {
    const auto br = so::integrate_zeta(p, c);
    CHECK(so::integral_form_residual(p, br) <= 1e-6);
  }
}

TEST_CASE("problem invariants are enforced at construction") {
  // Q negative inside
  CHECK_THROWS_AS(so::make_problem([](double) { return 0.0; },
                                   [](double x) { return -x * (1.0 - x); }, 0.0, 1.0),
                  InvalidInputError);
  // Q does not vanish at the right endpoint
  CHECK_THROWS_AS(
      so::make_problem([](double) { return 0.0; }, [](double x) { return x + 0.1; }, 0.0, 1.0),
      InvalidInputError);
}

TEST_CASE("bisection validates monotone classification when asked") {
  const auto p = fisher();
  so::ThresholdOptions opt;
  opt.validate_monotone = true;
  opt.monotone_scan = 30;
  const auto res = so::threshold_cstar(p, opt);
  CHECK(res.cert.monotone_ok);
}
