#include <doctest.h>

#include <cmath>

#include <Eigen/Cholesky>

#include "wplap/amp.hpp"

using namespace wplap;

namespace {

ProblemSpec disk_spec(double p, Truncation t = {1e-3, 1.0}) {
  const auto one = WeightFunction::constant(1.0);
  return ProblemSpec::make(2, p, -0.5, one, one, one, one, t);
}

Assembler disk(double p, std::size_t M = 120) {
  return Assembler(build_mesh(1e-3, 1.0, M, 1.0), disk_spec(p));
}

EigenResult principal_of(const Assembler& A) {
  return A.p() == 2.0 ? linear_oracle(A) : minimize_rayleigh(A);
}

}  // namespace

TEST_CASE("lambda = 0 at p = 2 is the stiffness solve") {
  const auto A = disk(2.0);
  const Eigen::VectorXd b = A.load_vector(WeightFunction::constant(1.0));
  const auto s = solve_perturbed(A, b, 0.0);
  REQUIRE(s.converged());
  const auto P = linear_pencil(A);
  const Eigen::Index n = P.A.rows();
  const Eigen::VectorXd x = P.A.llt().solve(b.head(n));
  CHECK((s.u.values.head(n) - x).cwiseAbs().maxCoeff() <= 1e-10 * x.cwiseAbs().maxCoeff());
  CHECK(s.u.values[n] == 0.0);
}

TEST_CASE("zero load gives the zero solution below lambda_1") {
  for (double p : {1.5, 2.0, 3.0}) {
    const auto A = disk(p);
    const Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(A.mesh().nodes.size()));
    for (double lambda : {0.0, 1.0, 3.0}) {
      const auto s = solve_perturbed(A, b, lambda);
      REQUIRE(s.converged());
      CHECK(s.u.values.cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("nonnegative load gives positive solutions below lambda_1") {
  for (double p : {2.0, 3.0}) {
    const auto A = disk(p);
    const auto principal = principal_of(A);
    REQUIRE(principal.converged);
    const Eigen::VectorXd b = A.load_vector(WeightFunction::constant(1.0));
    for (double frac : {0.0, 0.5, 0.9}) {
      const auto s = solve_perturbed(A, b, frac * principal.lambda1, nullptr, &principal);
      REQUIRE(s.converged());
      CHECK(s.u.values.head(s.u.free_count()).minCoeff() > 0.0);
      CHECK(perturbed_residual(A, s.lambda, s.u, b).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + b.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("residual is p-1 homogeneous without load") {
  const auto mesh = build_mesh(1e-2, 1.0, 30, 1.05);
  for (double p : {1.5, 2.0, 3.0}) {
    const Assembler A(mesh, disk_spec(p, {1e-2, 1.0}));
    const auto u = DiscreteFunction::sample(mesh, [](double r) { return std::cos(2.0 * r) - 0.3; });
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(u.values.size());
    const Eigen::VectorXd F = perturbed_residual(A, 2.5, u, zero);
    for (double t : {0.5, 3.0, -2.0}) {
      auto v = u;
      v.values *= t;
      const Eigen::VectorXd Ft = perturbed_residual(A, 2.5, v, zero);
      const double scale = std::copysign(std::pow(std::abs(t), p - 1.0), t);
      CHECK((Ft - scale * F).cwiseAbs().maxCoeff() <= 1e-12 * std::abs(scale) * F.cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("solution does not depend on the continuation path") {
  const auto A = disk(3.0);
  const auto principal = principal_of(A);
  const Eigen::VectorXd b = A.load_vector(WeightFunction::constant(1.0));
  const double target = 0.5 * principal.lambda1;
  const auto up = solve_perturbed(A, b, target, nullptr, &principal);
  const auto high = solve_perturbed(A, b, 0.9 * principal.lambda1, nullptr, &principal);
  REQUIRE(up.converged());
  REQUIRE(high.converged());
  const auto down = solve_perturbed(A, b, target, &high.u, &principal);
  REQUIRE(down.converged());
  CHECK((up.u.values - down.u.values).cwiseAbs().maxCoeff() <= 1e-8 * up.u.values.cwiseAbs().maxCoeff());
}

TEST_CASE("compact load gives negative solutions just above lambda_1") {
  for (double p : {2.0, 3.0}) {
    CAPTURE(p);
    const auto A = disk(p);
    const auto principal = principal_of(A);
    const double l1 = principal.lambda1;
    const auto h = LoadSpec::indicator(0.2, 0.4);
    const auto scan = scan_amp(A, h, principal, {0.9 * l1, 1.3 * l1}, 7, {0.2, 0.4});
    REQUIRE(scan.per_lambda.size() == 7);
    CHECK(scan.lambda_grid.back() == doctest::Approx(1.3 * l1).epsilon(1e-15));
    CHECK(scan.delta_global > 0.0);
    CHECK(scan.delta_local >= scan.delta_global);
    for (const auto& e : scan.per_lambda) {
      if (e.lambda < l1) {
        CHECK(e.converged);
        CHECK(e.min_global > 0.0);
      } else if (e.lambda > l1 && e.lambda - l1 <= scan.delta_global) {
        CHECK(e.converged);
        CHECK(e.max_global < 0.0);
      }
    }
    // closer to lambda_1 the solution is larger
    const auto near = solve_perturbed(A, A.load_vector(h.profile), 1.01 * l1, nullptr, &principal);
    const auto far = solve_perturbed(A, A.load_vector(h.profile), 1.05 * l1, nullptr, &principal);
    REQUIRE(near.converged());
    REQUIRE(far.converged());
    CHECK(near.u.values.cwiseAbs().maxCoeff() > far.u.values.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("empty scans") {
  const auto A = disk(2.0, 40);
  const auto principal = principal_of(A);
  const auto h = LoadSpec::indicator(0.2, 0.4);
  const auto none = scan_amp(A, h, principal, {0.1, 1.0}, 0, {0.2, 0.4});
  CHECK(none.per_lambda.empty());
  CHECK(none.delta_local == 0.0);
  CHECK(none.delta_global == 0.0);
  const auto below = scan_amp(A, h, principal, {0.1, 0.5 * principal.lambda1}, 4, {0.2, 0.4});
  CHECK(below.per_lambda.size() == 4);
  CHECK(below.delta_global == 0.0);
  CHECK_THROWS_AS(scan_amp(A, h, principal, {1.0, 0.5}, 4, {0.2, 0.4}), std::invalid_argument);
  CHECK_THROWS_AS(scan_amp(A, h, principal, {0.1, 1.0}, 4, {0.2, 4.0}), std::invalid_argument);
}

TEST_CASE("load validation") {
  LoadSpec neg{WeightFunction::constant(-1.0), std::nullopt, true};
  CHECK_THROWS_AS(neg.validate(1e-3, 1.0), InvalidWeight);
  neg.nonneg = false;
  CHECK_NOTHROW(neg.validate(1e-3, 1.0));
  LoadSpec wide{WeightFunction::constant(1.0), std::make_pair(0.2, 0.4), true};
  CHECK_THROWS_AS(wide.validate(1e-3, 1.0), InvalidWeight);
  CHECK_NOTHROW(LoadSpec::indicator(0.2, 0.4).validate(1e-3, 1.0));
}

TEST_CASE("status strings") {
  CHECK(to_string(SolveStatus::converged) == "converged");
  CHECK(to_string(SolveStatus::blow_up) == "blow-up");
  CHECK(to_string(SolveStatus::stagnated) == "stagnated");
  CHECK(to_string(SolveStatus::iteration_cap) == "iteration cap");
}
