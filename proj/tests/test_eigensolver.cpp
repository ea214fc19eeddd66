#include <doctest.h>

#include <cmath>
#include <random>

#include "support/bessel.hpp"
#include "support/families.hpp"
#include "wplap/eigensolver.hpp"

using namespace wplap;

namespace {

ProblemSpec disk_spec(double p, Truncation t = {1e-3, 1.0}) {
  const auto one = WeightFunction::constant(1.0);
  return ProblemSpec::make(2, p, -0.5, one, one, one, one, t);
}

}  // namespace

TEST_CASE("two free node pencil") {
  // sympy: det(A - lambda B) = 0 for the 2 x 2 free-node block
  const Assembler A(build_mesh(0.1, 1.0, 2, 1.0), disk_spec(2.0, {0.1, 1.0}));
  const auto ev = pencil_eigenvalues(linear_pencil(A));
  REQUIRE(ev.size() == 2);
  CHECK(ev[0] == doctest::Approx(6.1025168492724012449).epsilon(1e-12));
  CHECK(ev[1] == doctest::Approx(43.689551028703540032).epsilon(1e-12));
  const auto o = linear_oracle(A);
  CHECK(o.lambda1 == doctest::Approx(ev[0]).epsilon(1e-13));
  CHECK(A.G(o.u) == doctest::Approx(1.0).epsilon(1e-13));

  auto P = linear_pencil(A);
  P.A *= 7.5;
  P.B *= 7.5;
  CHECK(pencil_eigenvalues(P)[0] == doctest::Approx(ev[0]).epsilon(1e-13));
}

TEST_CASE("disk ground state against a Bessel root") {
  const double j01 = wplap::testing::bessel_j0_first_zero();
  CHECK(j01 == doctest::Approx(2.404825557695773).epsilon(1e-14));
  const Assembler A(build_mesh(1e-3, 1.0, 400, 1.0), disk_spec(2.0));
  const auto o = linear_oracle(A);
  CHECK(std::abs(o.lambda1 / (j01 * j01) - 1.0) < 0.01);
  const auto r = minimize_rayleigh(A);
  CHECK(r.converged);
  CHECK(r.lambda1 == doctest::Approx(o.lambda1).epsilon(1e-9));
}

TEST_CASE("nonlinear solver agrees with the dense oracle at p = 2") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 3; ++trial) {
    const auto spec = wplap::testing::random_admissible_spec(rng);
    const Assembler A(build_log_mesh(spec.truncation.eps, spec.truncation.R, 200), spec);
    const auto o = linear_oracle(A);
    const auto r = minimize_rayleigh(A);
    REQUIRE(r.converged);
    CHECK(std::abs(r.lambda1 - o.lambda1) <= 1e-6 * o.lambda1);
    CHECK(r.lambda1 > 0.0);
    CHECK(r.u.values.head(r.u.free_count()).minCoeff() > 0.0);
    CHECK(o.u.values.head(o.u.free_count()).minCoeff() > 0.0);
    CHECK((r.u.values - o.u.values).cwiseAbs().maxCoeff() <= 1e-4 * o.u.values.maxCoeff());

    const auto f = A.assemble(o.u);
    CHECK(o.residual <= 1e-10 * f.grad_I.cwiseAbs().maxCoeff());
    auto bumped = o.u;
    bumped.values[bumped.free_count() / 2] += 1e-2;
    CHECK(weak_residual(A, o.lambda1, bumped) > 0.0);
  }
}

TEST_CASE("weak residual of the zero function") {
  const Assembler A(build_mesh(1e-2, 1.0, 10, 1.0), disk_spec(3.0));
  for (double lambda : {0.0, 1.0, 1e3}) {
    CHECK(weak_residual(A, lambda, DiscreteFunction::zero(A.mesh_ptr())) == 0.0);
  }
}

TEST_CASE("eigenvalue scales with the weights") {
  for (double p : {1.5, 2.0, 3.0}) {
    const auto base = disk_spec(p);
    const auto mesh = build_mesh(1e-3, 1.0, 120, 1.0);
    const auto r = minimize_rayleigh(Assembler(mesh, base));
    REQUIRE(r.converged);
    const auto twoK = minimize_rayleigh(
        Assembler(mesh, base.with_weights(base.L, base.K.scaled(2.0))));
    const auto twoL = minimize_rayleigh(
        Assembler(mesh, base.with_weights(base.L.scaled(2.0), base.K)));
    CHECK(twoK.lambda1 == doctest::Approx(r.lambda1 / 2.0).epsilon(1e-8));
    CHECK(twoL.lambda1 == doctest::Approx(r.lambda1 * 2.0).epsilon(1e-8));
    CHECK(r.u.values.head(r.u.free_count()).minCoeff() > 0.0);
  }
}

TEST_CASE("larger domains lower the eigenvalue") {
  std::mt19937_64 rng(4);
  const auto spec = wplap::testing::random_admissible_spec(rng, 2.0, {1e-3, 5.0});
  MeshPtr mesh = build_log_mesh(1e-3, 5.0, 120);
  double prev = minimize_rayleigh(Assembler(mesh, spec)).lambda1;
  for (double R : {10.0, 20.0, 40.0}) {
    mesh = extend_mesh(*mesh, R);
    const auto r = minimize_rayleigh(Assembler(mesh, spec));
    REQUIRE(r.converged);
    CHECK(r.lambda1 <= prev + 1e-9 * prev);
    prev = r.lambda1;
  }
}

TEST_CASE("the minimizer beats every nonnegative competitor") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (double p : {1.5, 2.0, 3.0}) {
    const Assembler A(build_mesh(1e-3, 1.0, 60, 1.0), disk_spec(p));
    const auto r = minimize_rayleigh(A);
    REQUIRE(r.converged);
    for (int i = 0; i < 50; ++i) {
      auto v = DiscreteFunction::sample(A.mesh_ptr(), [&](double) { return U(rng); });
      v.values /= std::pow(A.G(v), 1.0 / p);
      CHECK(A.I(v) >= r.lambda1 * A.G(v) - 1e-9 * r.lambda1);
    }
  }
}

TEST_CASE("constraint feasibility") {
  const auto mesh = build_mesh(1e-2, 1.0, 40, 1.0);
  const auto neg = disk_spec(2.0).with_weights(WeightFunction::constant(1.0),
                                               WeightFunction::constant(-1.0));
  CHECK_THROWS_AS(minimize_rayleigh(Assembler(mesh, neg)), InfeasibleConstraint);
  CHECK_THROWS_AS(linear_oracle(Assembler(mesh, neg)), NoPrincipalEigenvalue);

  // K > 0 near the origin and < 0 beyond
  const auto mixed_K = WeightFunction::piecewise({{0.0, Power{1.0, 0.0}}, {0.5, Power{-1.0, 0.0}}});
  const auto mixed = disk_spec(2.0).with_weights(WeightFunction::constant(1.0), mixed_K);
  const Assembler A(mesh, mixed);
  const auto r = minimize_rayleigh(A);
  const auto o = linear_oracle(A);
  REQUIRE(r.converged);
  CHECK(r.lambda1 == doctest::Approx(o.lambda1).epsilon(1e-7));
  CHECK(r.u.values.head(r.u.free_count()).minCoeff() > 0.0);
}

TEST_CASE("truncation study settles") {
  TruncationOptions opts;
  opts.use_oracle = true;
  const auto oracle = truncation_study(derived_admissible_family(), opts);
  CHECK(oracle.converged);
  CHECK(oracle.history.size() >= 3);
  opts.use_oracle = false;
  const auto nonlinear = truncation_study(derived_admissible_family(), opts);
  CHECK(nonlinear.converged);
  CHECK(nonlinear.result.lambda1 == doctest::Approx(oracle.result.lambda1).epsilon(1e-7));
  for (std::size_t i = 1; i < oracle.history.size(); ++i) {
    CHECK(oracle.history[i].lambda1 <= oracle.history[i - 1].lambda1 * (1 + 1e-9));
  }
}

TEST_CASE("p = 2 requirement of the oracle") {
  const Assembler A(build_mesh(1e-2, 1.0, 10, 1.0), disk_spec(3.0));
  CHECK_THROWS_AS(linear_oracle(A), std::invalid_argument);
}
