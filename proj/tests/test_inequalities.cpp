#include <doctest.h>

#include <cmath>

#include "wplap/inequalities.hpp"

using namespace wplap;

namespace {

ProblemSpec flat_spec(int N, double p, double alpha) {
  const auto one = WeightFunction::constant(1.0);
  return ProblemSpec::make(N, p, alpha, one, one, one, one, {1e-3, 10.0});
}

TrialFamily ckn_family(const ProblemSpec& s, std::size_t samples, std::uint64_t seed) {
  return TrialFamily::ckn_edge(s, samples, seed);
}

}  // namespace

TEST_CASE("zero trial function") {
  const auto s = flat_spec(3, 2.0, -0.25);
  TrialFamily f;
  f.samples = 3;
  f.amplitude = 0.0;
  const auto rep = check_ckn(f, s, CknVariant::basic);
  CHECK(rep.max_ratio == 0.0);
  CHECK(rep.violations.empty());
  const auto emb = check_embedding(f, derived_admissible_family(), 1.0);
  CHECK(emb.max_ratio == 0.0);
  CHECK(emb.violations.empty());
}

TEST_CASE("trial bumps") {
  const TrialParams t{2.0, 1.5, 0.5};
  CHECK(t.value(2.0) == 0.0);
  CHECK(t.value(3.0) == 0.0);
  CHECK(t.derivative(2.5) == 0.0);
  CHECK(t.value(1.0) == doctest::Approx(std::pow(0.75, 1.5)).epsilon(1e-15));
  for (double r : {0.1, 0.7, 1.3, 1.9}) {
    const double h = 1e-6 * r;
    const double fd = (t.value(r + h) - t.value(r - h)) / (2 * h);
    CHECK(t.derivative(r) == doctest::Approx(fd).epsilon(1e-7));
  }
  TrialFamily f;
  f.samples = 50;
  const auto a = f.generate();
  f.samples = 100;
  const auto b = f.generate();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].rho == b[i].rho);
  for (const auto& x : b) {
    CHECK(x.rho >= f.rho_min);
    CHECK(x.rho <= f.rho_max);
    CHECK(x.k >= 1.0);
    CHECK(x.m >= 0.0);
  }
  f.k_min = 0.5;
  CHECK_THROWS_AS(f.generate(), std::invalid_argument);
}

TEST_CASE("radial CKN oracle") {
  // Hardy in R^3 as alpha -> 0
  CHECK(ckn_oracle_constant(3, 2.0, -1e-12) == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(ckn_oracle_constant(3, 2.0, -0.25) == doctest::Approx(16.0 / 9.0).epsilon(1e-10));
  CHECK(ckn_oracle_constant(2, 2.0, -0.5) == doctest::Approx(4.0).epsilon(1e-10));
  // general p: (p / (N - p - p alpha))^p
  CHECK(ckn_oracle_constant(3, 3.0, -0.3) == doctest::Approx(std::pow(3.0 / 0.9, 3.0)).epsilon(1e-8));
  CHECK(ckn_oracle_constant(2, 1.5, -0.5) == doctest::Approx(std::pow(1.5 / 1.25, 1.5)).epsilon(1e-8));
  CHECK_THROWS_AS(ckn_oracle_constant(2, 2.0, 0.1), PreconditionFailure);
  CHECK(critical_exponent(2, 2.0, -0.5) == doctest::Approx(4.0));
  CHECK_THROWS_AS(critical_exponent(2, 2.0, 0.0), PreconditionFailure);
}

TEST_CASE("basic CKN stays between half the constant and the constant") {
  const auto s = flat_spec(3, 2.0, -0.25);
  const auto rep = check_ckn(ckn_family(s, 1000, 11), s, CknVariant::basic);
  CHECK(rep.trials == 1000);
  CHECK(rep.violations.empty());
  REQUIRE(rep.oracle_constant.has_value());
  CHECK(rep.max_ratio <= 16.0 / 9.0 + 1e-9);
  CHECK(rep.max_ratio > 0.5 * 16.0 / 9.0);
}

TEST_CASE("basic CKN sides against Beta functions") {
  const auto s = flat_spec(3, 2.0, -0.25);
  TrialFamily f;
  f.samples = 1;
  f.rho_min = f.rho_max = 1.7;
  f.k_min = f.k_max = 1.0;
  f.m_min = f.m_max = 0.0;
  const auto rep = check_ckn(f, s, CknVariant::basic);
  // m = 0, k = 1: lhs = rho^{1.5} B(3/4, 3)/2 and rhs = 4 rho^{1.5} / 5.5
  const double B = std::tgamma(0.75) * std::tgamma(3.0) / std::tgamma(3.75);
  CHECK(rep.max_ratio == doctest::Approx(0.5 * B / (4.0 / 5.5)).epsilon(1e-11));
}

TEST_CASE("CKN sup grows with the family") {
  const auto s = flat_spec(2, 2.0, -0.5);
  double prev = 0.0;
  for (std::size_t n : {50, 200, 800}) {
    const auto rep = check_ckn(ckn_family(s, n, 5), s, CknVariant::basic);
    CHECK(rep.max_ratio >= prev);
    prev = rep.max_ratio;
  }
}

TEST_CASE("CKN preconditions") {
  CHECK_THROWS_AS(check_ckn(TrialFamily{}, flat_spec(2, 3.0, -0.1), CknVariant::basic), PreconditionFailure);
  CHECK_THROWS_AS(check_ckn(TrialFamily{}, flat_spec(2, 3.0, -0.1), CknVariant::generalized), PreconditionFailure);
  const auto s = flat_spec(3, 2.0, -0.25);
  TrialFamily bad;
  bad.samples = 3;
  bad.m_min = -0.8;
  bad.m_max = -0.78;
  CHECK_THROWS_AS(check_ckn(bad, s, CknVariant::basic), PreconditionFailure);
}

TEST_CASE("generalized CKN is finite and stable under enlargement") {
  const auto s = derived_admissible_family();
  TrialFamily f;
  f.samples = 1000;
  const auto rep = check_ckn(f, s, CknVariant::generalized);
  CHECK(rep.violations.empty());
  REQUIRE(rep.p_star.has_value());
  CHECK(*rep.p_star == doctest::Approx(4.0));
  CHECK(std::isfinite(rep.max_ratio));
  CHECK(rep.max_ratio > 0.0);
  CHECK(*rep.enlargement_ratio >= 1.0);
  CHECK(*rep.enlargement_ratio <= 1.1);
}

TEST_CASE("embedding bound on the derived family") {
  const auto s = derived_admissible_family();
  const auto C = embedding_constant(s);
  REQUIRE(C.convergent());
  TrialFamily f;
  f.samples = 1000;
  f.seed = 3;
  const auto rep = check_embedding(f, s, C.value);
  CHECK(rep.violations.empty());
  CHECK(rep.max_ratio <= C.value);

  f.samples = 20;
  const auto unit = check_embedding(f, s, C.value);
  f.amplitude = 37.0;
  const auto scaled = check_embedding(f, s, C.value);
  CHECK(scaled.max_ratio == doctest::Approx(unit.max_ratio).epsilon(1e-10));
  CHECK(unit.max_ratio <= rep.max_ratio);
  CHECK_THROWS_AS(check_embedding(f, s, 0.0), PreconditionFailure);
}

TEST_CASE("Picone equality cases") {
  const auto mesh = build_mesh(0.01, 2.0, 60, 1.03);
  for (double p : {1.5, 2.0, 3.0}) {
    const auto v = DiscreteFunction::sample(mesh, [](double r) { return 2.0 + std::cos(r); }, false);
    auto u = v;
    CHECK(check_picone(u, v, p) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    u.values *= 2.0;
    CHECK(std::abs(check_picone(u, v, p)) <= 1e-12 * std::pow(2.0, p));
    // not proportional: strictly positive somewhere, never negative
    const auto w = DiscreteFunction::sample(mesh, [](double r) { return 1.0 + r * r; }, false);
    CHECK(check_picone(w, v, p) >= -1e-12);
  }
}

TEST_CASE("Picone on random trial pairs") {
  const auto mesh = build_mesh(0.01, 5.0, 200, 1.0);
  TrialFamily f;
  f.samples = 2000;
  f.seed = 19;
  f.rho_min = 0.5;
  f.rho_max = 5.0;
  for (double p : {1.5, 2.0, 3.0}) {
    const auto sweep = picone_sweep(f, mesh, p, 4);
    CHECK(sweep.pairs == 1000);
    CHECK(sweep.violations == 0);
    CHECK(sweep.min_scaled >= -1e-12);
  }
}

TEST_CASE("Picone preconditions") {
  const auto mesh = build_mesh(0.01, 1.0, 10, 1.0);
  const auto v = DiscreteFunction::sample(mesh, [](double) { return 1.0; }, false);
  const auto neg = DiscreteFunction::sample(mesh, [](double r) { return r - 0.5; }, false);
  CHECK_THROWS_AS(check_picone(neg, v, 2.0), PreconditionFailure);
  const auto dirichlet = DiscreteFunction::sample(mesh, [](double) { return 1.0; });
  CHECK_THROWS_AS(check_picone(v, dirichlet, 2.0), PreconditionFailure);
  const auto other = DiscreteFunction::sample(build_mesh(0.01, 1.0, 11, 1.0), [](double) { return 1.0; }, false);
  CHECK_THROWS_AS(check_picone(v, other, 2.0), std::invalid_argument);
}
