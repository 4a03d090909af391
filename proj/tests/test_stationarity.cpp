#include <cmath>

#include "doctest.h"
#include "test_support.hpp"
#include "trisre/stationarity.hpp"

using namespace trisre;
using trisre::testing::throws_code;

namespace {

Distribution C(double c) { return Distribution::constant(c); }
Distribution LN(double mu, double s) { return Distribution::lognormal(mu, s); }

}  // namespace

TEST_CASE("tail index of lognormal diagonals") {
  CHECK(std::abs(solve_tail_index(LN(-1, 1)) - 2.0) < 1e-9);
  CHECK(std::abs(solve_tail_index(LN(-2, 1)) - 4.0) < 1e-9);
  for (double p : {0.0, 0.3, 1.0}) {
    CHECK(std::abs(solve_tail_index(Distribution::signed_lognormal(-1, 1, p)) - 2.0) < 1e-9);
  }
  for (double mu : {-3.0, -0.7, -0.05}) {
    for (double s : {0.3, 1.0, 2.2}) {
      const double alpha = solve_tail_index(LN(mu, s));
      CHECK(std::abs(alpha - (-2.0 * mu / (s * s))) < 1e-9);
      CHECK(std::abs(abs_moment(LN(mu, s), alpha) - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("tail index of other families") {
  // E|U|^b = 2^b/(b+1) for U ~ Uniform(0, 2): root at 1.
  CHECK(std::abs(solve_tail_index(Distribution::uniform(0, 2)) - 1.0) < 1e-9);
  // E|N(0, s^2)|^2 = s^2: root at 2 when s = 1 ... use s = 1 exactly.
  const double a = solve_tail_index(Distribution::normal(0, 1));
  CHECK(std::abs(a - 2.0) < 1e-9);
  CHECK(throws_code([] { solve_tail_index(Distribution::uniform(0, 1)); }, ErrorCode::NoRoot));
  CHECK(throws_code([] { solve_tail_index(LN(0.1, 1)); }, ErrorCode::NotContractive));
  CHECK(throws_code([] { solve_tail_index(C(0.5)); }, ErrorCode::NoRoot));
}

TEST_CASE("rho examples") {
  CHECK(rho(LN(-1, 1), 2.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rho(LN(-2, 1), 4.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(rho(C(0.5), 1.0) == doctest::Approx(0.5 * std::log(0.5)));
  CHECK(rho(C(0.5), 1.0) < 0.0);
  CHECK(std::abs(abs_moment_derivative_fd(LN(-1.3, 0.8), solve_tail_index(LN(-1.3, 0.8))) -
                 rho(LN(-1.3, 0.8), solve_tail_index(LN(-1.3, 0.8)))) < 1e-6);
}

TEST_CASE("lyapunov exponent of constant products") {
  const TriangularSRE diag = IndependentEntries{C(0.5), C(0), C(0.5), C(1), C(1)};
  const auto g = lyapunov_estimate(diag, 1000, 10, 1);
  CHECK(g.value == doctest::Approx(std::log(0.5)).epsilon(1e-14));
  CHECK(g.se == 0.0);

  const TriangularSRE tri = IndependentEntries{C(0.5), C(1), C(0.25), C(1), C(1)};
  const std::int64_t n = 10000;
  // P_n / 0.5^(n-1) -> [[0.5, 2], [0, 0]] up to (1/2)^n corrections.
  const double oracle = ((n - 1) * std::log(0.5) + 0.5 * std::log(0.25 + 4.0)) / n;
  CHECK(lyapunov_estimate(tri, n, 2, 1).value == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(std::abs(lyapunov_estimate(tri, 2'000'000, 2, 1).value - std::log(0.5)) < 1e-6);
}

TEST_CASE("lyapunov exponent is negative under the stationarity condition") {
  const TriangularSRE m = IndependentEntries{LN(-0.3, 1), Distribution::normal(0, 2),
                                             Distribution::signed_lognormal(-0.2, 0.5, 0.5), C(1),
                                             C(1)};
  const auto g = lyapunov_estimate(m, 10000, 100, 7);
  CHECK(g.value + 3.0 * g.se < 0.0);
  CHECK(g.value == doctest::Approx(-0.2).epsilon(0.05));
}

TEST_CASE("classify: alpha1 < alpha2, Kesten-Goldie") {
  const TriangularSRE m = IndependentEntries{LN(-1, 1), Distribution::normal(0.5, 1), LN(-2, 1),
                                             C(1), C(1)};
  const RegimeReport r = classify(m);
  CHECK(r.theorem_case == TheoremCase::T31_a1_lt_a2_KG);
  CHECK(*r.alpha1 == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(*r.alpha2 == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(*r.rho1 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.regime[0] == TailRegime::KestenGoldie);
  CHECK(r.regime[1] == TailRegime::KestenGoldie);
  CHECK(r.diagonal_relation == DiagonalRelation::Distinct);
  REQUIRE(r.find("C2"));
  CHECK(r.find("C2")->status == CheckStatus::Pass);
  // A12 takes negative values, so positivity of the constants is open.
  REQUIRE(r.find("BarConstantPositivity"));
  CHECK(r.find("BarConstantPositivity")->status == CheckStatus::Unverifiable);
}

TEST_CASE("classify: nonnegative entries settle positivity") {
  const TriangularSRE m = IndependentEntries{LN(-1, 1), LN(0, 1), LN(-2, 1), C(1), C(1)};
  const RegimeReport r = classify(m);
  REQUIRE(r.find("BarConstantPositivity"));
  CHECK(r.find("BarConstantPositivity")->status == CheckStatus::Pass);
}

TEST_CASE("classify: alpha1 > alpha2 and Grey cases") {
  const TriangularSRE gt = IndependentEntries{LN(-4, 1), LN(0, 0.5), LN(-1, 1), C(1), C(1)};
  CHECK(classify(gt).theorem_case == TheoremCase::T31_a1_gt_a2_KG);

  const TriangularSRE lt_grey =
      IndependentEntries{LN(-2, 1), LN(0, 0.5), LN(-1.5, 1),
                         Distribution::two_sided_pareto(1.5, 1, 0.5), C(1)};
  const RegimeReport r = classify(lt_grey);
  CHECK(r.theorem_case == TheoremCase::T31_a1_lt_a2_Grey);
  CHECK(r.regime[0] == TailRegime::Grey);
  CHECK(*r.alpha1 == 1.5);
  CHECK(r.find("B(alpha1)")->status == CheckStatus::Pass);

  const TriangularSRE gt_grey = IndependentEntries{
      LN(-2, 1), LN(0, 0.5), LN(-1, 1), C(1), Distribution::two_sided_pareto(1.5, 1, 0.7)};
  CHECK(classify(gt_grey).theorem_case == TheoremCase::T31_a1_gt_a2_Grey);
}

TEST_CASE("classify: equal diagonals") {
  const TriangularSRE zero = EqualDiagonal{
      LN(-1, 1), ProportionalToDiagonal{Distribution::normal(0, 1)}, C(1), C(1)};
  const RegimeReport r = classify(zero);
  CHECK(r.theorem_case == TheoremCase::T33_mu_zero);
  CHECK(r.diagonal_relation == DiagonalRelation::EqualAS);
  REQUIRE(r.mu.has_value());
  CHECK(r.mu->value == 0.0);
  for (const char* id : {"A1", "A2", "A3", "A4"}) {
    REQUIRE(r.find(id));
    CHECK(r.find(id)->status == CheckStatus::Pass);
  }

  const TriangularSRE nonzero =
      EqualDiagonal{LN(-1, 1), ProportionalToDiagonal{C(0.5)}, C(1), C(1)};
  CHECK(classify(nonzero).theorem_case == TheoremCase::T33_mu_nonzero);

  const TriangularSRE indep = EqualDiagonal{
      LN(-1, 1), IndependentOffDiagonal{Distribution::normal(0, 1)}, C(1), C(1)};
  CHECK(classify(indep).theorem_case == TheoremCase::T33_mu_zero);
}

TEST_CASE("classify: distinct diagonals with equal indices") {
  const TriangularSRE m = IndependentEntries{LN(-1, 1), LN(0, 0.5), LN(-0.5, std::sqrt(0.5)),
                                             C(1), C(1)};
  const RegimeReport r = classify(m);
  CHECK(r.theorem_case == TheoremCase::T34);
  CHECK(r.find("A5")->status == CheckStatus::Pass);
  CHECK(r.find("A6")->status == CheckStatus::Pass);
}

TEST_CASE("classify: unsupported models") {
  const TriangularSRE no_c2 = IndependentEntries{LN(-1, 1), C(0), LN(-2, 1), C(1), C(1)};
  const RegimeReport r = classify(no_c2);
  CHECK(r.theorem_case == TheoremCase::Unsupported);
  REQUIRE(r.find("C2"));
  CHECK(r.find("C2")->status == CheckStatus::Fail);

  const TriangularSRE explosive = IndependentEntries{LN(0.2, 1), LN(0, 1), LN(-2, 1), C(1), C(1)};
  const RegimeReport e = classify(explosive);
  CHECK(e.theorem_case == TheoremCase::Unsupported);
  CHECK(e.find("Prop2.1")->status == CheckStatus::Fail);

  // Equal indices with a lattice diagonal.
  const TriangularSRE lattice = IndependentEntries{C(0.5), LN(0, 1), LN(-1, 1), C(1), C(1)};
  CHECK(classify(lattice).theorem_case == TheoremCase::Unsupported);
}

TEST_CASE("classify is deterministic") {
  const TriangularSRE m = IndependentEntries{LN(-1, 1), Distribution::normal(0.5, 1), LN(-2, 1),
                                             Distribution::normal(0, 1), C(1)};
  const RegimeReport a = classify(m, {.seed = 3, .mc_samples = 20000});
  const RegimeReport b = classify(m, {.seed = 3, .mc_samples = 20000});
  REQUIRE(a.checks.size() == b.checks.size());
  for (std::size_t i = 0; i < a.checks.size(); ++i) CHECK(a.checks[i].detail == b.checks[i].detail);
  CHECK(to_string(a.theorem_case) == "T31_a1_lt_a2_KG");
  CHECK(theorem_case_from_string("T34") == TheoremCase::T34);
}
