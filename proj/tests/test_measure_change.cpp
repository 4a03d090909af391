#include <cmath>
#include <numbers>

#include "doctest.h"
#include "test_support.hpp"
#include "trisre/measure_change.hpp"
#include "trisre/stationarity.hpp"

using namespace trisre;
using trisre::testing::throws_code;

namespace {

Distribution C(double c) { return Distribution::constant(c); }
Distribution LN(double mu, double s) { return Distribution::lognormal(mu, s); }

TriangularSRE t34_model() {
  return IndependentEntries{LN(-1, 1), Distribution::normal(0, 1), LN(-0.5, std::sqrt(0.5)), C(1),
                            C(1)};
}

double sum_abs_u(std::span<const Innovation> path) {
  double s = 0.0;
  for (const auto& x : path) s += std::abs(to_vu(x).u);
  return s;
}

}  // namespace

TEST_CASE("tilt normalisation") {
  const TriangularSRE m = IndependentEntries{LN(0, 1), LN(0, 1), LN(-1, 1), C(1), C(1)};
  const auto one = [](std::span<const Innovation>) { return 1.0; };
  const auto exact = TiltedPair::make(m, Diagonal::Second, 2.0);
  CHECK(exact.mode == TiltMode::ExactTilt);
  const auto e = expect_tilted(exact, 5, 10000, one, 1);
  CHECK(e.value == doctest::Approx(1.0).epsilon(1e-12));
  const auto weighted = TiltedPair::make(m, Diagonal::Second, 2.0, false);
  CHECK(weighted.mode == TiltMode::WeightedMC);
  const auto w = expect_tilted(weighted, 1, 200000, one, 2);
  CHECK(std::abs(w.value - 1.0) < 4.0 * w.se);
}

TEST_CASE("constant diagonal gives c^(alpha n)") {
  const TriangularSRE m = IndependentEntries{C(0.3), C(1), C(0.7), C(1), C(1)};
  const auto one = [](std::span<const Innovation>) { return 1.0; };
  for (bool exact : {true, false}) {
    const auto pair = TiltedPair::make(m, Diagonal::Second, 1.5, exact);
    const auto e = expect_tilted(pair, 6, 1000, one, 3);
    CHECK(e.value == doctest::Approx(std::pow(0.7, 1.5 * 6)).epsilon(1e-12));
    CHECK(e.se == doctest::Approx(0.0));
  }
}

TEST_CASE("exact tilt and weighted Monte Carlo agree") {
  const TriangularSRE models[] = {
      IndependentEntries{LN(-1, 1), Distribution::normal(0, 1), LN(-1, 0.5), C(1), C(1)},
      IndependentEntries{LN(-2, 1), LN(0, 0.5), Distribution::signed_lognormal(-1, 1, 0.6), C(1),
                         C(1)},
      EqualDiagonal{LN(-1, 1), ProportionalToDiagonal{Distribution::normal(0.2, 1)}, C(1), C(1)},
  };
  std::uint64_t base = 0;
  for (const auto& m : models) {
    const auto exact = expect_tilted(TiltedPair::make(m, Diagonal::Second, 1.0), 3, 200000,
                                     sum_abs_u, 5, base);
    const auto weighted = expect_tilted(TiltedPair::make(m, Diagonal::Second, 1.0, false), 3,
                                        200000, sum_abs_u, 5, base + 1000);
    CHECK(agree_within(exact, weighted, 4.0));
    base += 2000;
  }
}

TEST_CASE("weighted mode detects degenerate weights") {
  const TriangularSRE m = IndependentEntries{LN(-1, 1), C(1), LN(-8, 4), C(1), C(1)};
  const auto pair = TiltedPair::make(m, Diagonal::Second, 1.0, false);
  CHECK(throws_code(
      [&] { expect_tilted(pair, 40, 2000, [](std::span<const Innovation>) { return 1.0; }, 1); },
      ErrorCode::WeightDegenerate));
}

TEST_CASE("estimate_w examples") {
  const TriangularSRE no_a12 = IndependentEntries{LN(-3, 1), C(0), LN(-1, 1), C(1), C(1)};
  CHECK(estimate_w(no_a12, 2.0, 10, 100, 1).at_n.abs.value == 0.0);

  const double c = 0.6, g = 1.5, alpha = 1.5;
  const TriangularSRE consts = IndependentEntries{C(c), C(g), C(c), C(1), C(1)};
  for (int n : {1, 4, 9}) {
    const auto w = estimate_w(consts, alpha, n, 100, 1);
    CHECK(w.at_n.abs.value ==
          doctest::Approx(std::pow(n * g * std::pow(c, n - 1), alpha)).epsilon(1e-12));
    CHECK(w.at_n.minus.value == 0.0);
  }

  const TriangularSRE m = IndependentEntries{LN(-4, 1), Distribution::normal(0.3, 1), LN(-1, 1),
                                             C(1), C(1)};
  const auto w1 = estimate_w(m, 2.0, 1, 400000, 2);
  const double exact = abs_moment(Distribution::normal(0.3, 1), 2.0);
  CHECK(std::abs(w1.at_n.abs.value - exact) < 4.0 * w1.at_n.abs.se);
  CHECK(throws_code([&] { estimate_w(IndependentEntries{LN(-1, 1), C(1), LN(-1, 1), C(1), C(1)},
                                     2.0, 5, 100, 1); },
                    ErrorCode::ArgumentOutOfRange));
}

TEST_CASE("tilted w_n matches direct M_n moments for short horizons") {
  const TriangularSRE m = IndependentEntries{LN(-4, 1), Distribution::normal(0.3, 1), LN(-1, 1),
                                             C(1), C(1)};
  std::uint64_t base = 0;
  for (int n : {2, 5, 10}) {
    const auto w = estimate_w(m, 2.0, n, 400000, 11, base);
    auto direct = parallel_mean<1>(400000, 12, base, 0,
                                   [&](RngStream& rng, std::array<double, 1>& out) {
                                     out[0] = std::pow(sample_Mn(m, n, rng), 2.0);
                                   });
    const auto d = EstimateWithError::from(direct[0], 12, base);
    CHECK(agree_within(w.at_n.abs, d, 4.0));
    base += 1000;
  }
}

TEST_CASE("w_n grows with n for nonnegative entries") {
  const TriangularSRE m = IndependentEntries{LN(-4, 1), LN(0, 0.5), LN(-1, 1), C(1), C(1)};
  double prev = 0.0;
  for (int n : {1, 2, 4, 8, 16}) {
    const auto w = estimate_w(m, 2.0, n, 200000, 21);
    CHECK(w.at_n.abs.value + 4.0 * w.at_n.abs.se >= prev);
    CHECK(w.at_n.minus.value == 0.0);
    prev = w.at_n.abs.value;
  }
}

TEST_CASE("mu and sigma^2") {
  const auto ms0 = estimate_mu_sigma(
      EqualDiagonal{LN(-1, 1), ProportionalToDiagonal{Distribution::normal(0, 1)}, C(1), C(1)}, 2.0);
  CHECK(ms0.mu.value == 0.0);
  CHECK(ms0.sigma2.value == doctest::Approx(1.0).epsilon(1e-10));
  const auto msc =
      estimate_mu_sigma(EqualDiagonal{LN(-1, 1), ProportionalToDiagonal{C(0.7)}, C(1), C(1)}, 2.0);
  CHECK(msc.mu.value == doctest::Approx(0.7));
  CHECK(msc.sigma2.value == doctest::Approx(0.49));
  const auto msi = estimate_mu_sigma(
      EqualDiagonal{LN(-1, 1), IndependentOffDiagonal{Distribution::normal(0, 1)}, C(1), C(1)}, 2.0);
  CHECK(msi.mu.value == 0.0);
  // E A^0 = 1 for sigma^2 = E A12^2 E|A|^(alpha - 2).
  CHECK(msi.sigma2.value == doctest::Approx(1.0));
  CHECK(throws_code([] { estimate_mu_sigma(t34_model(), 2.0); }, ErrorCode::RequiresEqualDiagonal));
}

TEST_CASE("mu and sigma^2: closed form agrees with weighted Monte Carlo") {
  const TriangularSRE models[] = {
      EqualDiagonal{LN(-1, 1), ProportionalToDiagonal{Distribution::normal(0.4, 1)}, C(1), C(1)},
      EqualDiagonal{Distribution::signed_lognormal(-1, 0.6, 0.7),
                    IndependentOffDiagonal{Distribution::uniform(-1, 2)}, C(1), C(1)},
  };
  std::uint64_t base = 0;
  for (const auto& m : models) {
    const double alpha = solve_tail_index(m.a11_law());
    const auto exact = estimate_mu_sigma(m, alpha);
    const auto mc = estimate_mu_sigma_mc(m, alpha, 1'000'000, 4, base);
    CHECK(std::abs(exact.mu.value - mc.mu.value) < 4.0 * mc.mu.se);
    CHECK(std::abs(exact.sigma2.value - mc.sigma2.value) < 4.0 * mc.sigma2.se);
    base += 1000;
  }
}

TEST_CASE("clt constant") {
  CHECK(clt_constant(1.0, 1.0, 2.0) == doctest::Approx(1.0));
  CHECK(clt_constant(4.0, 1.0, 2.0) == doctest::Approx(4.0));
  CHECK(clt_constant(1.0, 1.0, 1.0) == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)));
  const TriangularSRE zero = EqualDiagonal{
      LN(-1, 1), ProportionalToDiagonal{Distribution::normal(0, 1)}, C(1), C(1)};
  CHECK(clt_constant(zero, 2.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(throws_code(
      [] {
        clt_constant(EqualDiagonal{LN(-1, 1), ProportionalToDiagonal{C(0.5)}, C(1), C(1)}, 2.0);
      },
      ErrorCode::RequiresMuZero));
}

TEST_CASE("perpetuity_sample examples") {
  RngStream rng(1, 0), twin(1, 0);
  const TriangularSRE m = t34_model();
  const auto pair = TiltedPair::make(m, Diagonal::Second, 2.0);
  const double x1 = perpetuity_sample(pair, 1, rng);
  CHECK(x1 == to_vu(draw_innovation(pair.law, twin)).u);

  const TriangularSRE v0 = IndependentEntries{C(0), Distribution::normal(0, 1), C(2), C(1), C(1)};
  RngStream a(2, 0), b(2, 0);
  const auto p0 = TiltedPair::make(v0, Diagonal::Second, 1.0);
  CHECK(perpetuity_sample(p0, 7, a) == to_vu(draw_innovation(p0.law, b)).u);

  const TriangularSRE half = IndependentEntries{C(0.5), C(1), C(1), C(1), C(1)};
  const auto ph = TiltedPair::make(half, Diagonal::Second, 1.0);
  for (int n : {1, 2, 10, 30}) {
    CHECK(perpetuity_sample(ph, n, rng) == doctest::Approx(2.0 * (1.0 - std::pow(2.0, -n))));
  }
  const auto weighted = TiltedPair::make(m, Diagonal::Second, 2.0, false);
  CHECK(throws_code([&] { perpetuity_sample(weighted, 3, rng); }, ErrorCode::RequiresExactTilt));
}

TEST_CASE("mixture estimator agrees with plain Monte Carlo and with exact values") {
  const TriangularSRE m = t34_model();
  const TriangularSRE t1 = m.tilted(Diagonal::First, 2.0), t2 = m.tilted(Diagonal::Second, 2.0);
  const StepSampler sampler = [&](StepLaw law, RngStream& rng) {
    return draw_innovation(law == StepLaw::TiltFirst ? t1 : law == StepLaw::TiltSecond ? t2 : m,
                           rng);
  };
  const auto mix = mixture_moments(sampler, 2.0, 0.0, 0.0, 3, 400000, 1);
  auto plain = parallel_mean<2>(400000, 2, 0, 0, [&](RngStream& rng, std::array<double, 2>& out) {
    const double v = sample_Mn(m, 3, rng);
    out[0] = v * v;
    out[1] = v > 0 ? v * v : 0.0;
  });
  CHECK(agree_within(mix.abs, EstimateWithError::from(plain[0], 2, 0), 4.0));
  CHECK(agree_within(mix.plus, EstimateWithError::from(plain[1], 2, 0), 4.0));
  // E M_3^2 with independent centred A12: sum over i of E A12^2 E A11^2(i-1) E A22^2(3-i) = 3.
  CHECK(std::abs(mix.abs.value - 3.0) < 4.0 * mix.abs.se);

  // Univariate perpetuity A = LN(-1, 1), B = 1: E X_n^2 = n + 2 sum_d (n - d) m^d, m = e^-1/2.
  const Distribution a = LN(-1, 1), ta = tilted(a, 2.0);
  const StepSampler uni = [&](StepLaw law, RngStream& rng) {
    const double v = sample(law == StepLaw::TiltFirst ? ta : a, rng);
    return Innovation{v, 1.0, 1.0, 0.0, 0.0};
  };
  const int n = 60;
  const double mm = std::exp(-0.5);
  double exact = n;
  for (int d = 1; d < n; ++d) exact += 2.0 * (n - d) * std::pow(mm, d);
  const auto u = mixture_moments(uni, 2.0, 0.0, 0.0, n, 200000, 3);
  CHECK(std::abs(u.abs.value - exact) < 4.0 * u.abs.se);
  CHECK(u.abs.se < 0.01 * exact);
  CHECK(u.minus.value == 0.0);
}

TEST_CASE("c_R examples") {
  const TriangularSRE no_a12 = IndependentEntries{LN(-1, 1), C(0), LN(-0.5, std::sqrt(0.5)), C(1),
                                                  C(1)};
  const auto z = estimate_cR(no_a12, 2.0, 50, 100, 1);
  CHECK(z.at_n.abs.value == 0.0);
  CHECK(z.at_half.plus.value == 0.0);
  CHECK(throws_code(
      [] {
        estimate_cR(EqualDiagonal{LN(-1, 1), ProportionalToDiagonal{C(1)}, C(1), C(1)}, 2.0, 10,
                    100, 1);
      },
      ErrorCode::NotT34Regime));
  CHECK(throws_code([] { estimate_cR(t34_model(), 1.0, 10, 100, 1); }, ErrorCode::NotT34Regime));

  // Symmetric U under the tilt: the two signed constants coincide.
  const auto r = estimate_cR(t34_model(), 2.0, 200, 100000, 5);
  CHECK(agree_within(r.at_n.plus, r.at_n.minus, 4.0));
  CHECK(r.at_n.abs.value == doctest::Approx(r.at_n.plus.value + r.at_n.minus.value));
  CHECK(std::abs(r.at_n.abs.value - r.at_half.abs.value) <=
        4.0 * std::hypot(r.at_n.abs.se, r.at_half.abs.se) + 0.05 * r.at_n.abs.value);
}

TEST_CASE("rho_V against its factorised form") {
  const TriangularSRE m = t34_model();
  const auto rv = rho_V(m, 2.0, 1'000'000, 9);
  // E_a|V|^a log|V| = E|A11|^a log|A11| - E|A11|^a E log|A22| for independent diagonals.
  const double exact = rho(m.a11_law(), 2.0) - log_abs_moment(m.a22_law());
  CHECK(std::abs(rv.value - exact) < 4.0 * rv.se);
  CHECK(rv.value > 0.0);
}
