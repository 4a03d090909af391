#include <cmath>
#include <vector>

#include "doctest.h"
#include "test_support.hpp"
#include "trisre/sre.hpp"

using namespace trisre;
using trisre::testing::throws_code;

namespace {

Distribution C(double c) { return Distribution::constant(c); }

TriangularSRE constants(double a11, double a12, double a22, double b1, double b2) {
  return IndependentEntries{C(a11), C(a12), C(a22), C(b1), C(b2)};
}

TriangularSRE lognormal_model() {
  return IndependentEntries{Distribution::lognormal(-1, 1), Distribution::normal(0.5, 1),
                            Distribution::signed_lognormal(-2, 1, 0.7), Distribution::normal(1, 1),
                            Distribution::uniform(-1, 2)};
}

// Brute-force M_n from its definition: term i carries i-1 first-diagonal
// factors from times 0..2-i and n-i second-diagonal factors from -i..1-n.
double Mn_brute(const std::vector<Innovation>& path) {
  const std::size_t n = path.size();
  double total = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    double term = path[i - 1].a12;
    for (std::size_t k = 0; k + 1 < i; ++k) term *= path[k].a11;
    for (std::size_t k = i; k < n; ++k) term *= path[k].a22;
    total += term;
  }
  return total;
}

}  // namespace

TEST_CASE("equal diagonal rejects an atom at zero") {
  CHECK(throws_code(
      [] {
        TriangularSRE m = EqualDiagonal{C(0.0), IndependentOffDiagonal{C(1)}, C(0), C(0)};
      },
      ErrorCode::InvalidSpec));
}

TEST_CASE("draw_innovation follows the coupling") {
  RngStream rng(1, 0);
  const TriangularSRE eq = EqualDiagonal{C(0.5), IndependentOffDiagonal{C(1)}, C(0), C(0)};
  const Innovation x = draw_innovation(eq, rng);
  CHECK(x.a11 == 0.5);
  CHECK(x.a22 == 0.5);
  CHECK(x.a12 == 1.0);

  const Innovation y = draw_innovation(constants(1, 2, 3, 4, 5), rng);
  CHECK(y.a11 == 1);
  CHECK(y.a12 == 2);
  CHECK(y.a22 == 3);
  CHECK(y.b1 == 4);
  CHECK(y.b2 == 5);
}

TEST_CASE("proportional off-diagonal ratio is the factor law") {
  const TriangularSRE m =
      EqualDiagonal{Distribution::lognormal(-1, 1),
                    ProportionalToDiagonal{Distribution::normal(0, 1)}, C(1), C(1)};
  RngStream rng(2, 0);
  std::vector<double> ratio(100000);
  for (auto& r : ratio) {
    const Innovation x = draw_innovation(m, rng);
    REQUIRE(x.a11 == x.a22);
    r = x.a12 / x.a11;
  }
  const double d = trisre::testing::ks_one_sample(ratio, trisre::testing::normal_cdf);
  CHECK(d < trisre::testing::ks_critical(1e-3, 1e5));
}

TEST_CASE("step arithmetic") {
  CHECK(step({0, 0}, {0.3, 0.2, 0.1, 7, 8}) == State{7, 8});
  CHECK(step({1, 1}, {0.5, 1, 0.5, 0, 0}) == State{1.5, 0.5});
}

TEST_CASE("forward iteration reaches the fixed point") {
  const TriangularSRE m = EqualDiagonal{C(0.5), IndependentOffDiagonal{C(0)}, C(1), C(1)};
  RngStream rng(3, 0);
  const State w = iterate_forward(m, {123.0, -45.0}, 10000, rng);
  CHECK(w[1] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(w[0] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("truncation depth, constant diagonals") {
  const auto m = constants(0.5, 0, 0.5, 1, 1);
  const TruncationPlan plan = truncation_depth(m, 1e-6);
  CHECK(plan.eps == doctest::Approx(1.0));
  CHECK(plan.q == doctest::Approx(0.5));
  // Bound 0.5^n (1 + 1)/(1 - 0.5) < 1e-6  <=>  n > log2(4e6).
  CHECK(plan.depth == static_cast<std::int64_t>(std::ceil(std::log2(4e6))));
  CHECK(plan.bound < 1e-6);

  CHECK(truncation_depth(constants(0, 0, 0, 1, 1), 1e-9).depth == 1);
  CHECK(truncation_depth(constants(0, 1, 0, 1, 1), 1e-9).depth == 2);

  const auto ln = truncation_depth(
      IndependentEntries{Distribution::lognormal(-1, 1), C(0), Distribution::lognormal(-1, 1),
                         C(1), C(1)},
      1e-8);
  CHECK(ln.eps == doctest::Approx(1.0));
  CHECK(ln.q == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
}

TEST_CASE("truncation bound includes the coupled series") {
  const auto m = constants(0.5, 2, 0.25, 1, 3);
  const TruncationPlan plan = truncation_depth(m, 1e-8);
  // Tail of w1_tilde = sum_j p12_j * 3 with p12_j = 2 sum_k 0.5^k 0.25^{j-1-k}
  double p11 = 1, p12 = 0, p22 = 1, tail = 0;
  for (int j = 0; j < 400; ++j) {
    if (j >= plan.depth) tail += p11 * 1 + p12 * 3 + p22 * 3;
    p12 = p11 * 2 + p12 * 0.25;
    p11 *= 0.5;
    p22 *= 0.25;
  }
  CHECK(tail <= plan.bound);
  CHECK(plan.bound < 1e-8);
}

TEST_CASE("not contractive") {
  CHECK(throws_code([] { truncation_depth(constants(1.0, 0, 0.5, 1, 1), 1e-6); },
                    ErrorCode::NotContractive));
  CHECK(throws_code(
      [] {
        truncation_depth(IndependentEntries{Distribution::lognormal(0.1, 1), C(0), C(0.5), C(1),
                                            C(1)},
                         1e-6);
      },
      ErrorCode::NotContractive));
}

TEST_CASE("stationary sampling examples") {
  RngStream rng(4, 0);
  const TriangularSRE no_coupling =
      IndependentEntries{Distribution::lognormal(-1, 1), C(0), Distribution::lognormal(-1, 1),
                         Distribution::normal(0, 1), Distribution::normal(0, 1)};
  for (int i = 0; i < 100; ++i) CHECK(sample_stationary(no_coupling, 1e-8, rng).w1_tilde == 0.0);

  const StationarySample one = sample_stationary(constants(0, 0, 0, 7, -2), 1e-8, rng);
  CHECK(one.truncation_depth == 1);
  CHECK(one.w1 == 7.0);
  CHECK(one.w2 == -2.0);
  // A nonzero A12 reaches one step further back: W1 = B1 + A12 B2'.
  const StationarySample two = sample_stationary(constants(0, 3, 0, 7, -2), 1e-8, rng);
  CHECK(two.w1 == 1.0);
  CHECK(two.w2 == -2.0);

  const TriangularSRE det = EqualDiagonal{C(0.5), IndependentOffDiagonal{C(1)}, C(0), C(1)};
  const StationarySample fp = sample_stationary(det, 1e-10, rng);
  CHECK(std::abs(fp.w2 - 2.0) < 1e-10);
  CHECK(std::abs(fp.w1 - 4.0) < 1e-10);
  CHECK(fp.w1 == fp.w1_hat + fp.w1_tilde);
  CHECK(fp.truncation_bound < 1e-10);
}

TEST_CASE("batch sampling is independent of the worker count") {
  const auto m = lognormal_model();
  const auto a = sample_stationary_batch(m, 1e-8, 10000, 9, 0, 1);
  const auto b = sample_stationary_batch(m, 1e-8, 10000, 9, 0, 3);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].w1 == b[i].w1);
    REQUIRE(a[i].w2 == b[i].w2);
  }
}

TEST_CASE("forward and backward laws agree") {
  const auto m = lognormal_model();
  const TruncationPlan plan = truncation_depth(m, 1e-8);
  const std::size_t n = 100000;
  const auto backward = sample_stationary_batch(m, 1e-8, n, 11, 0, 0);
  std::vector<double> fw1(n), fw2(n), bw1(n), bw2(n), sw1(n), sw2(n);
  RngStream fwd(12, 0), stepper(13, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const State w = iterate_forward(m, {0, 0}, 10 * plan.depth, fwd);
    fw1[i] = w[0];
    fw2[i] = w[1];
    bw1[i] = backward[i].w1;
    bw2[i] = backward[i].w2;
    const State s = step({backward[i].w1, backward[i].w2}, draw_innovation(m, stepper));
    sw1[i] = s[0];
    sw2[i] = s[1];
  }
  const double crit = trisre::testing::ks_critical(1e-3, n, n);
  CHECK(trisre::testing::ks_two_sample(fw2, bw2) < crit);
  CHECK(trisre::testing::ks_two_sample(fw1, bw1) < crit);
  // W = A W + B in law; the stepped sample reuses the backward draws, so
  // compare against the forward sample instead.
  CHECK(trisre::testing::ks_two_sample(sw2, fw2) < crit);
  CHECK(trisre::testing::ks_two_sample(sw1, fw1) < crit);
}

TEST_CASE("M_n examples") {
  RngStream rng(5, 0);
  const TriangularSRE m = lognormal_model();
  RngStream a(6, 0), b(6, 0);
  CHECK(sample_Mn(m, 1, a) == draw_innovation(m, b).a12);
  CHECK(sample_Mn(constants(0.3, 0, 0.7, 1, 1), 25, rng) == 0.0);
  for (int n : {1, 2, 5, 17}) {
    CHECK(sample_Mn(constants(0.8, 1.5, 0.8, 0, 0), n, rng) ==
          doctest::Approx(n * 1.5 * std::pow(0.8, n - 1)).epsilon(1e-13));
  }
  CHECK(throws_code([&] { sample_Mn(m, 0, rng); }, ErrorCode::ArgumentOutOfRange));
}

TEST_CASE("M_n recursion matches brute force") {
  RngStream rng(7, 0);
  const TriangularSRE m = lognormal_model();
  for (int n = 1; n <= 50; ++n) {
    std::vector<Innovation> path(n);
    for (auto& x : path) x = draw_innovation(m, rng);
    const double brute = Mn_brute(path);
    CHECK(std::abs(Mn_on_path(path) - brute) <= 1e-12 * std::max(1.0, std::abs(brute)));
  }
}

TEST_CASE("tilted model reweights one diagonal") {
  const auto m = lognormal_model();
  const auto t1 = m.tilted(Diagonal::First, 2.0);
  CHECK(t1.a11_law() == Distribution::lognormal(1, 1));
  CHECK(t1.a22_law() == m.a22_law());
  const auto t2 = m.tilted(Diagonal::Second, 1.0);
  CHECK(t2.a22_law() == Distribution::signed_lognormal(-1, 1, 0.7));
  const TriangularSRE eq = EqualDiagonal{Distribution::lognormal(-1, 1),
                                         ProportionalToDiagonal{Distribution::normal(0, 1)}, C(1),
                                         C(1)};
  CHECK(eq.tilted(Diagonal::Second, 2.0).a11_law() == Distribution::lognormal(1, 1));
  CHECK(eq.a12_abs_moment(2.0) == doctest::Approx(1.0));
}
