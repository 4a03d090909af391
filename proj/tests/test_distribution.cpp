#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "trisre/distribution.hpp"
#include "trisre/error.hpp"
#include "trisre/estimate.hpp"

using namespace trisre;

namespace {

bool throws_code(auto&& fn, ErrorCode code) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

std::vector<Distribution> menu() {
  return {
      Distribution::constant(-2.0),
      Distribution::normal(0.3, 1.2),
      Distribution::lognormal(-1.0, 1.0),
      Distribution::signed_lognormal(-0.5, 0.7, 0.3),
      Distribution::two_sided_pareto(3.0, 1.5, 0.6),
      Distribution::uniform(-1.0, 2.0),
      Distribution::scaled(Distribution::lognormal(0.2, 0.5), -1.5),
  };
}

}  // namespace

TEST_CASE("parameter validation") {
  CHECK(throws_code([] { Distribution::normal(0.0, 0.0); }, ErrorCode::InvalidSpec));
  CHECK(throws_code([] { Distribution::lognormal(0.0, -1.0); }, ErrorCode::InvalidSpec));
  CHECK(throws_code([] { Distribution::signed_lognormal(0, 1, 1.5); }, ErrorCode::InvalidSpec));
  CHECK(throws_code([] { Distribution::two_sided_pareto(0.0, 1, 0.5); }, ErrorCode::InvalidSpec));
  CHECK(throws_code([] { Distribution::uniform(1.0, 1.0); }, ErrorCode::InvalidSpec));
}

TEST_CASE("sample of degenerate laws") {
  RngStream rng(1, 0);
  CHECK(sample(Distribution::constant(3.0), rng) == 3.0);
  CHECK(sample(Distribution::scaled(Distribution::constant(2.0), -1.5), rng) == -3.0);
}

TEST_CASE("lognormal sample mean") {
  RngStream rng(2024, 0);
  RunningStats s;
  for (int i = 0; i < 1000000; ++i) s.add(sample(Distribution::lognormal(0.0, 1.0), rng));
  CHECK(std::abs(s.mean() - std::exp(0.5)) < 3.0 * s.standard_error());
}

TEST_CASE("abs_moment examples") {
  CHECK(abs_moment(Distribution::lognormal(-1, 1), 2.0) == doctest::Approx(1.0).epsilon(1e-14));
  for (const auto& d : menu()) CHECK(abs_moment(d, 0.0) == 1.0);
  CHECK(abs_moment(Distribution::normal(0, 1), 2.0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(throws_code([] { abs_moment(Distribution::two_sided_pareto(2.0, 1, 0.5), 2.0); },
                    ErrorCode::MomentDiverges));
}

TEST_CASE("lognormal closed form matches normal quadrature") {
  // E|exp(Z)|^beta computed through a Normal law: E e^{beta Z} = E|Y|^? is not
  // directly expressible, so compare the Normal quadrature against the
  // closed-form folded-normal moments instead.
  for (double beta : {0.5, 1.0, 1.7, 2.0, 3.0, 4.5}) {
    const double closed = std::pow(2.0, beta / 2) * std::tgamma((beta + 1) / 2) / std::sqrt(std::numbers::pi);
    CHECK(abs_moment(Distribution::normal(0.0, 1.0), beta) ==
          doctest::Approx(closed).epsilon(1e-10));
    CHECK(abs_normal_moment(beta) == doctest::Approx(closed).epsilon(1e-12));
  }
  // Non-central: E|N(1,1)|^2 = 2, E|N(1, 2)|^4 = mu^4 + 6 mu^2 s^2 + 3 s^4.
  CHECK(abs_moment(Distribution::normal(1.0, 1.0), 2.0) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(abs_moment(Distribution::normal(1.0, 2.0), 4.0) ==
        doctest::Approx(1 + 24 + 48).epsilon(1e-10));
  CHECK(abs_moment(Distribution::normal(-3.0, 0.5), 1.0) ==
        doctest::Approx(0.5 * std::sqrt(2 / std::numbers::pi) * std::exp(-18.0) +
                        3.0 * std::erf(3.0 / 0.5 / std::sqrt(2.0)))
            .epsilon(1e-10));
}

TEST_CASE("signed_moment examples") {
  const auto ln = Distribution::lognormal(-1, 1);
  CHECK(signed_moment(ln, 2, Sign::Plus) == doctest::Approx(1.0));
  CHECK(signed_moment(ln, 2, Sign::Minus) == 0.0);
  CHECK(signed_moment(Distribution::signed_lognormal(-1, 1, 0.5), 2, Sign::Plus) ==
        doctest::Approx(0.5));
  CHECK(signed_moment(Distribution::constant(-2), 1, Sign::Minus) == 2.0);
  for (const auto& d : menu()) {
    for (double beta : {0.0, 0.5, 1.0, 2.5}) {
      CHECK(signed_moment(d, beta, Sign::Plus) + signed_moment(d, beta, Sign::Minus) ==
            doctest::Approx(abs_moment(d, beta)).epsilon(1e-9));
    }
  }
}

TEST_CASE("log_abs_moment examples") {
  CHECK(log_abs_moment(Distribution::lognormal(-1, 1)) == doctest::Approx(-1.0));
  CHECK(log_abs_moment(Distribution::constant(std::numbers::e)) == doctest::Approx(1.0));
  CHECK(log_abs_moment(Distribution::signed_lognormal(-2, 1, 0.3)) == doctest::Approx(-2.0));
  CHECK(throws_code([] { log_abs_moment(Distribution::constant(0.0)); },
                    ErrorCode::LogMomentUndefined));
  // E log|N(0,1)| = -(gamma + log 2)/2
  CHECK(log_abs_moment(Distribution::normal(0, 1)) ==
        doctest::Approx(-(std::numbers::egamma + std::log(2.0)) / 2).epsilon(1e-10));
  // E log U for U ~ Uniform(0,1) is -1
  CHECK(log_abs_moment(Distribution::uniform(0, 1)) == doctest::Approx(-1.0));
}

TEST_CASE("log moments agree with Monte Carlo") {
  RngStream rng(77, 0);
  for (const auto& d : menu()) {
    RunningStats s;
    for (int i = 0; i < 200000; ++i) s.add(std::log(std::abs(sample(d, rng))));
    CHECK(std::abs(s.mean() - log_abs_moment(d)) < 4.0 * s.standard_error() + 1e-12);
  }
}

TEST_CASE("tilted examples") {
  CHECK(tilted(Distribution::lognormal(-1, 1), 2.0) == Distribution::lognormal(1, 1));
  CHECK(tilted(Distribution::constant(2.0), 3.3) == Distribution::constant(2.0));
  CHECK(tilted(Distribution::signed_lognormal(-1, 1, 0.4), 2.0) ==
        Distribution::signed_lognormal(1, 1, 0.4));
  CHECK(throws_code([] { tilted(Distribution::normal(0, 1), 1.0); }, ErrorCode::TiltUnsupported));
  CHECK(throws_code([] { tilted(Distribution::uniform(0, 1), 1.0); }, ErrorCode::TiltUnsupported));
  CHECK(throws_code([] { tilted(Distribution::two_sided_pareto(2, 1, 0.5), 1.0); },
                    ErrorCode::TiltUnsupported));
  CHECK(is_tiltable(Distribution::scaled(Distribution::lognormal(0, 1), -2.0)));
  CHECK_FALSE(is_tiltable(Distribution::normal(0, 1)));
}

TEST_CASE("abs_normal_moment examples") {
  CHECK(abs_normal_moment(2.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(abs_normal_moment(0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(abs_normal_moment(1.0) == doctest::Approx(0.7978845608).epsilon(1e-10));
}

TEST_CASE("moment derivatives") {
  const auto ln = Distribution::lognormal(-1, 1);
  CHECK(abs_moment_derivative(ln, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(abs_moment_derivative(Distribution::lognormal(-2, 1), 4.0) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(abs_moment_derivative_fd(ln, 2.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(log_abs_moment_curvature(ln, 1.3) == doctest::Approx(1.0).epsilon(1e-12));
  // Constant: c^beta log c
  CHECK(abs_moment_derivative(Distribution::constant(0.5), 2.0) ==
        doctest::Approx(0.25 * std::log(0.5)));
  // Pareto |X|^beta: alpha s^beta/(alpha - beta); derivative closed form.
  const double a = 3.0, s = 1.5, b = 1.0;
  const double m = a * std::pow(s, b) / (a - b);
  CHECK(abs_moment_derivative(Distribution::two_sided_pareto(a, s, 0.4), b) ==
        doctest::Approx(m * (std::log(s) + 1.0 / (a - b))).epsilon(1e-7));
}

TEST_CASE("moment ranges and mass predicates") {
  CHECK(moment_upper_limit(Distribution::two_sided_pareto(1.5, 1, 0.5)) == 1.5);
  CHECK(std::isinf(moment_upper_limit(Distribution::lognormal(0, 1))));
  CHECK(moment_lower_limit(Distribution::normal(0, 1)) == -1.0);
  CHECK(has_negative_mass(Distribution::signed_lognormal(0, 1, 0.9)));
  CHECK_FALSE(has_negative_mass(Distribution::signed_lognormal(0, 1, 1.0)));
  CHECK(has_atom_at_zero(Distribution::constant(0.0)));
  CHECK_FALSE(has_atom_at_zero(Distribution::uniform(-1, 1)));
  CHECK(is_degenerate(Distribution::scaled(Distribution::constant(1.0), 2.0)));
  CHECK_FALSE(is_non_arithmetic(Distribution::constant(0.5)));
  CHECK(is_non_arithmetic(Distribution::lognormal(0, 1)));
  CHECK(throws_code([] { abs_moment(Distribution::constant(0.0), -0.5); },
                    ErrorCode::MomentDiverges));
  CHECK(abs_moment(Distribution::lognormal(1, 1), -2.0) == doctest::Approx(std::exp(-2.0 + 2.0)));
}

TEST_CASE("regular variation descriptor") {
  const auto rv = regular_variation(Distribution::two_sided_pareto(1.5, 2.0, 0.7));
  REQUIRE(rv.has_value());
  CHECK(rv->alpha == 1.5);
  CHECK(rv->p == doctest::Approx(0.7));
  CHECK(rv->q == doctest::Approx(0.3));
  CHECK(rv->ell == doctest::Approx(std::pow(2.0, 1.5)));
  const auto flipped = regular_variation(
      Distribution::scaled(Distribution::two_sided_pareto(1.5, 2.0, 0.7), -1.0));
  REQUIRE(flipped.has_value());
  CHECK(flipped->p == doctest::Approx(0.3));
  CHECK_FALSE(regular_variation(Distribution::lognormal(0, 1)).has_value());
}

TEST_CASE("Monte Carlo moments within 4 SE") {
  RngStream rng(31337, 0);
  for (const auto& d : menu()) {
    const double upper = moment_upper_limit(d);
    for (double beta : {0.5, 1.0, 1.4}) {
      if (2 * beta >= upper) continue;
      RunningStats s;
      for (int i = 0; i < 1000000; ++i) s.add(std::pow(std::abs(sample(d, rng)), beta));
      CHECK(std::abs(s.mean() - abs_moment(d, beta)) <= 4.0 * s.standard_error() + 1e-12);
    }
  }
}
