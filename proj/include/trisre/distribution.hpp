#pragma once

#include <memory>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>

#include "trisre/rng.hpp"

namespace trisre {

class Distribution;

namespace law {

struct Constant {
  double value = 0.0;
};
struct Normal {
  double mean = 0.0;
  double sd = 1.0;
};
/// exp(N(mu, sigma^2))
struct Lognormal {
  double mu = 0.0;
  double sigma = 1.0;
};
/// eps * exp(N(mu, sigma^2)), eps = +1 with probability p_pos, else -1.
struct SignedLognormal {
  double mu = 0.0;
  double sigma = 1.0;
  double p_pos = 0.5;
};
/// P(X > x) = p_pos (x/scale)^-alpha and P(X < -x) = (1-p_pos)(x/scale)^-alpha
/// for x >= scale.
struct TwoSidedPareto {
  double alpha = 1.0;
  double scale = 1.0;
  double p_pos = 0.5;
};
struct Uniform {
  double a = 0.0;
  double b = 1.0;
};
/// factor * inner
struct Scaled {
  std::shared_ptr<const Distribution> inner;
  double factor = 1.0;
};

}  // namespace law

/// A scalar law from a closed menu of families.  Every family has exact or
/// quadrature moments; the lognormal families are also closed under the
/// |x|^alpha exponential tilt.  Immutable value type; construction validates
/// the parameters and throws Error(InvalidSpec).
class Distribution {
 public:
  using Variant = std::variant<law::Constant, law::Normal, law::Lognormal, law::SignedLognormal,
                               law::TwoSidedPareto, law::Uniform, law::Scaled>;

  Distribution() : Distribution(law::Constant{0.0}) {}
  Distribution(Variant v);  // NOLINT(google-explicit-constructor)
  template <typename Law>
    requires std::is_constructible_v<Variant, Law> && (!std::is_same_v<std::decay_t<Law>, Variant>)
  Distribution(Law l) : Distribution(Variant(std::move(l))) {}  // NOLINT(google-explicit-constructor)

  static Distribution constant(double c) { return law::Constant{c}; }
  static Distribution normal(double mean, double sd) { return law::Normal{mean, sd}; }
  static Distribution lognormal(double mu, double sigma) { return law::Lognormal{mu, sigma}; }
  static Distribution signed_lognormal(double mu, double sigma, double p_pos) {
    return law::SignedLognormal{mu, sigma, p_pos};
  }
  static Distribution two_sided_pareto(double alpha, double scale, double p_pos) {
    return law::TwoSidedPareto{alpha, scale, p_pos};
  }
  static Distribution uniform(double a, double b) { return law::Uniform{a, b}; }
  static Distribution scaled(Distribution inner, double factor);

  const Variant& variant() const noexcept { return v_; }

  template <typename T>
  const T* as() const noexcept {
    return std::get_if<T>(&v_);
  }

  friend bool operator==(const Distribution& a, const Distribution& b);

 private:
  Variant v_;
};

enum class Sign { Plus, Minus };

/// One draw; advances rng deterministically.
double sample(const Distribution& spec, RngStream& rng);

/// E|X|^beta.  Closed form for every family except Normal (quadrature).
/// beta may be negative where the moment is finite.  abs_moment(spec, 0) == 1.
/// Throws MomentDiverges outside the finite-moment range.
double abs_moment(const Distribution& spec, double beta);

/// E[|X|^beta 1{X > 0}] (Plus) or E[|X|^beta 1{X < 0}] (Minus).  An atom at
/// zero is attributed to Plus when beta == 0 so that the two parts always sum
/// to abs_moment.
double signed_moment(const Distribution& spec, double beta, Sign sign);

/// E log|X|.  Throws LogMomentUndefined for laws with an atom at 0.
double log_abs_moment(const Distribution& spec);

/// The law with density |x|^alpha / E|X|^alpha relative to spec.  Exact for
/// Constant(c != 0), Lognormal, SignedLognormal and Scaled of those; throws
/// TiltUnsupported otherwise.
Distribution tilted(const Distribution& spec, double alpha);

/// True iff tilted(spec, alpha) succeeds.
bool is_tiltable(const Distribution& spec) noexcept;

/// E|N|^alpha for standard normal N.
double abs_normal_moment(double alpha);

/// E X.  Throws MomentDiverges when the mean does not exist.
double mean(const Distribution& spec);

/// d/dbeta E|X|^beta.  Closed form for Constant and the lognormal families,
/// central finite difference (h = 1e-5) otherwise.
double abs_moment_derivative(const Distribution& spec, double beta);

/// Central finite difference (h = 1e-5) of E|X|^beta, whatever the family.
double abs_moment_derivative_fd(const Distribution& spec, double beta);

/// d^2/dbeta^2 log E|X|^beta.  sigma^2 for the lognormal families, finite
/// difference (h = 1e-4) otherwise.
double log_abs_moment_curvature(const Distribution& spec, double beta);

/// Supremum of the betas with E|X|^beta finite (+inf for light tails).
double moment_upper_limit(const Distribution& spec) noexcept;

/// Infimum of the betas with E|X|^beta finite (-inf when negative moments of
/// every order exist).
double moment_lower_limit(const Distribution& spec) noexcept;

bool has_negative_mass(const Distribution& spec) noexcept;  ///< P(X < 0) > 0
bool has_positive_mass(const Distribution& spec) noexcept;  ///< P(X > 0) > 0
bool has_atom_at_zero(const Distribution& spec) noexcept;   ///< P(X = 0) > 0
bool is_degenerate(const Distribution& spec) noexcept;      ///< point mass
/// log|X| restricted to X != 0 has a non-lattice law.  Decided by family:
/// only point masses are lattice in this menu.
bool is_non_arithmetic(const Distribution& spec) noexcept;

/// Regular-variation descriptor of a heavy-tailed law: P(+-X > x) ~
/// p/q * x^-alpha * ell with ell constant.  Present only for TwoSidedPareto
/// (possibly scaled).
struct RegularVariation {
  double alpha = 0.0;
  double p = 0.0;
  double q = 0.0;
  double ell = 1.0;
};
std::optional<RegularVariation> regular_variation(const Distribution& spec);

std::string describe(const Distribution& spec);

}  // namespace trisre
