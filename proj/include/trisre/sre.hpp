#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "trisre/distribution.hpp"
#include "trisre/rng.hpp"

namespace trisre {

// W_t = A_t W_{t-1} + B_t with A_t = [[A11, A12], [0, A22]] and i.i.d.
// (A_t, B_t).  The coupling fixes the joint law of one time step.

/// All five entries independent.
struct IndependentEntries {
  Distribution a11, a12, a22, b1, b2;
};

/// A12 = xi * A11 with xi independent of A11.
struct ProportionalToDiagonal {
  Distribution factor;
};

/// A12 independent of the diagonal.
struct IndependentOffDiagonal {
  Distribution a12;
};

/// A11 = A22 = d almost surely.
struct EqualDiagonal {
  Distribution d;
  std::variant<ProportionalToDiagonal, IndependentOffDiagonal> a12_mode;
  Distribution b1, b2;
};

enum class Diagonal { First, Second };

class TriangularSRE {
 public:
  using Coupling = std::variant<IndependentEntries, EqualDiagonal>;

  /// Throws InvalidSpec if an equal diagonal has an atom at zero.
  TriangularSRE(Coupling coupling);  // NOLINT(google-explicit-constructor)
  TriangularSRE(IndependentEntries c) : TriangularSRE(Coupling(std::move(c))) {}  // NOLINT
  TriangularSRE(EqualDiagonal c) : TriangularSRE(Coupling(std::move(c))) {}       // NOLINT

  const Coupling& coupling() const noexcept { return coupling_; }
  bool equal_diagonal() const noexcept {
    return std::holds_alternative<EqualDiagonal>(coupling_);
  }

  const Distribution& a11_law() const noexcept;
  const Distribution& a22_law() const noexcept;
  const Distribution& diagonal_law(Diagonal d) const noexcept {
    return d == Diagonal::First ? a11_law() : a22_law();
  }
  const Distribution& b1_law() const noexcept;
  const Distribution& b2_law() const noexcept;

  /// E|A12|^beta under the coupling.
  double a12_abs_moment(double beta) const;
  /// P(A12 = 0) = 1.
  bool a12_vanishes() const noexcept;
  /// P(A12 = 0) > 0.
  bool a12_has_zero_atom() const noexcept;

  /// The model whose one-step law is the original reweighted by
  /// |A_dd|^alpha / E|A_dd|^alpha.  Exact because the remaining entries are
  /// either independent of the chosen diagonal or a fixed function of it.
  /// Throws TiltUnsupported when the diagonal family is not closed under tilting.
  TriangularSRE tilted(Diagonal d, double alpha) const;

  /// Univariate model X_t = A X_{t-1} + B embedded as coordinate 1
  /// (A12 = A22 = B2 = 0).
  static TriangularSRE univariate(Distribution a, Distribution b);

 private:
  Coupling coupling_;
};

struct Innovation {
  double a11 = 0.0, a12 = 0.0, a22 = 0.0, b1 = 0.0, b2 = 0.0;
};

using State = std::array<double, 2>;

/// One joint draw of (A_t, B_t).
Innovation draw_innovation(const TriangularSRE& model, RngStream& rng);

/// (a11 w1 + a12 w2 + b1, a22 w2 + b2)
constexpr State step(const State& w, const Innovation& x) noexcept {
  return {x.a11 * w[0] + x.a12 * w[1] + x.b1, x.a22 * w[1] + x.b2};
}

/// Depth of the truncated backward series.  eps is the moment order used in
/// the bound, q = max_i E|A_ii|^eps, and bound is the eps-th root of the
/// bound on E|remainder|^eps, which is < tol.
struct TruncationPlan {
  std::int64_t depth = 1;
  double eps = 1.0;
  double q = 0.0;
  double bound = 0.0;
};

/// Upper bound on E|R_n|^eps for the remainder R_n of all three backward series
/// (W2, hat W1, tilde W1) after n terms, each with eps <= 1:
///   q^n (E|B1|^eps + E|B2|^eps)/(1-q)
///     + E|A12|^eps E|B2|^eps q^{n-1} (n(1-q) + q)/(1-q)^2.
double truncation_remainder_bound(const TriangularSRE& model, double eps, std::int64_t n);

/// Scans eps over (0, 1] for the minimiser of q, then takes the smallest n
/// whose remainder bound is below tol^eps.  Throws NotContractive when no eps
/// yields q < 1, or when the depth would exceed max_depth.
TruncationPlan truncation_depth(const TriangularSRE& model, double tol,
                                std::int64_t max_depth = 10'000'000);

struct StationarySample {
  double w1 = 0.0, w2 = 0.0;
  double w1_hat = 0.0, w1_tilde = 0.0;
  std::int64_t truncation_depth = 0;
  double truncation_bound = 0.0;
};

/// One approximately stationary draw from the backward series, truncated at
/// plan.depth.  W2, hat W1 and tilde W1 share one innovation path and
/// w1 = w1_hat + w1_tilde exactly.
StationarySample sample_stationary(const TriangularSRE& model, const TruncationPlan& plan,
                                   RngStream& rng);
StationarySample sample_stationary(const TriangularSRE& model, double tol, RngStream& rng);

/// count stationary draws using the chunked stream layout (chunk c uses
/// stream_base + c); identical output for every worker count.
std::vector<StationarySample> sample_stationary_batch(const TriangularSRE& model, double tol,
                                                      std::size_t count, std::uint64_t seed,
                                                      std::uint64_t stream_base = 0,
                                                      unsigned workers = 0);

/// Forward iteration from `start` for `steps` steps.
State iterate_forward(const TriangularSRE& model, State start, std::int64_t steps,
                      RngStream& rng);

/// One draw of M_n = sum_{i=1}^n Pi^(1)_{0,2-i} A12_{1-i} Pi^(2)_{-i,1-n} over a
/// fresh path of n innovations (innovation k is time -k).
double sample_Mn(const TriangularSRE& model, std::int64_t n, RngStream& rng);

/// M_n evaluated on a given path (path[k] is the innovation at time -k) by the
/// forward recursion S <- S a22_k + P a12_k, P <- P a11_k.
double Mn_on_path(std::span<const Innovation> path) noexcept;

}  // namespace trisre
