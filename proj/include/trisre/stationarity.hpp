#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trisre/distribution.hpp"
#include "trisre/estimate.hpp"
#include "trisre/sre.hpp"

namespace trisre {

/// The unique alpha > 0 with E|A|^alpha = 1, found by bracketing and TOMS 748
/// on the convex map beta -> log E|A|^beta (absolute tolerance 1e-12).
/// Throws NotContractive if E log|A| >= 0 and NoRoot if the moments stay
/// below 1 on the searchable range.
double solve_tail_index(const Distribution& a);

/// E|A|^alpha log|A|, the derivative of beta -> E|A|^beta at alpha.
double rho(const Distribution& a, double alpha);

/// sup over [lo, hi] of d^2/dbeta^2 log E|A|^beta, sampled on `grid` points.
double log_moment_curvature_sup(const Distribution& a, double lo, double hi, int grid = 41);

/// Mean and standard error of n^-1 log ||A_n ... A_1|| over `reps`
/// independent paths.  The running product is renormalised by its largest
/// entry every step.
EstimateWithError lyapunov_estimate(const TriangularSRE& model, std::int64_t n, std::int64_t reps,
                                    std::uint64_t seed, std::uint64_t stream_base = 0,
                                    unsigned workers = 0);

enum class TailRegime { KestenGoldie, Grey };
enum class DiagonalRelation { EqualAS, Distinct };
enum class CheckStatus { Pass, Fail, Unverifiable };

enum class TheoremCase {
  T31_a1_lt_a2_KG,
  T31_a1_lt_a2_Grey,
  T31_a1_gt_a2_KG,
  T31_a1_gt_a2_Grey,
  T33_mu_zero,
  T33_mu_nonzero,
  T34,
  Unsupported,
};

std::string_view to_string(TailRegime r) noexcept;
std::string_view to_string(DiagonalRelation r) noexcept;
std::string_view to_string(CheckStatus s) noexcept;
std::string_view to_string(TheoremCase c) noexcept;
TheoremCase theorem_case_from_string(std::string_view s);

struct SignCase {
  bool a11_takes_negative = false;  ///< P(A11 < 0) > 0
  bool a22_takes_negative = false;  ///< P(A22 < 0) > 0
  bool a22_nonzero = true;          ///< P(A22 = 0) = 0
};

struct AssumptionCheck {
  std::string id;  ///< e.g. "A(alpha1)", "B(alpha2)", "C2", "A1" ... "A6", "Prop2.1"
  CheckStatus status = CheckStatus::Pass;
  std::string detail;
};

struct RegimeReport {
  std::optional<double> alpha1, alpha2;
  std::optional<double> rho1, rho2;
  std::array<std::optional<TailRegime>, 2> regime;
  DiagonalRelation diagonal_relation = DiagonalRelation::Distinct;
  SignCase sign_case;
  std::vector<AssumptionCheck> checks;
  TheoremCase theorem_case = TheoremCase::Unsupported;
  /// mu of the equal-diagonal case, when computed.
  std::optional<EstimateWithError> mu;
  std::string reason;  ///< why the case was chosen, or why it is unsupported

  const AssumptionCheck* find(std::string_view id) const noexcept;
};

struct ClassifyOptions {
  std::uint64_t seed = 0;
  std::uint64_t mc_samples = 1'000'000;  ///< for Monte Carlo fallbacks
  unsigned workers = 0;
};

/// Fills every RegimeReport field.  Moment, sign and atom checks are read
/// from the distribution metadata; lattice conditions are decided by family.
/// Never throws for a valid model: Unsupported is a value.
RegimeReport classify(const TriangularSRE& model, const ClassifyOptions& options = {});

}  // namespace trisre
