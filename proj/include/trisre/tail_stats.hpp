#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "trisre/distribution.hpp"
#include "trisre/estimate.hpp"
#include "trisre/measure_change.hpp"
#include "trisre/rng.hpp"

namespace trisre {

enum class TailSide { Positive, Negative, Absolute };

/// Sample values viewed from one tail: x, -x or |x|, sorted descending.
class EmpiricalTail {
 public:
  /// Throws ArgumentOutOfRange for fewer than two samples.
  EmpiricalTail(std::span<const double> samples, TailSide side = TailSide::Absolute);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t count() const noexcept { return values_.size(); }
  TailSide side() const noexcept { return side_; }

  /// The value exceeded by a fraction `upper` of the sample.
  double upper_quantile(double upper) const;

 private:
  std::vector<double> values_;
  TailSide side_;
};

/// Fraction of samples strictly greater than x.
double ccdf(const EmpiricalTail& tail, double x) noexcept;

/// Hill estimate k / sum_{i<=k} log(X_(i)/X_(k+1)) with se alpha/sqrt(k).
/// Requires 2 <= k < count (ArgumentOutOfRange) and X_(k+1) > 0
/// (NonPositiveOrderStat); a zero log-spacing sum throws DegenerateTail.
EstimateWithError hill(const EmpiricalTail& tail, std::size_t k);

/// floor(n^(2/3)), clamped to [2, n-1].
std::size_t default_hill_k(std::size_t n) noexcept;

std::vector<EstimateWithError> hill_path(const EmpiricalTail& tail, std::span<const std::size_t> ks);

/// `points` geometric points from lo to hi inclusive.
std::vector<double> geometric_grid(double lo, double hi, std::size_t points = 20);

/// Geometric grid between the upper quantiles 0.10 and 1e-4 of the tail.
/// Throws InsufficientSupport if the lower end is not positive.
std::vector<double> percentile_grid(const EmpiricalTail& tail, double lo_upper = 0.10,
                                    double hi_upper = 1e-4, std::size_t points = 20);

struct LogFactorFit {
  double beta = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

/// Least-squares fit of log(x^alpha ccdf(x)) = intercept + beta log log x
/// over the grid points with x > 1 and ccdf(x) > min_ccdf.  Throws
/// InsufficientSupport with fewer than five such points.
LogFactorFit log_factor_regression(const std::function<double(double)>& ccdf_fn, double alpha,
                                   std::span<const double> grid, double min_ccdf = 0.0);

/// The empirical version; min_ccdf is 50/count.
LogFactorFit log_factor_regression(const EmpiricalTail& tail, double alpha,
                                   std::span<const double> grid);

/// Mean of x^alpha (log x)^-beta ccdf(x) over the supported grid points
/// (ccdf > 50/count, and x > 1 when beta != 0).
double scaled_ccdf_average(const EmpiricalTail& tail, double alpha, std::span<const double> grid,
                           double beta = 0.0);

struct GoldieConstants {
  EstimateWithError c_plus, c_minus;
};

/// One draw of (A, B, X) with X independent of (A, B) and X =d AX + B.
struct GoldieTriple {
  double a = 0.0, b = 0.0, x = 0.0;
};
using TripleSampler = std::function<GoldieTriple(RngStream&)>;

/// (alpha rho)^-1 E[((AX+B)^+-)^alpha - ((AX)^+-)^alpha] when A >= 0, and
/// (2 alpha rho)^-1 E[|AX+B|^alpha - |AX|^alpha] for both signs otherwise.
GoldieConstants goldie_constant_direct(const TripleSampler& sampler, bool a_signed, double alpha,
                                       double rho, std::uint64_t N, std::uint64_t seed,
                                       std::uint64_t stream_base = 0, unsigned workers = 0);

/// A univariate coefficient pair: A ~ a and B = b + b_on_a * A with b
/// independent of A.
struct UnivariatePair {
  Distribution a;
  Distribution b;
  double b_on_a = 0.0;

  double draw_b(double a_value, RngStream& rng) const { return sample(b, rng) + b_on_a * a_value; }
};

/// Depth at which the backward series for X = AX + B is cut, tolerance tol.
std::int64_t perpetuity_depth(const UnivariatePair& pair, double tol = 1e-10);

/// Stationary X by the backward series truncated at `depth`.
double sample_perpetuity(const UnivariatePair& pair, std::int64_t depth, RngStream& rng);

GoldieConstants goldie_constant_direct(const UnivariatePair& pair, double alpha, double rho,
                                       std::uint64_t N, std::uint64_t seed,
                                       std::uint64_t stream_base = 0, unsigned workers = 0);

struct GoldiePerpetuity {
  GoldieConstants at_n, at_half;
  std::int64_t n = 0;
};

/// (alpha rho n)^-1 E(X_n^+-)^alpha with X_n = sum_{i<=n} A_1 ... A_{i-1} B_i,
/// through mixture_moments.  Requires a tiltable A.
GoldiePerpetuity goldie_constant_perpetuity(const UnivariatePair& pair, double alpha, double rho,
                                            std::int64_t n, std::uint64_t N, std::uint64_t seed,
                                            std::uint64_t stream_base = 0, unsigned workers = 0);

/// Grey-regime constants for X = AX + B with P(+-B > x) ~ p/q x^-alpha.
/// Throws ArgumentOutOfRange unless m_abs < 1 and p + q = 1.
std::pair<double, double> grey_constants(double p, double q, double m_abs, double m_plus,
                                         double m_minus);

}  // namespace trisre
