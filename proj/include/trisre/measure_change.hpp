#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "trisre/error.hpp"
#include "trisre/estimate.hpp"
#include "trisre/parallel.hpp"
#include "trisre/sre.hpp"

namespace trisre {

// Expectations under P_alpha, the measure with density |Pi|^alpha relative to
// P along a path, where Pi is the product of one diagonal entry.

enum class TiltMode { ExactTilt, WeightedMC };

/// How paths are drawn under P_alpha for one diagonal.  In ExactTilt mode
/// `law` is the model with that diagonal replaced by its tilted law; in
/// WeightedMC mode `law` is the base model and every path carries the weight
/// prod |a_dd|^alpha.
struct TiltedPair {
  TriangularSRE base;
  TriangularSRE law;
  Diagonal diagonal = Diagonal::Second;
  double alpha = 0.0;
  TiltMode mode = TiltMode::ExactTilt;
  double moment = 1.0;  ///< E|A_dd|^alpha

  /// ExactTilt when the diagonal family is tiltable and `prefer_exact`, else
  /// WeightedMC.  Throws MomentDiverges if E|A_dd|^alpha is infinite or 0.
  static TiltedPair make(const TriangularSRE& model, Diagonal d, double alpha,
                         bool prefer_exact = true);
};

/// V = a11/a22, U = a12/a22 for one innovation.
struct VU {
  double v = 0.0, u = 0.0;
};
inline VU to_vu(const Innovation& x) noexcept { return {x.a11 / x.a22, x.a12 / x.a22}; }

using PathFunctional = std::function<double(std::span<const Innovation>)>;

/// E_alpha[f(path of length n)] from N paths.  ExactTilt scales by
/// moment^n; WeightedMC uses the raw (unnormalised) weight and throws
/// WeightDegenerate when the effective sample size is below 100.
EstimateWithError expect_tilted(const TiltedPair& pair, std::int64_t n, std::uint64_t N,
                                const PathFunctional& f, std::uint64_t seed,
                                std::uint64_t stream_base = 0, unsigned workers = 0);

/// K functionals on the same paths.
template <std::size_t K>
std::array<EstimateWithError, K> expect_tilted_multi(
    const TiltedPair& pair, std::int64_t n, std::uint64_t N,
    const std::function<std::array<double, K>(std::span<const Innovation>)>& f,
    std::uint64_t seed, std::uint64_t stream_base = 0, unsigned workers = 0);

/// E(M^+)^alpha, E(M^-)^alpha and E|M|^alpha style triple.
struct SignedMoments {
  EstimateWithError abs, plus, minus;
};

struct WEstimate {
  SignedMoments at_n;       ///< w_n, w_{n,+}, w_{n,-}
  SignedMoments at_half;    ///< the same at n/2
  std::int64_t n = 0;
};

/// w_n = E|M_n|^alpha2 and w_{n,+-} through M_n = Pi^(2) X_n with X_n the
/// (V, U) partial sum, under the alpha2-tilt of A22.  Requires
/// E|A11|^alpha2 < 1 (throws ArgumentOutOfRange otherwise).
WEstimate estimate_w(const TriangularSRE& model, double alpha2, std::int64_t n, std::uint64_t N,
                     std::uint64_t seed, std::uint64_t stream_base = 0, unsigned workers = 0);

struct MuSigma {
  EstimateWithError mu, sigma2;
  bool closed_form = false;
};

/// mu = E[A11^-1 A12 |A11|^alpha] and sigma^2 = E[(A12/A11)^2 |A11|^alpha]
/// for an equal-diagonal model.  Closed form for both off-diagonal modes;
/// throws RequiresEqualDiagonal otherwise.
MuSigma estimate_mu_sigma(const TriangularSRE& model, double alpha);

/// The same two constants by weighted Monte Carlo on N single steps.
MuSigma estimate_mu_sigma_mc(const TriangularSRE& model, double alpha, std::uint64_t N,
                             std::uint64_t seed, std::uint64_t stream_base = 0,
                             unsigned workers = 0);

/// sigma^alpha rho1^(-alpha/2) E|N|^alpha.  Throws RequiresMuZero when
/// |mu| > 0 (closed form) or |mu| > 3 se (Monte Carlo).
double clt_constant(const TriangularSRE& model, double alpha);
double clt_constant(double sigma2, double rho1, double alpha);

/// How one innovation is drawn in the mixture sampler below.
enum class StepLaw { TiltFirst, Base, TiltSecond };
using StepSampler = std::function<Innovation(StepLaw, RngStream&)>;

/// E|M_n|^alpha, E(M_n^+)^alpha, E(M_n^-)^alpha under P by importance
/// sampling from the mixture (1/n) sum_J Q_J, where Q_J draws innovations
/// before J-1 with A11 tilted, innovation J-1 from the base law and those
/// after J-1 with A22 tilted.  log_m1, log_m2 are log E|A11|^alpha and
/// log E|A22|^alpha.  The likelihood ratio is evaluated in log space and M_n
/// through a rescaled recursion, so long horizons neither overflow nor lose
/// the rare paths that dominate these moments.
SignedMoments mixture_moments(const StepSampler& sampler, double alpha, double log_m1,
                              double log_m2, std::int64_t n, std::uint64_t N, std::uint64_t seed,
                              std::uint64_t stream_base = 0, unsigned workers = 0);

struct CREstimate {
  SignedMoments at_n;     ///< (alpha n)^-1 E|M_n|^alpha and the signed parts
  SignedMoments at_half;  ///< the same at n/2
  std::int64_t n = 0;
};

/// c_R, c_{R,+}, c_{R,-} at n and n/2.  Requires distinct diagonals with
/// E|A11|^alpha = E|A22|^alpha = 1 (NotT34Regime) and tiltable diagonals
/// (TiltUnsupported).
CREstimate estimate_cR(const TriangularSRE& model, double alpha, std::int64_t n, std::uint64_t N,
                       std::uint64_t seed, std::uint64_t stream_base = 0, unsigned workers = 0);

/// X_n = sum_{i=1}^n V_0 ... V_{2-i} U_{1-i} on one fresh tilted path.
/// Throws RequiresExactTilt in WeightedMC mode.
double perpetuity_sample(const TiltedPair& pair, std::int64_t n, RngStream& rng);

/// rho_V = E_alpha |V|^alpha log|V| (one-step tilted expectation).
EstimateWithError rho_V(const TriangularSRE& model, double alpha, std::uint64_t N,
                        std::uint64_t seed, std::uint64_t stream_base = 0, unsigned workers = 0);

struct TailCrossCheck {
  EstimateWithError rho_v;
  double tail_constant = 0.0;   ///< grid average of x^alpha P_alpha(|X_0| > x)
  double c_R_from_tail = 0.0;   ///< rho_V * tail_constant
  std::vector<double> grid;
  std::vector<double> scaled_ccdf;
};

/// c_R as rho_V lim x^alpha P_alpha(|X_0| > x), from `samples` draws of the
/// tilted perpetuity at depth `depth`, averaged over a geometric grid between
/// the 99th and 99.99th percentiles of |X_0|.
TailCrossCheck cR_tail_cross_check(const TriangularSRE& model, double alpha, std::int64_t depth,
                                   std::uint64_t samples, std::uint64_t seed,
                                   std::uint64_t stream_base = 0, unsigned workers = 0);

// ---------------------------------------------------------------------------

template <std::size_t K>
std::array<EstimateWithError, K> expect_tilted_multi(
    const TiltedPair& pair, std::int64_t n, std::uint64_t N,
    const std::function<std::array<double, K>(std::span<const Innovation>)>& f,
    std::uint64_t seed, std::uint64_t stream_base, unsigned workers) {
  if (n < 1) throw Error(ErrorCode::ArgumentOutOfRange, "horizon must be >= 1");
  const bool weighted = pair.mode == TiltMode::WeightedMC;
  const Diagonal d = pair.diagonal;
  const double alpha = pair.alpha;
  // Slot K holds the weight itself, for the effective sample size.
  auto stats = parallel_mean<K + 1>(
      N, seed, stream_base, workers, [&](RngStream& rng, std::array<double, K + 1>& out) {
        thread_local std::vector<Innovation> path;
        path.resize(static_cast<std::size_t>(n));
        double log_w = 0.0;
        for (auto& x : path) {
          x = draw_innovation(pair.law, rng);
          if (weighted) log_w += alpha * std::log(std::abs(d == Diagonal::First ? x.a11 : x.a22));
        }
        const std::array<double, K> values = f(path);
        const double w = weighted ? std::exp(log_w) : 1.0;
        for (std::size_t k = 0; k < K; ++k) out[k] = w == 0.0 ? 0.0 : w * values[k];
        out[K] = w;
      });
  if (weighted) {
    const double cnt = static_cast<double>(stats[K].count());
    const double mean = stats[K].mean();
    const double sum_sq = (cnt - 1.0) * stats[K].variance() + cnt * mean * mean;
    const double ess = sum_sq > 0.0 ? (cnt * mean) * (cnt * mean) / sum_sq : 0.0;
    if (!(ess >= 100.0)) {
      throw Error(ErrorCode::WeightDegenerate,
                  "effective sample size " + std::to_string(ess) + " < 100");
    }
  }
  const double scale = weighted ? 1.0 : std::pow(pair.moment, static_cast<double>(n));
  std::array<EstimateWithError, K> result;
  for (std::size_t k = 0; k < K; ++k) {
    result[k] = EstimateWithError::from(stats[k], seed, stream_base).scaled(scale);
  }
  return result;
}

}  // namespace trisre
