#include "trisre/measure_change.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "trisre/stationarity.hpp"

namespace trisre {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t chunks_for(std::uint64_t n) { return (n + kChunkSize - 1) / kChunkSize; }

double pos_pow(double x, double alpha) { return x > 0.0 ? std::pow(x, alpha) : 0.0; }

SignedMoments zero_moments() {
  return {EstimateWithError::exact(0.0), EstimateWithError::exact(0.0),
          EstimateWithError::exact(0.0)};
}

SignedMoments scaled(const SignedMoments& m, double f) {
  return {m.abs.scaled(f), m.plus.scaled(f), m.minus.scaled(f)};
}

// E[A12] and E[A12^2] pieces of an equal-diagonal model's off-diagonal mode.
struct OffDiagonal {
  const Distribution* law;
  bool proportional;
};

OffDiagonal off_diagonal(const EqualDiagonal& e) {
  return std::visit(
      [](const auto& mode) -> OffDiagonal {
        if constexpr (std::is_same_v<std::decay_t<decltype(mode)>, ProportionalToDiagonal>) {
          return {&mode.factor, true};
        } else {
          return {&mode.a12, false};
        }
      },
      e.a12_mode);
}

double second_moment_or_inf(const Distribution& d) {
  return 2.0 < moment_upper_limit(d) ? abs_moment(d, 2.0) : kInf;
}

}  // namespace

TiltedPair TiltedPair::make(const TriangularSRE& model, Diagonal d, double alpha,
                            bool prefer_exact) {
  const Distribution& diag = model.diagonal_law(d);
  const double m = abs_moment(diag, alpha);
  if (!(m > 0.0) || !std::isfinite(m)) {
    throw Error(ErrorCode::MomentDiverges, "E|A_dd|^alpha must be finite and positive");
  }
  if (prefer_exact && is_tiltable(diag)) {
    return {model, model.tilted(d, alpha), d, alpha, TiltMode::ExactTilt, m};
  }
  return {model, model, d, alpha, TiltMode::WeightedMC, m};
}

EstimateWithError expect_tilted(const TiltedPair& pair, std::int64_t n, std::uint64_t N,
                                const PathFunctional& f, std::uint64_t seed,
                                std::uint64_t stream_base, unsigned workers) {
  const std::function<std::array<double, 1>(std::span<const Innovation>)> g =
      [&](std::span<const Innovation> path) { return std::array<double, 1>{f(path)}; };
  return expect_tilted_multi<1>(pair, n, N, g, seed, stream_base, workers)[0];
}

WEstimate estimate_w(const TriangularSRE& model, double alpha2, std::int64_t n, std::uint64_t N,
                     std::uint64_t seed, std::uint64_t stream_base, unsigned workers) {
  if (n < 1) throw Error(ErrorCode::ArgumentOutOfRange, "horizon must be >= 1");
  const double m1 = abs_moment(model.a11_law(), alpha2);
  if (!(m1 < 1.0)) {
    throw Error(ErrorCode::ArgumentOutOfRange,
                "estimate_w needs E|A11|^alpha2 < 1, got " + std::to_string(m1));
  }
  WEstimate out;
  out.n = n;
  if (model.a12_vanishes()) {
    out.at_n = out.at_half = zero_moments();
    return out;
  }
  const TiltedPair pair = TiltedPair::make(model, Diagonal::Second, alpha2);
  const std::function<std::array<double, 3>(std::span<const Innovation>)> f =
      [alpha2](std::span<const Innovation> path) {
        // M_n = Pi^(2) X_n with X_n = sum V_0 ... V_{2-i} U_{1-i}.
        double x = 0.0, p = 1.0;
        bool negative = false;
        for (const Innovation& step : path) {
          const VU vu = to_vu(step);
          x += p * vu.u;
          p *= vu.v;
          negative ^= step.a22 < 0.0;
        }
        const double m = negative ? -x : x;
        return std::array<double, 3>{std::pow(std::abs(m), alpha2), pos_pow(m, alpha2),
                                     pos_pow(-m, alpha2)};
      };
  auto run = [&](std::int64_t horizon, std::uint64_t base) {
    const auto r = expect_tilted_multi<3>(pair, horizon, N, f, seed, base, workers);
    return SignedMoments{r[0], r[1], r[2]};
  };
  out.at_n = run(n, stream_base);
  out.at_half = run(std::max<std::int64_t>(1, n / 2), stream_base + chunks_for(N));
  return out;
}

MuSigma estimate_mu_sigma(const TriangularSRE& model, double alpha) {
  const auto* e = std::get_if<EqualDiagonal>(&model.coupling());
  if (!e) throw Error(ErrorCode::RequiresEqualDiagonal, "mu and sigma^2 need A11 = A22 a.s.");
  const OffDiagonal off = off_diagonal(*e);
  MuSigma out;
  out.closed_form = true;
  if (off.proportional) {
    // A12 / A11 = xi independent of A11.
    const double m = abs_moment(e->d, alpha);
    out.mu = EstimateWithError::exact(mean(*off.law) * m);
    out.sigma2 = EstimateWithError::exact(second_moment_or_inf(*off.law) * m);
  } else {
    const double odd = signed_moment(e->d, alpha - 1.0, Sign::Plus) -
                       signed_moment(e->d, alpha - 1.0, Sign::Minus);
    out.mu = EstimateWithError::exact(mean(*off.law) * odd);
    const double ex2 = second_moment_or_inf(*off.law);
    out.sigma2 = EstimateWithError::exact(ex2 == 0.0 ? 0.0 : ex2 * abs_moment(e->d, alpha - 2.0));
  }
  return out;
}

MuSigma estimate_mu_sigma_mc(const TriangularSRE& model, double alpha, std::uint64_t N,
                             std::uint64_t seed, std::uint64_t stream_base, unsigned workers) {
  if (!model.equal_diagonal()) {
    throw Error(ErrorCode::RequiresEqualDiagonal, "mu and sigma^2 need A11 = A22 a.s.");
  }
  auto stats = parallel_mean<2>(N, seed, stream_base, workers,
                                [&](RngStream& rng, std::array<double, 2>& out) {
                                  const Innovation x = draw_innovation(model, rng);
                                  const double w = std::pow(std::abs(x.a11), alpha);
                                  const double u = x.a12 / x.a11;
                                  out[0] = w * u;
                                  out[1] = w * u * u;
                                });
  MuSigma out;
  out.mu = EstimateWithError::from(stats[0], seed, stream_base);
  out.sigma2 = EstimateWithError::from(stats[1], seed, stream_base);
  return out;
}

double clt_constant(double sigma2, double rho1, double alpha) {
  if (!(rho1 > 0.0)) throw Error(ErrorCode::ArgumentOutOfRange, "rho1 must be > 0");
  if (!(sigma2 >= 0.0)) throw Error(ErrorCode::ArgumentOutOfRange, "sigma^2 must be >= 0");
  return std::pow(sigma2, alpha / 2.0) * std::pow(rho1, -alpha / 2.0) * abs_normal_moment(alpha);
}

double clt_constant(const TriangularSRE& model, double alpha) {
  const MuSigma ms = estimate_mu_sigma(model, alpha);
  if (std::abs(ms.mu.value) >= 1e-12) {
    throw Error(ErrorCode::RequiresMuZero, "mu = " + std::to_string(ms.mu.value));
  }
  return clt_constant(ms.sigma2.value, rho(model.a11_law(), alpha), alpha);
}

SignedMoments mixture_moments(const StepSampler& sampler, double alpha, double log_m1,
                              double log_m2, std::int64_t n, std::uint64_t N, std::uint64_t seed,
                              std::uint64_t stream_base, unsigned workers) {
  if (n < 1) throw Error(ErrorCode::ArgumentOutOfRange, "horizon must be >= 1");
  if (!std::isfinite(log_m1) || !std::isfinite(log_m2)) {
    throw Error(ErrorCode::MomentDiverges, "diagonal alpha-moments must be finite and positive");
  }
  const auto nn = static_cast<std::size_t>(n);
  const double log_n = std::log(static_cast<double>(n));
  auto stats = parallel_mean<3>(
      N, seed, stream_base, workers, [&](RngStream& rng, std::array<double, 3>& out) {
        thread_local std::vector<double> prefix, suffix;
        prefix.assign(nn + 1, 0.0);
        suffix.assign(nn + 1, 0.0);
        const auto j = static_cast<std::size_t>(rng.below(nn));  // innovation drawn untilted
        double s = 0.0, p = 1.0, log_scale = 0.0;
        for (std::size_t k = 0; k < nn; ++k) {
          const StepLaw law = k < j ? StepLaw::TiltFirst : (k == j ? StepLaw::Base
                                                                   : StepLaw::TiltSecond);
          const Innovation x = sampler(law, rng);
          prefix[k + 1] = prefix[k] + alpha * std::log(std::abs(x.a11)) - log_m1;
          suffix[k] = alpha * std::log(std::abs(x.a22)) - log_m2;
          s = s * x.a22 + p * x.a12;
          p *= x.a11;
          const double c = std::max(std::abs(s), std::abs(p));
          if (c > 1e100 || (c < 1e-100 && c > 0.0)) {
            s /= c;
            p /= c;
            log_scale += std::log(c);
          }
        }
        for (std::size_t k = nn; k-- > 0;) suffix[k] += suffix[k + 1];
        // log L_i = prefix[i-1] + suffix[i], i = 1..n.
        double top = -kInf;
        for (std::size_t i = 1; i <= nn; ++i) top = std::max(top, prefix[i - 1] + suffix[i]);
        double acc = 0.0;
        for (std::size_t i = 1; i <= nn; ++i) acc += std::exp(prefix[i - 1] + suffix[i] - top);
        const double log_density = top + std::log(acc) - log_n;
        if (s == 0.0) {
          out = {0.0, 0.0, 0.0};
          return;
        }
        const double r = std::exp(alpha * (log_scale + std::log(std::abs(s))) - log_density);
        out = {r, s > 0.0 ? r : 0.0, s < 0.0 ? r : 0.0};
      });
  return {EstimateWithError::from(stats[0], seed, stream_base),
          EstimateWithError::from(stats[1], seed, stream_base),
          EstimateWithError::from(stats[2], seed, stream_base)};
}

CREstimate estimate_cR(const TriangularSRE& model, double alpha, std::int64_t n, std::uint64_t N,
                       std::uint64_t seed, std::uint64_t stream_base, unsigned workers) {
  if (model.equal_diagonal()) throw Error(ErrorCode::NotT34Regime, "diagonals are equal a.s.");
  const double m1 = abs_moment(model.a11_law(), alpha);
  const double m2 = abs_moment(model.a22_law(), alpha);
  if (std::abs(m1 - 1.0) > 1e-6 || std::abs(m2 - 1.0) > 1e-6) {
    std::ostringstream os;
    os << "E|A11|^alpha = " << m1 << ", E|A22|^alpha = " << m2 << " (both must be 1)";
    throw Error(ErrorCode::NotT34Regime, os.str());
  }
  CREstimate out;
  out.n = n;
  if (model.a12_vanishes()) {
    out.at_n = out.at_half = zero_moments();
    return out;
  }
  const TriangularSRE first = model.tilted(Diagonal::First, alpha);
  const TriangularSRE second = model.tilted(Diagonal::Second, alpha);
  const StepSampler sampler = [&](StepLaw law, RngStream& rng) {
    switch (law) {
      case StepLaw::TiltFirst: return draw_innovation(first, rng);
      case StepLaw::TiltSecond: return draw_innovation(second, rng);
      case StepLaw::Base: break;
    }
    return draw_innovation(model, rng);
  };
  auto run = [&](std::int64_t horizon, std::uint64_t base) {
    const SignedMoments m = mixture_moments(sampler, alpha, std::log(m1), std::log(m2), horizon,
                                            N, seed, base, workers);
    return scaled(m, 1.0 / (alpha * static_cast<double>(horizon)));
  };
  out.at_n = run(n, stream_base);
  out.at_half = run(std::max<std::int64_t>(1, n / 2), stream_base + chunks_for(N));
  return out;
}

double perpetuity_sample(const TiltedPair& pair, std::int64_t n, RngStream& rng) {
  if (pair.mode != TiltMode::ExactTilt) {
    throw Error(ErrorCode::RequiresExactTilt, "a weighted law cannot be sampled directly");
  }
  double x = 0.0, p = 1.0;
  for (std::int64_t k = 0; k < n; ++k) {
    const VU vu = to_vu(draw_innovation(pair.law, rng));
    x += p * vu.u;
    p *= vu.v;
  }
  return x;
}

EstimateWithError rho_V(const TriangularSRE& model, double alpha, std::uint64_t N,
                        std::uint64_t seed, std::uint64_t stream_base, unsigned workers) {
  const TiltedPair pair = TiltedPair::make(model, Diagonal::Second, alpha);
  return expect_tilted(
      pair, 1, N,
      [alpha](std::span<const Innovation> path) {
        const double v = std::abs(path[0].a11 / path[0].a22);
        return v == 0.0 ? 0.0 : std::pow(v, alpha) * std::log(v);
      },
      seed, stream_base, workers);
}

TailCrossCheck cR_tail_cross_check(const TriangularSRE& model, double alpha, std::int64_t depth,
                                   std::uint64_t samples, std::uint64_t seed,
                                   std::uint64_t stream_base, unsigned workers) {
  if (samples < 10'000) {
    throw Error(ErrorCode::ArgumentOutOfRange, "tail cross-check needs >= 10^4 samples");
  }
  const TiltedPair pair = TiltedPair::make(model, Diagonal::Second, alpha);
  std::vector<double> x(samples);
  parallel_generate(x, seed, stream_base, workers,
                    [&](RngStream& rng) { return std::abs(perpetuity_sample(pair, depth, rng)); });
  std::sort(x.begin(), x.end());

  TailCrossCheck out;
  out.rho_v = rho_V(model, alpha, samples, seed, stream_base + chunks_for(samples), workers);
  auto quantile = [&](double q) {
    return x[std::min(x.size() - 1, static_cast<std::size_t>(q * static_cast<double>(x.size())))];
  };
  const double lo = quantile(0.99), hi = quantile(0.9999);
  constexpr int kGrid = 20;
  double sum = 0.0;
  for (int g = 0; g < kGrid; ++g) {
    const double t = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * g / (kGrid - 1));
    const auto above = static_cast<double>(x.end() - std::upper_bound(x.begin(), x.end(), t));
    const double v = std::pow(t, alpha) * above / static_cast<double>(x.size());
    out.grid.push_back(t);
    out.scaled_ccdf.push_back(v);
    sum += v;
  }
  out.tail_constant = sum / kGrid;
  out.c_R_from_tail = out.rho_v.value * out.tail_constant;
  return out;
}

}  // namespace trisre
