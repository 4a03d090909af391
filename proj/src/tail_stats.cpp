#include "trisre/tail_stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "trisre/error.hpp"
#include "trisre/parallel.hpp"
#include "trisre/sre.hpp"

namespace trisre {

namespace {

double pos_pow(double x, double alpha) { return x > 0.0 ? std::pow(x, alpha) : 0.0; }

std::uint64_t chunks_for(std::uint64_t n) { return (n + kChunkSize - 1) / kChunkSize; }

}  // namespace

EmpiricalTail::EmpiricalTail(std::span<const double> samples, TailSide side) : side_(side) {
  if (samples.size() < 2) {
    throw Error(ErrorCode::ArgumentOutOfRange, "an empirical tail needs at least two samples");
  }
  values_.reserve(samples.size());
  for (double x : samples) {
    switch (side) {
      case TailSide::Positive: values_.push_back(x); break;
      case TailSide::Negative: values_.push_back(-x); break;
      case TailSide::Absolute: values_.push_back(std::abs(x)); break;
    }
  }
  std::sort(values_.begin(), values_.end(), std::greater<>());
}

double EmpiricalTail::upper_quantile(double upper) const {
  if (!(upper > 0.0 && upper < 1.0)) {
    throw Error(ErrorCode::ArgumentOutOfRange, "upper quantile level must be in (0, 1)");
  }
  const auto i = static_cast<std::size_t>(upper * static_cast<double>(values_.size()));
  return values_[std::min(i, values_.size() - 1)];
}

double ccdf(const EmpiricalTail& tail, double x) noexcept {
  const auto v = tail.values();
  // Descending order: the values > x form a prefix.
  const auto it = std::partition_point(v.begin(), v.end(), [x](double y) { return y > x; });
  return static_cast<double>(it - v.begin()) / static_cast<double>(v.size());
}

EstimateWithError hill(const EmpiricalTail& tail, std::size_t k) {
  const auto v = tail.values();
  if (k < 2 || k >= v.size()) {
    std::ostringstream os;
    os << "Hill needs 2 <= k < n, got k = " << k << ", n = " << v.size();
    throw Error(ErrorCode::ArgumentOutOfRange, os.str());
  }
  const double threshold = v[k];
  if (!(threshold > 0.0)) {
    throw Error(ErrorCode::NonPositiveOrderStat, "order statistic k+1 is not positive");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += std::log(v[i] / threshold);
  if (!(sum > 0.0)) throw Error(ErrorCode::DegenerateTail, "top order statistics are all equal");
  const double kk = static_cast<double>(k);
  const double a = kk / sum;
  EstimateWithError out;
  out.value = a;
  out.se = a / std::sqrt(kk);
  out.n_samples = v.size();
  return out;
}

std::size_t default_hill_k(std::size_t n) noexcept {
  const double k = std::floor(std::pow(static_cast<double>(n), 2.0 / 3.0) + 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(k), 2, n > 2 ? n - 1 : 2);
}

std::vector<EstimateWithError> hill_path(const EmpiricalTail& tail,
                                         std::span<const std::size_t> ks) {
  std::vector<EstimateWithError> out;
  out.reserve(ks.size());
  for (std::size_t k : ks) out.push_back(hill(tail, k));
  return out;
}

std::vector<double> geometric_grid(double lo, double hi, std::size_t points) {
  if (!(lo > 0.0 && hi > lo) || points < 2) {
    throw Error(ErrorCode::ArgumentOutOfRange, "geometric grid needs 0 < lo < hi and 2+ points");
  }
  std::vector<double> g(points);
  const double step = std::log(hi / lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) g[i] = lo * std::exp(step * static_cast<double>(i));
  g.back() = hi;
  return g;
}

std::vector<double> percentile_grid(const EmpiricalTail& tail, double lo_upper, double hi_upper,
                                    std::size_t points) {
  const double lo = tail.upper_quantile(lo_upper);
  const double hi = tail.upper_quantile(hi_upper);
  if (!(lo > 0.0) || !(hi > lo)) {
    std::ostringstream os;
    os << "tail quantiles " << lo << ", " << hi << " do not span a positive range";
    throw Error(ErrorCode::InsufficientSupport, os.str());
  }
  return geometric_grid(lo, hi, points);
}

LogFactorFit log_factor_regression(const std::function<double(double)>& ccdf_fn, double alpha,
                                   std::span<const double> grid, double min_ccdf) {
  std::vector<double> t, y;
  for (double x : grid) {
    if (!(x > 1.0)) continue;
    const double c = ccdf_fn(x);
    if (!(c > min_ccdf) || !(c > 0.0)) continue;
    t.push_back(std::log(std::log(x)));
    y.push_back(alpha * std::log(x) + std::log(c));
  }
  if (t.size() < 5) {
    std::ostringstream os;
    os << "only " << t.size() << " grid points carry enough tail mass";
    throw Error(ErrorCode::InsufficientSupport, os.str());
  }
  const double m = static_cast<double>(t.size());
  double tm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    tm += t[i];
    ym += y[i];
  }
  tm /= m;
  ym /= m;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    stt += (t[i] - tm) * (t[i] - tm);
    sty += (t[i] - tm) * (y[i] - ym);
    syy += (y[i] - ym) * (y[i] - ym);
  }
  if (!(stt > 0.0)) throw Error(ErrorCode::InsufficientSupport, "grid has no spread in log log x");
  LogFactorFit fit;
  fit.beta = sty / stt;
  fit.intercept = ym - fit.beta * tm;
  fit.r2 = syy > 0.0 ? sty * sty / (stt * syy) : 1.0;
  fit.points = t.size();
  return fit;
}

LogFactorFit log_factor_regression(const EmpiricalTail& tail, double alpha,
                                   std::span<const double> grid) {
  return log_factor_regression([&](double x) { return ccdf(tail, x); }, alpha, grid,
                               50.0 / static_cast<double>(tail.count()));
}

double scaled_ccdf_average(const EmpiricalTail& tail, double alpha, std::span<const double> grid,
                           double beta) {
  const double min_ccdf = 50.0 / static_cast<double>(tail.count());
  double sum = 0.0;
  std::size_t used = 0;
  for (double x : grid) {
    const double c = ccdf(tail, x);
    if (c > min_ccdf && (beta == 0.0 || x > 1.0)) {
      sum += std::pow(x, alpha) * c * (beta == 0.0 ? 1.0 : std::pow(std::log(x), -beta));
      ++used;
    }
  }
  if (used == 0) throw Error(ErrorCode::InsufficientSupport, "no grid point carries tail mass");
  return sum / static_cast<double>(used);
}

GoldieConstants goldie_constant_direct(const TripleSampler& sampler, bool a_signed, double alpha,
                                       double rho, std::uint64_t N, std::uint64_t seed,
                                       std::uint64_t stream_base, unsigned workers) {
  if (!(alpha > 0.0) || !(rho > 0.0)) {
    throw Error(ErrorCode::ArgumentOutOfRange, "alpha and rho must be positive");
  }
  auto stats = parallel_mean<2>(N, seed, stream_base, workers,
                                [&](RngStream& rng, std::array<double, 2>& out) {
                                  const GoldieTriple g = sampler(rng);
                                  const double ax = g.a * g.x;
                                  const double w = ax + g.b;
                                  if (a_signed) {
                                    out[0] = std::pow(std::abs(w), alpha) -
                                             std::pow(std::abs(ax), alpha);
                                    out[1] = out[0];
                                  } else {
                                    out[0] = pos_pow(w, alpha) - pos_pow(ax, alpha);
                                    out[1] = pos_pow(-w, alpha) - pos_pow(-ax, alpha);
                                  }
                                });
  const double f = 1.0 / ((a_signed ? 2.0 : 1.0) * alpha * rho);
  GoldieConstants c;
  c.c_plus = EstimateWithError::from(stats[0], seed, stream_base).scaled(f);
  c.c_minus = a_signed ? c.c_plus : EstimateWithError::from(stats[1], seed, stream_base).scaled(f);
  return c;
}

std::int64_t perpetuity_depth(const UnivariatePair& pair, double tol) {
  std::int64_t depth = truncation_depth(TriangularSRE::univariate(pair.a, pair.b), tol / 2).depth;
  if (pair.b_on_a != 0.0) {
    const auto coupled = TriangularSRE::univariate(pair.a, Distribution::scaled(pair.a, pair.b_on_a));
    depth = std::max(depth, truncation_depth(coupled, tol / 2).depth);
  }
  return depth;
}

double sample_perpetuity(const UnivariatePair& pair, std::int64_t depth, RngStream& rng) {
  double x = 0.0, p = 1.0;
  for (std::int64_t k = 0; k < depth; ++k) {
    const double a = sample(pair.a, rng);
    x += p * pair.draw_b(a, rng);
    p *= a;
  }
  return x;
}

GoldieConstants goldie_constant_direct(const UnivariatePair& pair, double alpha, double rho,
                                       std::uint64_t N, std::uint64_t seed,
                                       std::uint64_t stream_base, unsigned workers) {
  const std::int64_t depth = perpetuity_depth(pair);
  const TripleSampler sampler = [&](RngStream& rng) {
    GoldieTriple g;
    g.x = sample_perpetuity(pair, depth, rng);
    g.a = sample(pair.a, rng);
    g.b = pair.draw_b(g.a, rng);
    return g;
  };
  return goldie_constant_direct(sampler, has_negative_mass(pair.a), alpha, rho, N, seed,
                                stream_base, workers);
}

GoldiePerpetuity goldie_constant_perpetuity(const UnivariatePair& pair, double alpha, double rho,
                                            std::int64_t n, std::uint64_t N, std::uint64_t seed,
                                            std::uint64_t stream_base, unsigned workers) {
  if (!(alpha > 0.0) || !(rho > 0.0)) {
    throw Error(ErrorCode::ArgumentOutOfRange, "alpha and rho must be positive");
  }
  const double log_m = std::log(abs_moment(pair.a, alpha));
  // X_n is M_n of the embedding a11 = A, a12 = B, a22 = 1.
  const bool zero_a = is_degenerate(pair.a) && has_atom_at_zero(pair.a);
  const Distribution tilted_a = zero_a ? pair.a : tilted(pair.a, alpha);
  const StepSampler sampler = [&](StepLaw law, RngStream& rng) {
    const double a = sample(law == StepLaw::TiltFirst ? tilted_a : pair.a, rng);
    return Innovation{a, pair.draw_b(a, rng), 1.0, 0.0, 0.0};
  };
  auto run = [&](std::int64_t horizon, std::uint64_t base) {
    GoldieConstants c;
    const double f = 1.0 / (alpha * rho * static_cast<double>(horizon));
    if (zero_a) {
      // X_n = B_1 exactly.
      c.c_plus = EstimateWithError::exact(signed_moment(pair.b, alpha, Sign::Plus) * f);
      c.c_minus = EstimateWithError::exact(signed_moment(pair.b, alpha, Sign::Minus) * f);
      return c;
    }
    const SignedMoments m =
        mixture_moments(sampler, alpha, log_m, 0.0, horizon, N, seed, base, workers);
    c.c_plus = m.plus.scaled(f);
    c.c_minus = m.minus.scaled(f);
    return c;
  };
  GoldiePerpetuity out;
  out.n = n;
  out.at_n = run(n, stream_base);
  out.at_half = run(std::max<std::int64_t>(1, n / 2), stream_base + chunks_for(N));
  return out;
}

std::pair<double, double> grey_constants(double p, double q, double m_abs, double m_plus,
                                         double m_minus) {
  if (!(m_abs < 1.0) || m_abs < 0.0 || m_plus < 0.0 || m_minus < 0.0) {
    throw Error(ErrorCode::ArgumentOutOfRange, "grey constants need 0 <= E|A|^alpha < 1");
  }
  if (p < 0.0 || q < 0.0 || std::abs(p + q - 1.0) > 1e-12) {
    throw Error(ErrorCode::ArgumentOutOfRange, "tail balance must satisfy p, q >= 0, p + q = 1");
  }
  const double first = 1.0 / (1.0 - m_abs);
  const double second = (p - q) / (1.0 - m_plus + m_minus);
  return {0.5 * (first + second), 0.5 * (first - second)};
}

}  // namespace trisre
