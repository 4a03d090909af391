#include "trisre/sre.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "trisre/error.hpp"
#include "trisre/parallel.hpp"

namespace trisre {

namespace {

const Distribution& a12_base_law(const EqualDiagonal& e) {
  return std::visit(
      [](const auto& mode) -> const Distribution& {
        if constexpr (std::is_same_v<std::decay_t<decltype(mode)>, ProportionalToDiagonal>) {
          return mode.factor;
        } else {
          return mode.a12;
        }
      },
      e.a12_mode);
}

bool is_proportional(const EqualDiagonal& e) {
  return std::holds_alternative<ProportionalToDiagonal>(e.a12_mode);
}

bool is_zero_law(const Distribution& d) { return is_degenerate(d) && has_atom_at_zero(d); }

// Finite moment or +inf.
double moment_or_inf(const Distribution& d, double beta) {
  if (beta >= moment_upper_limit(d)) return std::numeric_limits<double>::infinity();
  return abs_moment(d, beta);
}

}  // namespace

TriangularSRE::TriangularSRE(Coupling coupling) : coupling_(std::move(coupling)) {
  if (const auto* e = std::get_if<EqualDiagonal>(&coupling_)) {
    if (has_atom_at_zero(e->d)) {
      throw Error(ErrorCode::InvalidSpec, "equal diagonal law must not charge 0");
    }
  }
}

const Distribution& TriangularSRE::a11_law() const noexcept {
  if (const auto* i = std::get_if<IndependentEntries>(&coupling_)) return i->a11;
  return std::get<EqualDiagonal>(coupling_).d;
}

const Distribution& TriangularSRE::a22_law() const noexcept {
  if (const auto* i = std::get_if<IndependentEntries>(&coupling_)) return i->a22;
  return std::get<EqualDiagonal>(coupling_).d;
}

const Distribution& TriangularSRE::b1_law() const noexcept {
  return std::visit([](const auto& c) -> const Distribution& { return c.b1; }, coupling_);
}

const Distribution& TriangularSRE::b2_law() const noexcept {
  return std::visit([](const auto& c) -> const Distribution& { return c.b2; }, coupling_);
}

double TriangularSRE::a12_abs_moment(double beta) const {
  if (const auto* i = std::get_if<IndependentEntries>(&coupling_)) return abs_moment(i->a12, beta);
  const auto& e = std::get<EqualDiagonal>(coupling_);
  if (is_proportional(e)) return abs_moment(a12_base_law(e), beta) * abs_moment(e.d, beta);
  return abs_moment(a12_base_law(e), beta);
}

bool TriangularSRE::a12_vanishes() const noexcept {
  if (const auto* i = std::get_if<IndependentEntries>(&coupling_)) return is_zero_law(i->a12);
  return is_zero_law(a12_base_law(std::get<EqualDiagonal>(coupling_)));
}

bool TriangularSRE::a12_has_zero_atom() const noexcept {
  if (const auto* i = std::get_if<IndependentEntries>(&coupling_)) return has_atom_at_zero(i->a12);
  return has_atom_at_zero(a12_base_law(std::get<EqualDiagonal>(coupling_)));
}

TriangularSRE TriangularSRE::tilted(Diagonal d, double alpha) const {
  if (const auto* i = std::get_if<IndependentEntries>(&coupling_)) {
    IndependentEntries out = *i;
    if (d == Diagonal::First) {
      out.a11 = trisre::tilted(i->a11, alpha);
    } else {
      out.a22 = trisre::tilted(i->a22, alpha);
    }
    return out;
  }
  EqualDiagonal out = std::get<EqualDiagonal>(coupling_);
  out.d = trisre::tilted(out.d, alpha);
  return out;
}

TriangularSRE TriangularSRE::univariate(Distribution a, Distribution b) {
  return IndependentEntries{std::move(a), Distribution::constant(0.0), Distribution::constant(0.0),
                            std::move(b), Distribution::constant(0.0)};
}

Innovation draw_innovation(const TriangularSRE& model, RngStream& rng) {
  Innovation x;
  if (const auto* i = std::get_if<IndependentEntries>(&model.coupling())) {
    x.a11 = sample(i->a11, rng);
    x.a12 = sample(i->a12, rng);
    x.a22 = sample(i->a22, rng);
    x.b1 = sample(i->b1, rng);
    x.b2 = sample(i->b2, rng);
    return x;
  }
  const auto& e = std::get<EqualDiagonal>(model.coupling());
  x.a11 = sample(e.d, rng);
  x.a22 = x.a11;
  const double off = sample(a12_base_law(e), rng);
  x.a12 = is_proportional(e) ? off * x.a11 : off;
  x.b1 = sample(e.b1, rng);
  x.b2 = sample(e.b2, rng);
  return x;
}

double truncation_remainder_bound(const TriangularSRE& model, double eps, std::int64_t n) {
  const double q = std::max(abs_moment(model.a11_law(), eps), abs_moment(model.a22_law(), eps));
  const double eb1 = moment_or_inf(model.b1_law(), eps);
  const double eb2 = moment_or_inf(model.b2_law(), eps);
  const double ea12 = model.a12_vanishes() ? 0.0 : model.a12_abs_moment(eps);
  if (q >= 1.0) return std::numeric_limits<double>::infinity();
  // Term k of the tilde series has E|p12_k|^eps <= k q^{k-1} E|A12|^eps.
  const double nn = static_cast<double>(n);
  const double direct = std::pow(q, nn) * (eb1 + eb2) / (1.0 - q);
  const double coupled =
      ea12 * eb2 * std::pow(q, nn - 1.0) * (nn * (1.0 - q) + q) / ((1.0 - q) * (1.0 - q));
  return direct + coupled;
}

TruncationPlan truncation_depth(const TriangularSRE& model, double tol, std::int64_t max_depth) {
  if (!(tol > 0.0)) throw Error(ErrorCode::ArgumentOutOfRange, "tolerance must be > 0");

  std::vector<double> grid;
  for (int k = 1; k < 10; ++k) grid.push_back(k * 1e-3);
  for (int k = 1; k <= 100; ++k) grid.push_back(k * 1e-2);

  double best_eps = 0.0;
  double best_q = std::numeric_limits<double>::infinity();
  for (double eps : grid) {
    if (eps >= moment_upper_limit(model.b1_law()) || eps >= moment_upper_limit(model.b2_law()) ||
        eps >= moment_upper_limit(model.a11_law()) || eps >= moment_upper_limit(model.a22_law())) {
      continue;
    }
    try {
      if (!model.a12_vanishes()) (void)model.a12_abs_moment(eps);
    } catch (const Error&) {
      continue;
    }
    const double q =
        std::max(abs_moment(model.a11_law(), eps), abs_moment(model.a22_law(), eps));
    if (q <= best_q) {
      best_q = q;
      best_eps = eps;
    }
  }
  if (!(best_q < 1.0)) {
    std::ostringstream os;
    os << "no eps in (0, 1] gives max_i E|A_ii|^eps < 1 (best " << best_q << ")";
    throw Error(ErrorCode::NotContractive, os.str());
  }

  const double target = std::pow(tol, best_eps);
  for (std::int64_t n = 1; n <= max_depth; ++n) {
    const double bound = truncation_remainder_bound(model, best_eps, n);
    if (bound < target) {
      return {n, best_eps, best_q, std::pow(bound, 1.0 / best_eps)};
    }
  }
  std::ostringstream os;
  os << "truncation depth exceeds " << max_depth << " (q = " << best_q << ")";
  throw Error(ErrorCode::NotContractive, os.str());
}

StationarySample sample_stationary(const TriangularSRE& model, const TruncationPlan& plan,
                                   RngStream& rng) {
  // Running product P = A_0 A_{-1} ... A_{-k+1}, upper triangular.
  double p11 = 1.0, p12 = 0.0, p22 = 1.0;
  double w1_hat = 0.0, w1_tilde = 0.0, w2 = 0.0;
  for (std::int64_t k = 0; k < plan.depth; ++k) {
    const Innovation x = draw_innovation(model, rng);
    w1_hat += p11 * x.b1;
    w1_tilde += p12 * x.b2;
    w2 += p22 * x.b2;
    p12 = p11 * x.a12 + p12 * x.a22;
    p11 *= x.a11;
    p22 *= x.a22;
  }
  StationarySample s;
  s.w1_hat = w1_hat;
  s.w1_tilde = w1_tilde;
  s.w1 = w1_hat + w1_tilde;
  s.w2 = w2;
  s.truncation_depth = plan.depth;
  s.truncation_bound = plan.bound;
  return s;
}

StationarySample sample_stationary(const TriangularSRE& model, double tol, RngStream& rng) {
  return sample_stationary(model, truncation_depth(model, tol), rng);
}

std::vector<StationarySample> sample_stationary_batch(const TriangularSRE& model, double tol,
                                                      std::size_t count, std::uint64_t seed,
                                                      std::uint64_t stream_base,
                                                      unsigned workers) {
  const TruncationPlan plan = truncation_depth(model, tol);
  std::vector<StationarySample> out(count);
  parallel_generate(out, seed, stream_base, workers,
                    [&](RngStream& rng) { return sample_stationary(model, plan, rng); });
  return out;
}

State iterate_forward(const TriangularSRE& model, State start, std::int64_t steps,
                      RngStream& rng) {
  for (std::int64_t t = 0; t < steps; ++t) start = step(start, draw_innovation(model, rng));
  return start;
}

double Mn_on_path(std::span<const Innovation> path) noexcept {
  double s = 0.0;
  double p = 1.0;
  for (const Innovation& x : path) {
    s = s * x.a22 + p * x.a12;
    p *= x.a11;
  }
  return s;
}

double sample_Mn(const TriangularSRE& model, std::int64_t n, RngStream& rng) {
  if (n < 1) throw Error(ErrorCode::ArgumentOutOfRange, "M_n requires n >= 1");
  double s = 0.0;
  double p = 1.0;
  for (std::int64_t k = 0; k < n; ++k) {
    const Innovation x = draw_innovation(model, rng);
    s = s * x.a22 + p * x.a12;
    p *= x.a11;
  }
  return s;
}

}  // namespace trisre
