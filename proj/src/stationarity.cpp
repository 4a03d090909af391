#include "trisre/stationarity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "trisre/error.hpp"
#include "trisre/measure_change.hpp"
#include "trisre/parallel.hpp"

namespace trisre {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxTailIndex = 1e3;
constexpr double kEqualIndexTol = 1e-8;

std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

// E log|A|, or -inf when A has an atom at zero.
double log_moment_or_minus_inf(const Distribution& a) {
  if (has_atom_at_zero(a)) return -kInf;
  return log_abs_moment(a);
}

bool nonnegative(const Distribution& d) noexcept { return !has_negative_mass(d); }

bool zero_law(const Distribution& d) noexcept { return is_degenerate(d) && has_atom_at_zero(d); }

struct CoordinateRegime {
  std::optional<TailRegime> regime;
  std::optional<double> alpha;
  std::optional<double> rho;
  AssumptionCheck check;
};

CoordinateRegime coordinate_regime(const Distribution& a, const Distribution& b, int index) {
  const std::string suffix = "(alpha" + std::to_string(index) + ")";
  CoordinateRegime out;
  std::optional<double> kg_root;
  std::string root_note;
  try {
    kg_root = solve_tail_index(a);
  } catch (const Error& e) {
    root_note = e.what();
  }

  const auto rv = regular_variation(b);
  if (rv && (!kg_root || rv->alpha < *kg_root)) {
    out.check.id = "B" + suffix;
    const double alpha = rv->alpha;
    const bool moment_lt_one = abs_moment(a, alpha) < 1.0;
    const bool moment_eta = alpha < moment_upper_limit(a);
    out.alpha = alpha;
    out.regime = TailRegime::Grey;
    if (moment_lt_one && moment_eta) {
      out.check.status = CheckStatus::Pass;
      out.check.detail = "B regularly varying with index " + num(alpha) +
                         ", E|A|^alpha = " + num(abs_moment(a, alpha)) + " < 1";
    } else {
      out.check.status = CheckStatus::Fail;
      out.check.detail = "E|A|^alpha < 1 with a finite higher moment is violated at alpha = " +
                         num(alpha);
    }
    return out;
  }

  out.check.id = "A" + suffix;
  if (!kg_root) {
    out.check.status = CheckStatus::Fail;
    out.check.detail = "no Kesten-Goldie index and B is not regularly varying: " + root_note;
    return out;
  }
  const double alpha = *kg_root;
  out.alpha = alpha;
  out.rho = rho(a, alpha);
  out.regime = TailRegime::KestenGoldie;
  std::vector<std::string> problems;
  if (!(alpha < moment_upper_limit(b))) problems.push_back("E|B|^alpha is infinite");
  if (!(alpha < moment_upper_limit(a))) problems.push_back("E|A|^alpha log+|A| is infinite");
  if (zero_law(b)) problems.push_back("B = 0 makes x = 0 a fixed point of Ax + B");
  if (!is_non_arithmetic(a)) problems.push_back("log|A| is arithmetic");
  if (problems.empty()) {
    out.check.status = CheckStatus::Pass;
    out.check.detail = "E|A|^alpha = 1 at alpha = " + num(alpha) + ", rho = " + num(*out.rho);
  } else {
    out.check.status = CheckStatus::Fail;
    for (std::size_t i = 0; i < problems.size(); ++i) {
      out.check.detail += (i ? "; " : "") + problems[i];
    }
  }
  return out;
}

AssumptionCheck check(std::string id, bool ok, std::string detail) {
  return {std::move(id), ok ? CheckStatus::Pass : CheckStatus::Fail, std::move(detail)};
}

double a12_moment_limit(const TriangularSRE& model) {
  if (const auto* i = std::get_if<IndependentEntries>(&model.coupling())) {
    return moment_upper_limit(i->a12);
  }
  const auto& e = std::get<EqualDiagonal>(model.coupling());
  return std::visit(
      [&](const auto& mode) {
        if constexpr (std::is_same_v<std::decay_t<decltype(mode)>, ProportionalToDiagonal>) {
          return std::min(moment_upper_limit(mode.factor), moment_upper_limit(e.d));
        } else {
          return moment_upper_limit(mode.a12);
        }
      },
      e.a12_mode);
}

const Distribution& a12_law_or_factor(const TriangularSRE& model) {
  if (const auto* i = std::get_if<IndependentEntries>(&model.coupling())) return i->a12;
  const auto& e = std::get<EqualDiagonal>(model.coupling());
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

bool all_entries_nonnegative(const TriangularSRE& model) {
  return nonnegative(model.a11_law()) && nonnegative(model.a22_law()) &&
         nonnegative(a12_law_or_factor(model)) && nonnegative(model.b1_law()) &&
         nonnegative(model.b2_law());
}

// Both sides of E[|hat W1|^a - |A11 hat W1|^a] != E[|tilde W1|^a - |A11 tilde W1|^a],
// with the primed W taken one step earlier and A11 the fresh coefficient.
AssumptionCheck bar_constant_positivity(const TriangularSRE& model, double alpha,
                                        const ClassifyOptions& options) {
  AssumptionCheck c{"BarConstantPositivity", CheckStatus::Unverifiable, ""};
  if (all_entries_nonnegative(model)) {
    c.status = CheckStatus::Pass;
    c.detail = "all entries of A and B are nonnegative";
    return c;
  }
  try {
    const TruncationPlan plan = truncation_depth(model, 1e-8);
    const std::uint64_t n = std::min<std::uint64_t>(options.mc_samples, 100'000);
    auto stats = parallel_mean<2>(
        n, options.seed, 900'000'000, options.workers,
        [&](RngStream& rng, std::array<double, 2>& out) {
          const StationarySample s = sample_stationary(model, plan, rng);
          const Innovation x = draw_innovation(model, rng);
          out[0] = std::pow(std::abs(x.a11 * s.w1_hat + x.b1), alpha) -
                   std::pow(std::abs(x.a11 * s.w1_hat), alpha);
          out[1] = std::pow(std::abs(x.a11 * s.w1_tilde + x.a12 * s.w2), alpha) -
                   std::pow(std::abs(x.a11 * s.w1_tilde), alpha);
        });
    c.detail = "entries take negative values; Monte Carlo: hat side " + num(stats[0].mean()) +
               " +- " + num(stats[0].standard_error()) + ", tilde side " + num(stats[1].mean()) +
               " +- " + num(stats[1].standard_error());
  } catch (const Error& e) {
    c.detail = std::string("entries take negative values; estimate failed: ") + e.what();
  }
  return c;
}

}  // namespace

double solve_tail_index(const Distribution& a) {
  const double elog = log_moment_or_minus_inf(a);
  if (!(elog < 0.0)) {
    throw Error(ErrorCode::NotContractive, "E log|A| = " + num(elog) + " >= 0 for " + describe(a));
  }
  const double upper = std::min(moment_upper_limit(a), kMaxTailIndex);
  auto f = [&](double beta) { return std::log(abs_moment(a, beta)); };

  // f(0) = 0 and f'(0) = E log|A| < 0, so f < 0 just right of 0.
  double lo = std::min(1.0, 0.5 * upper);
  while (f(lo) >= 0.0) {
    lo *= 0.5;
    if (lo < 1e-12) throw Error(ErrorCode::NoRoot, "no negative region near 0");
  }
  double hi = lo;
  for (;;) {
    const double next = std::min(2.0 * hi, upper);
    if (next >= upper) {
      // Probe just below the end of the finite-moment range.
      const double edge = upper * (1.0 - 1e-12);
      if (edge <= hi || f(edge) < 0.0) {
        throw Error(ErrorCode::NoRoot, "E|A|^beta < 1 for all beta < " + num(upper) + " for " +
                                           describe(a));
      }
      lo = hi;
      hi = edge;
      break;
    }
    if (f(next) >= 0.0) {
      lo = hi;
      hi = next;
      break;
    }
    hi = next;
  }
  if (f(lo) >= 0.0) lo = hi / 2.0;

  std::uintmax_t iterations = 200;
  const auto [x0, x1] = boost::math::tools::toms748_solve(
      f, lo, hi, boost::math::tools::eps_tolerance<double>(50), iterations);
  return 0.5 * (x0 + x1);
}

double rho(const Distribution& a, double alpha) { return abs_moment_derivative(a, alpha); }

double log_moment_curvature_sup(const Distribution& a, double lo, double hi, int grid) {
  if (grid < 2) grid = 2;
  double sup = -kInf;
  for (int k = 0; k < grid; ++k) {
    const double beta = lo + (hi - lo) * k / (grid - 1);
    sup = std::max(sup, log_abs_moment_curvature(a, beta));
  }
  return sup;
}

EstimateWithError lyapunov_estimate(const TriangularSRE& model, std::int64_t n, std::int64_t reps,
                                    std::uint64_t seed, std::uint64_t stream_base,
                                    unsigned workers) {
  if (n < 1) throw Error(ErrorCode::ArgumentOutOfRange, "path length must be >= 1");
  if (reps < 2) throw Error(ErrorCode::ArgumentOutOfRange, "need at least 2 repetitions");
  auto stats = parallel_mean<1>(
      static_cast<std::uint64_t>(reps), seed, stream_base, workers,
      [&](RngStream& rng, std::array<double, 1>& out) {
        double p11 = 1.0, p12 = 0.0, p22 = 1.0;
        double log_scale = 0.0;
        for (std::int64_t t = 0; t < n; ++t) {
          const Innovation x = draw_innovation(model, rng);
          // P <- A_t P
          p12 = x.a11 * p12 + x.a12 * p22;
          p11 *= x.a11;
          p22 *= x.a22;
          const double m = std::max({std::abs(p11), std::abs(p12), std::abs(p22)});
          if (m == 0.0) {
            out[0] = -kInf;
            return;
          }
          p11 /= m;
          p12 /= m;
          p22 /= m;
          log_scale += std::log(m);
        }
        // Spectral norm of [[p11, p12], [0, p22]].
        const double s = p11 * p11 + p12 * p12 + p22 * p22;
        const double det = p11 * p22;
        const double top = 0.5 * (s + std::sqrt(std::max(0.0, s * s - 4.0 * det * det)));
        out[0] = (log_scale + 0.5 * std::log(top)) / static_cast<double>(n);
      });
  return EstimateWithError::from(stats[0], seed, stream_base);
}

std::string_view to_string(TailRegime r) noexcept {
  return r == TailRegime::KestenGoldie ? "KestenGoldie" : "Grey";
}

std::string_view to_string(DiagonalRelation r) noexcept {
  return r == DiagonalRelation::EqualAS ? "EqualAS" : "Distinct";
}

std::string_view to_string(CheckStatus s) noexcept {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Unverifiable: return "unverifiable";
  }
  return "?";
}

std::string_view to_string(TheoremCase c) noexcept {
  switch (c) {
    case TheoremCase::T31_a1_lt_a2_KG: return "T31_a1_lt_a2_KG";
    case TheoremCase::T31_a1_lt_a2_Grey: return "T31_a1_lt_a2_Grey";
    case TheoremCase::T31_a1_gt_a2_KG: return "T31_a1_gt_a2_KG";
    case TheoremCase::T31_a1_gt_a2_Grey: return "T31_a1_gt_a2_Grey";
    case TheoremCase::T33_mu_zero: return "T33_mu_zero";
    case TheoremCase::T33_mu_nonzero: return "T33_mu_nonzero";
    case TheoremCase::T34: return "T34";
    case TheoremCase::Unsupported: return "Unsupported";
  }
  return "?";
}

TheoremCase theorem_case_from_string(std::string_view s) {
  for (auto c : {TheoremCase::T31_a1_lt_a2_KG, TheoremCase::T31_a1_lt_a2_Grey,
                 TheoremCase::T31_a1_gt_a2_KG, TheoremCase::T31_a1_gt_a2_Grey,
                 TheoremCase::T33_mu_zero, TheoremCase::T33_mu_nonzero, TheoremCase::T34,
                 TheoremCase::Unsupported}) {
    if (to_string(c) == s) return c;
  }
  throw Error(ErrorCode::ConfigError, "unknown theorem case '" + std::string(s) + "'");
}

const AssumptionCheck* RegimeReport::find(std::string_view id) const noexcept {
  for (const auto& c : checks) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

RegimeReport classify(const TriangularSRE& model, const ClassifyOptions& options) {
  RegimeReport report;
  const Distribution& a11 = model.a11_law();
  const Distribution& a22 = model.a22_law();

  report.sign_case.a11_takes_negative = has_negative_mass(a11);
  report.sign_case.a22_takes_negative = has_negative_mass(a22);
  report.sign_case.a22_nonzero = !has_atom_at_zero(a22);

  const bool equal_as = model.equal_diagonal() ||
                        (is_degenerate(a11) && is_degenerate(a22) && a11 == a22);
  report.diagonal_relation = equal_as ? DiagonalRelation::EqualAS : DiagonalRelation::Distinct;

  // Stationarity.
  const double elog1 = log_moment_or_minus_inf(a11);
  const double elog2 = log_moment_or_minus_inf(a22);
  const bool stationary = elog1 < 0.0 && elog2 < 0.0;
  report.checks.push_back(check("Prop2.1", stationary,
                                "E log|A11| = " + num(elog1) + ", E log|A22| = " + num(elog2)));

  const CoordinateRegime c1 = coordinate_regime(a11, model.b1_law(), 1);
  const CoordinateRegime c2 = coordinate_regime(a22, model.b2_law(), 2);
  report.alpha1 = c1.alpha;
  report.alpha2 = c2.alpha;
  report.rho1 = c1.rho;
  report.rho2 = c2.rho;
  report.regime = {c1.regime, c2.regime};
  report.checks.push_back(c1.check);
  report.checks.push_back(c2.check);

  auto unsupported = [&](std::string why) {
    report.theorem_case = TheoremCase::Unsupported;
    report.reason = std::move(why);
    return report;
  };

  if (!stationary) return unsupported("E log|A_ii| < 0 fails");
  if (!c1.alpha || !c2.alpha) return unsupported("a coordinate has no tail index");

  const double alpha1 = *c1.alpha;
  const double alpha2 = *c2.alpha;
  const double alpha_min = std::min(alpha1, alpha2);
  const bool c2_ok = !model.a12_vanishes() && alpha_min < a12_moment_limit(model);
  report.checks.push_back(check(
      "C2", c2_ok,
      model.a12_vanishes()
          ? std::string("P(A12 = 0) = 1")
          : "P(A12 = 0) < 1, E|A12|^" + num(alpha_min) +
                (alpha_min < a12_moment_limit(model) ? " finite" : " infinite")));
  const bool coords_ok =
      c1.check.status == CheckStatus::Pass && c2.check.status == CheckStatus::Pass;

  if (std::abs(alpha1 - alpha2) > kEqualIndexTol) {
    if (!c2_ok) return unsupported("condition C2 fails");
    if (alpha1 < alpha2) {
      if (c1.check.status != CheckStatus::Pass) return unsupported(c1.check.detail);
      if (c2.check.status != CheckStatus::Pass) return unsupported(c2.check.detail);
      if (*c1.regime == TailRegime::KestenGoldie) {
        report.checks.push_back(bar_constant_positivity(model, alpha1, options));
        report.theorem_case = TheoremCase::T31_a1_lt_a2_KG;
      } else {
        report.theorem_case = TheoremCase::T31_a1_lt_a2_Grey;
      }
      report.reason = "alpha1 < alpha2: the tail of W1 is driven by A11 and B1";
      return report;
    }
    if (c2.check.status != CheckStatus::Pass) return unsupported(c2.check.detail);
    if (c1.check.status != CheckStatus::Pass) return unsupported(c1.check.detail);
    if (*c2.regime == TailRegime::KestenGoldie) {
      if (!report.sign_case.a22_nonzero) return unsupported("P(A22 = 0) > 0");
      report.theorem_case = TheoremCase::T31_a1_gt_a2_KG;
    } else {
      report.theorem_case = TheoremCase::T31_a1_gt_a2_Grey;
    }
    report.reason = "alpha1 > alpha2: the tail of W1 is inherited from W2 through M_n";
    return report;
  }

  // Equal indices.
  const double alpha = alpha1;
  const bool both_kg = c1.regime == TailRegime::KestenGoldie &&
                       c2.regime == TailRegime::KestenGoldie;
  report.checks.push_back(check(
      "A1", both_kg && coords_ok,
      "E|A11|^alpha = " + num(abs_moment(a11, alpha)) + ", E|A22|^alpha = " +
          num(abs_moment(a22, alpha)) + " at alpha = " + num(alpha)));
  const double eta_limit = std::min({moment_upper_limit(a11), moment_upper_limit(a22),
                                     a12_moment_limit(model), moment_upper_limit(model.b1_law()),
                                     moment_upper_limit(model.b2_law())});
  report.checks.push_back(check("A2", alpha < eta_limit,
                                "entries have finite moments up to order " + num(eta_limit)));
  report.checks.push_back(
      check("A3", report.sign_case.a22_nonzero,
            report.sign_case.a22_nonzero ? "A22 != 0 a.s." : "A22 has an atom at 0"));
  report.checks.push_back(check("A4", is_non_arithmetic(a11),
                                is_non_arithmetic(a11) ? "log|A11| has a continuous law"
                                                       : "log|A11| is lattice"));

  if (!both_kg) return unsupported("equal indices require the Kesten-Goldie regime in both rows");
  if (!c2_ok) return unsupported("condition C2 fails");
  for (const auto& c : report.checks) {
    if (c.status == CheckStatus::Fail) return unsupported("assumption " + c.id + " fails");
  }

  if (equal_as) {
    try {
      const MuSigma ms = estimate_mu_sigma(model, alpha);
      report.mu = ms.mu;
      const bool finite_sigma = std::isfinite(ms.sigma2.value);
      report.checks.push_back(check("Sigma2", finite_sigma, "sigma^2 = " + num(ms.sigma2.value)));
      if (!finite_sigma) return unsupported("sigma^2 is infinite");
      const bool zero = ms.closed_form ? std::abs(ms.mu.value) < 1e-12
                                       : std::abs(ms.mu.value) <= 3.0 * ms.mu.se;
      report.theorem_case = zero ? TheoremCase::T33_mu_zero : TheoremCase::T33_mu_nonzero;
      report.reason = "A11 = A22 a.s., mu = " + num(ms.mu.value);
    } catch (const Error& e) {
      report.checks.push_back({"Sigma2", CheckStatus::Fail, e.what()});
      return unsupported(std::string("mu/sigma^2 unavailable: ") + e.what());
    }
    return report;
  }

  // Distinct diagonals.
  // A22 independent of A11 with a continuous law makes the ratio continuous too.
  const bool a5 = is_non_arithmetic(a22);
  report.checks.push_back(check("A5", a5,
                                a5 ? "log|A22| and log(|A11|/|A22|) have continuous laws"
                                   : "a diagonal law is lattice"));
  // Every distinct-diagonal coupling has independent entries, so the mixed
  // moments factorise.
  constexpr double eta = 0.1;
  std::string a6_detail;
  bool a6 = false;
  try {
    const double neg = abs_moment(a22, -eta);
    const double m11 = abs_moment(a11, alpha + eta) * neg;
    const double m12 = model.a12_abs_moment(alpha + eta) * neg;
    a6 = std::isfinite(m11) && std::isfinite(m12);
    a6_detail = "eta = 0.1: E|A11|^(a+eta)|A22|^-eta = " + num(m11) +
                ", E|A12|^(a+eta)|A22|^-eta = " + num(m12);
  } catch (const Error& e) {
    a6_detail = std::string("eta = 0.1: ") + e.what();
  }
  report.checks.push_back(check("A6", a6, a6_detail));
  if (!a5) return unsupported("assumption A5 fails");
  if (!a6) return unsupported("assumption A6 fails");
  report.theorem_case = TheoremCase::T34;
  report.reason = "alpha1 = alpha2 with P(A11 != A22) > 0";
  return report;
}

}  // namespace trisre
