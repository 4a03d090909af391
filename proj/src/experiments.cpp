#include "trisre/experiments.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "trisre/measure_change.hpp"
#include "trisre/parallel.hpp"

namespace trisre {

namespace {

// Each estimator draws from its own block of stream ids.
constexpr std::uint64_t kStreamBlock = std::uint64_t{1} << 32;

std::uint64_t block(int k) { return kStreamBlock * static_cast<std::uint64_t>(k); }

std::string fmt(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string fmt_band(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 6);
  return std::string(buf, r.ptr);
}

struct W2Constants {
  EstimateWithError plus, minus, plus_half, minus_half;
  EstimateWithError sum() const { return plus + minus; }
};

// Goldie constants of W2 = A22 W2 + B2 by the perpetuity formula.
W2Constants w2_goldie(const TriangularSRE& model, double alpha, double rho2,
                      const PredictOptions& o) {
  const UnivariatePair pair{model.a22_law(), model.b2_law()};
  const GoldiePerpetuity g = goldie_constant_perpetuity(pair, alpha, rho2, o.perpetuity_horizon,
                                                        o.mc_samples, o.seed, block(1), o.workers);
  return {g.at_n.c_plus, g.at_n.c_minus, g.at_half.c_plus, g.at_half.c_minus};
}

void add_w2(AsymptoticPrediction& p, const W2Constants& c) {
  p.components.emplace_back("c2_plus", c.plus);
  p.components.emplace_back("c2_minus", c.minus);
  p.components.emplace_back("c2_plus_half_horizon", c.plus_half);
  p.components.emplace_back("c2_minus_half_horizon", c.minus_half);
}

void predict_lt_kg(AsymptoticPrediction& p, const TriangularSRE& model, const RegimeReport& r,
                   const PredictOptions& o) {
  const double alpha = *r.alpha1;
  const double rho1 = *r.rho1;
  const TruncationPlan plan = truncation_depth(model, o.tol);
  const TripleSampler sampler = [&](RngStream& rng) {
    const StationarySample s = sample_stationary(model, plan, rng);
    const Innovation x = draw_innovation(model, rng);
    return GoldieTriple{x.a11, x.b1 + x.a12 * s.w2, s.w1};
  };
  const bool a_signed = r.sign_case.a11_takes_negative;
  const GoldieConstants c =
      goldie_constant_direct(sampler, a_signed, alpha, rho1, o.mc_samples, o.seed, block(2), o.workers);
  p.tail_index = alpha;
  p.c_plus = c.c_plus;
  p.c_minus = c.c_minus;
  p.constant_formula =
      a_signed ? "A(alpha1), P(A11<0)>0: (2 alpha1 rho1)^-1 E[|D0+A11 W1|^alpha1 - |A11 W1|^alpha1]"
               : "A(alpha1), A11>=0: (alpha1 rho1)^-1 E[((D0+A11 W1)^+-)^alpha1 - ((A11 W1)^+-)^alpha1]";
  p.components.emplace_back("rho1", EstimateWithError::exact(rho1));
}

void predict_lt_grey(AsymptoticPrediction& p, const TriangularSRE& model, const RegimeReport& r) {
  const double alpha = *r.alpha1;
  const auto rv = regular_variation(model.b1_law());
  if (!rv) throw Error(ErrorCode::UnsupportedRegime, "B1 is not regularly varying");
  const Distribution& a11 = model.a11_law();
  const double m_abs = abs_moment(a11, alpha);
  const double m_plus = signed_moment(a11, alpha, Sign::Plus);
  const double m_minus = signed_moment(a11, alpha, Sign::Minus);
  const auto [cp, cm] = grey_constants(rv->p, rv->q, m_abs, m_plus, m_minus);
  p.tail_index = alpha;
  p.ell = rv->ell;
  p.c_plus = EstimateWithError::exact(cp * rv->ell);
  p.c_minus = EstimateWithError::exact(cm * rv->ell);
  p.constant_formula = "B(alpha1): 1/2 {1/(1-E|A11|^a) +- (p-q)/(1-E(A11+)^a+E(A11-)^a)} times ell";
  p.components.emplace_back("p", EstimateWithError::exact(rv->p));
  p.components.emplace_back("q", EstimateWithError::exact(rv->q));
  p.components.emplace_back("E|A11|^alpha", EstimateWithError::exact(m_abs));
}

void predict_gt_kg(AsymptoticPrediction& p, const TriangularSRE& model, const RegimeReport& r,
                   const PredictOptions& o) {
  const double alpha = *r.alpha2;
  const W2Constants c2 = w2_goldie(model, alpha, *r.rho2, o);
  const WEstimate w = estimate_w(model, alpha, o.horizon, o.mc_samples, o.seed, block(3), o.workers);
  p.tail_index = alpha;
  if (!r.sign_case.a22_takes_negative) {
    p.c_plus = c2.plus * w.at_n.plus + c2.minus * w.at_n.minus;
    p.c_minus = c2.plus * w.at_n.minus + c2.minus * w.at_n.plus;
    p.constant_formula = "A(alpha2), A22>=0: c2+ w+- + c2- w-+";
  } else {
    const EstimateWithError half = (c2.sum() * w.at_n.abs).scaled(0.5);
    p.c_plus = half;
    p.c_minus = half;
    p.constant_formula = "A(alpha2), P(A22<0)>0: c2 w / 2";
  }
  add_w2(p, c2);
  p.components.emplace_back("w", w.at_n.abs);
  p.components.emplace_back("w_plus", w.at_n.plus);
  p.components.emplace_back("w_minus", w.at_n.minus);
  p.components.emplace_back("w_half_horizon", w.at_half.abs);
}

void predict_gt_grey(AsymptoticPrediction& p, const TriangularSRE& model, const RegimeReport& r,
                     const PredictOptions& o) {
  const double alpha = *r.alpha2;
  const auto rv = regular_variation(model.b2_law());
  if (!rv) throw Error(ErrorCode::UnsupportedRegime, "B2 is not regularly varying");
  const double q = std::max(abs_moment(model.a11_law(), alpha), abs_moment(model.a22_law(), alpha));
  if (!(q < 1.0)) throw Error(ErrorCode::UnsupportedRegime, "max E|A_ii|^alpha2 >= 1");
  // E|M_l|^a <= E|A12|^a l^max(1,a) q^(l-1) and the partial sum is at least
  // w_1 = E|A12|^a, so the series is cut once l^max(1,a) q^(l-1) < 1e-4.
  std::int64_t terms = 1;
  while (std::pow(static_cast<double>(terms), std::max(1.0, alpha)) *
             std::pow(q, static_cast<double>(terms - 1)) >= 1e-4) {
    ++terms;
  }
  const double pp = rv->p, qq = rv->q;
  auto stats = parallel_mean<2>(
      o.mc_samples, o.seed, block(4), o.workers, [&](RngStream& rng, std::array<double, 2>& out) {
        double s = 0.0, prod = 1.0, sum_plus = 0.0, sum_minus = 0.0;
        for (std::int64_t l = 0; l < terms; ++l) {
          const Innovation x = draw_innovation(model, rng);
          s = s * x.a22 + prod * x.a12;  // s = M_{l+1}
          prod *= x.a11;
          const double mp = s > 0.0 ? std::pow(s, alpha) : 0.0;
          const double mm = s < 0.0 ? std::pow(-s, alpha) : 0.0;
          sum_plus += mp * pp + mm * qq;
          sum_minus += mm * pp + mp * qq;
        }
        out = {sum_plus, sum_minus};
      });
  p.tail_index = alpha;
  p.ell = rv->ell;
  p.c_plus = EstimateWithError::from(stats[0], o.seed, block(4)).scaled(rv->ell);
  p.c_minus = EstimateWithError::from(stats[1], o.seed, block(4)).scaled(rv->ell);
  p.constant_formula = "B(alpha2): sum_i w_i+- p + w_i-+ q, times ell";
  p.components.emplace_back("series_terms", EstimateWithError::exact(static_cast<double>(terms)));
  p.components.emplace_back("p", EstimateWithError::exact(pp));
  p.components.emplace_back("q", EstimateWithError::exact(qq));
}

void predict_t33(AsymptoticPrediction& p, const TriangularSRE& model, const RegimeReport& r,
                 const PredictOptions& o) {
  const double alpha = *r.alpha1;
  const double rho1 = *r.rho1;
  const W2Constants c2 = w2_goldie(model, alpha, *r.rho2, o);
  const MuSigma ms = estimate_mu_sigma(model, alpha);
  p.tail_index = alpha;
  add_w2(p, c2);
  p.components.emplace_back("mu", ms.mu);
  p.components.emplace_back("sigma2", ms.sigma2);
  p.components.emplace_back("rho1", EstimateWithError::exact(rho1));
  if (r.theorem_case == TheoremCase::T33_mu_zero) {
    const double big_c = clt_constant(ms.sigma2.value, rho1, alpha);
    const EstimateWithError half = c2.sum().scaled(big_c / 2.0);
    p.log_beta = alpha / 2.0;
    p.c_plus = half;
    p.c_minus = half;
    p.constant_formula = "mu = 0: c2 C / 2 with C = sigma^a rho1^(-a/2) E|N|^a";
    p.components.emplace_back("C", EstimateWithError::exact(big_c));
    return;
  }
  const double f = std::pow(std::abs(ms.mu.value) / rho1, alpha);
  p.log_beta = alpha;
  const bool positive = ms.mu.value > 0.0;
  p.c_plus = (positive ? c2.plus : c2.minus).scaled(f);
  p.c_minus = (positive ? c2.minus : c2.plus).scaled(f);
  p.constant_formula = positive ? "mu > 0: c2+- mu^a rho1^-a"
                                : "mu < 0: c2-+ |mu|^a rho1^-a";
}

void predict_t34(AsymptoticPrediction& p, const TriangularSRE& model, const RegimeReport& r,
                 const PredictOptions& o) {
  const double alpha = *r.alpha1;
  const double rho1 = *r.rho1;
  const W2Constants c2 = w2_goldie(model, alpha, *r.rho2, o);
  const CREstimate cr = estimate_cR(model, alpha, o.horizon, o.mc_samples, o.seed, block(5), o.workers);
  p.tail_index = alpha;
  p.log_beta = 1.0;
  const double f = alpha / rho1;
  const bool product_form = !r.sign_case.a22_takes_negative && !r.sign_case.a11_takes_negative;
  if (product_form) {
    p.c_plus = (c2.plus * cr.at_n.plus + c2.minus * cr.at_n.minus).scaled(f);
    p.c_minus = (c2.minus * cr.at_n.plus + c2.plus * cr.at_n.minus).scaled(f);
    p.constant_formula = "A22>0, A11>=0: (c2+- cR+ + c2-+ cR-) alpha / rho1";
  } else {
    const EstimateWithError d = (c2.sum() * cr.at_n.abs).scaled(0.5 * f);
    p.c_plus = d;
    p.c_minus = d;
    p.constant_formula = "signed diagonal: c2 cR / 2 alpha / rho1";
  }
  add_w2(p, c2);
  p.components.emplace_back("c_R", cr.at_n.abs);
  p.components.emplace_back("c_R_plus", cr.at_n.plus);
  p.components.emplace_back("c_R_minus", cr.at_n.minus);
  p.components.emplace_back("c_R_half_horizon", cr.at_half.abs);
  p.components.emplace_back("rho1", EstimateWithError::exact(rho1));
}

const EstimateWithError* component(const AsymptoticPrediction& p, std::string_view name) {
  for (const auto& [n, e] : p.components) {
    if (n == name) return &e;
  }
  return nullptr;
}

bool is_t31(TheoremCase c) {
  return c == TheoremCase::T31_a1_lt_a2_KG || c == TheoremCase::T31_a1_lt_a2_Grey ||
         c == TheoremCase::T31_a1_gt_a2_KG || c == TheoremCase::T31_a1_gt_a2_Grey;
}

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

template <typename Fn>
void guarded(ScenarioReport& report, const char* section, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    report.errors.push_back({section, e.code(), e.what()});
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

AsymptoticPrediction predict(const TriangularSRE& model, const PredictOptions& options) {
  ClassifyOptions co;
  co.seed = options.seed;
  co.mc_samples = options.mc_samples;
  co.workers = options.workers;
  return predict(model, classify(model, co), options);
}

AsymptoticPrediction predict(const TriangularSRE& model, const RegimeReport& regime,
                             const PredictOptions& options) {
  AsymptoticPrediction p;
  p.source = regime.theorem_case;
  switch (regime.theorem_case) {
    case TheoremCase::T31_a1_lt_a2_KG: predict_lt_kg(p, model, regime, options); break;
    case TheoremCase::T31_a1_lt_a2_Grey: predict_lt_grey(p, model, regime); break;
    case TheoremCase::T31_a1_gt_a2_KG: predict_gt_kg(p, model, regime, options); break;
    case TheoremCase::T31_a1_gt_a2_Grey: predict_gt_grey(p, model, regime, options); break;
    case TheoremCase::T33_mu_zero:
    case TheoremCase::T33_mu_nonzero: predict_t33(p, model, regime, options); break;
    case TheoremCase::T34: predict_t34(p, model, regime, options); break;
    case TheoremCase::Unsupported:
      throw Error(ErrorCode::UnsupportedRegime, "model is unsupported: " + regime.reason);
  }
  return p;
}

Verdict absolute_verdict(std::string id, double predicted, double estimated, double se,
                         double half_width, bool gating, std::string note) {
  Verdict v;
  v.check_id = std::move(id);
  v.predicted = predicted;
  v.estimated = estimated;
  v.se = se;
  v.band = "+-" + fmt_band(half_width);
  v.pass = std::abs(estimated - predicted) <= half_width;
  v.gating = gating;
  v.note = std::move(note);
  return v;
}

Verdict ratio_verdict(std::string id, double predicted, double estimated, double se, double lo,
                      double hi, bool gating, std::string note) {
  Verdict v;
  v.check_id = std::move(id);
  v.predicted = predicted;
  v.estimated = estimated;
  v.se = se;
  v.band = "x[" + fmt_band(lo) + ".." + fmt_band(hi) + "]";
  const double ratio = estimated / predicted;
  v.pass = predicted > 0.0 && ratio >= lo && ratio <= hi;
  v.gating = gating;
  v.note = std::move(note);
  return v;
}

bool ScenarioReport::passed() const noexcept {
  if (!errors.empty() || verdicts.empty()) return false;
  for (const auto& v : verdicts) {
    if (v.gating && !v.pass) return false;
  }
  return true;
}

ScenarioReport run_scenario(const ScenarioConfig& config) {
  config.validate();
  ScenarioReport report;
  report.name = config.name;
  report.config = config;
  report.workers = resolve_workers(config.workers);
  const TriangularSRE& model = config.model;
  Stopwatch total, phase;

  ClassifyOptions co;
  co.seed = config.seed;
  co.mc_samples = config.mc_samples;
  co.workers = config.workers;
  report.regime = classify(model, co);
  report.runtime_seconds.emplace_back("classify", phase.lap());

  PredictOptions po;
  po.mc_samples = config.mc_samples;
  po.horizon = config.horizon;
  po.perpetuity_horizon = config.perpetuity_horizon;
  po.tol = config.tol;
  po.seed = config.seed;
  po.workers = config.workers;
  guarded(report, "prediction", [&] { report.prediction = predict(model, report.regime, po); });
  report.runtime_seconds.emplace_back("predict", phase.lap());

  std::vector<double> w1, w2;
  guarded(report, "sampling", [&] {
    report.plan = truncation_depth(model, config.tol);
    const auto batch =
        sample_stationary_batch(model, config.tol, config.samples, config.seed, 0, config.workers);
    w1.reserve(batch.size());
    w2.reserve(batch.size());
    for (const auto& s : batch) {
      w1.push_back(s.w1);
      w2.push_back(s.w2);
    }
  });
  report.runtime_seconds.emplace_back("sampling", phase.lap());

  TailSummary& emp = report.empirical;
  const auto& pred = report.prediction;
  const RegimeReport& regime = report.regime;
  const TheoremCase tc = regime.theorem_case;
  if (!w1.empty()) {
    emp.hill_k = default_hill_k(w1.size());
    const EmpiricalTail abs1(w1, TailSide::Absolute);
    guarded(report, "hill_w2", [&] { emp.hill_w2 = hill(EmpiricalTail(w2), emp.hill_k); });
    guarded(report, "hill_w1", [&] { emp.hill_w1 = hill(abs1, emp.hill_k); });
    // One-sided Hill estimates are informational; a tail may be empty.
    try {
      emp.hill_w1_plus = hill(EmpiricalTail(w1, TailSide::Positive), emp.hill_k);
    } catch (const Error&) {
    }
    try {
      emp.hill_w1_minus = hill(EmpiricalTail(w1, TailSide::Negative), emp.hill_k);
    } catch (const Error&) {
    }
    guarded(report, "grid", [&] { emp.grid = percentile_grid(abs1); });
    if (pred && !emp.grid.empty()) {
      guarded(report, "log_factor",
              [&] { emp.beta_fit = log_factor_regression(abs1, pred->tail_index, emp.grid); });
      try {
        emp.scaled_ccdf_plus = scaled_ccdf_average(EmpiricalTail(w1, TailSide::Positive),
                                                   pred->tail_index, emp.grid, pred->log_beta);
      } catch (const Error&) {
      }
      try {
        emp.scaled_ccdf_minus = scaled_ccdf_average(EmpiricalTail(w1, TailSide::Negative),
                                                    pred->tail_index, emp.grid, pred->log_beta);
      } catch (const Error&) {
      }
    }
  }

  // Moment laws behind the log factors.
  if (tc == TheoremCase::T33_mu_zero || tc == TheoremCase::T33_mu_nonzero) {
    guarded(report, "moment_law", [&] {
      const double alpha = *regime.alpha1;
      const MuSigma ms = estimate_mu_sigma(model, alpha);
      const auto pair = TiltedPair::make(model, Diagonal::First, alpha);
      const auto f = [alpha](std::span<const Innovation> path) {
        double s = 0.0;
        for (const auto& x : path) s += to_vu(x).u;
        return std::pow(std::abs(s), alpha);
      };
      const double n = static_cast<double>(config.horizon);
      const bool zero = tc == TheoremCase::T33_mu_zero;
      const double norm = std::pow(n, zero ? alpha / 2.0 : alpha);
      const EstimateWithError m =
          expect_tilted(pair, config.horizon, config.mc_samples, f, config.seed, block(6),
                        config.workers)
              .scaled(1.0 / norm);
      const double target = zero ? std::pow(ms.sigma2.value, alpha / 2.0) * abs_normal_moment(alpha)
                                 : std::pow(std::abs(ms.mu.value), alpha);
      emp.extra.emplace_back(zero ? "E|M_n|^a / n^(a/2)" : "E|M_n|^a / n^a", m);
      report.verdicts.push_back(absolute_verdict(
          "M_n.moment_law", target, m.value, m.se, std::max(4.0 * m.se, 0.1 * target), true,
          zero ? "E|M_n|^a n^(-a/2) -> sigma^a E|N|^a" : "E|M_n|^a n^(-a) -> |mu|^a"));
    });
  }
  if (tc == TheoremCase::T34) {
    guarded(report, "c_R_tail_cross_check", [&] {
      const double alpha = *regime.alpha1;
      const TailCrossCheck x = cR_tail_cross_check(model, alpha, config.horizon, config.mc_samples,
                                                   config.seed, block(7), config.workers);
      emp.extra.emplace_back("rho_V", x.rho_v);
      emp.extra.emplace_back("c_R_from_tail", EstimateWithError::exact(x.c_R_from_tail));
      if (pred) {
        if (const auto* cr = component(*pred, "c_R")) {
          report.verdicts.push_back(ratio_verdict(
              "c_R.tail_cross_check", cr->value, x.c_R_from_tail, 0.0, 0.5, 2.0, false,
              "rho_V lim x^a P_a(|X0|>x)"));
        }
      }
    });
  }
  report.runtime_seconds.emplace_back("estimation", phase.lap());

  // Verdicts.
  const double index_band = 0.1;
  if (emp.hill_w2 && regime.alpha2) {
    const double a2 = *regime.alpha2;
    report.verdicts.push_back(absolute_verdict("W2.hill", a2, emp.hill_w2->value, emp.hill_w2->se,
                                               std::max(4.0 * emp.hill_w2->se, index_band * a2),
                                               true, "Hill index of |W2|, k = n^(2/3)"));
  }
  if (pred) {
    if (emp.hill_w1) {
      const double a = pred->tail_index;
      report.verdicts.push_back(absolute_verdict(
          "W1.hill", a, emp.hill_w1->value, emp.hill_w1->se,
          std::max(4.0 * emp.hill_w1->se, index_band * a), is_t31(tc),
          is_t31(tc) ? "Hill index of |W1|"
                     : "Hill index of |W1|; biased by the (log x)^beta factor, informational"));
    }
    if (emp.beta_fit) {
      report.verdicts.push_back(absolute_verdict(
          "W1.log_factor", pred->log_beta, emp.beta_fit->beta, 0.0, 0.25, false,
          "slope of log(x^a P(|W1|>x)) on log log x; converges slowly, informational"));
    }
    const bool gate_constant = tc == TheoremCase::T31_a1_gt_a2_KG;
    const auto constant_verdict = [&](const char* id, const EstimateWithError& c,
                                      const std::optional<double>& e) {
      if (!(c.value > 0.0) || !e) return;
      report.verdicts.push_back(ratio_verdict(
          id, c.value, *e, c.se, 0.5, 2.0, gate_constant,
          "x^a (log x)^-beta P(+-W1>x) averaged over the |W1| percentile grid; pre-asymptotic band"));
    };
    constant_verdict("W1.constant_plus", pred->c_plus, emp.scaled_ccdf_plus);
    constant_verdict("W1.constant_minus", pred->c_minus, emp.scaled_ccdf_minus);

    const EstimateWithError total_c = pred->c_plus + pred->c_minus;
    Verdict pos;
    pos.check_id = "prediction.positive";
    pos.predicted = 0.0;
    pos.estimated = total_c.value;
    pos.se = total_c.se;
    pos.band = "> 4se";
    pos.pass = total_c.value - 4.0 * total_c.se > 0.0;
    pos.gating = true;
    pos.note = "c_plus + c_minus - 4 se > 0";
    report.verdicts.push_back(pos);

    if (tc == TheoremCase::T34) {
      const auto* a = component(*pred, "c_R");
      const auto* b = component(*pred, "c_R_half_horizon");
      if (a && b) {
        report.verdicts.push_back(absolute_verdict(
            "c_R.convergence", a->value, b->value, std::hypot(a->se, b->se),
            4.0 * std::hypot(a->se, b->se) + 0.05 * std::abs(a->value), true,
            "c_R at n (predicted column) against n/2 (estimated column)"));
      }
    }
  }
  report.runtime_seconds.emplace_back("total", total.lap());
  return report;
}

std::string verdicts_csv(const std::vector<Verdict>& verdicts) {
  std::string out = "check_id,predicted,estimated,se,band,pass\n";
  for (const auto& v : verdicts) {
    out += csv_field(v.check_id) + "," + fmt(v.predicted) + "," + fmt(v.estimated) + "," +
           fmt(v.se) + "," + csv_field(v.band) + "," + (v.pass ? "true" : "false") + "\n";
  }
  return out;
}

Json to_json(const ScenarioReport& r) {
  Json j;
  j["schema"] = kConfigSchema;
  j["name"] = r.name;
  j["passed"] = r.passed();
  j["config"] = to_json(r.config);
  j["regime"] = to_json(r.regime);
  j["prediction"] = r.prediction ? to_json(*r.prediction) : Json(nullptr);
  if (r.plan) {
    j["truncation"] = {{"depth", r.plan->depth},
                       {"eps", r.plan->eps},
                       {"q", r.plan->q},
                       {"bound", r.plan->bound}};
  } else {
    j["truncation"] = nullptr;
  }
  const TailSummary& e = r.empirical;
  auto opt = [](const std::optional<EstimateWithError>& x) { return x ? to_json(*x) : Json(nullptr); };
  auto optd = [](const std::optional<double>& x) {
    return x && std::isfinite(*x) ? Json(*x) : Json(nullptr);
  };
  Json emp;
  emp["hill_k"] = e.hill_k;
  emp["hill"] = {{"w2", opt(e.hill_w2)},
                 {"w1", opt(e.hill_w1)},
                 {"w1_plus", opt(e.hill_w1_plus)},
                 {"w1_minus", opt(e.hill_w1_minus)}};
  if (e.beta_fit) {
    emp["log_factor"] = {{"beta", e.beta_fit->beta},
                         {"intercept", e.beta_fit->intercept},
                         {"r2", e.beta_fit->r2},
                         {"points", e.beta_fit->points}};
  } else {
    emp["log_factor"] = nullptr;
  }
  emp["grid"] = e.grid;
  emp["scaled_ccdf"] = {{"plus", optd(e.scaled_ccdf_plus)}, {"minus", optd(e.scaled_ccdf_minus)}};
  Json extra = Json::object();
  for (const auto& [name, v] : e.extra) extra[name] = to_json(v);
  emp["extra"] = extra;
  j["empirical"] = emp;
  Json verdicts = Json::array();
  for (const auto& v : r.verdicts) {
    verdicts.push_back({{"check_id", v.check_id},
                        {"predicted", std::isfinite(v.predicted) ? Json(v.predicted) : Json(nullptr)},
                        {"estimated", std::isfinite(v.estimated) ? Json(v.estimated) : Json(nullptr)},
                        {"se", std::isfinite(v.se) ? Json(v.se) : Json(nullptr)},
                        {"band", v.band},
                        {"pass", v.pass},
                        {"gating", v.gating},
                        {"note", v.note}});
  }
  j["verdicts"] = verdicts;
  Json errors = Json::array();
  for (const auto& er : r.errors) {
    errors.push_back({{"section", er.section}, {"code", to_string(er.code)}, {"message", er.message}});
  }
  j["errors"] = errors;
  j["provenance"] = {{"seed", r.config.seed},
                     {"samples", r.config.samples},
                     {"mc_samples", r.config.mc_samples},
                     {"rng", "philox4x32-10"},
                     {"chunk_size", kChunkSize},
                     {"workers", r.workers}};
  Json rt = Json::object();
  for (const auto& [name, s] : r.runtime_seconds) rt[name] = s;
  j["runtime_seconds"] = rt;
  return j;
}

std::filesystem::path emit_report(const ScenarioReport& report, ReportFormat format,
                                  const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  const std::filesystem::path path =
      dir / (report.name + (format == ReportFormat::Json ? ".json" : ".csv"));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  if (format == ReportFormat::Json) {
    out << to_json(report).dump(2) << "\n";
  } else {
    out << verdicts_csv(report.verdicts);
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
  return path;
}

std::vector<ScenarioConfig> builtin_suite(bool quick) {
  const auto C = Distribution::constant;
  const auto LN = Distribution::lognormal;
  const Distribution off = LN(0.0, 0.5);
  std::vector<std::pair<std::string, TriangularSRE>> models = {
      {"t31_lt_kg", IndependentEntries{LN(-1, 1), off, LN(-2, 1), C(1), C(1)}},
      {"t31_lt_grey", IndependentEntries{LN(-2, 1), off, LN(-1.5, 1),
                                         Distribution::two_sided_pareto(1.5, 1, 0.5), C(1)}},
      {"t31_gt_kg", IndependentEntries{LN(-4, 1), off, LN(-1, 1), C(1), C(1)}},
      {"t31_gt_grey", IndependentEntries{LN(-2, 1), off, LN(-1, 1), C(1),
                                         Distribution::two_sided_pareto(1.5, 1, 0.5)}},
      {"t33_mu_zero",
       EqualDiagonal{LN(-1, 1), ProportionalToDiagonal{Distribution::normal(0, 1)}, C(1), C(1)}},
      {"t33_mu_nonzero", EqualDiagonal{LN(-1, 1), ProportionalToDiagonal{C(0.5)}, C(1), C(1)}},
      {"t34", IndependentEntries{LN(-1, 1), off, LN(-0.5, std::sqrt(0.5)), C(1), C(1)}},
  };
  std::vector<ScenarioConfig> out;
  std::uint64_t seed = 1;
  for (auto& [name, model] : models) {
    ScenarioConfig c;
    c.name = name;
    c.model = model;
    c.seed = seed++;
    if (quick) {
      c.samples = 10'000;
      c.mc_samples = 20'000;
      c.horizon = 100;
      c.perpetuity_horizon = 100;
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace trisre
