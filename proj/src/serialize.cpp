#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "trisre/experiments.hpp"

namespace trisre {

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

// Non-finite doubles have no JSON literal; they are written as null.
Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json optional_number(const std::optional<double>& x) { return x ? number(*x) : Json(nullptr); }

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) config_error(where + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) config_error(where + ": missing field '" + key + "'");
  return *it;
}

double number_field(const Json& j, const char* key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!v.is_number()) config_error(where + "." + key + ": expected a number");
  return v.get<double>();
}

std::string string_field(const Json& j, const char* key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_string()) config_error(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

std::uint64_t count_field(const Json& j, const char* key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    config_error(where + "." + key + ": expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

void reject_unknown(const Json& j, std::initializer_list<const char*> allowed,
                    const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) config_error(where + ": unknown field '" + key + "'");
  }
}

Distribution distribution_at(const Json& j, const std::string& where) {
  const std::string kind = string_field(j, "kind", where);
  const std::string at = where + "(" + kind + ")";
  if (kind == "constant") {
    reject_unknown(j, {"kind", "value"}, at);
    return Distribution::constant(number_field(j, "value", at));
  }
  if (kind == "normal") {
    reject_unknown(j, {"kind", "mean", "sd"}, at);
    return Distribution::normal(number_field(j, "mean", at), number_field(j, "sd", at));
  }
  if (kind == "lognormal") {
    reject_unknown(j, {"kind", "mu", "sigma"}, at);
    return Distribution::lognormal(number_field(j, "mu", at), number_field(j, "sigma", at));
  }
  if (kind == "signed_lognormal") {
    reject_unknown(j, {"kind", "mu", "sigma", "p_pos"}, at);
    return Distribution::signed_lognormal(number_field(j, "mu", at), number_field(j, "sigma", at),
                                          number_field(j, "p_pos", at));
  }
  if (kind == "two_sided_pareto") {
    reject_unknown(j, {"kind", "alpha", "scale", "p_pos"}, at);
    return Distribution::two_sided_pareto(number_field(j, "alpha", at),
                                          number_field(j, "scale", at),
                                          number_field(j, "p_pos", at));
  }
  if (kind == "uniform") {
    reject_unknown(j, {"kind", "a", "b"}, at);
    return Distribution::uniform(number_field(j, "a", at), number_field(j, "b", at));
  }
  if (kind == "scaled") {
    reject_unknown(j, {"kind", "inner", "factor"}, at);
    return Distribution::scaled(distribution_at(field(j, "inner", at), at + ".inner"),
                                number_field(j, "factor", at));
  }
  config_error(where + ": unknown distribution kind '" + kind + "'");
}

}  // namespace

Json to_json(const Distribution& d) {
  return std::visit(
      [](const auto& l) -> Json {
        using T = std::decay_t<decltype(l)>;
        Json j;
        if constexpr (std::is_same_v<T, law::Constant>) {
          j["kind"] = "constant";
          j["value"] = l.value;
        } else if constexpr (std::is_same_v<T, law::Normal>) {
          j["kind"] = "normal";
          j["mean"] = l.mean;
          j["sd"] = l.sd;
        } else if constexpr (std::is_same_v<T, law::Lognormal>) {
          j["kind"] = "lognormal";
          j["mu"] = l.mu;
          j["sigma"] = l.sigma;
        } else if constexpr (std::is_same_v<T, law::SignedLognormal>) {
          j["kind"] = "signed_lognormal";
          j["mu"] = l.mu;
          j["sigma"] = l.sigma;
          j["p_pos"] = l.p_pos;
        } else if constexpr (std::is_same_v<T, law::TwoSidedPareto>) {
          j["kind"] = "two_sided_pareto";
          j["alpha"] = l.alpha;
          j["scale"] = l.scale;
          j["p_pos"] = l.p_pos;
        } else if constexpr (std::is_same_v<T, law::Uniform>) {
          j["kind"] = "uniform";
          j["a"] = l.a;
          j["b"] = l.b;
        } else {
          j["kind"] = "scaled";
          j["inner"] = to_json(*l.inner);
          j["factor"] = l.factor;
        }
        return j;
      },
      d.variant());
}

Distribution distribution_from_json(const Json& j) { return distribution_at(j, "distribution"); }

Json to_json(const TriangularSRE& m) {
  Json j;
  if (const auto* i = std::get_if<IndependentEntries>(&m.coupling())) {
    j["coupling"] = "independent";
    j["a11"] = to_json(i->a11);
    j["a12"] = to_json(i->a12);
    j["a22"] = to_json(i->a22);
    j["b1"] = to_json(i->b1);
    j["b2"] = to_json(i->b2);
    return j;
  }
  const auto& e = std::get<EqualDiagonal>(m.coupling());
  j["coupling"] = "equal_diagonal";
  j["d"] = to_json(e.d);
  Json off;
  if (const auto* p = std::get_if<ProportionalToDiagonal>(&e.a12_mode)) {
    off["mode"] = "proportional";
    off["factor"] = to_json(p->factor);
  } else {
    off["mode"] = "independent";
    off["law"] = to_json(std::get<IndependentOffDiagonal>(e.a12_mode).a12);
  }
  j["a12"] = off;
  j["b1"] = to_json(e.b1);
  j["b2"] = to_json(e.b2);
  return j;
}

TriangularSRE model_from_json(const Json& j) {
  const std::string where = "model";
  const std::string coupling = string_field(j, "coupling", where);
  auto law = [&](const char* key) { return distribution_at(field(j, key, where), where + "." + key); };
  if (coupling == "independent") {
    reject_unknown(j, {"coupling", "a11", "a12", "a22", "b1", "b2"}, where);
    return IndependentEntries{law("a11"), law("a12"), law("a22"), law("b1"), law("b2")};
  }
  if (coupling == "equal_diagonal") {
    reject_unknown(j, {"coupling", "d", "a12", "b1", "b2"}, where);
    const Json& off = field(j, "a12", where);
    const std::string mode = string_field(off, "mode", where + ".a12");
    EqualDiagonal e;
    e.d = law("d");
    if (mode == "proportional") {
      reject_unknown(off, {"mode", "factor"}, where + ".a12");
      e.a12_mode = ProportionalToDiagonal{distribution_at(field(off, "factor", where), where + ".a12.factor")};
    } else if (mode == "independent") {
      reject_unknown(off, {"mode", "law"}, where + ".a12");
      e.a12_mode = IndependentOffDiagonal{distribution_at(field(off, "law", where), where + ".a12.law")};
    } else {
      config_error(where + ".a12: unknown mode '" + mode + "'");
    }
    e.b1 = law("b1");
    e.b2 = law("b2");
    return e;
  }
  config_error(where + ": unknown coupling '" + coupling + "'");
}

Json to_json(const EstimateWithError& e) {
  Json j;
  j["value"] = number(e.value);
  j["se"] = number(e.se);
  j["n_samples"] = e.n_samples;
  j["seed"] = e.seed;
  j["stream_base"] = e.stream_base;
  return j;
}

EstimateWithError estimate_from_json(const Json& j) {
  EstimateWithError e;
  e.value = number_field(j, "value", "estimate");
  e.se = number_field(j, "se", "estimate");
  e.n_samples = count_field(j, "n_samples", "estimate");
  e.seed = count_field(j, "seed", "estimate");
  e.stream_base = count_field(j, "stream_base", "estimate");
  return e;
}

Json to_json(const RegimeReport& r) {
  Json j;
  j["theorem_case"] = to_string(r.theorem_case);
  j["reason"] = r.reason;
  j["alpha1"] = optional_number(r.alpha1);
  j["alpha2"] = optional_number(r.alpha2);
  j["rho1"] = optional_number(r.rho1);
  j["rho2"] = optional_number(r.rho2);
  Json regime = Json::array();
  for (const auto& g : r.regime) regime.push_back(g ? Json(to_string(*g)) : Json(nullptr));
  j["regime"] = regime;
  j["diagonal_relation"] = to_string(r.diagonal_relation);
  j["sign_case"] = {{"a11_takes_negative", r.sign_case.a11_takes_negative},
                    {"a22_takes_negative", r.sign_case.a22_takes_negative},
                    {"a22_nonzero", r.sign_case.a22_nonzero}};
  j["mu"] = r.mu ? to_json(*r.mu) : Json(nullptr);
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"id", c.id}, {"status", to_string(c.status)}, {"detail", c.detail}});
  }
  j["checks"] = checks;
  return j;
}

Json to_json(const AsymptoticPrediction& p) {
  Json j;
  j["source"] = to_string(p.source);
  j["tail_index"] = number(p.tail_index);
  j["log_beta"] = number(p.log_beta);
  j["c_plus"] = to_json(p.c_plus);
  j["c_minus"] = to_json(p.c_minus);
  j["ell"] = number(p.ell);
  j["constant_formula"] = p.constant_formula;
  Json comps = Json::object();
  for (const auto& [name, e] : p.components) comps[name] = to_json(e);
  j["components"] = comps;
  return j;
}

std::string_view to_string(ReportFormat f) noexcept { return f == ReportFormat::Json ? "json" : "csv"; }

ReportFormat report_format_from_string(std::string_view s) {
  if (s == "json") return ReportFormat::Json;
  if (s == "csv") return ReportFormat::Csv;
  config_error("unknown report format '" + std::string(s) + "'");
}

Json to_json(const ScenarioConfig& c) {
  Json j;
  j["schema"] = kConfigSchema;
  j["name"] = c.name;
  j["model"] = to_json(c.model);
  j["samples"] = c.samples;
  j["tol"] = c.tol;
  j["seed"] = c.seed;
  j["mc_samples"] = c.mc_samples;
  j["horizon"] = c.horizon;
  j["perpetuity_horizon"] = c.perpetuity_horizon;
  j["workers"] = c.workers;
  j["output"] = {{"dir", c.out_dir.string()}, {"format", to_string(c.format)}};
  return j;
}

ScenarioConfig config_from_json(const Json& j) {
  const std::string where = "config";
  reject_unknown(j,
                 {"schema", "name", "model", "samples", "tol", "seed", "mc_samples", "horizon",
                  "perpetuity_horizon", "workers", "output"},
                 where);
  const Json& schema = field(j, "schema", where);
  if (!schema.is_number_integer() || schema.get<int>() != kConfigSchema) {
    config_error(where + ": unsupported schema (expected " + std::to_string(kConfigSchema) + ")");
  }
  ScenarioConfig c;
  c.model = model_from_json(field(j, "model", where));
  if (j.contains("name")) c.name = string_field(j, "name", where);
  if (j.contains("samples")) c.samples = count_field(j, "samples", where);
  if (j.contains("tol")) c.tol = number_field(j, "tol", where);
  if (j.contains("seed")) c.seed = count_field(j, "seed", where);
  if (j.contains("mc_samples")) c.mc_samples = count_field(j, "mc_samples", where);
  if (j.contains("horizon")) c.horizon = static_cast<std::int64_t>(count_field(j, "horizon", where));
  if (j.contains("perpetuity_horizon")) {
    c.perpetuity_horizon = static_cast<std::int64_t>(count_field(j, "perpetuity_horizon", where));
  }
  if (j.contains("workers")) c.workers = static_cast<unsigned>(count_field(j, "workers", where));
  if (j.contains("output")) {
    const Json& out = j["output"];
    reject_unknown(out, {"dir", "format"}, where + ".output");
    if (out.contains("dir")) c.out_dir = string_field(out, "dir", where + ".output");
    if (out.contains("format")) {
      c.format = report_format_from_string(string_field(out, "format", where + ".output"));
    }
  }
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    config_error(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void ScenarioConfig::validate() const {
  if (samples < 2 || mc_samples < 2) config_error("sample counts must be at least 2");
  if (horizon < 1 || perpetuity_horizon < 1) config_error("horizons must be positive");
  if (!(tol > 0.0 && tol < 1.0)) config_error("tol must lie in (0, 1)");
  if (name.empty() || name.find_first_of("/\\") != std::string::npos) {
    config_error("name must be a non-empty file stem");
  }
}

}  // namespace trisre
