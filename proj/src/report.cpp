#include "wolfbench/report.hpp"

#include <charconv>

#include "json.hpp"

namespace wolfbench {

using nlohmann::json;

namespace {

std::string_view mode_name(EvalMode::Kind kind) {
  return kind == EvalMode::Kind::exact ? "exact" : "monte-carlo";
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json rate_list(const std::vector<RateResult>& rates) {
  json out = json::array();
  for (const auto& r : rates) out.push_back(r.value);
  return out;
}

json provenance(const Population& pop, const EvalMode& mode) {
  return {{"seed", mode.seed},
          {"mode", mode_name(mode.kind)},
          {"samples", mode.is_exact() ? json(nullptr) : json(mode.samples)},
          {"users", pop.size()},
          {"length", pop.space().length},
          {"masked", pop.space().masked},
          {"score_model", pop.space().is_score_space()},
          {"distance", to_string(pop.distance())}};
}

json parse_config(std::string_view config_json) {
  if (config_json.empty()) return json::object();
  return json::parse(config_json);
}

std::string number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string eval_report_json(const EvalSummary& s, const Population& pop, const MatcherPolicy& policy,
                             std::string_view config_json) {
  const TemplateSpace& space = pop.space();
  const bool mc = !s.mode.is_exact();
  json ids = json::array();
  for (const auto& u : pop.users()) ids.push_back(u.id);

  json report;
  report["version"] = kToolVersion;
  report["policy"] = policy.spec();
  report["mode"] = mode_name(s.mode.kind);
  report["seed"] = s.mode.seed;
  report["frr"] = s.has_frr_far ? json(s.frr.value) : json(nullptr);
  report["far"] = s.has_frr_far ? json(s.far.value) : json(nullptr);
  report["ar"] = s.ar.value;
  report["wap"] = {{"value", s.wap.value},
                   {"probe_hex", s.wap_probe ? json(encode_template(*s.wap_probe, space)) : json(nullptr)},
                   {"method", s.wap_method}};
  report["lemma1_max_residual"] = optional_number(s.lemma1_max_residual);
  report["per_user"] = {{"ids", ids},
                        {"frr_u", s.has_frr_far ? rate_list(s.frr_u) : json(nullptr)},
                        {"far_u", s.has_frr_far ? rate_list(s.far_u) : json(nullptr)},
                        {"ar_u", rate_list(s.ar_u)}};
  if (mc) {
    report["stderr"] = {{"frr", s.has_frr_far ? optional_number(s.frr.std_error) : json(nullptr)},
                        {"far", s.has_frr_far ? optional_number(s.far.std_error) : json(nullptr)},
                        {"ar", optional_number(s.ar.std_error)},
                        {"wap", optional_number(s.wap.std_error)}};
  } else {
    report["stderr"] = nullptr;
  }
  if (s.wap_probe) {
    report["wolf_certificate"] = {{"probe_hex", encode_template(*s.wap_probe, space)},
                                  {"ar_w", s.wap.value},
                                  {"ar_baseline", s.ar.value},
                                  {"p_level", s.wap.value},
                                  {"is_wolf", s.wap.value > s.ar.value},
                                  {"method", s.wap_method}};
  } else {
    report["wolf_certificate"] = nullptr;
  }
  json top = json::array();
  for (const auto& [probe, value] : s.top_probes) {
    top.push_back({{"probe_hex", encode_template(probe, space)}, {"ar_w", value}});
  }
  report["top_probes"] = top;
  report["provenance"] = provenance(pop, s.mode);
  report["config"] = parse_config(config_json);
  return report.dump(2) + "\n";
}

std::string certificate_json(const WolfCertificate& c, const Population& pop, const MatcherPolicy& policy,
                             const EvalMode& mode, std::string_view config_json) {
  json out;
  out["version"] = kToolVersion;
  out["policy"] = policy.spec();
  out["mode"] = mode_name(mode.kind);
  out["seed"] = mode.seed;
  out["probe_hex"] = encode_template(c.probe, pop.space());
  out["ar_w"] = c.ar_w.value;
  out["ar_w_stderr"] = optional_number(c.ar_w.std_error);
  out["ar_baseline"] = c.ar_baseline.value;
  out["ar_baseline_stderr"] = optional_number(c.ar_baseline.std_error);
  out["p_level"] = c.p_level;
  out["is_wolf"] = c.is_wolf;
  out["method"] = c.method;
  out["provenance"] = provenance(pop, mode);
  out["config"] = parse_config(config_json);
  return out.dump(2) + "\n";
}

std::string sweep_csv_row(double parameter, const EvalSummary& s) {
  std::string row = number(parameter);
  row += ',';
  if (s.has_frr_far) row += number(s.frr.value);
  row += ',';
  if (s.has_frr_far) row += number(s.far.value);
  row += ',';
  row += number(s.ar.value);
  row += ',';
  row += number(s.wap.value);
  row += ',';
  if (s.wap.std_error) row += number(*s.wap.std_error);
  return row;
}

}  // namespace wolfbench
