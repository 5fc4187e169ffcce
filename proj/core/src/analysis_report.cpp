#include <cstdio>
#include <set>

#include <nlohmann/json.hpp>

#include "loco/analysis.hpp"
#include "loco/error.hpp"
#include "text_util.hpp"

namespace loco::analysis {

using nlohmann::ordered_json;

TrialSummary summarize_trials(std::span<const TrialLog> logs) {
  std::map<std::string, std::map<Condition, double>> sums;
  for (const auto& log : logs) {
    if (log.aborted) continue;
    sums[log.participant_id][log.condition] += log.completion_time_s;
  }

  TrialSummary out;
  std::map<Condition, std::vector<double>> per_condition;
  for (const auto& [participant, by_condition] : sums) {
    for (const auto& [condition, total] : by_condition) {
      per_condition[condition].push_back(total);
      ++out.participant_condition_sums;
    }
    const auto s = by_condition.find(Condition::Scooter);
    const auto j = by_condition.find(Condition::Joystick);
    if (s == by_condition.end() || j == by_condition.end()) {
      out.excluded.push_back(participant);
      continue;
    }
    out.participants.push_back(participant);
    out.completion.values_a.push_back(s->second);
    out.completion.values_b.push_back(j->second);
  }
  for (const auto& [condition, values] : per_condition)
    out.per_condition[condition] = describe(values);
  return out;
}

std::string descriptives_to_json(const std::string& measure,
                                 const std::map<Condition, Descriptives>& stats) {
  ordered_json j;
  j["measure"] = measure;
  j["conditions"] = ordered_json::object();
  for (const auto& [c, d] : stats)
    j["conditions"][std::string(to_string(c))] = {{"n", d.n}, {"mean", d.mean}, {"sd", d.sd}};
  return j.dump(2) + "\n";
}

std::map<Condition, Descriptives> descriptives_from_json(std::string_view document,
                                                         std::string* measure) {
  try {
    const auto j = ordered_json::parse(document);
    if (measure) *measure = j.value("measure", std::string{});
    std::map<Condition, Descriptives> out;
    for (const auto& [name, d] : j.at("conditions").items())
      out[parse_condition(name)] = {d.value("n", std::size_t{0}), d.at("mean").get<double>(),
                                    d.at("sd").get<double>()};
    return out;
  } catch (const ordered_json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("descriptives: ") + e.what());
  }
}

AnalysisReport analyze(std::span<const TrialLog> logs, std::span<const ResponseRow> responses,
                       const ScoringOptions& options) {
  AnalysisReport report;
  report.trials = summarize_trials(logs);
  for (const auto& p : report.trials.excluded)
    report.warnings.push_back("participant " + p + " lacks a condition; excluded from pairing");

  auto run = [&](const PairedSample& sample, const std::string& measure) {
    try {
      report.tests.push_back(select_test(sample, measure));
    } catch (const Error& e) {
      report.warnings.push_back(measure + ": " + std::string(to_string(e.kind())) + " (" + e.what() + ")");
    }
  };

  if (!logs.empty()) run(report.trials.completion, "completion_time_s");

  if (!responses.empty()) {
    const auto table = score_responses(responses, options);
    std::set<std::string> measures;
    for (const auto& [p, by_cond] : table)
      for (const auto& [c, scores] : by_cond)
        for (const auto& [name, v] : scores) measures.insert(name);
    for (const auto& measure : measures) {
      PairedSample sample;
      for (const auto& [p, by_cond] : table) {
        const auto s = by_cond.find(Condition::Scooter);
        const auto j = by_cond.find(Condition::Joystick);
        if (s == by_cond.end() || j == by_cond.end()) continue;
        const auto sv = s->second.find(measure);
        const auto jv = j->second.find(measure);
        if (sv == s->second.end() || jv == j->second.end()) continue;
        sample.values_a.push_back(sv->second);
        sample.values_b.push_back(jv->second);
      }
      run(sample, measure);
    }
    if (options.tlx_min != 1.0 || options.tlx_max != 7.0 ||
        std::any_of(responses.begin(), responses.end(),
                    [](const ResponseRow& r) { return r.kind == Questionnaire::RawTLX; }))
      report.warnings.push_back("raw TLX item range assumed [" + detail::format_double(options.tlx_min) +
                                ", " + detail::format_double(options.tlx_max) + "]");
  }
  return report;
}

std::string report_to_json(const AnalysisReport& report) {
  ordered_json j;
  ordered_json trials;
  trials["participants_paired"] = report.trials.participants.size();
  trials["participant_condition_sums"] = report.trials.participant_condition_sums;
  trials["excluded"] = report.trials.excluded;
  for (const auto& [c, d] : report.trials.per_condition)
    trials["descriptives"][std::string(to_string(c))] = {{"n", d.n}, {"mean", d.mean}, {"sd", d.sd}};
  j["trials"] = trials;
  j["tests"] = ordered_json::array();
  for (const auto& t : report.tests) {
    ordered_json r;
    r["measure"] = t.measure;
    r["n"] = t.n;
    r[t.label_a] = {{"mean", t.mean_a}, {"sd", t.sd_a}};
    r[t.label_b] = {{"mean", t.mean_b}, {"sd", t.sd_b}};
    r["normality"] = {{"test", "shapiro_wilk"}, {"W", t.normality.w}, {"p", t.normality.p},
                      {"normal", t.normality.p >= t.alpha}};
    r["chosen_test"] = std::string(to_string(t.chosen));
    r["statistic"] = t.statistic;
    if (t.df) r["df"] = *t.df;
    r["p_value"] = t.p_value;
    r["effect_size"] = {{"name", t.effect_name}, {"value", t.effect_size}};
    if (t.wilcoxon)
      r["rank_sums"] = {{"r_plus", t.wilcoxon->r_plus}, {"r_minus", t.wilcoxon->r_minus},
                        {"n_nonzero", t.wilcoxon->n_nonzero}, {"exact", t.wilcoxon->exact}};
    r["alpha"] = t.alpha;
    r["significant"] = t.significant();
    j["tests"].push_back(std::move(r));
  }
  j["warnings"] = report.warnings;
  return j.dump(2) + "\n";
}

std::string report_to_table(const AnalysisReport& report) {
  std::string out;
  char buf[256];
  for (const auto& [c, d] : report.trials.per_condition) {
    std::snprintf(buf, sizeof(buf), "completion (sum per participant) %-8s n=%zu M=%.1f s SD=%.1f s\n",
                  std::string(to_string(c)).c_str(), d.n, d.mean, d.sd);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "%-26s %4s %8s %8s %-9s %10s %6s %8s %8s\n", "measure", "n", "SW W",
                "SW p", "test", "stat", "df", "p", "effect");
  out += buf;
  for (const auto& t : report.tests) {
    const std::string df = t.df ? std::to_string(static_cast<int>(*t.df)) : "-";
    std::snprintf(buf, sizeof(buf), "%-26s %4zu %8.3f %8.3f %-9s %10.3f %6s %8.3f %s=%.2f%s\n",
                  t.measure.c_str(), t.n, t.normality.w, t.normality.p,
                  std::string(to_string(t.chosen)).c_str(), t.statistic, df.c_str(), t.p_value,
                  t.effect_name.c_str(), t.effect_size, t.significant() ? " *" : "");
    out += buf;
  }
  for (const auto& w : report.warnings) out += "warning: " + w + "\n";
  return out;
}

}  // namespace loco::analysis
