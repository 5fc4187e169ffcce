#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "loco/error.hpp"
#include "loco/task_engine.hpp"
#include "text_util.hpp"

namespace loco {

using nlohmann::ordered_json;

std::string trial_log_to_json(const TrialLog& log) {
  ordered_json j;
  j["participant"] = log.participant_id;
  j["condition"] = std::string(to_string(log.condition));
  j["goal"] = log.goal_id;
  j["trial_index"] = log.trial_index;
  j["start_time_s"] = log.start_time_s;
  j["end_time_s"] = log.end_time_s;
  j["completion_time_s"] = log.completion_time_s;
  j["aborted"] = log.aborted;
  auto trace = ordered_json::array();
  for (const auto& s : log.trace) trace.push_back({s.t, s.x, s.y, s.heading});
  j["trace"] = std::move(trace);
  return j.dump();
}

TrialLog trial_log_from_json(std::string_view line) {
  try {
    const auto j = ordered_json::parse(line);
    TrialLog log;
    log.participant_id = j.at("participant").get<std::string>();
    log.condition = parse_condition(j.at("condition").get<std::string>());
    log.goal_id = j.at("goal").get<std::string>();
    log.trial_index = j.value("trial_index", 0);
    log.start_time_s = j.at("start_time_s").get<double>();
    log.end_time_s = j.at("end_time_s").get<double>();
    log.completion_time_s = j.at("completion_time_s").get<double>();
    log.aborted = j.value("aborted", false);
    if (j.contains("trace")) {
      for (const auto& s : j.at("trace")) {
        if (!s.is_array() || s.size() != 4) throw Error(ErrorKind::Parse, "trace sample must be [t,x,y,heading]");
        log.trace.push_back({s[0].get<double>(), s[1].get<double>(), s[2].get<double>(), s[3].get<double>()});
      }
    }
    return log;
  } catch (const ordered_json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("trial log: ") + e.what());
  }
}

std::string summary_csv(std::span<const TrialLog> logs) {
  std::string out = "participant,condition,goal,completion_s\n";
  for (const auto& log : logs) {
    if (log.aborted) continue;
    out += log.participant_id + "," + std::string(to_string(log.condition)) + "," + log.goal_id +
           "," + detail::format_double(log.completion_time_s) + "\n";
  }
  return out;
}

void write_trial_logs(const std::filesystem::path& dir, std::span<const TrialLog> logs) {
  std::filesystem::create_directories(dir);
  std::string jsonl;
  for (const auto& log : logs) {
    jsonl += trial_log_to_json(log);
    jsonl += '\n';
  }
  detail::write_file(dir / "trial_logs.jsonl", jsonl);
  detail::write_file(dir / "summary.csv", summary_csv(logs));
}

std::vector<TrialLog> read_trial_logs(const std::filesystem::path& path) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(path)) {
    for (const auto& entry : std::filesystem::directory_iterator(path))
      if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
  } else if (std::filesystem::exists(path)) {
    files.push_back(path);
  } else {
    throw Error(ErrorKind::FileNotFound, "no such log file or directory: " + path.string());
  }
  std::vector<TrialLog> logs;
  for (const auto& f : files) {
    const auto text = detail::read_file(f);
    for (auto line : detail::split_lines(text)) {
      if (detail::trim(line).empty()) continue;
      logs.push_back(trial_log_from_json(line));
    }
  }
  return logs;
}

}  // namespace loco
