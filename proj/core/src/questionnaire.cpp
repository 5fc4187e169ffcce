#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <tuple>

#include "loco/analysis.hpp"
#include "loco/error.hpp"
#include "text_util.hpp"

namespace loco::analysis {

std::string_view to_string(Questionnaire q) noexcept {
  switch (q) {
    case Questionnaire::SUS: return "sus";
    case Questionnaire::SSQ: return "ssq";
    case Questionnaire::RawTLX: return "tlx";
    case Questionnaire::Borg: return "borg";
    case Questionnaire::IPQ: return "ipq";
    case Questionnaire::UEQS: return "ueqs";
    case Questionnaire::Enjoyment: return "enjoyment";
  }
  return "unknown";
}

Questionnaire parse_questionnaire(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (auto q : {Questionnaire::SUS, Questionnaire::SSQ, Questionnaire::RawTLX, Questionnaire::Borg,
                 Questionnaire::IPQ, Questionnaire::UEQS, Questionnaire::Enjoyment})
    if (lower == to_string(q)) return q;
  if (lower == "ueq" || lower == "ueq-s" || lower == "ueq_s") return Questionnaire::UEQS;
  if (lower == "rtlx" || lower == "nasa-tlx") return Questionnaire::RawTLX;
  throw Error(ErrorKind::Validation, "unknown questionnaire '" + std::string(text) + "'");
}

namespace {

struct Shape {
  std::size_t items;
  double lo;
  double hi;
};

Shape shape_of(Questionnaire kind, const ScoringOptions& opt) {
  switch (kind) {
    case Questionnaire::SUS: return {10, 1, 5};
    case Questionnaire::SSQ: return {16, 0, 3};
    case Questionnaire::RawTLX: return {6, opt.tlx_min, opt.tlx_max};
    case Questionnaire::Borg: return {1, 6, 20};
    case Questionnaire::IPQ: return {14, 0, 6};
    case Questionnaire::UEQS: return {8, 1, 7};
    case Questionnaire::Enjoyment: return {1, 1, 7};
  }
  return {0, 0, 0};
}

// Kennedy et al. SSQ symptom-to-subscale assignment (1-based items).
constexpr std::array<int, 7> kNausea{1, 6, 7, 8, 9, 15, 16};
constexpr std::array<int, 7> kOculomotor{1, 2, 3, 4, 5, 9, 11};
constexpr std::array<int, 7> kDisorientation{5, 8, 10, 11, 12, 13, 14};

template <std::size_t N>
double sum_items(std::span<const double> r, const std::array<int, N>& items) {
  double s = 0.0;
  for (int i : items) s += r[static_cast<std::size_t>(i - 1)];
  return s;
}

}  // namespace

Scores score_questionnaire(Questionnaire kind, std::span<const double> r,
                           const ScoringOptions& options) {
  const auto shape = shape_of(kind, options);
  const auto name = std::string(to_string(kind));
  if (r.size() != shape.items)
    throw Error(ErrorKind::Validation, name + ": expected " + std::to_string(shape.items) +
                                           " items, got " + std::to_string(r.size()));
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!std::isfinite(r[i]) || r[i] < shape.lo || r[i] > shape.hi)
      throw Error(ErrorKind::Validation, name + " item " + std::to_string(i + 1) + " value " +
                                             detail::format_double(r[i]) + " outside [" +
                                             detail::format_double(shape.lo) + ", " +
                                             detail::format_double(shape.hi) + "]");
  }

  Scores s;
  switch (kind) {
    case Questionnaire::SUS: {
      double total = 0.0;
      for (std::size_t i = 0; i < 10; ++i) total += (i % 2 == 0) ? r[i] - 1.0 : 5.0 - r[i];
      s["score"] = total * 2.5;
      break;
    }
    case Questionnaire::SSQ: {
      const double n = sum_items(r, kNausea);
      const double o = sum_items(r, kOculomotor);
      const double d = sum_items(r, kDisorientation);
      s["nausea"] = n * 9.54;
      s["oculomotor"] = o * 7.58;
      s["disorientation"] = d * 13.92;
      s["total"] = (n + o + d) * 3.74;
      break;
    }
    case Questionnaire::RawTLX: {
      static constexpr std::array<const char*, 6> names{"mental", "physical", "temporal",
                                                        "performance", "effort", "frustration"};
      double total = 0.0;
      for (std::size_t i = 0; i < 6; ++i) {
        s[names[i]] = r[i];
        total += r[i];
      }
      s["overall"] = total / 6.0;
      break;
    }
    case Questionnaire::Borg: s["rpe"] = r[0]; break;
    case Questionnaire::Enjoyment: s["rating"] = r[0]; break;
    case Questionnaire::IPQ: {
      // Item order G1, SP1-5, INV1-4, REAL1-4; SP2, INV3 and REAL1 are
      // reverse-keyed.
      auto keyed = [&](std::size_t idx, bool reversed) { return reversed ? 6.0 - r[idx] : r[idx]; };
      s["general"] = r[0];
      double sp = 0.0, inv = 0.0, real = 0.0;
      for (std::size_t i = 1; i <= 5; ++i) sp += keyed(i, i == 2);
      for (std::size_t i = 6; i <= 9; ++i) inv += keyed(i, i == 8);
      for (std::size_t i = 10; i <= 13; ++i) real += keyed(i, i == 10);
      s["sp"] = sp;
      s["inv"] = inv;
      s["real"] = real;
      break;
    }
    case Questionnaire::UEQS: {
      double prag = 0.0, hed = 0.0;
      for (std::size_t i = 0; i < 4; ++i) prag += r[i] - 4.0;
      for (std::size_t i = 4; i < 8; ++i) hed += r[i] - 4.0;
      s["pragmatic"] = prag / 4.0;
      s["hedonic"] = hed / 4.0;
      s["overall"] = (prag + hed) / 8.0;
      break;
    }
  }
  return s;
}

std::vector<ResponseRow> parse_responses_csv(std::string_view text) {
  std::vector<ResponseRow> rows;
  std::size_t line_no = 0;
  bool header_seen = false;
  for (auto raw : detail::split_lines(text)) {
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto cols = detail::split(line, ',');
    const auto where = "responses line " + std::to_string(line_no) + ": ";
    if (cols.size() != 5) throw Error(ErrorKind::Parse, where + "expected 5 columns");
    if (!header_seen) {
      header_seen = true;
      if (detail::trim(cols[0]) == "participant") continue;
    }
    ResponseRow row;
    row.participant = std::string(detail::trim(cols[0]));
    row.condition = parse_condition(detail::trim(cols[1]));
    row.kind = parse_questionnaire(detail::trim(cols[2]));
    if (!detail::parse_int(cols[3], row.item_index) || row.item_index < 1)
      throw Error(ErrorKind::Parse, where + "bad item_index");
    if (!detail::parse_double(cols[4], row.value)) throw Error(ErrorKind::Parse, where + "bad value");
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ResponseRow> load_responses_csv(const std::filesystem::path& path) {
  return parse_responses_csv(detail::read_file(path));
}

ScoreTable score_responses(std::span<const ResponseRow> rows, const ScoringOptions& options) {
  struct Acc {
    std::vector<double> sum;
    std::vector<int> count;
  };
  std::map<std::tuple<std::string, Condition, Questionnaire>, Acc> grouped;
  for (const auto& row : rows) {
    auto& acc = grouped[{row.participant, row.condition, row.kind}];
    const auto items = shape_of(row.kind, options).items;
    if (acc.sum.empty()) {
      acc.sum.assign(items, 0.0);
      acc.count.assign(items, 0);
    }
    if (static_cast<std::size_t>(row.item_index) > items)
      throw Error(ErrorKind::Validation, std::string(to_string(row.kind)) + " item " +
                                             std::to_string(row.item_index) + " does not exist (" +
                                             row.participant + ")");
    acc.sum[static_cast<std::size_t>(row.item_index - 1)] += row.value;
    acc.count[static_cast<std::size_t>(row.item_index - 1)] += 1;
  }
  ScoreTable table;
  for (const auto& [key, acc] : grouped) {
    const auto& [participant, condition, kind] = key;
    std::vector<double> items(acc.sum.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (acc.count[i] == 0)
        throw Error(ErrorKind::Validation, std::string(to_string(kind)) + " item " +
                                               std::to_string(i + 1) + " missing for " + participant +
                                               "/" + std::string(to_string(condition)));
      items[i] = acc.sum[i] / acc.count[i];
    }
    for (const auto& [name, value] : score_questionnaire(kind, items, options))
      table[participant][condition][std::string(to_string(kind)) + "." + name] = value;
  }
  return table;
}

}  // namespace loco::analysis
