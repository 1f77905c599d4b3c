#pragma once

// Aggregation of trial records into per-cell statistics, fixture
// reconciliation between the published tables, and report emitters.

#include <cmath>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "roboinspect/campaign.hpp"
#include "roboinspect/core.hpp"
#include "roboinspect/hashing.hpp"

namespace roboinspect {

struct CellStats {
  CellKey cell;
  int trials = 0;  // scored trials; aborted ones are excluded
  int successes = 0;  // includes special successes
  int special_successes = 0;
  std::map<UnreliableBehavior, int> behavior_counts;
  int aborted = 0;

  int failures() const {
    int n = 0;
    for (const auto& [b, c] : behavior_counts) n += c;
    return n;
  }
  double success_rate() const { return static_cast<double>(successes) / trials; }

  friend bool operator==(const CellStats&, const CellStats&) = default;
};

inline CellStats empty_stats(const CellKey& cell) {
  CellStats s{cell, 0, 0, 0, {}, 0};
  for (auto b : kBehaviors) s.behavior_counts[b] = 0;
  return s;
}

/// One CellStats per cell present in `records`, or per cell in `requested`
/// when given. Cells are returned in key order.
inline std::vector<CellStats> aggregate(const std::vector<TrialRecord>& records,
                                        const std::optional<std::vector<CellKey>>& requested = std::nullopt) {
  std::map<CellKey, CellStats> by_cell;
  if (requested)
    for (const auto& c : *requested) by_cell.emplace(c, empty_stats(c));
  for (const auto& r : records) {
    auto it = by_cell.find(r.cell);
    if (it == by_cell.end()) {
      if (requested) continue;
      it = by_cell.emplace(r.cell, empty_stats(r.cell)).first;
    }
    auto& s = it->second;
    if (r.aborted) {
      ++s.aborted;
      continue;
    }
    ++s.trials;
    const auto& o = *r.outcome;
    if (const auto* f = std::get_if<Failure>(&o)) {
      ++s.behavior_counts[f->behavior];
    } else {
      ++s.successes;
      if (std::holds_alternative<SpecialSuccess>(o)) ++s.special_successes;
    }
  }
  std::vector<CellStats> out;
  for (auto& [key, s] : by_cell) {
    if (s.trials == 0) {
      throw Error(Errc::EmptyCell, key.task + "/" + std::string(to_string(key.level)) + "/" + key.model +
                                       " has no scored trials");
    }
    if (s.successes + s.failures() != s.trials) throw Error(Errc::InvalidArgument, "conservation violated");
    out.push_back(std::move(s));
  }
  return out;
}

/// Failure mix of a cell; denominators are failures only.
inline std::map<UnreliableBehavior, double> behavior_proportions(const CellStats& s) {
  int failures = s.trials - s.successes;
  if (failures <= 0) throw Error(Errc::NoFailures, s.cell.task + " has no failures");
  std::map<UnreliableBehavior, double> out;
  for (auto b : kBehaviors) {
    auto it = s.behavior_counts.find(b);
    out[b] = static_cast<double>(it == s.behavior_counts.end() ? 0 : it->second) / failures;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Published-table fixtures

struct RateFixture {
  std::vector<std::string> models;
  int trials_per_cell = 50;
  std::string checksum;
  std::map<CellKey, double> rates;
  std::vector<CellKey> order;
};

struct CountFixture {
  std::vector<std::string> models;
  int trials_per_cell = 50;
  std::string checksum;
  std::map<CellKey, std::map<UnreliableBehavior, int>> counts;
};

namespace detail {

inline std::string two_decimals(double v) {
  v = std::round(v * 100) / 100 + 0.0;
  if (v == 0) v = 0;  // no "-0.00"
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

inline CellKey cell_from(const json& c) {
  auto level = level_from(c.at("level").get<std::string>());
  if (!level) throw Error(Errc::FixtureShapeMismatch, "bad level " + c.at("level").dump());
  return {c.at("task").get<std::string>(), *level, c.at("model").get<std::string>()};
}

}  // namespace detail

/// Throws FixtureError when the stored checksum does not match the cells.
inline RateFixture load_rate_fixture(const json& doc) {
  RateFixture f;
  f.models = doc.at("models").get<std::vector<std::string>>();
  f.trials_per_cell = doc.value("trials_per_cell", 50);
  f.checksum = doc.at("checksum").get<std::string>();
  std::string canon;
  for (const auto& c : doc.at("cells")) {
    CellKey key = detail::cell_from(c);
    double rate = c.at("rate").get<double>();
    canon += key.task + "|" + std::string(to_string(key.level)) + "|" + key.model + "|" + detail::two_decimals(rate) + "\n";
    if (!f.rates.emplace(key, rate).second) throw Error(Errc::FixtureShapeMismatch, "duplicate rate cell " + key.task);
    f.order.push_back(key);
  }
  if (hex64(fnv1a64(canon)) != f.checksum) throw Error(Errc::FixtureError, "rate fixture checksum mismatch");
  return f;
}

inline CountFixture load_count_fixture(const json& doc) {
  CountFixture f;
  f.models = doc.at("models").get<std::vector<std::string>>();
  f.trials_per_cell = doc.value("trials_per_cell", 50);
  f.checksum = doc.at("checksum").get<std::string>();
  std::string canon;
  for (const auto& c : doc.at("cells")) {
    CellKey key = detail::cell_from(c);
    auto b = behavior_from(c.at("behavior").get<std::string>());
    if (!b) throw Error(Errc::FixtureShapeMismatch, "bad behavior " + c.at("behavior").dump());
    int count = c.at("count").get<int>();
    canon += key.task + "|" + std::string(to_string(key.level)) + "|" + key.model + "|" + std::string(to_string(*b)) + "|" +
             std::to_string(count) + "\n";
    if (!f.counts[key].emplace(*b, count).second) throw Error(Errc::FixtureShapeMismatch, "duplicate count cell");
  }
  if (hex64(fnv1a64(canon)) != f.checksum) throw Error(Errc::FixtureError, "count fixture checksum mismatch");
  return f;
}

struct ReconciliationRow {
  CellKey cell;
  int failures = 0;
  double derived_rate = 0;
  double table_rate = 0;
  double delta = 0;  // table_rate - derived_rate
  bool flagged = false;
  std::string note;
};

struct ReconciliationReport {
  std::vector<ReconciliationRow> rows;
  double tolerance = 0.01;

  std::size_t within_tolerance() const {
    std::size_t n = 0;
    for (const auto& r : rows) n += !r.flagged;
    return n;
  }
  double fraction_within() const { return rows.empty() ? 0.0 : static_cast<double>(within_tolerance()) / rows.size(); }

  const ReconciliationRow& at(const CellKey& key) const {
    for (const auto& r : rows)
      if (r.cell == key) return r;
    throw Error(Errc::InvalidArgument, "no reconciliation row for " + key.task);
  }
};

/// 1 - failures/trials from the counts, compared with the published rate.
inline ReconciliationReport reconcile_fixture(const CountFixture& counts, const RateFixture& rates, double tolerance = 0.01) {
  if (counts.models != rates.models) throw Error(Errc::FixtureShapeMismatch, "model lists differ between fixtures");
  if (counts.trials_per_cell != rates.trials_per_cell)
    throw Error(Errc::FixtureShapeMismatch, "trials_per_cell differs between fixtures");
  if (counts.counts.size() != rates.rates.size())
    throw Error(Errc::FixtureShapeMismatch, std::to_string(counts.counts.size()) + " count cells vs " +
                                                std::to_string(rates.rates.size()) + " rate cells");
  ReconciliationReport report;
  report.tolerance = tolerance;
  for (const auto& key : rates.order) {
    auto it = counts.counts.find(key);
    if (it == counts.counts.end() || it->second.size() != kBehaviors.size())
      throw Error(Errc::FixtureShapeMismatch, "no complete behavior counts for " + key.task + "/" +
                                                  std::string(to_string(key.level)) + "/" + key.model);
    ReconciliationRow row;
    row.cell = key;
    for (const auto& [b, c] : it->second) row.failures += c;
    row.derived_rate = 1.0 - static_cast<double>(row.failures) / counts.trials_per_cell;
    row.table_rate = rates.rates.at(key);
    row.delta = row.table_rate - row.derived_rate;
    row.flagged = std::abs(row.delta) > tolerance + 1e-9;
    if (row.flagged) {
      row.note = "residual " + detail::two_decimals(row.delta) +
                 ": the two transcribed tables disagree for this cell (transcription or source-table error, not a "
                 "code error)";
      if (row.delta > 0) row.note += "; uncounted special successes cannot explain a positive residual either way";
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Paired with/without-feedback comparison

struct PairedTaskSummary {
  std::string task;
  int pairs = 0;
  int successes_without = 0;
  int successes_with = 0;
  int improved = 0;   // failed without, succeeded with
  int regressed = 0;  // succeeded without, failed with
  double p_improvement = 1;  // one-sided exact sign test on discordant pairs
  double p_regression = 1;

  double rate_without() const { return pairs ? static_cast<double>(successes_without) / pairs : 0.0; }
  double rate_with() const { return pairs ? static_cast<double>(successes_with) / pairs : 0.0; }
  double delta() const { return rate_with() - rate_without(); }
};

/// P(X >= k) for X ~ Binomial(n, 1/2).
inline double binomial_upper_tail_half(int k, int n) {
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  double total = 0;
  for (int i = k; i <= n; ++i)
    total += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) - n * std::log(2.0));
  return std::min(1.0, total);
}

/// Pairs records by (cell, trial_index); aborted pairs are dropped.
inline std::vector<PairedTaskSummary> paired_feedback(const std::vector<TrialRecord>& without,
                                                      const std::vector<TrialRecord>& with) {
  std::map<std::pair<CellKey, int>, const TrialRecord*> base;
  for (const auto& r : without) base[{r.cell, r.trial_index}] = &r;
  std::map<std::string, PairedTaskSummary> by_task;
  std::vector<std::string> order;
  for (const auto& r : with) {
    auto it = base.find({r.cell, r.trial_index});
    if (it == base.end() || r.aborted || it->second->aborted) continue;
    if (!by_task.count(r.cell.task)) order.push_back(r.cell.task);
    auto& s = by_task[r.cell.task];
    s.task = r.cell.task;
    bool a = is_success(*it->second->outcome), b = is_success(*r.outcome);
    ++s.pairs;
    s.successes_without += a;
    s.successes_with += b;
    s.improved += !a && b;
    s.regressed += a && !b;
  }
  std::vector<PairedTaskSummary> out;
  for (const auto& t : order) {
    auto s = by_task[t];
    int n = s.improved + s.regressed;
    s.p_improvement = binomial_upper_tail_half(s.improved, n);
    s.p_regression = binomial_upper_tail_half(s.regressed, n);
    out.push_back(s);
  }
  if (out.empty()) throw Error(Errc::InvalidArgument, "no paired trials between the two record sets");
  return out;
}

// ---------------------------------------------------------------------------
// Emitters

enum class ReportFormat { Markdown, Csv, Json };

inline std::optional<ReportFormat> report_format_from(std::string_view s) {
  if (s == "md" || s == "markdown") return ReportFormat::Markdown;
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  return std::nullopt;
}

inline constexpr std::string_view kCsvHeader =
    "task,level,model,trials,successes,special_successes,Nonsense,Disorder,Infeasible,Badpose,aborted,success_rate";

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  return "\"" + replace_all(s, "\"", "\"\"") + "\"";
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') fields.back() += '"', ++i;
      else if (c == '"') quoted = false;
      else fields.back() += c;
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

inline int count_of(const CellStats& s, UnreliableBehavior b) {
  auto it = s.behavior_counts.find(b);
  return it == s.behavior_counts.end() ? 0 : it->second;
}

inline std::string rate6(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << v;
  return os.str();
}

}  // namespace detail

inline std::string emit_csv(const std::vector<CellStats>& stats) {
  std::string out(kCsvHeader);
  out += "\n";
  for (const auto& s : stats) {
    out += detail::csv_field(s.cell.task) + "," + std::string(to_string(s.cell.level)) + "," + detail::csv_field(s.cell.model);
    out += "," + std::to_string(s.trials) + "," + std::to_string(s.successes) + "," + std::to_string(s.special_successes);
    for (auto b : kBehaviors) out += "," + std::to_string(detail::count_of(s, b));
    out += "," + std::to_string(s.aborted) + "," + detail::rate6(s.success_rate()) + "\n";
  }
  return out;
}

inline std::vector<CellStats> parse_csv(std::string_view text) {
  std::vector<CellStats> out;
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    if (line.empty()) continue;
    if (header) {
      if (line != kCsvHeader) throw Error(Errc::InvalidArgument, "unexpected CSV header");
      header = false;
      continue;
    }
    auto f = detail::split_csv_line(line);
    if (f.size() != 12) throw Error(Errc::InvalidArgument, "CSV row has " + std::to_string(f.size()) + " fields");
    auto level = level_from(f[1]);
    if (!level) throw Error(Errc::InvalidArgument, "bad level in CSV");
    CellStats s = empty_stats({f[0], *level, f[2]});
    s.trials = std::stoi(f[3]);
    s.successes = std::stoi(f[4]);
    s.special_successes = std::stoi(f[5]);
    for (std::size_t i = 0; i < kBehaviors.size(); ++i) s.behavior_counts[kBehaviors[i]] = std::stoi(f[6 + i]);
    s.aborted = std::stoi(f[10]);
    out.push_back(std::move(s));
  }
  return out;
}

inline json emit_json_doc(const std::vector<CellStats>& stats, const std::vector<PairedTaskSummary>* paired = nullptr) {
  json doc;
  doc["cells"] = json::array();
  for (const auto& s : stats) {
    json counts;
    for (auto b : kBehaviors) counts[std::string(to_string(b))] = detail::count_of(s, b);
    doc["cells"].push_back({{"task", s.cell.task},
                            {"level", to_string(s.cell.level)},
                            {"model", s.cell.model},
                            {"trials", s.trials},
                            {"successes", s.successes},
                            {"special_successes", s.special_successes},
                            {"behavior_counts", counts},
                            {"aborted", s.aborted},
                            {"success_rate", s.success_rate()}});
  }
  if (paired) {
    doc["paired"] = json::array();
    for (const auto& p : *paired) {
      doc["paired"].push_back({{"task", p.task},
                               {"pairs", p.pairs},
                               {"rate_without", p.rate_without()},
                               {"rate_with", p.rate_with()},
                               {"delta", p.delta()},
                               {"improved", p.improved},
                               {"regressed", p.regressed},
                               {"p_improvement", p.p_improvement},
                               {"p_regression", p.p_regression}});
    }
  }
  return doc;
}

/// Rate grid (task x level rows, model columns), behavior breakdown with one
/// row per cell, failure proportions, and the paired summary if supplied.
inline std::string emit_markdown(const std::vector<CellStats>& stats, const std::vector<PairedTaskSummary>* paired = nullptr) {
  using detail::two_decimals;
  std::vector<std::string> models;
  std::vector<std::pair<std::string, GranularityLevel>> rows;
  std::map<std::pair<std::pair<std::string, GranularityLevel>, std::string>, double> grid;
  for (const auto& s : stats) {
    if (std::find(models.begin(), models.end(), s.cell.model) == models.end()) models.push_back(s.cell.model);
    std::pair<std::string, GranularityLevel> row{s.cell.task, s.cell.level};
    if (std::find(rows.begin(), rows.end(), row) == rows.end()) rows.push_back(row);
    grid[{row, s.cell.model}] = s.success_rate();
  }

  std::string out = "## Success rate\n\n| Task | Level |";
  for (const auto& m : models) out += " " + m + " |";
  out += "\n|---|---|";
  for (std::size_t i = 0; i < models.size(); ++i) out += "---:|";
  out += "\n";
  for (const auto& row : rows) {
    out += "| " + row.first + " | " + std::string(to_string(row.second)) + " |";
    for (const auto& m : models) {
      auto it = grid.find({row, m});
      out += " " + (it == grid.end() ? std::string("-") : two_decimals(it->second)) + " |";
    }
    out += "\n";
  }

  out += "\n## Unreliable behaviors\n\n| Task | Level | Model | Trials | Success | Special | Nonsense | Disorder | Infeasible | Badpose | Aborted |\n";
  out += "|---|---|---|---:|---:|---:|---:|---:|---:|---:|---:|\n";
  for (const auto& s : stats) {
    out += "| " + s.cell.task + " | " + std::string(to_string(s.cell.level)) + " | " + s.cell.model + " | " +
           std::to_string(s.trials) + " | " + std::to_string(s.successes) + " | " + std::to_string(s.special_successes) + " |";
    for (auto b : kBehaviors) out += " " + std::to_string(detail::count_of(s, b)) + " |";
    out += " " + std::to_string(s.aborted) + " |\n";
  }

  out += "\n## Failure proportions\n\n| Task | Level | Model | Nonsense | Disorder | Infeasible | Badpose |\n";
  out += "|---|---|---|---:|---:|---:|---:|\n";
  for (const auto& s : stats) {
    if (s.successes == s.trials) continue;
    auto p = behavior_proportions(s);
    out += "| " + s.cell.task + " | " + std::string(to_string(s.cell.level)) + " | " + s.cell.model + " |";
    for (auto b : kBehaviors) out += " " + two_decimals(p[b]) + " |";
    out += "\n";
  }

  if (paired) {
    out += "\n## Feedback (paired)\n\n| Task | Pairs | Without | With | Delta | Improved | Regressed | p |\n";
    out += "|---|---:|---:|---:|---:|---:|---:|---:|\n";
    for (const auto& p : *paired) {
      std::ostringstream pv;
      pv << std::setprecision(3) << p.p_improvement;
      out += "| " + p.task + " | " + std::to_string(p.pairs) + " | " + two_decimals(p.rate_without()) + " | " +
             two_decimals(p.rate_with()) + " | " + (p.delta() >= 0 ? "+" : "") + two_decimals(p.delta()) + " | " +
             std::to_string(p.improved) + " | " + std::to_string(p.regressed) + " | " + pv.str() + " |\n";
    }
  }
  return out;
}

inline std::string emit_report(const std::vector<CellStats>& stats, ReportFormat format,
                               const std::vector<PairedTaskSummary>* paired = nullptr) {
  switch (format) {
    case ReportFormat::Markdown: return emit_markdown(stats, paired);
    case ReportFormat::Csv: return emit_csv(stats);
    case ReportFormat::Json: return emit_json_doc(stats, paired).dump(2) + "\n";
  }
  return {};
}

inline std::string emit_reconciliation(const ReconciliationReport& r) {
  using detail::two_decimals;
  std::string out = "| Task | Level | Model | Failures | 1 - failures/50 | Table rate | Delta | Note |\n";
  out += "|---|---|---|---:|---:|---:|---:|---|\n";
  for (const auto& row : r.rows) {
    out += "| " + row.cell.task + " | " + std::string(to_string(row.cell.level)) + " | " + row.cell.model + " | " +
           std::to_string(row.failures) + " | " + two_decimals(row.derived_rate) + " | " + two_decimals(row.table_rate) +
           " | " + two_decimals(row.delta) + " | " + (row.flagged ? "FLAG " + row.note : "") + " |\n";
  }
  out += "\n" + std::to_string(r.within_tolerance()) + "/" + std::to_string(r.rows.size()) + " cells within " +
         two_decimals(r.tolerance) + " (" + two_decimals(100 * r.fraction_within()) + "%)\n";
  return out;
}

}  // namespace roboinspect
