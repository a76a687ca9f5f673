#pragma once

// Topic x stage report tables. Rows are topic sets split by stage; columns
// come in two groups, "Rosetta Stone Original Puzzle" and "Match-Up
// Conversion", with one column per solver. Match-Up solvers get an extra
// column counting reports zeroed by the alphabetical rule.

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "matchup/scorer.hpp"

namespace matchup {

inline constexpr std::string_view kReportTitle = "Average Scores by Linguistic Topic and Stage";
inline constexpr std::string_view kRosettaGroup = "Rosetta Stone Original Puzzle";
inline constexpr std::string_view kMatchUpGroup = "Match-Up Conversion";

struct ReportCell {
  double mean = 0.0;
  int n = 0;
  int zeroed = 0;
};

struct ReportRow {
  std::string topic_set;
  Stage stage = Stage::Unstaged;
  std::map<std::pair<Format, std::string>, ReportCell> cells;
};

struct ReportTable {
  std::vector<std::string> rosetta_solvers;
  std::vector<std::string> matchup_solvers;
  std::vector<ReportRow> rows;
};

inline ReportTable build_report(const std::vector<AggregateRow>& agg) {
  ReportTable t;
  std::set<std::string> rs, mu;
  std::map<std::pair<std::string, Stage>, ReportRow> rows;
  for (const auto& a : agg) {
    (a.format == Format::RosettaStone ? rs : mu).insert(a.solver_id);
    auto& row = rows[{a.topic_set, a.stage}];
    row.topic_set = a.topic_set;
    row.stage = a.stage;
    row.cells[{a.format, a.solver_id}] = {a.mean_percent, a.n_reports, a.n_zeroed};
  }
  t.rosetta_solvers.assign(rs.begin(), rs.end());
  t.matchup_solvers.assign(mu.begin(), mu.end());
  for (auto& [_, row] : rows) t.rows.push_back(std::move(row));
  return t;
}

inline std::string format_percent(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(1);
  os << v;
  return os.str();
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// Two header rows (column group, then solver) followed by one row per
/// (topic set, stage). Empty cells mean no reports.
inline std::string report_to_csv(const ReportTable& t) {
  std::vector<std::string> group_row{"Topic", "Stage"}, solver_row{"", ""};
  for (std::size_t k = 0; k < t.rosetta_solvers.size(); ++k) {
    group_row.push_back(k == 0 ? std::string(kRosettaGroup) : "");
    solver_row.push_back(t.rosetta_solvers[k]);
  }
  for (std::size_t k = 0; k < t.matchup_solvers.size(); ++k) {
    group_row.push_back(k == 0 ? std::string(kMatchUpGroup) : "");
    group_row.push_back("");
    solver_row.push_back(t.matchup_solvers[k]);
    solver_row.push_back(t.matchup_solvers[k] + " alphabetical-zeroed");
  }
  std::ostringstream os;
  auto emit = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) os << (i ? "," : "") << csv_field(fields[i]);
    os << "\n";
  };
  emit(group_row);
  emit(solver_row);
  for (const auto& row : t.rows) {
    std::vector<std::string> f{row.topic_set, std::string(to_string(row.stage))};
    for (const auto& s : t.rosetta_solvers) {
      auto it = row.cells.find({Format::RosettaStone, s});
      f.push_back(it == row.cells.end() ? "" : format_percent(it->second.mean));
    }
    for (const auto& s : t.matchup_solvers) {
      auto it = row.cells.find({Format::MatchUp, s});
      f.push_back(it == row.cells.end() ? "" : format_percent(it->second.mean));
      f.push_back(it == row.cells.end() ? "" : std::to_string(it->second.zeroed));
    }
    emit(f);
  }
  return os.str();
}

inline nlohmann::json report_to_json(const ReportTable& t) {
  using nlohmann::json;
  json groups = json::array();
  if (!t.rosetta_solvers.empty()) {
    groups.push_back({{"name", kRosettaGroup}, {"format", "RosettaStone"}, {"solvers", t.rosetta_solvers}});
  }
  if (!t.matchup_solvers.empty()) {
    groups.push_back({{"name", kMatchUpGroup}, {"format", "MatchUp"}, {"solvers", t.matchup_solvers}});
  }
  json rows = json::array();
  for (const auto& row : t.rows) {
    json cells = json::object();
    for (const auto& [k, c] : row.cells) {
      json cell{{"mean", c.mean}, {"n", c.n}};
      if (k.first == Format::MatchUp) cell["alphabetical_zeroed"] = c.zeroed;
      cells[std::string(to_string(k.first))][k.second] = cell;
    }
    rows.push_back({{"topic", row.topic_set}, {"stage", std::string(to_string(row.stage))}, {"cells", cells}});
  }
  return json{{"title", kReportTitle}, {"column_groups", groups}, {"rows", rows}};
}

} // namespace matchup
