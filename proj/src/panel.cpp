#include "draftiv/panel.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "draftiv/csv.hpp"

namespace draftiv {

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<int> parse_int(const std::string& s) {
  if (s.empty()) return std::nullopt;
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<bool> parse_gender_male(const std::string& raw) {
  std::string s = lower(raw);
  if (s == "m" || s == "male" || s == "1") return true;
  if (s == "f" || s == "female" || s == "w" || s == "0") return false;
  return std::nullopt;
}

void require_columns(const CsvTable& t, const std::vector<std::string>& names,
                     const std::string& path) {
  for (const auto& n : names) {
    if (!t.has_column(n))
      throw std::runtime_error("header mismatch in " + path + ": missing column '" + n + "'");
  }
}

std::string join_row(const std::vector<std::string>& cells) {
  std::string out;
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) out.push_back(',');
    out += cells[i];
  }
  return out;
}

}  // namespace

std::string to_string(EventCategory c) {
  switch (c) {
    case EventCategory::Sprint: return "Sprint";
    case EventCategory::Short: return "Short";
    case EventCategory::Middle: return "Middle";
    case EventCategory::Long: return "Long";
  }
  return "?";
}

std::string to_string(ResultStatus s) {
  switch (s) {
    case ResultStatus::Finished: return "Finished";
    case ResultStatus::Dnf: return "DNF";
    case ResultStatus::Dns: return "DNS";
    case ResultStatus::Missing: return "Missing";
  }
  return "?";
}

std::string to_string(Period p) {
  switch (p) {
    case Period::Pre: return "Pre";
    case Period::Covid: return "Covid";
    case Period::Post: return "Post";
  }
  return "?";
}

std::optional<EventCategory> parse_category(const std::string& s) {
  std::string l = lower(s);
  if (l == "sprint") return EventCategory::Sprint;
  if (l == "short") return EventCategory::Short;
  if (l == "middle") return EventCategory::Middle;
  if (l == "long") return EventCategory::Long;
  return std::nullopt;
}

std::optional<ResultStatus> parse_status(const std::string& s) {
  std::string l = lower(s);
  if (l == "finished") return ResultStatus::Finished;
  if (l == "dnf") return ResultStatus::Dnf;
  if (l == "dns") return ResultStatus::Dns;
  if (l == "missing" || l.empty()) return ResultStatus::Missing;
  return std::nullopt;
}

std::optional<Period> parse_period(const std::string& s) {
  std::string l = lower(s);
  if (l == "pre") return Period::Pre;
  if (l == "covid") return Period::Covid;
  if (l == "post") return Period::Post;
  return std::nullopt;
}

std::optional<Date> Date::parse(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto y = parse_int(s.substr(0, 4));
  auto m = parse_int(s.substr(5, 2));
  auto d = parse_int(s.substr(8, 2));
  if (!y || !m || !d) return std::nullopt;
  if (*m < 1 || *m > 12 || *d < 1 || *d > 31) return std::nullopt;
  return Date{*y, *m, *d};
}

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

Period PeriodBoundaries::classify(const Date& d) const {
  if (d < covid_start) return Period::Pre;
  if (d < post_start) return Period::Covid;
  return Period::Post;
}

RawTables load_tables(const IngestPaths& paths, char delim) {
  RawTables out;

  CsvTable athletes = read_csv(paths.athletes, delim);
  require_columns(athletes, {"athlete_id", "gender", "birth_year"}, paths.athletes);
  {
    int c_id = athletes.column("athlete_id");
    int c_g = athletes.column("gender");
    int c_by = athletes.column("birth_year");
    long line = 1;
    for (const auto& row : athletes.rows) {
      ++line;
      const std::string& id = row[c_id];
      auto male = parse_gender_male(row[c_g]);
      auto by = parse_int(row[c_by]);
      if (id.empty() || !male || !by) {
        out.rejects.push_back({"athletes", line, "unparseable required field", join_row(row)});
        continue;
      }
      out.athletes.push_back({id, *male, *by});
    }
  }

  CsvTable events = read_csv(paths.events, delim);
  require_columns(events, {"event_id", "date", "category"}, paths.events);
  {
    int c_id = events.column("event_id");
    int c_d = events.column("date");
    int c_c = events.column("category");
    long line = 1;
    for (const auto& row : events.rows) {
      ++line;
      const std::string& id = row[c_id];
      auto date = Date::parse(row[c_d]);
      auto cat = parse_category(row[c_c]);
      if (id.empty() || !date || !cat) {
        out.rejects.push_back({"events", line, "unparseable required field", join_row(row)});
        continue;
      }
      out.events.push_back({id, *date, *cat});
    }
  }

  CsvTable results = read_csv(paths.results, delim);
  require_columns(results,
                  {"athlete_id", "event_id", "swim_out_s", "total_s", "rank", "status"},
                  paths.results);
  {
    int c_aid = results.column("athlete_id");
    int c_eid = results.column("event_id");
    int c_sw = results.column("swim_out_s");
    int c_to = results.column("total_s");
    int c_rk = results.column("rank");
    int c_st = results.column("status");
    long line = 1;
    for (const auto& row : results.rows) {
      ++line;
      ResultRecord r;
      r.athlete_id = row[c_aid];
      r.event_id = row[c_eid];
      auto status = parse_status(row[c_st]);
      if (r.athlete_id.empty() || r.event_id.empty() || !status) {
        out.rejects.push_back({"results", line, "unparseable required field", join_row(row)});
        continue;
      }
      r.status = *status;
      // Numeric fields may be legitimately absent on non-finishers; a
      // non-empty field that does not parse is a reject.
      bool bad = false;
      auto read_field = [&](const std::string& cell, double& dest, bool nonneg) {
        if (cell.empty()) return;
        auto v = parse_number(cell);
        if (!v || (nonneg && *v < 0)) {
          bad = true;
          return;
        }
        dest = *v;
      };
      read_field(row[c_sw], r.swim_out_s, true);
      read_field(row[c_to], r.total_s, true);
      read_field(row[c_rk], r.rank, true);
      if (bad) {
        out.rejects.push_back({"results", line, "unparseable required field", join_row(row)});
        continue;
      }
      out.results.push_back(std::move(r));
    }
  }
  return out;
}

MergeOutput merge_and_clean(const RawTables& tables, std::vector<RejectEntry>* rejects) {
  std::unordered_map<std::string, const AthleteRecord*> athlete_by_id;
  for (const auto& a : tables.athletes) athlete_by_id[a.athlete_id] = &a;
  std::unordered_map<std::string, const EventRecord*> event_by_id;
  for (const auto& e : tables.events) event_by_id[e.event_id] = &e;

  MergeOutput out;
  out.audit.input = static_cast<long>(tables.results.size());
  for (const auto& r : tables.results) {
    auto ait = athlete_by_id.find(r.athlete_id);
    auto eit = event_by_id.find(r.event_id);
    if (ait == athlete_by_id.end() || eit == event_by_id.end()) {
      ++out.audit.dropped_unmatched;
      if (rejects)
        rejects->push_back({"merge", 0, "unresolvable foreign key",
                            r.athlete_id + "," + r.event_id});
      continue;
    }
    switch (r.status) {
      case ResultStatus::Dnf: ++out.audit.dropped_dnf; continue;
      case ResultStatus::Dns: ++out.audit.dropped_dns; continue;
      case ResultStatus::Missing: ++out.audit.dropped_missing; continue;
      case ResultStatus::Finished: break;
    }
    if (std::isnan(r.swim_out_s) || std::isnan(r.total_s) || std::isnan(r.rank)) {
      ++out.audit.dropped_missing;
      continue;
    }
    PanelRow row;
    row.athlete_id = r.athlete_id;
    row.event_id = r.event_id;
    row.category = eit->second->category;
    row.event_date = eit->second->date;
    row.event_year = eit->second->date.year;
    row.swim_out_s = r.swim_out_s;
    row.total_s = r.total_s;
    row.rank = r.rank;
    row.male = ait->second->male;
    row.age = row.event_year - ait->second->birth_year;
    row.age_sq = row.age * row.age;
    out.panel.push_back(std::move(row));
  }
  out.audit.output = static_cast<long>(out.panel.size());
  sort_panel(out.panel);
  return out;
}

CovariateAudit derive_covariates(Panel& panel, const PeriodBoundaries& bounds,
                                 std::vector<RejectEntry>* rejects) {
  CovariateAudit audit;
  audit.input = static_cast<long>(panel.size());
  Panel kept;
  kept.reserve(panel.size());
  for (auto& row : panel) {
    if (row.age < 0) {
      ++audit.dropped_invalid_age;
      if (rejects)
        rejects->push_back({"covariates", 0, "event predates birth year",
                            row.athlete_id + "," + row.event_id});
      continue;
    }
    row.age_sq = row.age * row.age;
    row.period = bounds.classify(row.event_date);
    kept.push_back(std::move(row));
  }
  panel = std::move(kept);
  audit.output = static_cast<long>(panel.size());
  return audit;
}

void sort_panel(Panel& panel) {
  std::sort(panel.begin(), panel.end(), [](const PanelRow& a, const PanelRow& b) {
    if (a.event_id != b.event_id) return a.event_id < b.event_id;
    return a.athlete_id < b.athlete_id;
  });
}

namespace {

const char* kPanelColumns[] = {
    "athlete_id", "event_id",  "category",      "date",          "event_year",
    "swim_out_s", "total_s",   "rank",          "age",           "age_sq",
    "male",       "period",    "group_index",   "group_size",    "position",
    "leader",     "drafter",   "first_drafter", "second_drafter", "third_drafter",
    "fourth_drafter", "fifth_drafter", "last_drafter", "benefit", "z_loo",
    "z_proj"};

std::string bool01(bool b) { return b ? "1" : "0"; }

}  // namespace

void write_panel(const std::string& path, const Panel& panel,
                 const std::string& comment, char delim) {
  CsvTable t;
  for (const char* c : kPanelColumns) t.header.push_back(c);
  t.rows.reserve(panel.size());
  for (const auto& r : panel) {
    std::vector<std::string> row;
    row.reserve(t.header.size());
    row.push_back(r.athlete_id);
    row.push_back(r.event_id);
    row.push_back(to_string(r.category));
    row.push_back(r.event_date.iso());
    row.push_back(std::to_string(r.event_year));
    row.push_back(format_double(r.swim_out_s));
    row.push_back(format_double(r.total_s));
    row.push_back(format_double(r.rank));
    row.push_back(std::to_string(r.age));
    row.push_back(std::to_string(r.age_sq));
    row.push_back(bool01(r.male));
    row.push_back(to_string(r.period));
    row.push_back(std::to_string(r.group_index));
    row.push_back(std::to_string(r.group_size));
    row.push_back(std::to_string(r.position));
    row.push_back(bool01(r.leader));
    row.push_back(bool01(r.drafter));
    row.push_back(bool01(r.first_drafter));
    row.push_back(bool01(r.second_drafter));
    row.push_back(bool01(r.third_drafter));
    row.push_back(bool01(r.fourth_drafter));
    row.push_back(bool01(r.fifth_drafter));
    row.push_back(bool01(r.last_drafter));
    row.push_back(format_double(r.benefit));
    row.push_back(format_double(r.z_loo));
    row.push_back(format_double(r.z_proj));
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t, delim, comment);
}

Panel read_panel(const std::string& path, char delim) {
  CsvTable t = read_csv(path, delim);
  for (const char* c :
       {"athlete_id", "event_id", "category", "date", "event_year", "swim_out_s",
        "total_s", "rank", "age", "age_sq", "male", "period"}) {
    if (!t.has_column(c))
      throw std::runtime_error("panel file " + path + " missing column '" + std::string(c) + "'");
  }
  auto col = [&](const char* name) { return t.column(name); };
  int c_aid = col("athlete_id"), c_eid = col("event_id"), c_cat = col("category");
  int c_date = col("date"), c_ey = col("event_year"), c_sw = col("swim_out_s");
  int c_to = col("total_s"), c_rk = col("rank"), c_age = col("age");
  int c_asq = col("age_sq"), c_m = col("male"), c_p = col("period");
  int c_gi = col("group_index"), c_gs = col("group_size"), c_pos = col("position");
  int c_le = col("leader"), c_dr = col("drafter");
  int c_d1 = col("first_drafter"), c_d2 = col("second_drafter"), c_d3 = col("third_drafter");
  int c_d4 = col("fourth_drafter"), c_d5 = col("fifth_drafter"), c_dl = col("last_drafter");
  int c_b = col("benefit"), c_z = col("z_loo"), c_zp = col("z_proj");

  Panel panel;
  panel.reserve(t.rows.size());
  long line = 1;
  for (const auto& row : t.rows) {
    ++line;
    PanelRow r;
    auto cell = [&](int c) -> const std::string& {
      static const std::string empty;
      return (c >= 0 && c < static_cast<int>(row.size())) ? row[c] : empty;
    };
    auto num = [&](int c) -> double {
      auto v = parse_number(cell(c));
      return v ? *v : kMissing;
    };
    auto integer = [&](int c, int dflt) -> int {
      auto v = parse_int(cell(c));
      return v ? *v : dflt;
    };
    r.athlete_id = cell(c_aid);
    r.event_id = cell(c_eid);
    auto cat = parse_category(cell(c_cat));
    auto date = Date::parse(cell(c_date));
    auto period = parse_period(cell(c_p));
    if (r.athlete_id.empty() || r.event_id.empty() || !cat || !date || !period)
      throw std::runtime_error("panel file " + path + " line " + std::to_string(line) +
                               ": unparseable row");
    r.category = *cat;
    r.event_date = *date;
    r.period = *period;
    r.event_year = integer(c_ey, date->year);
    r.swim_out_s = num(c_sw);
    r.total_s = num(c_to);
    r.rank = num(c_rk);
    r.age = integer(c_age, 0);
    r.age_sq = integer(c_asq, r.age * r.age);
    r.male = integer(c_m, 0) != 0;
    r.group_index = integer(c_gi, 0);
    r.group_size = integer(c_gs, 0);
    r.position = integer(c_pos, 0);
    r.leader = integer(c_le, 0) != 0;
    r.drafter = integer(c_dr, 0) != 0;
    r.first_drafter = integer(c_d1, 0) != 0;
    r.second_drafter = integer(c_d2, 0) != 0;
    r.third_drafter = integer(c_d3, 0) != 0;
    r.fourth_drafter = integer(c_d4, 0) != 0;
    r.fifth_drafter = integer(c_d5, 0) != 0;
    r.last_drafter = integer(c_dl, 0) != 0;
    r.benefit = num(c_b);
    r.z_loo = num(c_z);
    r.z_proj = num(c_zp);
    panel.push_back(std::move(r));
  }
  return panel;
}

void write_reject_report(const std::string& path, const std::vector<RejectEntry>& rejects,
                         char delim) {
  CsvTable t;
  t.header = {"source", "line", "reason", "content"};
  for (const auto& r : rejects)
    t.rows.push_back({r.source, std::to_string(r.line), r.reason, r.content});
  write_csv(path, t, delim);
}

}  // namespace draftiv
