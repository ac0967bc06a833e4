#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace draftiv {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

enum class EventCategory { Sprint, Short, Middle, Long };
enum class ResultStatus { Finished, Dnf, Dns, Missing };
enum class Period { Pre, Covid, Post };

std::string to_string(EventCategory c);
std::string to_string(ResultStatus s);
std::string to_string(Period p);
std::optional<EventCategory> parse_category(const std::string& s);
std::optional<ResultStatus> parse_status(const std::string& s);
std::optional<Period> parse_period(const std::string& s);

// Calendar date, ISO-8601 "YYYY-MM-DD".
struct Date {
  int year = 0;
  int month = 1;
  int day = 1;

  static std::optional<Date> parse(const std::string& s);
  std::string iso() const;
  auto operator<=>(const Date&) const = default;
};

struct AthleteRecord {
  std::string athlete_id;
  bool male = false;
  int birth_year = 0;
};

struct EventRecord {
  std::string event_id;
  Date date;
  EventCategory category = EventCategory::Sprint;
};

struct ResultRecord {
  std::string athlete_id;
  std::string event_id;
  double swim_out_s = kMissing;
  double total_s = kMissing;
  double rank = kMissing;  // raw ranks are integers; kept numeric for transforms
  ResultStatus status = ResultStatus::Missing;
};

// One rejected input row: kept in a sidecar report, never a silent drop.
struct RejectEntry {
  std::string source;  // "athletes", "events", "results", "merge", "covariates"
  long line = 0;       // 1-based line in the source file, 0 if not file-backed
  std::string reason;
  std::string content;
};

struct RawTables {
  std::vector<AthleteRecord> athletes;
  std::vector<EventRecord> events;
  std::vector<ResultRecord> results;
  std::vector<RejectEntry> rejects;
};

// One athlete-by-event observation of the canonical panel. Slots past the
// covariates are filled by the grouping and instrument stages.
struct PanelRow {
  std::string athlete_id;
  std::string event_id;
  EventCategory category = EventCategory::Sprint;
  Date event_date;
  int event_year = 0;
  double swim_out_s = kMissing;
  double total_s = kMissing;
  double rank = kMissing;
  int age = 0;
  int age_sq = 0;
  bool male = false;
  Period period = Period::Pre;

  int group_index = 0;  // 1-based within event, 0 = not yet assigned
  int group_size = 0;
  int position = 0;     // D, 1 = leader, 0 = not yet assigned
  bool leader = false;
  bool drafter = false;
  bool first_drafter = false;
  bool second_drafter = false;
  bool third_drafter = false;
  bool fourth_drafter = false;
  bool fifth_drafter = false;
  bool last_drafter = false;
  double benefit = kMissing;
  double z_loo = kMissing;
  double z_proj = kMissing;
  double band_treat = kMissing;  // 0/1 when a band pair is applied
};

using Panel = std::vector<PanelRow>;

struct CleanAudit {
  long input = 0;
  long dropped_missing = 0;
  long dropped_dnf = 0;
  long dropped_dns = 0;
  long dropped_unmatched = 0;
  long output = 0;
};

struct CovariateAudit {
  long input = 0;
  long dropped_invalid_age = 0;
  long output = 0;
};

// Calendar cuts separating the three periods. Defaults: Pre < 2020-01-01,
// Covid = 2020..2022, Post >= 2023-01-01. Overridable per run.
struct PeriodBoundaries {
  Date covid_start{2020, 1, 1};
  Date post_start{2023, 1, 1};

  Period classify(const Date& d) const;
};

struct IngestPaths {
  std::string athletes;
  std::string events;
  std::string results;
};

// File-level problems (missing file, header mismatch) throw; row-level
// problems land in tables.rejects.
RawTables load_tables(const IngestPaths& paths, char delim = ',');

struct MergeOutput {
  Panel panel;  // sorted by (event_id, athlete_id)
  CleanAudit audit;
};

// Keeps only status=Finished rows with complete numeric fields. Unresolvable
// foreign keys are rejected, everything dropped is counted.
MergeOutput merge_and_clean(const RawTables& tables,
                            std::vector<RejectEntry>* rejects = nullptr);

// Fills age, age_sq and the period flag; rows with negative age are excluded.
CovariateAudit derive_covariates(Panel& panel, const PeriodBoundaries& bounds,
                                 std::vector<RejectEntry>* rejects = nullptr);

// Canonical panel file round-trip. Columns produced by later stages are
// written when present and read back when the header has them.
void write_panel(const std::string& path, const Panel& panel,
                 const std::string& comment = "", char delim = ',');
Panel read_panel(const std::string& path, char delim = ',');

void write_reject_report(const std::string& path,
                         const std::vector<RejectEntry>& rejects,
                         char delim = ',');

void sort_panel(Panel& panel);

}  // namespace draftiv
