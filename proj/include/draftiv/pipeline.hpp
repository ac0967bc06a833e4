#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "draftiv/bandwagon.hpp"
#include "draftiv/dgp.hpp"
#include "draftiv/grouping.hpp"
#include "draftiv/hdfe.hpp"
#include "draftiv/instruments.hpp"
#include "draftiv/panel.hpp"
#include "draftiv/report.hpp"

namespace draftiv {

struct SpecConfig {
  std::string name;
  std::string formula;
  std::string se;  // covariance request; empty = cluster clause if present, else iid
};

struct TableConfig {
  std::string file;  // basename under <out>/; .csv/.md appended per format
  std::string title;
  std::vector<std::string> columns;  // spec names; empty = all
  StarConvention stars = StarConvention::Coarse;
  bool csv = true;
  bool markdown = true;
};

struct SimulateConfig {
  std::string name;
  DgpConfig dgp;
  long reps = 1;
};

struct BandwagonStage {
  bool enabled = false;
  std::vector<BandPair> pairs;  // empty = default ladder
  BandwagonOptions options;
  std::string table_file = "band_comparisons";
  std::string figure_file = "band_figure";
  double alpha = 0.05;
  bool significant_only = true;
};

// Whole-run description, loaded from one JSON file. Environment variables
// DRAFTIV_ATHLETES, DRAFTIV_EVENTS, DRAFTIV_RESULTS, DRAFTIV_PANEL and
// DRAFTIV_OUT override the corresponding paths only.
struct RunConfig {
  IngestPaths inputs;        // all three set, or none
  std::string panel_path;    // alternative entry: a prebuilt panel file
  std::string out_dir = "out";
  uint64_t seed = 1;
  int threads = 1;

  bool do_cluster = true;
  ClusterConfig clustering;
  bool do_instrument = true;
  InstrumentOptions instrument;
  PeriodBoundaries periods;
  DesignOptions design;
  EstimationOptions estimation;

  std::vector<SpecConfig> specifications;
  std::vector<TableConfig> tables;
  BandwagonStage bandwagon;
  std::vector<SimulateConfig> simulations;
  bool emit_summary = true;

  std::string canonical;  // sorted-key dump of the source JSON, hashed into artifacts

  static RunConfig from_json_file(const std::string& path);
  static RunConfig from_json_text(const std::string& text);

  // Checks name uniqueness, formula syntax, and column resolvability before
  // any computation; throws with the specification name and column.
  void validate() const;

  bool has_inputs() const {
    return !inputs.athletes.empty() || !inputs.events.empty() ||
           !inputs.results.empty();
  }
};

uint64_t fnv1a64(std::string_view data);
std::string config_hash(const RunConfig& config);  // 16 hex chars

// Executes the configured stages in order; artifacts land under out_dir,
// each stamped with the config hash. Returns the artifact-relative paths
// written. Throws with the stage name on failure.
std::vector<std::string> run_pipeline(const RunConfig& config, std::ostream& log);

}  // namespace draftiv
