#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "draftiv/panel.hpp"

namespace draftiv {

// Mean swim time of the other members of one group; empty leave-one-out set
// (singleton) yields missing.
std::optional<double> loo_group_mean(const std::vector<double>& group_times,
                                     size_t member_index);

enum class InstrumentKind { Loo, Projected };

struct InstrumentOptions {
  InstrumentKind kind = InstrumentKind::Loo;
  // When set, swim times are z-scored within event before averaging.
  bool standardize_within_event = false;
};

struct InstrumentAudit {
  long rows = 0;
  long missing = 0;  // singleton groups (loo) / no other event (projected)
};

// Fills z_loo (and z_proj for the projected kind) in place. The projected
// variant averages an athlete's leave-one-out values over their other events.
InstrumentAudit build_instrument(Panel& panel, const InstrumentOptions& options);

// Inclusive integer position band [lo, hi].
struct Band {
  int lo = 0;
  int hi = 0;

  bool contains(int d) const { return d >= lo && d <= hi; }
  std::string label() const;
};

struct BandPair {
  Band low;   // control arm, treatment 0
  Band high;  // treated arm, treatment 1

  std::string label() const;
};

// 0 if D falls in the low band, 1 if in the high band, nullopt otherwise
// (the row leaves the estimation sample). Overlapping bands are rejected.
std::optional<int> band_treatment(int position, const BandPair& bands);

// Parses "1-2:3-4" into a band pair, "1-2:3-4,2-3:4-5" into a ladder.
BandPair parse_band_pair(const std::string& text);
std::vector<BandPair> parse_band_ladder(const std::string& text);

}  // namespace draftiv
