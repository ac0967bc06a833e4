#pragma once

#include <string>
#include <vector>

#include "draftiv/panel.hpp"
#include "draftiv/theory.hpp"

namespace draftiv {

enum class Linkage { Single, Complete };

// One inferred drafting cluster within an event. Members are ordered by
// ascending swim-out time (ties by athlete_id); member k holds position k+1.
struct DraftingGroup {
  std::string event_id;
  int group_index = 0;  // 1-based, ascending time order within the event
  std::vector<std::pair<std::string, double>> members;  // (athlete_id, swim_out_s)
};

// Threshold clustering of one event's swim-out times. Single linkage merges
// whenever a chain of pairwise gaps <= threshold connects two athletes, which
// in one dimension equals splitting the sorted sequence at gaps > threshold.
// Complete linkage repeatedly merges the adjacent cluster pair with the
// smallest span until no merge keeps every within-cluster distance <= threshold.
std::vector<DraftingGroup> cluster_event(
    const std::vector<std::pair<std::string, double>>& times, double threshold,
    Linkage linkage = Linkage::Single);

// Grouping knobs for a whole panel pass.
struct ClusterConfig {
  double threshold = 5.0;
  Linkage linkage = Linkage::Single;
  GameParams benefit_params{};  // gamma/lambda feeding the benefit column
};

// Clusters every event and fills group/position/dummy/benefit slots in place.
void assign_groups(Panel& panel, const ClusterConfig& config);

// Group-size predicate such as "<10", ">1", "<=15", "==4".
struct GroupSizePredicate {
  enum class Op { Lt, Le, Gt, Ge, Eq, Ne, Any } op = Op::Any;
  int value = 0;

  bool pass(int size) const;
  static GroupSizePredicate parse(const std::string& text);  // throws on bad text
  std::string str() const;
};

struct GroupFilterAudit {
  long input = 0;
  long dropped_group_size = 0;
  long output = 0;
};

// Removes rows whose group size fails the predicate; when cap > 0, replaces
// position D by min(D, cap) and recomputes the benefit column to match.
GroupFilterAudit group_filters(Panel& panel, const GroupSizePredicate& pred,
                               int position_cap = 0,
                               const GameParams& benefit_params = GameParams{});

}  // namespace draftiv
