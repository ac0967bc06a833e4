#include "draftiv/grouping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace draftiv {

namespace {

using Member = std::pair<std::string, double>;

bool member_less(const Member& a, const Member& b) {
  if (a.second != b.second) return a.second < b.second;
  return a.first < b.first;  // exact ties broken by athlete_id
}

// Complete-linkage agglomeration on a sorted sequence. Clusters stay
// contiguous in time order, and the globally closest pair under the
// max-distance criterion is always an adjacent pair, so each step scans
// adjacent spans and merges the smallest one still within the threshold.
std::vector<std::vector<Member>> complete_linkage(std::vector<Member> sorted,
                                                  double threshold) {
  std::vector<std::vector<Member>> clusters;
  clusters.reserve(sorted.size());
  for (auto& m : sorted) clusters.push_back({std::move(m)});
  while (clusters.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    size_t best_i = 0;
    for (size_t i = 0; i + 1 < clusters.size(); ++i) {
      double span = clusters[i + 1].back().second - clusters[i].front().second;
      if (span < best) {
        best = span;
        best_i = i;
      }
    }
    if (best > threshold) break;
    auto& left = clusters[best_i];
    auto& right = clusters[best_i + 1];
    left.insert(left.end(), right.begin(), right.end());
    clusters.erase(clusters.begin() + best_i + 1);
  }
  return clusters;
}

}  // namespace

std::vector<DraftingGroup> cluster_event(const std::vector<Member>& times,
                                         double threshold, Linkage linkage) {
  if (!(threshold > 0)) throw std::invalid_argument("threshold must be > 0");
  for (const auto& [id, t] : times) {
    if (!std::isfinite(t)) throw std::invalid_argument("non-finite swim time for " + id);
  }
  std::vector<DraftingGroup> out;
  if (times.empty()) return out;

  std::vector<Member> sorted = times;
  std::sort(sorted.begin(), sorted.end(), member_less);

  std::vector<std::vector<Member>> clusters;
  if (linkage == Linkage::Single) {
    clusters.emplace_back();
    for (size_t i = 0; i < sorted.size(); ++i) {
      if (i > 0 && sorted[i].second - sorted[i - 1].second > threshold)
        clusters.emplace_back();
      clusters.back().push_back(sorted[i]);
    }
  } else {
    clusters = complete_linkage(std::move(sorted), threshold);
    std::sort(clusters.begin(), clusters.end(),
              [](const auto& a, const auto& b) { return member_less(a.front(), b.front()); });
  }

  out.reserve(clusters.size());
  int index = 0;
  for (auto& c : clusters) {
    DraftingGroup g;
    g.group_index = ++index;
    g.members = std::move(c);
    out.push_back(std::move(g));
  }
  return out;
}

void assign_groups(Panel& panel, const ClusterConfig& config) {
  config.benefit_params.validate();
  // Contiguous event spans; the panel is kept sorted by (event_id, athlete_id).
  sort_panel(panel);
  std::map<std::string, PanelRow*> row_of;
  size_t begin = 0;
  while (begin < panel.size()) {
    size_t end = begin;
    while (end < panel.size() && panel[end].event_id == panel[begin].event_id) ++end;

    std::vector<Member> times;
    times.reserve(end - begin);
    row_of.clear();
    for (size_t i = begin; i < end; ++i) {
      times.emplace_back(panel[i].athlete_id, panel[i].swim_out_s);
      row_of[panel[i].athlete_id] = &panel[i];
    }
    auto groups = cluster_event(times, config.threshold, config.linkage);
    for (const auto& g : groups) {
      int size = static_cast<int>(g.members.size());
      for (int k = 0; k < size; ++k) {
        PanelRow* r = row_of.at(g.members[k].first);
        int pos = k + 1;
        r->group_index = g.group_index;
        r->group_size = size;
        r->position = pos;
        r->leader = pos == 1;
        r->drafter = pos > 1;
        r->first_drafter = pos == 2;
        r->second_drafter = pos == 3;
        r->third_drafter = pos == 4;
        r->fourth_drafter = pos == 5;
        r->fifth_drafter = pos == 6;
        r->last_drafter = size > 1 && pos == size;
        r->benefit = benefit(static_cast<double>(pos), config.benefit_params);
      }
    }
    begin = end;
  }
}

bool GroupSizePredicate::pass(int size) const {
  switch (op) {
    case Op::Lt: return size < value;
    case Op::Le: return size <= value;
    case Op::Gt: return size > value;
    case Op::Ge: return size >= value;
    case Op::Eq: return size == value;
    case Op::Ne: return size != value;
    case Op::Any: return true;
  }
  return true;
}

GroupSizePredicate GroupSizePredicate::parse(const std::string& text) {
  GroupSizePredicate p;
  size_t pos = 0;
  auto starts = [&](const char* s) {
    return text.compare(0, std::string(s).size(), s) == 0;
  };
  if (text.empty() || text == "any") return p;
  if (starts("<=")) { p.op = Op::Le; pos = 2; }
  else if (starts(">=")) { p.op = Op::Ge; pos = 2; }
  else if (starts("==")) { p.op = Op::Eq; pos = 2; }
  else if (starts("!=")) { p.op = Op::Ne; pos = 2; }
  else if (starts("<")) { p.op = Op::Lt; pos = 1; }
  else if (starts(">")) { p.op = Op::Gt; pos = 1; }
  else throw std::invalid_argument("bad group-size predicate: " + text);
  try {
    size_t used = 0;
    p.value = std::stoi(text.substr(pos), &used);
    if (pos + used != text.size()) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw std::invalid_argument("bad group-size predicate: " + text);
  }
  return p;
}

std::string GroupSizePredicate::str() const {
  const char* ops[] = {"<", "<=", ">", ">=", "==", "!=", "any"};
  if (op == Op::Any) return "any";
  return std::string(ops[static_cast<int>(op)]) + std::to_string(value);
}

GroupFilterAudit group_filters(Panel& panel, const GroupSizePredicate& pred,
                               int position_cap, const GameParams& benefit_params) {
  GroupFilterAudit audit;
  audit.input = static_cast<long>(panel.size());
  Panel kept;
  kept.reserve(panel.size());
  for (auto& row : panel) {
    if (!pred.pass(row.group_size)) {
      ++audit.dropped_group_size;
      continue;
    }
    if (position_cap > 0 && row.position > position_cap) {
      row.position = position_cap;
      row.benefit = benefit(static_cast<double>(row.position), benefit_params);
    }
    kept.push_back(std::move(row));
  }
  panel = std::move(kept);
  audit.output = static_cast<long>(panel.size());
  return audit;
}

}  // namespace draftiv
