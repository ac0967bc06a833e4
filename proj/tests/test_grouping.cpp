#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "draftiv/grouping.hpp"

using namespace draftiv;

namespace {

// Reference single linkage: connect every pair within threshold through a
// union-find, then read off the partition. Quadratic but obviously right.
struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

std::vector<std::set<std::string>> brute_single_linkage(
    const std::vector<std::pair<std::string, double>>& times, double threshold) {
  int n = static_cast<int>(times.size());
  UnionFind uf(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(times[i].second - times[j].second) <= threshold) uf.unite(i, j);
  std::map<int, std::set<std::string>> comps;
  for (int i = 0; i < n; ++i) comps[uf.find(i)].insert(times[i].first);
  std::vector<std::set<std::string>> out;
  for (auto& [root, members] : comps) out.push_back(std::move(members));
  return out;
}

std::vector<std::set<std::string>> as_sets(const std::vector<DraftingGroup>& groups) {
  std::vector<std::set<std::string>> out;
  for (const auto& g : groups) {
    std::set<std::string> s;
    for (const auto& [id, t] : g.members) s.insert(id);
    out.push_back(std::move(s));
  }
  return out;
}

bool same_partition(std::vector<std::set<std::string>> a,
                    std::vector<std::set<std::string>> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

std::vector<std::pair<std::string, double>> random_times(std::mt19937_64& rng, int n,
                                                         double spread) {
  std::uniform_real_distribution<double> u(0.0, spread);
  std::vector<std::pair<std::string, double>> times;
  for (int i = 0; i < n; ++i) times.push_back({"A" + std::to_string(i), u(rng)});
  return times;
}

}  // namespace

TEST_CASE("single_linkage_matches_union_find_oracle") {
  std::mt19937_64 rng(20240301);
  for (int trial = 0; trial < 1000; ++trial) {
    int n = 1 + static_cast<int>(rng() % 200);
    double spread = (trial % 3 == 0) ? 30.0 : 300.0;  // dense and sparse regimes
    auto times = random_times(rng, n, spread);
    double threshold = 0.5 + 9.5 * std::uniform_real_distribution<double>(0, 1)(rng);
    auto fast = cluster_event(times, threshold, Linkage::Single);
    auto slow = brute_single_linkage(times, threshold);
    REQUIRE(same_partition(as_sets(fast), slow));
  }
}

TEST_CASE("single_linkage_permutation_invariant") {
  std::mt19937_64 rng(7);
  auto times = random_times(rng, 60, 80.0);
  auto reference = as_sets(cluster_event(times, 4.0));
  for (int shuffle = 0; shuffle < 100; ++shuffle) {
    std::shuffle(times.begin(), times.end(), rng);
    CHECK(same_partition(as_sets(cluster_event(times, 4.0)), reference));
  }
}

TEST_CASE("single_linkage_threshold_monotone") {
  // A larger threshold can only coarsen the partition.
  std::mt19937_64 rng(99);
  auto times = random_times(rng, 120, 150.0);
  size_t last = SIZE_MAX;
  for (double t : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0}) {
    size_t count = cluster_event(times, t).size();
    CHECK(count <= last);
    last = count;
  }
}

TEST_CASE("single_linkage_chains_across_threshold") {
  // 0, 4, 8: endpoints are 8 apart yet chained through the middle.
  std::vector<std::pair<std::string, double>> times = {{"a", 0.0}, {"b", 4.0}, {"c", 8.0}};
  auto groups = cluster_event(times, 5.0, Linkage::Single);
  REQUIRE(groups.size() == 1);
  CHECK(groups[0].members.size() == 3);

  auto complete = cluster_event(times, 5.0, Linkage::Complete);
  REQUIRE(complete.size() == 2);  // complete linkage refuses the 8-wide span
}

TEST_CASE("complete_linkage_caps_group_span") {
  std::mt19937_64 rng(411);
  for (int trial = 0; trial < 300; ++trial) {
    int n = 2 + static_cast<int>(rng() % 80);
    auto times = random_times(rng, n, 60.0);
    double threshold = 3.0;
    auto groups = cluster_event(times, threshold, Linkage::Complete);
    size_t total = 0;
    for (const auto& g : groups) {
      total += g.members.size();
      double lo = g.members.front().second;
      double hi = g.members.back().second;
      CHECK(hi - lo <= threshold + 1e-12);
    }
    CHECK(total == times.size());
  }
}

TEST_CASE("complete_linkage_merges_smallest_adjacent_span_first") {
  // Spans after one merge decide which pair goes: {0,1} merges before {3,5}.
  std::vector<std::pair<std::string, double>> times = {
      {"a", 0.0}, {"b", 1.0}, {"c", 3.0}, {"d", 5.0}};
  auto groups = cluster_event(times, 2.0, Linkage::Complete);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].members.size() == 2);  // {a,b}
  CHECK(groups[1].members.size() == 2);  // {c,d}
}

TEST_CASE("group_members_ordered_and_indexed") {
  std::vector<std::pair<std::string, double>> times = {
      {"slow", 50.0}, {"fast", 10.0}, {"mid", 11.0}, {"tie", 10.0}};
  auto groups = cluster_event(times, 5.0);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].group_index == 1);
  CHECK(groups[1].group_index == 2);
  // tie on 10.0 broken by athlete_id: "fast" < "tie"
  REQUIRE(groups[0].members.size() == 3);
  CHECK(groups[0].members[0].first == "fast");
  CHECK(groups[0].members[1].first == "tie");
  CHECK(groups[0].members[2].first == "mid");
  CHECK(groups[1].members[0].first == "slow");
}

TEST_CASE("assign_groups_fills_positions_and_dummies") {
  Panel panel;
  auto add = [&](const std::string& aid, const std::string& eid, double swim) {
    PanelRow r;
    r.athlete_id = aid;
    r.event_id = eid;
    r.swim_out_s = swim;
    panel.push_back(r);
  };
  add("A1", "E1", 100);
  add("A2", "E1", 103);
  add("A3", "E1", 104);
  add("A4", "E1", 120);
  add("A5", "E2", 50);

  assign_groups(panel, ClusterConfig{});

  auto row = [&](const std::string& aid, const std::string& eid) -> const PanelRow& {
    for (const auto& r : panel)
      if (r.athlete_id == aid && r.event_id == eid) return r;
    REQUIRE(false);
    return panel.front();
  };

  CHECK(row("A1", "E1").position == 1);
  CHECK(row("A1", "E1").leader == 1);
  CHECK(row("A1", "E1").drafter == 0);
  CHECK(row("A2", "E1").position == 2);
  CHECK(row("A2", "E1").drafter == 1);
  CHECK(row("A2", "E1").first_drafter == 1);
  CHECK(row("A3", "E1").position == 3);
  CHECK(row("A3", "E1").second_drafter == 1);
  CHECK(row("A3", "E1").last_drafter == 1);
  CHECK(row("A2", "E1").last_drafter == 0);
  CHECK(row("A1", "E1").group_size == 3);
  CHECK(row("A4", "E1").group_index == 2);
  CHECK(row("A4", "E1").position == 1);
  CHECK(row("A5", "E2").group_index == 1);

  // benefit column follows the position transform
  GameParams p;
  CHECK(row("A2", "E1").benefit == doctest::Approx(benefit(2, p)).epsilon(1e-12));
  CHECK(row("A3", "E1").benefit == doctest::Approx(benefit(3, p)).epsilon(1e-12));
}

TEST_CASE("group_size_predicate_parse_and_pass") {
  auto p = GroupSizePredicate::parse("<10");
  CHECK(p.pass(9));
  CHECK_FALSE(p.pass(10));
  CHECK(GroupSizePredicate::parse(">=2").pass(2));
  CHECK_FALSE(GroupSizePredicate::parse(">=2").pass(1));
  CHECK(GroupSizePredicate::parse("==4").pass(4));
  CHECK(GroupSizePredicate::parse("!=4").pass(5));
  CHECK(GroupSizePredicate::parse("<=3").pass(3));
  CHECK(GroupSizePredicate::parse(">1").pass(2));
  CHECK(GroupSizePredicate::parse("<10").str() == "<10");
  CHECK_THROWS_AS(GroupSizePredicate::parse("~3"), std::invalid_argument);
  CHECK_THROWS_AS(GroupSizePredicate::parse("<"), std::invalid_argument);
  CHECK_THROWS_AS(GroupSizePredicate::parse("<x"), std::invalid_argument);
}

TEST_CASE("group_filters_drop_and_cap") {
  Panel panel;
  for (int i = 0; i < 8; ++i) {
    PanelRow r;
    r.athlete_id = "A" + std::to_string(i);
    r.event_id = "E1";
    r.swim_out_s = 100.0 + i;  // one chain, single group of 8
    panel.push_back(r);
  }
  PanelRow solo;
  solo.athlete_id = "S";
  solo.event_id = "E1";
  solo.swim_out_s = 400.0;
  panel.push_back(solo);
  assign_groups(panel, ClusterConfig{});

  GroupFilterAudit audit =
      group_filters(panel, GroupSizePredicate::parse(">1"), 5, GameParams{});
  CHECK(audit.input == 9);
  CHECK(audit.dropped_group_size == 1);
  CHECK(audit.output == 8);
  CHECK(panel.size() == 8);
  GameParams gp;
  for (const auto& r : panel) {
    CHECK(r.position <= 5);
    CHECK(r.benefit == doctest::Approx(benefit(r.position, gp)).epsilon(1e-12));
  }
}
