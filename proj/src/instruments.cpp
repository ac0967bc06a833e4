#include "draftiv/instruments.hpp"

#include <cmath>
#include <map>
#include <string>
#include <unordered_map>

namespace draftiv {

std::optional<double> loo_group_mean(const std::vector<double>& group_times,
                                     size_t member_index) {
  if (member_index >= group_times.size())
    throw std::invalid_argument("member index outside group");
  if (group_times.size() < 2) return std::nullopt;
  double sum = 0.0;
  for (size_t i = 0; i < group_times.size(); ++i) {
    if (i != member_index) sum += group_times[i];
  }
  return sum / static_cast<double>(group_times.size() - 1);
}

InstrumentAudit build_instrument(Panel& panel, const InstrumentOptions& options) {
  InstrumentAudit audit;
  audit.rows = static_cast<long>(panel.size());
  sort_panel(panel);

  // Leave-one-out within (event, group), on raw or event-standardized times.
  size_t begin = 0;
  while (begin < panel.size()) {
    size_t end = begin;
    while (end < panel.size() && panel[end].event_id == panel[begin].event_id) ++end;

    std::vector<double> score(end - begin);
    for (size_t i = begin; i < end; ++i) score[i - begin] = panel[i].swim_out_s;
    if (options.standardize_within_event) {
      double mean = 0.0;
      for (double s : score) mean += s;
      mean /= static_cast<double>(score.size());
      double var = 0.0;
      for (double s : score) var += (s - mean) * (s - mean);
      double sd = score.size() > 1 ? std::sqrt(var / static_cast<double>(score.size() - 1)) : 0.0;
      for (double& s : score) s = sd > 0 ? (s - mean) / sd : 0.0;
    }

    std::map<int, std::vector<size_t>> group_rows;
    for (size_t i = begin; i < end; ++i) group_rows[panel[i].group_index].push_back(i);
    for (const auto& [gidx, rows] : group_rows) {
      std::vector<double> times;
      times.reserve(rows.size());
      for (size_t i : rows) times.push_back(score[i - begin]);
      for (size_t k = 0; k < rows.size(); ++k) {
        auto z = loo_group_mean(times, k);
        panel[rows[k]].z_loo = z ? *z : kMissing;
        if (!z) ++audit.missing;
      }
    }
    begin = end;
  }

  if (options.kind == InstrumentKind::Projected) {
    audit.missing = 0;
    // Mean of the athlete's leave-one-out values over their other events.
    std::unordered_map<std::string, std::vector<size_t>> by_athlete;
    for (size_t i = 0; i < panel.size(); ++i)
      by_athlete[panel[i].athlete_id].push_back(i);
    for (const auto& [id, rows] : by_athlete) {
      for (size_t i : rows) {
        double sum = 0.0;
        long n = 0;
        for (size_t j : rows) {
          if (j == i || std::isnan(panel[j].z_loo)) continue;
          sum += panel[j].z_loo;
          ++n;
        }
        panel[i].z_proj = n > 0 ? sum / static_cast<double>(n) : kMissing;
        if (n == 0) ++audit.missing;
      }
    }
  }
  return audit;
}

std::string Band::label() const {
  return std::to_string(lo) + "-" + std::to_string(hi);
}

std::string BandPair::label() const {
  return low.label() + " vs " + high.label();
}

std::optional<int> band_treatment(int position, const BandPair& bands) {
  if (bands.low.lo > bands.low.hi || bands.high.lo > bands.high.hi)
    throw std::invalid_argument("band bounds out of order");
  bool overlap = bands.low.lo <= bands.high.hi && bands.high.lo <= bands.low.hi;
  if (overlap) throw std::invalid_argument("overlapping bands: " + bands.label());
  if (bands.low.contains(position)) return 0;
  if (bands.high.contains(position)) return 1;
  return std::nullopt;
}

namespace {

Band parse_band(const std::string& text) {
  auto dash = text.find('-');
  if (dash == std::string::npos)
    throw std::invalid_argument("bad band (want lo-hi): " + text);
  Band b;
  try {
    b.lo = std::stoi(text.substr(0, dash));
    b.hi = std::stoi(text.substr(dash + 1));
  } catch (const std::exception&) {
    throw std::invalid_argument("bad band (want lo-hi): " + text);
  }
  if (b.lo > b.hi) throw std::invalid_argument("band bounds out of order: " + text);
  return b;
}

}  // namespace

BandPair parse_band_pair(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("bad band pair (want lo-hi:lo-hi): " + text);
  BandPair p;
  p.low = parse_band(text.substr(0, colon));
  p.high = parse_band(text.substr(colon + 1));
  // Validate disjointness up front.
  band_treatment(p.low.lo, p);
  return p;
}

std::vector<BandPair> parse_band_ladder(const std::string& text) {
  std::vector<BandPair> out;
  size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    std::string piece = comma == std::string::npos ? text.substr(start)
                                                   : text.substr(start, comma - start);
    if (!piece.empty()) out.push_back(parse_band_pair(piece));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("empty band ladder");
  return out;
}

}  // namespace draftiv
