#include "draftiv/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "draftiv/grouping.hpp"
#include "draftiv/instruments.hpp"

namespace draftiv {

void DgpConfig::validate() const {
  if (athletes < 2) throw std::invalid_argument("dgp: need at least 2 athletes");
  if (events < 1) throw std::invalid_argument("dgp: need at least 1 event");
  if (!(attendance > 0.0 && attendance <= 1.0))
    throw std::invalid_argument("dgp: attendance must be in (0,1]");
  if (!(geometric_p > 0.0 && geometric_p < 1.0))
    throw std::invalid_argument("dgp: geometric_p must be in (0,1)");
  if (max_group_size < 1) throw std::invalid_argument("dgp: max_group_size < 1");
  for (auto [v, nm] : {std::pair<double, const char*>{ability_sd, "ability_sd"},
                       {dayform_sd, "dayform_sd"},
                       {swim_noise_sd, "swim_noise_sd"},
                       {grouping_noise_sd, "grouping_noise_sd"},
                       {athlete_fe_sd, "athlete_fe_sd"},
                       {event_fe_sd, "event_fe_sd"},
                       {outcome_noise_sd, "outcome_noise_sd"}}) {
    if (v < 0.0) throw std::invalid_argument(std::string("dgp: ") + nm + " < 0");
  }
  if (swim_scale <= 0.0) throw std::invalid_argument("dgp: swim_scale <= 0");
  benefit_params.validate();
}

uint64_t split_seed(uint64_t master, uint64_t index) {
  // splitmix64 of the pair, so replication streams never overlap.
  uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void parallel_for(long count, int threads, const std::function<void(long)>& fn) {
  if (count <= 0) return;
  int t = std::max(1, threads);
  if (t == 1 || count == 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<long> next{0};
  for (int w = 0; w < t; ++w) {
    pool.emplace_back([&] {
      for (long i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

namespace {

std::string id_of(const char* prefix, long i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%s%05ld", prefix, i);
  return buf;
}

Date event_date_for(long e) {
  // Biweekly schedule from 2017 onward; wraps through the period boundaries.
  long days = 14 * e;
  long year = 2017 + days / 364;
  long doy = days % 364;
  int month = static_cast<int>(doy / 28) % 12 + 1;
  int day = static_cast<int>(doy % 28) + 1;
  Date d;
  d.year = static_cast<int>(year);
  d.month = month;
  d.day = day;
  return d;
}

}  // namespace

SimulatedPanel simulate_panel(const DgpConfig& cfg, uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> stdnorm(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::geometric_distribution<int> geom(cfg.geometric_p);

  const long n_ath = cfg.athletes;
  std::vector<double> ability(n_ath), athlete_fe(n_ath), age(n_ath);
  std::vector<int> male(n_ath);
  for (long i = 0; i < n_ath; ++i) {
    ability[i] = cfg.ability_sd * stdnorm(rng);
    athlete_fe[i] = cfg.athlete_fe_sd * stdnorm(rng);
    age[i] = 20.0 + std::floor(unif(rng) * 40.0);
    male[i] = unif(rng) < 0.5 ? 1 : 0;
  }

  SimulatedPanel out;
  out.truth.beta_treat = cfg.beta_treat;
  out.truth.beta_leader = cfg.beta_leader;
  out.truth.endogeneity = cfg.endogeneity;
  out.truth.seed = seed;
  out.truth.treatment = cfg.paired_step_outcome
                            ? "paired_step"
                            : (cfg.treatment == DgpConfig::Treatment::Benefit
                                   ? "benefit"
                                   : "position");

  const PeriodBoundaries periods{};
  bool any_multimember = false;

  for (long e = 0; e < cfg.events; ++e) {
    double event_fe = cfg.event_fe_sd * stdnorm(rng);
    Date date = event_date_for(e);
    EventCategory cat = static_cast<EventCategory>(e % 4);
    std::string event_id = id_of("E", e);

    struct Entrant {
      long athlete;
      double dayform;
      double swim;
      double sort_score;
    };
    std::vector<Entrant> entrants;
    for (long i = 0; i < n_ath; ++i) {
      if (unif(rng) >= cfg.attendance) continue;
      Entrant en;
      en.athlete = i;
      en.dayform = cfg.dayform_sd * stdnorm(rng);
      double realized = ability[i] + en.dayform;
      en.swim = cfg.swim_base - cfg.swim_scale * realized +
                cfg.swim_noise_sd * stdnorm(rng);
      en.sort_score = ability[i] + cfg.grouping_noise_sd * stdnorm(rng);
      entrants.push_back(en);
    }
    if (entrants.empty()) continue;

    // Fastest expected swimmers first, then cut into geometric-size chunks.
    std::sort(entrants.begin(), entrants.end(), [](const Entrant& a, const Entrant& b) {
      return a.sort_score > b.sort_score ||
             (a.sort_score == b.sort_score && a.athlete < b.athlete);
    });
    std::vector<int> group_of(entrants.size());
    std::vector<int> group_sizes;
    size_t pos = 0;
    while (pos < entrants.size()) {
      int size = std::min(1 + geom(rng), cfg.max_group_size);
      size = static_cast<int>(
          std::min<size_t>(static_cast<size_t>(size), entrants.size() - pos));
      for (int j = 0; j < size; ++j) group_of[pos + j] = static_cast<int>(group_sizes.size());
      group_sizes.push_back(size);
      pos += size;
      if (size > 1) any_multimember = true;
    }

    // Within a group the position is the swim order.
    std::vector<std::vector<size_t>> members(group_sizes.size());
    for (size_t i = 0; i < entrants.size(); ++i) members[group_of[i]].push_back(i);
    std::vector<int> position(entrants.size());
    for (auto& ms : members) {
      std::sort(ms.begin(), ms.end(), [&](size_t a, size_t b) {
        return entrants[a].swim < entrants[b].swim ||
               (entrants[a].swim == entrants[b].swim &&
                entrants[a].athlete < entrants[b].athlete);
      });
      for (size_t r = 0; r < ms.size(); ++r) position[ms[r]] = static_cast<int>(r + 1);
    }

    for (size_t i = 0; i < entrants.size(); ++i) {
      const Entrant& en = entrants[i];
      PanelRow row;
      row.athlete_id = id_of("A", en.athlete);
      row.event_id = event_id;
      row.category = cat;
      row.event_date = date;
      row.event_year = date.year;
      row.swim_out_s = en.swim;
      row.age = age[en.athlete];
      row.age_sq = age[en.athlete] * age[en.athlete];
      row.male = male[en.athlete];
      row.period = periods.classify(date);
      int g = group_of[i];
      row.group_index = g + 1;
      row.group_size = group_sizes[g];
      int d = position[i];
      row.position = d;
      row.leader = d == 1;
      row.drafter = d > 1;
      row.first_drafter = d == 2;
      row.second_drafter = d == 3;
      row.third_drafter = d == 4;
      row.fourth_drafter = d == 5;
      row.fifth_drafter = d == 6;
      row.last_drafter = row.group_size > 1 && d == row.group_size;
      row.benefit = benefit(d, cfg.benefit_params);

      double treat_term;
      if (cfg.paired_step_outcome) {
        treat_term = cfg.beta_treat * std::floor((d - 1) / 2.0);
      } else if (cfg.treatment == DgpConfig::Treatment::Benefit) {
        treat_term = cfg.beta_treat * row.benefit;
      } else {
        treat_term = cfg.beta_treat * d;
      }
      double y = treat_term + cfg.beta_leader * (row.leader ? 1.0 : 0.0) +
                 cfg.beta_age * row.age + cfg.beta_male * row.male +
                 athlete_fe[en.athlete] + event_fe +
                 cfg.endogeneity * (ability[en.athlete] + en.dayform) +
                 cfg.outcome_noise_sd * stdnorm(rng);
      row.total_s = y;               // raw response column
      row.rank = std::expm1(y);      // log(rank+1) reproduces y exactly
      out.panel.push_back(std::move(row));
    }
  }

  if (cfg.require_instrument && !any_multimember)
    throw std::runtime_error(
        "every simulated group is a singleton; the leave-one-out instrument "
        "is undefined (lower grouping_noise_sd or geometric_p, or raise "
        "attendance)");

  sort_panel(out.panel);
  build_instrument(out.panel, InstrumentOptions{});
  return out;
}

}  // namespace draftiv
