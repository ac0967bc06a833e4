#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "draftiv/panel.hpp"
#include "draftiv/theory.hpp"

namespace draftiv {

// Synthetic-panel process: latent ability drives swim times and grouping;
// positions are the within-group swim order; the log outcome carries a true
// treatment coefficient plus fixed effects and an error loaded on realized
// ability, which is the endogeneity channel.
struct DgpConfig {
  long athletes = 400;
  long events = 30;
  double attendance = 0.7;  // probability an athlete starts a given event

  double ability_sd = 1.0;        // persistent athlete ability
  double dayform_sd = 0.5;        // event-specific ability swing
  double swim_base = 1500.0;      // seconds
  double swim_scale = 30.0;       // seconds per unit of realized ability
  double swim_noise_sd = 5.0;     // timing noise on top of ability
  double grouping_noise_sd = 0.3; // blurs the ability ordering behind groups
  double geometric_p = 0.35;      // group sizes are 1 + geometric(p), capped
  int max_group_size = 12;

  enum class Treatment { Position, Benefit } treatment = Treatment::Position;
  double beta_treat = -0.05;
  double beta_leader = 0.0;
  double beta_age = 0.0;
  double beta_male = 0.0;
  double athlete_fe_sd = 1.0;
  double event_fe_sd = 0.5;
  double endogeneity = 0.0;      // loading of realized ability on the outcome
  double outcome_noise_sd = 0.3;

  // y += beta_treat * floor((position-1)/2): a step effect constant inside
  // consecutive position pairs, for band-contrast validation.
  bool paired_step_outcome = false;

  // With no group of size >= 2 the leave-one-out instrument is undefined.
  bool require_instrument = true;

  GameParams benefit_params{};

  void validate() const;  // throws std::invalid_argument
};

struct DgpTruth {
  double beta_treat = 0;
  double beta_leader = 0;
  double endogeneity = 0;
  std::string treatment;  // "position", "benefit", or "paired_step"
  uint64_t seed = 0;
};

struct SimulatedPanel {
  Panel panel;
  DgpTruth truth;
};

// Deterministic given (config, seed); fills groups, positions, dummies,
// benefit, and the leave-one-out instrument columns.
SimulatedPanel simulate_panel(const DgpConfig& config, uint64_t seed);

// Fixed seed-splitting rule for replications of a master seed.
uint64_t split_seed(uint64_t master, uint64_t index);

// Runs fn(0..count-1) on up to `threads` threads; any result collection is
// the caller's job. Deterministic workloads stay deterministic because each
// index derives its own seed.
void parallel_for(long count, int threads, const std::function<void(long)>& fn);

}  // namespace draftiv
