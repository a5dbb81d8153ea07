#ifndef MECHSIM_LEARN_HPP
#define MECHSIM_LEARN_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "mechsim/game.hpp"

namespace mechsim {

struct LearningConfig {
  long iterations = 2000;
  std::uint64_t seed = 1;
  enum class Fallback { kUniform, kPrior } fallback = Fallback::kUniform;
  /// Used when fallback is kPrior; defaults to uniform when empty.
  std::vector<std::vector<double>> prior;
  long record_every = 1;
  /// Hart–Mas-Colell style inertia update instead of plain normalized positive regrets.
  bool inertia = false;
  double inertia_mu = 0.0;  // 0: automatic
};

/// Cumulative counterfactual payoff sums; regrets are (cum_cf - cum_realized) / T.
struct RegretState {
  std::vector<std::vector<double>> cum_counterfactual;  // [agent][message]
  std::vector<double> cum_realized;                     // [agent]
  std::vector<int> last_played;                         // [agent], for the inertia rule
  long periods = 0;

  static RegretState zero(const NormalFormGame& game);
  std::vector<double> regrets(int agent) const;
};

struct TraceRecord {
  long period;
  std::vector<std::vector<double>> strategies;  // next-period mixed strategies
  std::vector<int> realized;                    // joint profile played this period
  std::vector<double> outcome_utilities;        // per agent, transfers excluded
  double gains_from_trade;                      // sum of outcome utilities
  std::vector<double> transfers;                // mechanism transfers per agent
  std::vector<double> avg_max_regret;           // per agent
};

struct ConvergenceInfo {
  bool converged = false;
  long first_period = -1;      // first period the trailing window locks in
  long long modal_profile = -1;
  double modal_frequency = 0.0;
};

struct SimulationResult {
  std::vector<TraceRecord> trace;
  RegretState final_state;
  ConvergenceInfo convergence;
  /// Empirical distribution of joint play over the final window (default 1000).
  CorrelatedStrategy empirical_last_window;
  long empirical_window = 0;
};

void regret_update(RegretState& state, const NormalFormGame& game, std::span<const int> realized);

std::vector<std::vector<double>> strategy_from_regrets(const RegretState& state,
                                                       const NormalFormGame& game,
                                                       const LearningConfig& config);

std::vector<double> average_max_regret(const RegretState& state);

SimulationResult simulate(const NormalFormGame& game, const LearningConfig& config,
                          long empirical_window = 1000, long convergence_window = 100,
                          double convergence_threshold = 0.9);

/// Deterministic per-(seed, period, agent) uniform draw in [0, 1).
double counter_uniform(std::uint64_t seed, long period, int agent);

}  // namespace mechsim

#endif  // MECHSIM_LEARN_HPP
