#ifndef MECHSIM_GAME_HPP
#define MECHSIM_GAME_HPP

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mechsim/env.hpp"
#include "mechsim/lp.hpp"
#include "mechsim/mech_scf.hpp"

namespace mechsim {

/// Finite normal-form game with the mechanism payoff split kept around:
/// payoff(m, i) = outcome_utility(m, i) + transfer(m, i).
class NormalFormGame {
 public:
  NormalFormGame(std::vector<int> message_counts, int agents);

  int agents() const { return agents_; }
  const std::vector<int>& message_counts() const { return counts_; }
  long long profile_count() const { return profile_count_; }

  long long encode(std::span<const int> profile) const;
  std::vector<int> decode(long long index) const;
  /// Profile index after replacing agent's message.
  long long replace(long long index, int agent, int message) const;
  int message_of(long long index, int agent) const;

  double payoff(long long profile, int agent) const {
    return outcome_utility_[profile * agents_ + agent] + transfer_[profile * agents_ + agent];
  }
  double outcome_utility(long long profile, int agent) const {
    return outcome_utility_[profile * agents_ + agent];
  }
  double transfer(long long profile, int agent) const {
    return transfer_[profile * agents_ + agent];
  }
  void set(long long profile, int agent, double outcome_utility, double transfer);

 private:
  std::vector<int> counts_;
  std::vector<long long> strides_;
  int agents_;
  long long profile_count_;
  std::vector<double> outcome_utility_;
  std::vector<double> transfer_;
};

/// Distribution over joint message profiles.
struct CorrelatedStrategy {
  std::vector<double> prob;
  ValidationReport validate(long long profile_count) const;
};

struct CeViolation {
  int agent;
  int recommended;
  int deviation;
  double amount;  // positive: constraint violated by this much
};

struct CeCheckResult {
  bool pass = true;
  CeViolation worst{0, 0, 0, -std::numeric_limits<double>::infinity()};
};

struct CEVerificationReport {
  bool truthful_profile_is_nash = false;
  double max_offpath_mass = 0.0;
  std::optional<CorrelatedStrategy> offpath_witness;
  bool implemented = false;
  LpResult lp;
  std::string error;
};

/// Payoff tensor of the game the mechanism induces at a true state.
NormalFormGame induce_game(const Mechanism& mech, const Environment& env, int true_state);

/// Unconditional-form CE inequalities for every agent and ordered message pair.
CeCheckResult ce_check(const NormalFormGame& game, const CorrelatedStrategy& sigma, double tol);

/// Full deviation scan at one profile.
bool is_pure_nash(const NormalFormGame& game, std::span<const int> profile, double tol = kUtilityTol);

/// Maximizes off-target probability mass over the CE polytope; implemented iff
/// the optimum is <= tol and every nash_candidate passes a deviation scan.
CEVerificationReport verify_implementation(const NormalFormGame& game,
                                           const std::vector<char>& target,
                                           const std::vector<std::vector<int>>& nash_candidates,
                                           double tol);

/// Marks profiles where g(m) matches the desired outcome(s) and all transfers vanish.
std::vector<char> target_profiles(const Mechanism& mech, const Environment& env,
                                  const std::vector<Outcome>& desired, double tol = kUtilityTol);

}  // namespace mechsim

#endif  // MECHSIM_GAME_HPP
