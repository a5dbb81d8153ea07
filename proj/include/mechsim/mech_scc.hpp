#ifndef MECHSIM_MECH_SCC_HPP
#define MECHSIM_MECH_SCC_HPP

#include <memory>
#include <span>
#include <vector>

#include "mechsim/env.hpp"
#include "mechsim/mech_scf.hpp"
#include "mechsim/schemes.hpp"

namespace mechsim {

/// 3-point bet grid for the discretized scoring-rule component.
inline constexpr double kBetGrid[] = {0.0, 0.5, 1.0};
inline constexpr int kBetGridSize = 3;

/// Four-part SCC message: two state reports, an allocation from F(report2) and a
/// bet on each opponent's self-challenge, on the 3-point grid.
struct SccMessage {
  int report1;             // state index
  int report2;             // state index
  int alloc;               // index into F(report2)
  std::vector<int> bets;   // grid index per opponent, in increasing agent order
};

/// Quadratic scoring rule of the bet component.
double scoring_rule(double c, bool event);

class SccMechanism {
 public:
  SccMechanism(Environment env, Scc F, SccChallengeScheme scheme, DictatorLotteries lotteries,
               MechanismParams params);

  const Environment& env() const { return env_; }
  const Scc& scc() const { return F_; }
  const MechanismParams& params() const { return params_; }

  int message_count() const;
  SccMessage decode_message(int msg) const;
  int encode_message(const SccMessage& m) const;
  /// Unanimous building block: report1 = report2 = state, the given allocation, zero bets.
  int truthful_message(int state, int alloc) const;
  /// c_{i,j}: agent i's bet on opponent j.
  double bet_value(const SccMessage& m, int i, int j) const;

  /// The allocation agreed by at least I-1 agents, else agent 1's announcement.
  Outcome effective_allocation(std::span<const int> joint) const;
  /// True iff agent i announced the effective allocation and agent j's own-type
  /// report challenges it.
  bool challenges(std::span<const int> joint, int i, int j) const;
  bool self_challenge(std::span<const int> joint, int j) const {
    return challenges(joint, j, j);
  }

  Outcome dictator_compound(std::span<const int> joint) const;
  Outcome outcome_g(std::span<const int> joint) const;
  double transfer(std::span<const int> joint, int agent) const;

 private:
  // scheme entry for (reported state, allocation z, agent slice, type); returns z
  // itself when z matches no member of F(reported state)
  const Outcome& scheme_entry(int state, const Outcome& z, int agent, int type) const;
  int own_type_report1(std::span<const int> joint, int agent) const;

  Environment env_;
  Scc F_;
  SccChallengeScheme scheme_;
  DictatorLotteries lotteries_;
  MechanismParams params_;
  std::vector<int> alloc_offset_;  // per state, start of its (report2, alloc) block
  int alloc_total_ = 0;
  int bet_combos_ = 1;
};

CalibrationResult scc_calibrate(const Environment& env, const Scc& F,
                                const SccChallengeScheme& scheme,
                                const DictatorLotteries& lotteries);

Mechanism as_mechanism(std::shared_ptr<const SccMechanism> mech);

}  // namespace mechsim

#endif  // MECHSIM_MECH_SCC_HPP
