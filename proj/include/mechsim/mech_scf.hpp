#ifndef MECHSIM_MECH_SCF_HPP
#define MECHSIM_MECH_SCF_HPP

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mechsim/env.hpp"
#include "mechsim/schemes.hpp"

namespace mechsim {

/// Mixed-radix codec for type profiles in the full product x_i Theta_i,
/// lexicographic with agent 0 most significant.
class TypeProfileSpace {
 public:
  explicit TypeProfileSpace(const Environment& env);
  int size() const { return size_; }
  std::vector<int> decode(int index) const;
  int encode(std::span<const int> profile) const;
  int coordinate(int index, int agent) const;

 private:
  std::vector<int> radices_;
  std::vector<int> strides_;
  int size_ = 1;
};

/// A message in the SCF mechanism: two type-profile reports.
struct ScfMessage {
  int report1;  // index into the type profile space
  int report2;
};

struct MechanismParams {
  double epsilon = 0.0;    // lottery weight of the dictator compound in a challenge
  double eta = 0.0;        // penalty scale, exceeds every utility gap of g
  double small_fee = 0.0;  // the separate small fee in the second transfer rule
};

/// A finite mechanism: per-agent message counts plus total outcome and transfer rules.
struct Mechanism {
  std::vector<int> message_counts;
  std::function<Outcome(std::span<const int>)> outcome_fn;
  std::function<double(std::span<const int>, int)> transfer_fn;
};

struct CalibrationCheck {
  std::string kind;    // "d", "bw1", "bw2", "D"
  std::string detail;
  double lhs, rhs;
  bool pass;
};

struct CalibrationResult {
  MechanismParams params;
  std::vector<CalibrationCheck> certificate;
  bool ok = false;
  std::string failure;  // first violating configuration when !ok
};

/// The SCF implementing mechanism: double state reports, challenge-compound
/// outcome function and the three transfer rules.
class ScfMechanism {
 public:
  ScfMechanism(Environment env, Scf f, ChallengeScheme scheme, DictatorLotteries lotteries,
               MechanismParams params, bool tau1_includes_nonstate = true);

  const Environment& env() const { return env_; }
  const Scf& scf() const { return f_; }
  const ChallengeScheme& scheme() const { return scheme_; }
  const DictatorLotteries& lotteries() const { return lotteries_; }
  const MechanismParams& params() const { return params_; }
  const TypeProfileSpace& profiles() const { return profiles_; }

  int message_count() const { return profiles_.size() * profiles_.size(); }
  ScfMessage decode_message(int msg) const;
  int encode_message(const ScfMessage& m) const;
  /// Message with report1 = report2 = the given state's profile.
  int truthful_message(int state) const;

  /// 0 if report2 names a state and agent j's own-type report does not challenge
  /// it; epsilon if it does; 1 if report2 names no state.
  double e_value(const ScfMessage& m_i, int j, const ScfMessage& m_j) const;
  bool challenged(const ScfMessage& m_i, int j, const ScfMessage& m_j) const;

  /// Equal-weight dictator compound over the agents' own-type reports.
  Outcome dictator_compound(std::span<const int> joint) const;
  /// The epsilon-compound implementing a challenge of agent i by agent j.
  Outcome compound_challenge(std::span<const int> joint, int i, int j) const;
  Outcome outcome_g(std::span<const int> joint) const;
  double transfer_tau(std::span<const int> joint, int agent) const;

 private:
  bool entry_challenges(int state, int agent, int type) const {
    return challenge_table_[state][agent][type];
  }

  Environment env_;
  Scf f_;
  ChallengeScheme scheme_;
  DictatorLotteries lotteries_;
  MechanismParams params_;
  bool tau1_includes_nonstate_;
  TypeProfileSpace profiles_;
  std::vector<int> profile_state_;  // profile index -> state index or -1
  std::vector<std::vector<std::vector<char>>> challenge_table_;  // [state][agent][type]

  friend CalibrationResult calibrate(const Environment&, const Scf&, const ChallengeScheme&,
                                     const DictatorLotteries&, bool);
};

/// Picks eta from an outcome-hull bound on Eq. (D), epsilon as the largest 2^-k
/// (k = 1..40) satisfying Eq. (bw) at every challenged configuration, and the
/// small fee from the minimum positive slack. Emits the full certificate.
CalibrationResult calibrate(const Environment& env, const Scf& f, const ChallengeScheme& scheme,
                            const DictatorLotteries& lotteries, bool tau1_includes_nonstate = true);

/// Wraps an ScfMechanism as a generic Mechanism.
Mechanism as_mechanism(std::shared_ptr<const ScfMechanism> mech);

}  // namespace mechsim

#endif  // MECHSIM_MECH_SCF_HPP
