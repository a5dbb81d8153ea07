#ifndef MECHSIM_SCHEMES_HPP
#define MECHSIM_SCHEMES_HPP

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "mechsim/env.hpp"

namespace mechsim {

/// Per-agent menus y_i(type) under which truthful type reports are strictly optimal.
struct DictatorLotteries {
  // table[agent][type] -> outcome
  std::vector<std::vector<Outcome>> table;
  const Outcome& at(int agent, int type) const;
};

/// Pre-assigned test allocations x(state, agent, type); entries equal to f(state)
/// encode "no test allocation exists for this (state, type)".
struct ChallengeScheme {
  // table[state][agent][type] -> outcome
  std::vector<std::vector<std::vector<Outcome>>> table;
  const Outcome& at(int state, int agent, int type) const;
};

/// Test allocations x(state, z, agent, type) for an SCC, one slice per z in F(state).
struct SccChallengeScheme {
  // table[state][alloc index within F(state)][agent][type] -> outcome
  std::vector<std::vector<std::vector<std::vector<Outcome>>>> table;
  const Outcome& at(int state, int alloc, int agent, int type) const;
};

struct DictatorCheck {
  int agent;
  int true_type;
  int other_type;
  double u_true;   // u_i(y_i(true), true)
  double u_other;  // u_i(y_i(other), true)
  bool pass;       // u_true > u_other
};

struct DictatorReport {
  std::vector<DictatorCheck> checks;
  bool ok() const;
};

// One (lie state, whistle-blower) evaluation of the two conditions of a test
// allocation. cond1: no false alarms, u_i(f(lie), lie_type) >= u_i(x, lie_type).
// cond2: incentive to expose, u_i(x, true_type) > u_i(f(lie), true_type).
struct ChallengeCheck {
  int lie_state;
  int agent;
  int lie_type;
  int true_type;
  bool entry_is_f;  // scheme entry equals f(lie): no test allocation stored
  double cond1_lhs, cond1_rhs;
  double cond2_lhs, cond2_rhs;
  bool cond1, cond2;
};

struct ChallengeSchemeReport {
  ValidationReport structure;          // two-case (reverse) violations, any (state,agent,type)
  std::vector<ChallengeCheck> checks;  // per (lie, differing-type agent) vs the given true state
  // lie states (f(lie) != f(true)) for which no agent passes both conditions
  std::vector<int> lies_without_whistleblower;
  bool ok() const;
};

struct MonotonicityFailure {
  int reported_state;  // theta~ (the lie)
  int true_state;      // theta
};

struct MonotonicityWitness {
  int agent;
  Outcome allocation;
};

struct MonotonicityReport {
  bool holds = true;
  // witness per ordered pair (reported, true); populated for every pair with a
  // witness, including pairs with f(reported) == f(true)
  std::map<std::pair<int, int>, MonotonicityWitness> witnesses;
  // pairs with f(reported) != f(true) and no witness in the candidate universe
  std::vector<MonotonicityFailure> failures;
};

/// Checks Eq. (d): strict self-preference of every dictator menu entry.
DictatorReport validate_dictator_lotteries(const Environment& env, const DictatorLotteries& y);

/// Structural check of the two-case rule for every entry (no true-state needed).
ValidationReport validate_challenge_scheme_structure(const Environment& env, const Scf& f,
                                                     const ChallengeScheme& x);

/// Full validation against a true state: structure plus, for every lie and every
/// agent whose type differs, the no-false-alarm / incentive-to-expose conditions.
ChallengeSchemeReport validate_challenge_scheme(const Environment& env, const Scf& f,
                                                const ChallengeScheme& x, int true_state);

/// Same structural rule with z in F(state) substituted for f(state).
ValidationReport validate_scc_challenge_scheme_structure(const Environment& env, const Scc& F,
                                                         const SccChallengeScheme& x);

/// Rebuilds a challenge scheme so truthful type reports are weakly optimal
/// (Eq. (best-C)): per (state, agent), every challenged type gets its most
/// preferred entry among the raw non-f entries; argmax ties resolve to the
/// lowest index in enumeration order.
ChallengeScheme best_challenge_transform(const Environment& env, const Scf& f,
                                         const ChallengeScheme& raw);

/// Definition-2 check relative to a finite candidate universe.
MonotonicityReport check_maskin_monotonicity(const Environment& env, const Scf& f,
                                             const std::vector<Outcome>& candidates);

/// Agents j whose stored entry challenges the reported state given their true
/// type: { j : x(reported, theta_j) != f(reported) }.
std::vector<int> whistleblower_set(const Environment& env, const Scf& f, const ChallengeScheme& x,
                                   int reported_state, int true_state);

/// Default candidate universe for the monotonicity check: SCF range, scheme
/// entries, and a transfer-perturbation grid around the SCF range.
std::vector<Outcome> default_monotonicity_candidates(const Environment& env, const Scf& f,
                                                     const ChallengeScheme* scheme);

}  // namespace mechsim

#endif  // MECHSIM_SCHEMES_HPP
