#include "mechsim/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mechsim {

NormalFormGame::NormalFormGame(std::vector<int> message_counts, int agents)
    : counts_(std::move(message_counts)), agents_(agents) {
  strides_.resize(counts_.size());
  profile_count_ = 1;
  for (int i = static_cast<int>(counts_.size()) - 1; i >= 0; --i) {
    strides_[i] = profile_count_;
    profile_count_ *= counts_[i];
  }
  outcome_utility_.assign(profile_count_ * agents_, 0.0);
  transfer_.assign(profile_count_ * agents_, 0.0);
}

long long NormalFormGame::encode(std::span<const int> profile) const {
  long long idx = 0;
  for (size_t i = 0; i < counts_.size(); ++i) idx += profile[i] * strides_[i];
  return idx;
}

std::vector<int> NormalFormGame::decode(long long index) const {
  std::vector<int> out(counts_.size());
  for (size_t i = 0; i < counts_.size(); ++i) {
    out[i] = static_cast<int>((index / strides_[i]) % counts_[i]);
  }
  return out;
}

long long NormalFormGame::replace(long long index, int agent, int message) const {
  const int current = message_of(index, agent);
  return index + (message - current) * strides_[agent];
}

int NormalFormGame::message_of(long long index, int agent) const {
  return static_cast<int>((index / strides_[agent]) % counts_[agent]);
}

void NormalFormGame::set(long long profile, int agent, double outcome_utility, double transfer) {
  outcome_utility_[profile * agents_ + agent] = outcome_utility;
  transfer_[profile * agents_ + agent] = transfer;
}

ValidationReport CorrelatedStrategy::validate(long long profile_count) const {
  ValidationReport report;
  if (static_cast<long long>(prob.size()) != profile_count) {
    report.add("sigma-length", "distribution length does not match the profile count");
    return report;
  }
  double mass = 0.0;
  for (double p : prob) {
    if (p < -kProbTol) report.add("sigma-negative", "negative probability");
    mass += p;
  }
  if (std::abs(mass - 1.0) > 1e-9) report.add("sigma-mass", "probabilities do not sum to 1");
  return report;
}

NormalFormGame induce_game(const Mechanism& mech, const Environment& env, int true_state) {
  env.check_state(true_state);
  const int I = env.agent_count();
  NormalFormGame game(mech.message_counts, I);
  std::vector<int> profile(I, 0);
  for (long long idx = 0; idx < game.profile_count(); ++idx) {
    const Outcome g = mech.outcome_fn(profile);
    for (int i = 0; i < I; ++i) {
      const int type = env.states[true_state][i];
      game.set(idx, i, expected_utility(env, g, i, type), mech.transfer_fn(profile, i));
    }
    for (int k = I - 1; k >= 0; --k) {
      if (++profile[k] < mech.message_counts[k]) break;
      profile[k] = 0;
    }
  }
  return game;
}

CeCheckResult ce_check(const NormalFormGame& game, const CorrelatedStrategy& sigma, double tol) {
  CeCheckResult result;
  const int I = game.agents();
  for (int i = 0; i < I; ++i) {
    const int Mi = game.message_counts()[i];
    // accumulate sum over m_{-i} of sigma(a, m_{-i}) [u(a,.) - u(a',.)] for all (a,a')
    std::vector<double> slack(static_cast<size_t>(Mi) * Mi, 0.0);
    for (long long m = 0; m < game.profile_count(); ++m) {
      const double p = sigma.prob[m];
      if (p == 0.0) continue;
      const int a = game.message_of(m, i);
      const double u_here = game.payoff(m, i);
      for (int b = 0; b < Mi; ++b) {
        if (b == a) continue;
        slack[static_cast<size_t>(a) * Mi + b] += p * (u_here - game.payoff(game.replace(m, i, b), i));
      }
    }
    for (int a = 0; a < Mi; ++a) {
      for (int b = 0; b < Mi; ++b) {
        if (a == b) continue;
        const double violation = -slack[static_cast<size_t>(a) * Mi + b];
        if (violation > result.worst.amount) {
          result.worst = {i, a, b, violation};
        }
      }
    }
  }
  result.pass = result.worst.amount <= tol;
  return result;
}

bool is_pure_nash(const NormalFormGame& game, std::span<const int> profile, double tol) {
  const long long idx = game.encode(profile);
  for (int i = 0; i < game.agents(); ++i) {
    const double here = game.payoff(idx, i);
    for (int b = 0; b < game.message_counts()[i]; ++b) {
      if (b == profile[i]) continue;
      if (game.payoff(game.replace(idx, i, b), i) > here + tol) return false;
    }
  }
  return true;
}

CEVerificationReport verify_implementation(const NormalFormGame& game,
                                           const std::vector<char>& target,
                                           const std::vector<std::vector<int>>& nash_candidates,
                                           double tol) {
  CEVerificationReport report;
  if (static_cast<long long>(target.size()) != game.profile_count()) {
    report.error = "target mask length does not match the profile count";
    return report;
  }

  report.truthful_profile_is_nash = !nash_candidates.empty();
  for (const auto& candidate : nash_candidates) {
    if (!is_pure_nash(game, candidate)) {
      report.truthful_profile_is_nash = false;
      break;
    }
  }

  const long long N = game.profile_count();
  LpProblem lp;
  lp.num_vars = static_cast<int>(N);
  lp.objective.assign(N, 0.0);
  for (long long m = 0; m < N; ++m) {
    if (!target[m]) lp.objective[m] = 1.0;
  }
  lp.eq_rows.push_back(std::vector<double>(N, 1.0));
  lp.eq_rhs.push_back(1.0);

  const int I = game.agents();
  for (int i = 0; i < I; ++i) {
    const int Mi = game.message_counts()[i];
    for (int a = 0; a < Mi; ++a) {
      for (int b = 0; b < Mi; ++b) {
        if (a == b) continue;
        std::vector<double> row(N, 0.0);
        for (long long m = 0; m < N; ++m) {
          if (game.message_of(m, i) != a) continue;
          row[m] = game.payoff(m, i) - game.payoff(game.replace(m, i, b), i);
        }
        lp.ge_rows.push_back(std::move(row));
        lp.ge_rhs.push_back(0.0);
      }
    }
  }

  LpOptions options;
  // seed the simplex with a point mass on a verified pure Nash profile
  for (const auto& candidate : nash_candidates) {
    if (!is_pure_nash(game, candidate)) continue;
    const long long idx = game.encode(candidate);
    options.warm_pivots.emplace_back(0, static_cast<int>(idx));
    for (size_t r = 0; r < lp.ge_rows.size(); ++r) {
      options.warm_pivots.emplace_back(static_cast<int>(r + 1),
                                       static_cast<int>(N + r));  // surplus columns
    }
    break;
  }

  report.lp = lp_solve(lp, options);
  if (report.lp.status == LpStatus::kInfeasible) {
    // cannot happen for a finite game: CE polytope is nonempty
    report.error = "LP reported infeasible; the CE polytope of a finite game is never empty";
    return report;
  }
  if (report.lp.status != LpStatus::kOptimal) {
    report.error = "LP did not reach optimality";
    return report;
  }
  report.max_offpath_mass = report.lp.objective;
  CorrelatedStrategy witness;
  witness.prob = report.lp.x;
  report.offpath_witness = std::move(witness);
  report.implemented = report.max_offpath_mass <= tol && report.truthful_profile_is_nash;
  return report;
}

std::vector<char> target_profiles(const Mechanism& mech, const Environment& env,
                                  const std::vector<Outcome>& desired, double tol) {
  NormalFormGame shape(mech.message_counts, env.agent_count());
  std::vector<char> mask(shape.profile_count(), 0);
  std::vector<int> profile(mech.message_counts.size(), 0);
  for (long long idx = 0; idx < shape.profile_count(); ++idx) {
    const Outcome g = mech.outcome_fn(profile);
    bool ok = false;
    for (const auto& want : desired) {
      if (outcome_close(g, want, tol)) {
        ok = true;
        break;
      }
    }
    if (ok) {
      for (int i = 0; i < env.agent_count() && ok; ++i) {
        if (std::abs(mech.transfer_fn(profile, i)) > tol) ok = false;
      }
    }
    mask[idx] = ok ? 1 : 0;
    for (int k = static_cast<int>(profile.size()) - 1; k >= 0; --k) {
      if (++profile[k] < mech.message_counts[k]) break;
      profile[k] = 0;
    }
  }
  return mask;
}

}  // namespace mechsim
