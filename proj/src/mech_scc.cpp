#include "mechsim/mech_scc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mechsim {

double scoring_rule(double c, bool event) {
  const bool on_grid = std::any_of(std::begin(kBetGrid), std::end(kBetGrid),
                                   [c](double g) { return std::abs(g - c) <= 1e-12; });
  if (!on_grid) throw DomainError("scoring_rule: bet must lie on the {0, 0.5, 1} grid");
  if (event) return -c * c - (1.0 - c) * (1.0 - c) + 2.0 * c - 1.0;
  return -c * c - (1.0 - c) * (1.0 - c) + 2.0 * (1.0 - c) - 1.0;
}

SccMechanism::SccMechanism(Environment env, Scc F, SccChallengeScheme scheme,
                           DictatorLotteries lotteries, MechanismParams params)
    : env_(std::move(env)),
      F_(std::move(F)),
      scheme_(std::move(scheme)),
      lotteries_(std::move(lotteries)),
      params_(params) {
  if (env_.agent_count() < 3) {
    throw DomainError("the SCC mechanism needs at least three agents");
  }
  alloc_offset_.resize(env_.state_count());
  for (int s = 0; s < env_.state_count(); ++s) {
    alloc_offset_[s] = alloc_total_;
    if (F_.at(s).empty()) throw DomainError("SCC assigns an empty set at state " + env_.state_label(s));
    alloc_total_ += static_cast<int>(F_.at(s).size());
  }
  for (int j = 1; j < env_.agent_count(); ++j) bet_combos_ *= kBetGridSize;
}

int SccMechanism::message_count() const {
  return env_.state_count() * alloc_total_ * bet_combos_;
}

SccMessage SccMechanism::decode_message(int msg) const {
  SccMessage m;
  const int bets = msg % bet_combos_;
  msg /= bet_combos_;
  const int pair = msg % alloc_total_;
  m.report1 = msg / alloc_total_;
  // locate (report2, alloc) within the concatenated F blocks
  int s = env_.state_count() - 1;
  while (alloc_offset_[s] > pair) --s;
  m.report2 = s;
  m.alloc = pair - alloc_offset_[s];
  m.bets.resize(env_.agent_count() - 1);
  int b = bets;
  for (int k = env_.agent_count() - 2; k >= 0; --k) {
    m.bets[k] = b % kBetGridSize;
    b /= kBetGridSize;
  }
  return m;
}

int SccMechanism::encode_message(const SccMessage& m) const {
  int bets = 0;
  for (int k = 0; k < env_.agent_count() - 1; ++k) bets = bets * kBetGridSize + m.bets[k];
  const int pair = alloc_offset_[m.report2] + m.alloc;
  return (m.report1 * alloc_total_ + pair) * bet_combos_ + bets;
}

int SccMechanism::truthful_message(int state, int alloc) const {
  env_.check_state(state);
  SccMessage m;
  m.report1 = state;
  m.report2 = state;
  m.alloc = alloc;
  m.bets.assign(env_.agent_count() - 1, 0);
  return encode_message(m);
}

double SccMechanism::bet_value(const SccMessage& m, int i, int j) const {
  if (i == j) throw DomainError("bet_value: no bet on oneself");
  const int slot = j < i ? j : j - 1;
  return kBetGrid[m.bets[slot]];
}

int SccMechanism::own_type_report1(std::span<const int> joint, int agent) const {
  const SccMessage m = decode_message(joint[agent]);
  return env_.states[m.report1][agent];
}

const Outcome& SccMechanism::scheme_entry(int state, const Outcome& z, int agent, int type) const {
  const auto& fs = F_.at(state);
  for (int k = 0; k < static_cast<int>(fs.size()); ++k) {
    if (outcome_close(fs[k], z)) return scheme_.at(state, k, agent, type);
  }
  return z;  // z is not proposed at this state: nothing to look up, no challenge
}

Outcome SccMechanism::effective_allocation(std::span<const int> joint) const {
  const int I = env_.agent_count();
  std::vector<const Outcome*> announced(I);
  for (int i = 0; i < I; ++i) {
    const SccMessage m = decode_message(joint[i]);
    announced[i] = &F_.at(m.report2)[m.alloc];
  }
  for (int i = 0; i < I; ++i) {
    int adherents = 0;
    for (int k = 0; k < I; ++k) {
      if (outcome_close(*announced[k], *announced[i])) ++adherents;
    }
    if (adherents >= I - 1) return *announced[i];
  }
  return *announced[0];
}

bool SccMechanism::challenges(std::span<const int> joint, int i, int j) const {
  const SccMessage mi = decode_message(joint[i]);
  const Outcome phi = effective_allocation(joint);
  if (!outcome_close(F_.at(mi.report2)[mi.alloc], phi)) return false;
  const int tj = own_type_report1(joint, j);
  return !outcome_close(scheme_entry(mi.report2, phi, j, tj), phi);
}

Outcome SccMechanism::dictator_compound(std::span<const int> joint) const {
  std::vector<Outcome> parts;
  parts.reserve(env_.agent_count());
  for (int k = 0; k < env_.agent_count(); ++k) {
    parts.push_back(lotteries_.at(k, own_type_report1(joint, k)));
  }
  return mix_equal(parts);
}

Outcome SccMechanism::outcome_g(std::span<const int> joint) const {
  const int I = env_.agent_count();
  const Outcome phi = effective_allocation(joint);
  const Outcome dict = dictator_compound(joint);
  std::vector<Outcome> parts;
  parts.reserve(I * I);
  for (int i = 0; i < I; ++i) {
    const SccMessage mi = decode_message(joint[i]);
    const bool effective = outcome_close(F_.at(mi.report2)[mi.alloc], phi);
    for (int j = 0; j < I; ++j) {
      const Outcome& entry = scheme_entry(mi.report2, phi, j, own_type_report1(joint, j));
      const bool challenged = effective && !outcome_close(entry, phi);
      parts.push_back(challenged ? compound(params_.epsilon, dict, entry) : entry);
    }
  }
  return mix_equal(parts);
}

double SccMechanism::transfer(std::span<const int> joint, int agent) const {
  const int I = env_.agent_count();
  const SccMessage mi = decode_message(joint[agent]);
  double total = 0.0;
  for (int j = 0; j < I; ++j) {
    if (j == agent) continue;
    const SccMessage mj = decode_message(joint[j]);
    const bool j_self = self_challenge(joint, j);

    total += scoring_rule(bet_value(mi, agent, j), j_self);
    if (challenges(joint, agent, j)) total -= 2.0 * params_.eta;
    if (j_self && env_.states[mi.report1][j] != env_.states[mj.report1][j]) {
      total -= params_.epsilon;
    }
    if (bet_value(mj, j, agent) > 0.0 &&
        env_.states[mi.report2][agent] != env_.states[mj.report1][agent]) {
      total -= params_.eta;
    }
  }
  return total;
}

CalibrationResult scc_calibrate(const Environment& env, const Scc& F,
                                const SccChallengeScheme& scheme,
                                const DictatorLotteries& lotteries) {
  CalibrationResult result;

  const DictatorReport dict = validate_dictator_lotteries(env, lotteries);
  double min_slack = std::numeric_limits<double>::infinity();
  for (const auto& c : dict.checks) {
    std::ostringstream detail;
    detail << "agent " << env.agent_names[c.agent] << " true "
           << env.type_names[c.agent][c.true_type] << " vs "
           << env.type_names[c.agent][c.other_type];
    result.certificate.push_back({"d", detail.str(), c.u_true, c.u_other, c.pass});
    if (c.u_true - c.u_other > 0.0) min_slack = std::min(min_slack, c.u_true - c.u_other);
    if (!c.pass) {
      result.failure = "dictator lottery condition fails: " + detail.str();
      return result;
    }
  }

  std::vector<Outcome> atoms;
  for (const auto& per_state : F.by_state) {
    for (const auto& o : per_state) atoms.push_back(o);
  }
  for (const auto& per_state : scheme.table) {
    for (const auto& per_alloc : per_state) {
      for (const auto& per_agent : per_alloc) {
        for (const auto& o : per_agent) atoms.push_back(o);
      }
    }
  }
  // dictator compounds over all report1 state choices
  const int S = env.state_count();
  const int I = env.agent_count();
  std::vector<int> combo(I, 0);
  while (true) {
    std::vector<Outcome> parts;
    for (int k = 0; k < I; ++k) parts.push_back(lotteries.at(k, env.states[combo[k]][k]));
    atoms.push_back(mix_equal(parts));
    int k = I - 1;
    while (k >= 0) {
      if (++combo[k] < S) break;
      combo[k] = 0;
      --k;
    }
    if (k < 0) break;
  }

  double max_spread = 0.0;
  for (int i = 0; i < I; ++i) {
    for (int t = 0; t < env.type_count(i); ++t) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (const auto& o : atoms) {
        const double u = expected_utility(env, o, i, t);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
      }
      max_spread = std::max(max_spread, hi - lo);
    }
  }
  result.params.eta = max_spread > 0.0 ? 1.1 * max_spread : 1.0;

  // epsilon against Eq. (Cbw): for every challengeable (state, z, challenger type)
  // and every dictator compound consistent with the challenger's report
  auto cbw_holds = [&](double eps, std::vector<CalibrationCheck>* cert, std::string* fail) {
    for (int s = 0; s < S; ++s) {
      const auto& fs = F.at(s);
      for (int z = 0; z < static_cast<int>(fs.size()); ++z) {
        for (int j = 0; j < I; ++j) {
          const int reported_type = env.states[s][j];
          for (int t = 0; t < env.type_count(j); ++t) {
            const Outcome& entry = scheme.at(s, z, j, t);
            if (outcome_close(entry, fs[z])) continue;
            // j's report1 must be a state whose j-coordinate is t
            for (int rj = 0; rj < S; ++rj) {
              if (env.states[rj][j] != t) continue;
              std::vector<int> others(I, 0);
              bool ok = true;
              while (ok) {
                std::vector<Outcome> parts;
                for (int k = 0; k < I; ++k) {
                  parts.push_back(lotteries.at(k, env.states[k == j ? rj : others[k]][k]));
                }
                const Outcome ce = compound(eps, mix_equal(parts), entry);
                const double lhs1 = expected_utility(env, ce, j, reported_type);
                const double rhs1 = expected_utility(env, fs[z], j, reported_type);
                const double lhs2 = expected_utility(env, ce, j, t);
                const double rhs2 = expected_utility(env, fs[z], j, t);
                const bool pass1 = lhs1 < rhs1 - kUtilityTol;
                const bool pass2 = lhs2 > rhs2 + kUtilityTol;
                if (cert) {
                  std::ostringstream detail;
                  detail << "state " << env.state_label(s) << " z" << z << " challenger "
                         << env.agent_names[j] << ":" << env.type_names[j][t];
                  cert->push_back({"bw1", detail.str(), lhs1, rhs1, pass1});
                  cert->push_back({"bw2", detail.str(), lhs2, rhs2, pass2});
                }
                if (!(pass1 && pass2)) {
                  if (fail) {
                    std::ostringstream os;
                    os << "Eq. (Cbw) fails at state " << env.state_label(s) << ", z" << z
                       << ", challenger " << env.agent_names[j] << ":" << env.type_names[j][t];
                    *fail = os.str();
                  }
                  ok = false;
                  break;
                }
                int k = I - 1;
                for (; k >= 0; --k) {
                  if (k == j) continue;
                  if (++others[k] < S) break;
                  others[k] = 0;
                }
                if (k < 0) break;
              }
              if (!ok) return false;
            }
          }
        }
      }
    }
    return true;
  };

  bool found = false;
  for (int k = 1; k <= 40 && !found; ++k) {
    const double eps = std::ldexp(1.0, -k);
    std::string fail;
    if (cbw_holds(eps, nullptr, &fail)) {
      result.params.epsilon = eps;
      found = true;
    } else if (k == 40) {
      result.failure = fail;
    }
  }
  if (!found) {
    if (result.failure.empty()) result.failure = "no epsilon in the 2^-k grid satisfies Eq. (Cbw)";
    return result;
  }
  cbw_holds(result.params.epsilon, &result.certificate, nullptr);

  result.params.small_fee = std::isfinite(min_slack) ? 0.01 * min_slack : 0.01;
  result.ok = true;
  return result;
}

Mechanism as_mechanism(std::shared_ptr<const SccMechanism> mech) {
  Mechanism m;
  m.message_counts.assign(mech->env().agent_count(), mech->message_count());
  m.outcome_fn = [mech](std::span<const int> joint) { return mech->outcome_g(joint); };
  m.transfer_fn = [mech](std::span<const int> joint, int agent) {
    return mech->transfer(joint, agent);
  };
  return m;
}

}  // namespace mechsim
