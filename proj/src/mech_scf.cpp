#include "mechsim/mech_scf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mechsim {

TypeProfileSpace::TypeProfileSpace(const Environment& env) {
  const int I = env.agent_count();
  radices_.resize(I);
  strides_.resize(I);
  for (int i = 0; i < I; ++i) radices_[i] = env.type_count(i);
  for (int i = I - 1; i >= 0; --i) {
    strides_[i] = size_;
    size_ *= radices_[i];
  }
}

std::vector<int> TypeProfileSpace::decode(int index) const {
  std::vector<int> out(radices_.size());
  for (size_t i = 0; i < radices_.size(); ++i) {
    out[i] = (index / strides_[i]) % radices_[i];
  }
  return out;
}

int TypeProfileSpace::encode(std::span<const int> profile) const {
  int index = 0;
  for (size_t i = 0; i < radices_.size(); ++i) index += profile[i] * strides_[i];
  return index;
}

int TypeProfileSpace::coordinate(int index, int agent) const {
  return (index / strides_[agent]) % radices_[agent];
}

ScfMechanism::ScfMechanism(Environment env, Scf f, ChallengeScheme scheme,
                           DictatorLotteries lotteries, MechanismParams params,
                           bool tau1_includes_nonstate)
    : env_(std::move(env)),
      f_(std::move(f)),
      scheme_(std::move(scheme)),
      lotteries_(std::move(lotteries)),
      params_(params),
      tau1_includes_nonstate_(tau1_includes_nonstate),
      profiles_(env_) {
  profile_state_.resize(profiles_.size());
  for (int p = 0; p < profiles_.size(); ++p) {
    const auto prof = profiles_.decode(p);
    profile_state_[p] = env_.state_index(prof);
  }
  challenge_table_.resize(env_.state_count());
  for (int s = 0; s < env_.state_count(); ++s) {
    challenge_table_[s].resize(env_.agent_count());
    for (int i = 0; i < env_.agent_count(); ++i) {
      challenge_table_[s][i].resize(env_.type_count(i));
      for (int t = 0; t < env_.type_count(i); ++t) {
        challenge_table_[s][i][t] = !outcome_close(scheme_.at(s, i, t), f_.at(s));
      }
    }
  }
}

ScfMessage ScfMechanism::decode_message(int msg) const {
  const int P = profiles_.size();
  return ScfMessage{msg / P, msg % P};
}

int ScfMechanism::encode_message(const ScfMessage& m) const {
  return m.report1 * profiles_.size() + m.report2;
}

int ScfMechanism::truthful_message(int state) const {
  env_.check_state(state);
  const int p = profiles_.encode(env_.states[state]);
  return encode_message(ScfMessage{p, p});
}

bool ScfMechanism::challenged(const ScfMessage& m_i, int j, const ScfMessage& m_j) const {
  const int s = profile_state_[m_i.report2];
  if (s < 0) return false;
  return entry_challenges(s, j, profiles_.coordinate(m_j.report1, j));
}

double ScfMechanism::e_value(const ScfMessage& m_i, int j, const ScfMessage& m_j) const {
  const int s = profile_state_[m_i.report2];
  if (s < 0) return 1.0;
  return entry_challenges(s, j, profiles_.coordinate(m_j.report1, j)) ? params_.epsilon : 0.0;
}

Outcome ScfMechanism::dictator_compound(std::span<const int> joint) const {
  std::vector<Outcome> parts;
  parts.reserve(env_.agent_count());
  for (int k = 0; k < env_.agent_count(); ++k) {
    const ScfMessage mk = decode_message(joint[k]);
    parts.push_back(lotteries_.at(k, profiles_.coordinate(mk.report1, k)));
  }
  return mix_equal(parts);
}

Outcome ScfMechanism::compound_challenge(std::span<const int> joint, int i, int j) const {
  const ScfMessage mi = decode_message(joint[i]);
  const ScfMessage mj = decode_message(joint[j]);
  const int s = profile_state_[mi.report2];
  if (s < 0) throw DomainError("compound_challenge: report2 does not identify a state");
  const Outcome& entry = scheme_.at(s, j, profiles_.coordinate(mj.report1, j));
  return compound(params_.epsilon, dictator_compound(joint), entry);
}

Outcome ScfMechanism::outcome_g(std::span<const int> joint) const {
  const int I = env_.agent_count();
  const Outcome dict = dictator_compound(joint);
  std::vector<Outcome> parts;
  parts.reserve(I * I);
  for (int i = 0; i < I; ++i) {
    const ScfMessage mi = decode_message(joint[i]);
    const int s = profile_state_[mi.report2];
    for (int j = 0; j < I; ++j) {
      if (s < 0) {
        parts.push_back(dict);
        continue;
      }
      const ScfMessage mj = decode_message(joint[j]);
      const Outcome& entry = scheme_.at(s, j, profiles_.coordinate(mj.report1, j));
      const double e = entry_challenges(s, j, profiles_.coordinate(mj.report1, j))
                           ? params_.epsilon
                           : 0.0;
      parts.push_back(e == 0.0 ? entry : compound(e, dict, entry));
    }
  }
  return mix_equal(parts);
}

double ScfMechanism::transfer_tau(std::span<const int> joint, int agent) const {
  const int I = env_.agent_count();
  const ScfMessage mi = decode_message(joint[agent]);
  const int si = profile_state_[mi.report2];
  double total = 0.0;
  for (int j = 0; j < I; ++j) {
    if (j == agent) continue;
    const ScfMessage mj = decode_message(joint[j]);
    const int sj = profile_state_[mj.report2];
    const int own_j = profiles_.coordinate(mj.report1, j);  // m_{j,j}^1

    // tau^1: pay 2*eta when challenged by j's own-type report (or, per the prose,
    // when report2 names no state).
    if (si < 0) {
      if (tau1_includes_nonstate_) total -= 2.0 * params_.eta;
    } else if (entry_challenges(si, j, own_j)) {
      total -= 2.0 * params_.eta;
    }

    // tau^2: the small fee around j's self-challenge status.
    if (sj >= 0) {
      const bool j_self = entry_challenges(sj, j, own_j);
      const int my_report_of_j = profiles_.coordinate(mi.report1, j);  // m_{i,j}^1
      if (j_self) {
        if (my_report_of_j != own_j) total -= params_.small_fee;
      } else if (entry_challenges(sj, j, my_report_of_j)) {
        total -= params_.small_fee;
      }
    }

    // tau^3: pay eta when j's report of my type challenges my report2.
    if (si >= 0) {
      const int j_report_of_me = profiles_.coordinate(mj.report1, agent);  // m_{j,i}^1
      if (entry_challenges(si, agent, j_report_of_me)) total -= params_.eta;
    }
  }
  return total;
}

namespace {

struct SlackTracker {
  double min_positive = std::numeric_limits<double>::infinity();
  void feed(double slack) {
    if (slack > 0.0 && slack < min_positive) min_positive = slack;
  }
};

// Enumerates all combinations of own-type first reports (one type per agent).
template <typename Fn>
void for_each_own_report(const Environment& env, Fn&& fn) {
  std::vector<int> combo(env.agent_count(), 0);
  while (true) {
    fn(const_cast<const std::vector<int>&>(combo));
    int k = env.agent_count() - 1;
    while (k >= 0) {
      if (++combo[k] < env.type_count(k)) break;
      combo[k] = 0;
      --k;
    }
    if (k < 0) return;
  }
}

}  // namespace

CalibrationResult calibrate(const Environment& env, const Scf& f, const ChallengeScheme& scheme,
                            const DictatorLotteries& lotteries, bool tau1_includes_nonstate) {
  CalibrationResult result;
  SlackTracker slack;

  // dictator inequalities feed the fee slack
  const DictatorReport dict = validate_dictator_lotteries(env, lotteries);
  for (const auto& c : dict.checks) {
    std::ostringstream detail;
    detail << "agent " << env.agent_names[c.agent] << " true "
           << env.type_names[c.agent][c.true_type] << " vs "
           << env.type_names[c.agent][c.other_type];
    result.certificate.push_back({"d", detail.str(), c.u_true, c.u_other, c.pass});
    slack.feed(c.u_true - c.u_other);
    if (!c.pass) {
      result.failure = "dictator lottery condition fails: " + detail.str();
      return result;
    }
  }

  // eta from the hull of everything g can mix: scheme entries, the SCF range and
  // every dictator compound. Valid for any epsilon in [0,1].
  std::vector<Outcome> atoms;
  for (const auto& o : f.by_state) atoms.push_back(o);
  for (const auto& per_state : scheme.table) {
    for (const auto& per_agent : per_state) {
      for (const auto& o : per_agent) atoms.push_back(o);
    }
  }
  std::vector<Outcome> dictator_compounds;
  for_each_own_report(env, [&](const std::vector<int>& combo) {
    std::vector<Outcome> parts;
    for (int k = 0; k < env.agent_count(); ++k) parts.push_back(lotteries.at(k, combo[k]));
    dictator_compounds.push_back(mix_equal(parts));
  });
  atoms.insert(atoms.end(), dictator_compounds.begin(), dictator_compounds.end());

  double max_spread = 0.0;
  for (int i = 0; i < env.agent_count(); ++i) {
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

  // epsilon grid: largest 2^-k for which Eq. (bw) holds at every challenged
  // configuration (reported state s, challenger j with own report t, any
  // combination of the other agents' own reports).
  auto bw_holds = [&](double eps, std::vector<CalibrationCheck>* cert, std::string* fail,
                      SlackTracker* tracker) {
    for (int s = 0; s < env.state_count(); ++s) {
      const Outcome& fs = f.at(s);
      for (int j = 0; j < env.agent_count(); ++j) {
        const int reported_type = env.states[s][j];  // m_{i,j}^2: coordinate j of the report
        for (int t = 0; t < env.type_count(j); ++t) {
          const Outcome& entry = scheme.at(s, j, t);
          if (outcome_close(entry, fs)) continue;  // not a challenge
          bool ok = true;
          for_each_own_report(env, [&](const std::vector<int>& combo) {
            if (!ok || combo[j] != t) return;
            std::vector<Outcome> parts;
            for (int k = 0; k < env.agent_count(); ++k) parts.push_back(lotteries.at(k, combo[k]));
            const Outcome compound_eps = compound(eps, mix_equal(parts), entry);
            const double lhs1 = expected_utility(env, compound_eps, j, reported_type);
            const double rhs1 = expected_utility(env, fs, j, reported_type);
            const double lhs2 = expected_utility(env, compound_eps, j, t);
            const double rhs2 = expected_utility(env, fs, j, t);
            const bool pass1 = lhs1 < rhs1 - kUtilityTol;
            const bool pass2 = lhs2 > rhs2 + kUtilityTol;
            if (cert) {
              std::ostringstream detail;
              detail << "state " << env.state_label(s) << " challenger " << env.agent_names[j]
                     << ":" << env.type_names[j][t];
              cert->push_back({"bw1", detail.str(), lhs1, rhs1, pass1});
              cert->push_back({"bw2", detail.str(), lhs2, rhs2, pass2});
            }
            if (tracker) {
              tracker->feed(rhs1 - lhs1);
              tracker->feed(lhs2 - rhs2);
            }
            if (!(pass1 && pass2)) {
              ok = false;
              if (fail) {
                std::ostringstream os;
                os << "Eq. (bw) fails at state " << env.state_label(s) << ", challenger "
                   << env.agent_names[j] << ":" << env.type_names[j][t] << " with epsilon " << eps;
                *fail = os.str();
              }
            }
          });
          if (!ok) return false;
        }
      }
    }
    return true;
  };

  bool found = false;
  for (int k = 1; k <= 40 && !found; ++k) {
    const double eps = std::ldexp(1.0, -k);
    std::string fail;
    if (bw_holds(eps, nullptr, &fail, nullptr)) {
      result.params.epsilon = eps;
      found = true;
    } else if (k == 40) {
      result.failure = fail;
    }
  }
  if (!found) {
    if (result.failure.empty()) result.failure = "no epsilon in the 2^-k grid satisfies Eq. (bw)";
    return result;
  }
  bw_holds(result.params.epsilon, &result.certificate, nullptr, &slack);

  result.params.small_fee =
      std::isfinite(slack.min_positive) ? 0.01 * slack.min_positive : 0.01;

  // exact Eq. (D) certificate by exhaustive enumeration, at desk scale only
  const TypeProfileSpace profiles(env);
  const double joint_count = std::pow(static_cast<double>(profiles.size()) *
                                          static_cast<double>(profiles.size()),
                                      env.agent_count());
  if (joint_count <= 200000.0) {
    ScfMechanism mech(env, f, scheme, lotteries, result.params, tau1_includes_nonstate);
    const int M = mech.message_count();
    const int I = env.agent_count();
    std::vector<int> joint(I, 0);
    std::vector<std::vector<double>> lo(I), hi(I);
    for (int i = 0; i < I; ++i) {
      lo[i].assign(env.type_count(i), std::numeric_limits<double>::infinity());
      hi[i].assign(env.type_count(i), -std::numeric_limits<double>::infinity());
    }
    while (true) {
      const Outcome g = mech.outcome_g(joint);
      for (int i = 0; i < I; ++i) {
        for (int t = 0; t < env.type_count(i); ++t) {
          const double u = expected_utility(env, g, i, t);
          lo[i][t] = std::min(lo[i][t], u);
          hi[i][t] = std::max(hi[i][t], u);
        }
      }
      int k = I - 1;
      while (k >= 0) {
        if (++joint[k] < M) break;
        joint[k] = 0;
        --k;
      }
      if (k < 0) break;
    }
    double exact_gap = 0.0;
    for (int i = 0; i < I; ++i) {
      for (int t = 0; t < env.type_count(i); ++t) exact_gap = std::max(exact_gap, hi[i][t] - lo[i][t]);
    }
    result.certificate.push_back(
        {"D", "eta vs exact utility gap of g over all profiles", result.params.eta, exact_gap,
         result.params.eta > exact_gap});
    if (!(result.params.eta > exact_gap)) {
      result.failure = "eta does not dominate the exact utility gap";
      return result;
    }
  } else {
    result.certificate.push_back({"D", "eta vs outcome-hull bound (game too large to enumerate)",
                                  result.params.eta, max_spread, result.params.eta > max_spread});
  }

  result.ok = true;
  return result;
}

Mechanism as_mechanism(std::shared_ptr<const ScfMechanism> mech) {
  Mechanism m;
  m.message_counts.assign(mech->env().agent_count(), mech->message_count());
  m.outcome_fn = [mech](std::span<const int> joint) { return mech->outcome_g(joint); };
  m.transfer_fn = [mech](std::span<const int> joint, int agent) {
    return mech->transfer_tau(joint, agent);
  };
  return m;
}

}  // namespace mechsim
