#include "mechsim/schemes.hpp"

#include <algorithm>
#include <sstream>

namespace mechsim {

const Outcome& DictatorLotteries::at(int agent, int type) const {
  if (agent < 0 || agent >= static_cast<int>(table.size()) || type < 0 ||
      type >= static_cast<int>(table[agent].size())) {
    throw DomainError("dictator lottery table has no entry for agent " + std::to_string(agent) +
                      ", type " + std::to_string(type));
  }
  return table[agent][type];
}

const Outcome& ChallengeScheme::at(int state, int agent, int type) const {
  if (state < 0 || state >= static_cast<int>(table.size()) || agent < 0 ||
      agent >= static_cast<int>(table[state].size()) || type < 0 ||
      type >= static_cast<int>(table[state][agent].size())) {
    throw DomainError("challenge scheme has no entry for (state " + std::to_string(state) +
                      ", agent " + std::to_string(agent) + ", type " + std::to_string(type) + ")");
  }
  return table[state][agent][type];
}

const Outcome& SccChallengeScheme::at(int state, int alloc, int agent, int type) const {
  if (state < 0 || state >= static_cast<int>(table.size()) || alloc < 0 ||
      alloc >= static_cast<int>(table[state].size()) || agent < 0 ||
      agent >= static_cast<int>(table[state][alloc].size()) || type < 0 ||
      type >= static_cast<int>(table[state][alloc][agent].size())) {
    throw DomainError("SCC challenge scheme has no entry for (state " + std::to_string(state) +
                      ", alloc " + std::to_string(alloc) + ", agent " + std::to_string(agent) +
                      ", type " + std::to_string(type) + ")");
  }
  return table[state][alloc][agent][type];
}

bool DictatorReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const DictatorCheck& c) { return c.pass; });
}

bool ChallengeSchemeReport::ok() const {
  return structure.ok() && lies_without_whistleblower.empty();
}

DictatorReport validate_dictator_lotteries(const Environment& env, const DictatorLotteries& y) {
  DictatorReport report;
  for (int i = 0; i < env.agent_count(); ++i) {
    const int T = env.type_count(i);
    for (int t = 0; t < T; ++t) {
      const double u_true = expected_utility(env, y.at(i, t), i, t);
      for (int s = 0; s < T; ++s) {
        if (s == t) continue;
        const double u_other = expected_utility(env, y.at(i, s), i, t);
        report.checks.push_back({i, t, s, u_true, u_other, u_true > u_other + kUtilityTol});
      }
    }
  }
  return report;
}

namespace {

// Two-case rule for one entry: either it equals the reference allocation, or it
// lies in L_i(ref, reported type) and SU_i(ref, type).
void check_two_case(const Environment& env, const Outcome& entry, const Outcome& ref,
                    int reported_type, int agent, int type, const std::string& where,
                    ValidationReport& out) {
  if (outcome_close(entry, ref)) return;
  const double u_ref_rep = expected_utility(env, ref, agent, reported_type);
  const double u_ent_rep = expected_utility(env, entry, agent, reported_type);
  const double u_ref_own = expected_utility(env, ref, agent, type);
  const double u_ent_own = expected_utility(env, entry, agent, type);
  if (u_ent_rep > u_ref_rep + kUtilityTol) {
    std::ostringstream os;
    os << where << ": entry violates the lower-contour condition (" << u_ent_rep << " > "
       << u_ref_rep << " at the reported type)";
    out.add("scheme-lower-contour", os.str());
  }
  if (!(u_ent_own > u_ref_own + kUtilityTol)) {
    std::ostringstream os;
    os << where << ": entry violates the strict-upper-contour condition (" << u_ent_own
       << " !> " << u_ref_own << " at the whistle-blower type)";
    out.add("scheme-strict-upper", os.str());
  }
}

}  // namespace

ValidationReport validate_challenge_scheme_structure(const Environment& env, const Scf& f,
                                                     const ChallengeScheme& x) {
  ValidationReport report;
  for (int s = 0; s < env.state_count(); ++s) {
    const Outcome& fs = f.at(s);
    for (int i = 0; i < env.agent_count(); ++i) {
      for (int t = 0; t < env.type_count(i); ++t) {
        std::ostringstream where;
        where << "x(" << env.state_label(s) << ", " << env.agent_names[i] << ":"
              << env.type_names[i][t] << ")";
        check_two_case(env, x.at(s, i, t), fs, env.states[s][i], i, t, where.str(), report);
      }
    }
  }
  return report;
}

ChallengeSchemeReport validate_challenge_scheme(const Environment& env, const Scf& f,
                                                const ChallengeScheme& x, int true_state) {
  env.check_state(true_state);
  ChallengeSchemeReport report;
  report.structure = validate_challenge_scheme_structure(env, f, x);
  for (int lie = 0; lie < env.state_count(); ++lie) {
    if (lie == true_state) continue;
    bool whistleblower_found = false;
    for (int i = 0; i < env.agent_count(); ++i) {
      const int lie_type = env.states[lie][i];
      const int true_type = env.states[true_state][i];
      if (lie_type == true_type) continue;
      const Outcome& fl = f.at(lie);
      const Outcome& entry = x.at(lie, i, true_type);
      ChallengeCheck c;
      c.lie_state = lie;
      c.agent = i;
      c.lie_type = lie_type;
      c.true_type = true_type;
      c.entry_is_f = outcome_close(entry, fl);
      c.cond1_lhs = expected_utility(env, fl, i, lie_type);
      c.cond1_rhs = expected_utility(env, entry, i, lie_type);
      c.cond2_lhs = expected_utility(env, entry, i, true_type);
      c.cond2_rhs = expected_utility(env, fl, i, true_type);
      c.cond1 = c.cond1_lhs >= c.cond1_rhs - kUtilityTol;
      c.cond2 = c.cond2_lhs > c.cond2_rhs + kUtilityTol;
      if (c.cond1 && c.cond2) whistleblower_found = true;
      report.checks.push_back(c);
    }
    if (!whistleblower_found && !outcome_close(f.at(lie), f.at(true_state))) {
      report.lies_without_whistleblower.push_back(lie);
    }
  }
  return report;
}

ValidationReport validate_scc_challenge_scheme_structure(const Environment& env, const Scc& F,
                                                         const SccChallengeScheme& x) {
  ValidationReport report;
  for (int s = 0; s < env.state_count(); ++s) {
    const auto& zs = F.at(s);
    for (int z = 0; z < static_cast<int>(zs.size()); ++z) {
      for (int i = 0; i < env.agent_count(); ++i) {
        for (int t = 0; t < env.type_count(i); ++t) {
          std::ostringstream where;
          where << "x(" << env.state_label(s) << ", z" << z << ", " << env.agent_names[i] << ":"
                << env.type_names[i][t] << ")";
          check_two_case(env, x.at(s, z, i, t), zs[z], env.states[s][i], i, t, where.str(), report);
        }
      }
    }
  }
  return report;
}

ChallengeScheme best_challenge_transform(const Environment& env, const Scf& f,
                                         const ChallengeScheme& raw) {
  ValidationReport structure = validate_challenge_scheme_structure(env, f, raw);
  if (!structure.ok()) {
    throw DomainError("best_challenge_transform: input is not a valid challenge scheme: " +
                      structure.issues.front().message);
  }
  ChallengeScheme out = raw;
  for (int s = 0; s < env.state_count(); ++s) {
    const Outcome& fs = f.at(s);
    for (int i = 0; i < env.agent_count(); ++i) {
      // X(state) = raw entries differing from f(state), in type enumeration order
      std::vector<Outcome> pool;
      for (int t = 0; t < env.type_count(i); ++t) {
        const Outcome& e = raw.at(s, i, t);
        if (!outcome_close(e, fs)) pool.push_back(e);
      }
      if (pool.empty()) continue;  // case (a): keep everything at f(state)
      for (int t = 0; t < env.type_count(i); ++t) {
        if (outcome_close(raw.at(s, i, t), fs)) continue;  // empty intersection: keep f
        int best = 0;
        double best_u = expected_utility(env, pool[0], i, t);
        for (int k = 1; k < static_cast<int>(pool.size()); ++k) {
          const double u = expected_utility(env, pool[k], i, t);
          if (u > best_u + kUtilityTol) {
            best = k;
            best_u = u;
          }
        }
        out.table[s][i][t] = pool[best];
      }
    }
  }
  return out;
}

MonotonicityReport check_maskin_monotonicity(const Environment& env, const Scf& f,
                                             const std::vector<Outcome>& candidates) {
  if (candidates.empty()) throw DomainError("check_maskin_monotonicity: empty candidate universe");
  MonotonicityReport report;
  for (int rep = 0; rep < env.state_count(); ++rep) {
    for (int tru = 0; tru < env.state_count(); ++tru) {
      if (rep == tru) continue;
      std::optional<MonotonicityWitness> witness;
      for (int i = 0; i < env.agent_count() && !witness; ++i) {
        const int rep_type = env.states[rep][i];
        const int tru_type = env.states[tru][i];
        if (rep_type == tru_type) continue;
        const double u_f_rep = expected_utility(env, f.at(rep), i, rep_type);
        const double u_f_tru = expected_utility(env, f.at(rep), i, tru_type);
        for (const Outcome& cand : candidates) {
          const double u_c_rep = expected_utility(env, cand, i, rep_type);
          const double u_c_tru = expected_utility(env, cand, i, tru_type);
          if (u_c_rep <= u_f_rep + kUtilityTol && u_c_tru > u_f_tru + kUtilityTol) {
            witness = MonotonicityWitness{i, cand};
            break;
          }
        }
      }
      if (witness) {
        report.witnesses.emplace(std::make_pair(rep, tru), *witness);
      } else if (!outcome_close(f.at(rep), f.at(tru))) {
        report.failures.push_back({rep, tru});
      }
    }
  }
  report.holds = report.failures.empty();
  return report;
}

std::vector<int> whistleblower_set(const Environment& env, const Scf& f, const ChallengeScheme& x,
                                   int reported_state, int true_state) {
  env.check_state(reported_state);
  env.check_state(true_state);
  std::vector<int> out;
  for (int j = 0; j < env.agent_count(); ++j) {
    const int true_type = env.states[true_state][j];
    if (!outcome_close(x.at(reported_state, j, true_type), f.at(reported_state))) out.push_back(j);
  }
  return out;
}

std::vector<Outcome> default_monotonicity_candidates(const Environment& env, const Scf& f,
                                                     const ChallengeScheme* scheme) {
  std::vector<Outcome> out;
  auto push_unique = [&](const Outcome& o) {
    for (const auto& seen : out) {
      if (outcome_close(seen, o)) return;
    }
    out.push_back(o);
  };
  for (const auto& o : f.by_state) push_unique(o);
  if (scheme) {
    for (const auto& per_state : scheme->table) {
      for (const auto& per_agent : per_state) {
        for (const auto& o : per_agent) push_unique(o);
      }
    }
  }
  // transfer perturbations of the SCF range
  const double deltas[] = {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0};
  for (const auto& o : f.by_state) {
    for (int i = 0; i < env.agent_count(); ++i) {
      for (double d : deltas) {
        Outcome p = o;
        p.transfers[i] += d;
        push_unique(p);
      }
    }
  }
  return out;
}

}  // namespace mechsim
