#include "mechsim/env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>

namespace mechsim {

Lottery Lottery::point_mass(int alternative) {
  Lottery l;
  l.weights_.emplace_back(alternative, 1.0);
  return l;
}

Lottery Lottery::from_weights(std::vector<std::pair<int, double>> weights) {
  std::map<int, double> acc;
  for (const auto& [alt, p] : weights) acc[alt] += p;
  Lottery l;
  for (const auto& [alt, p] : acc) {
    if (p > kProbTol) l.weights_.emplace_back(alt, p);
  }
  return l;
}

double Lottery::prob(int alternative) const {
  for (const auto& [alt, p] : weights_) {
    if (alt == alternative) return p;
  }
  return 0.0;
}

double Lottery::total_mass() const {
  double s = 0.0;
  for (const auto& [alt, p] : weights_) s += p;
  return s;
}

Outcome Outcome::point_mass(int alternative, std::vector<double> transfers) {
  return Outcome{Lottery::point_mass(alternative), std::move(transfers)};
}

bool outcome_close(const Outcome& a, const Outcome& b, double tol) {
  if (a.transfers.size() != b.transfers.size()) return false;
  for (size_t i = 0; i < a.transfers.size(); ++i) {
    if (std::abs(a.transfers[i] - b.transfers[i]) > tol) return false;
  }
  // compare merged supports
  std::map<int, double> diff;
  for (const auto& [alt, p] : a.lottery.weights()) diff[alt] += p;
  for (const auto& [alt, p] : b.lottery.weights()) diff[alt] -= p;
  for (const auto& [alt, d] : diff) {
    (void)alt;
    if (std::abs(d) > tol) return false;
  }
  return true;
}

int Environment::type_count(int agent) const {
  check_agent(agent);
  return static_cast<int>(type_names[agent].size());
}

int Environment::type_index(int agent, const std::string& name) const {
  check_agent(agent);
  const auto& names = type_names[agent];
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    throw DomainError("unknown type '" + name + "' for agent " + agent_names[agent]);
  }
  return static_cast<int>(it - names.begin());
}

int Environment::alternative_index(const std::string& name) const {
  auto it = std::find(alternative_names.begin(), alternative_names.end(), name);
  if (it == alternative_names.end()) throw DomainError("unknown alternative '" + name + "'");
  return static_cast<int>(it - alternative_names.begin());
}

int Environment::state_index(std::span<const int> profile) const {
  for (int s = 0; s < state_count(); ++s) {
    if (std::equal(states[s].begin(), states[s].end(), profile.begin(), profile.end())) return s;
  }
  return -1;
}

std::string Environment::state_label(int state) const {
  check_state(state);
  std::string out = "(";
  for (int i = 0; i < agent_count(); ++i) {
    if (i) out += ",";
    out += type_names[i][states[state][i]];
  }
  return out + ")";
}

long long Environment::profile_space_size() const {
  long long n = 1;
  for (int i = 0; i < agent_count(); ++i) n *= type_count(i);
  return n;
}

void Environment::check_agent(int agent) const {
  if (agent < 0 || agent >= agent_count()) {
    throw DomainError("agent index " + std::to_string(agent) + " out of range");
  }
}

void Environment::check_type(int agent, int type) const {
  check_agent(agent);
  if (type < 0 || type >= static_cast<int>(type_names[agent].size())) {
    throw DomainError("type index " + std::to_string(type) + " out of range for agent " +
                      agent_names[agent]);
  }
}

void Environment::check_state(int state) const {
  if (state < 0 || state >= state_count()) {
    throw DomainError("state index " + std::to_string(state) + " out of range");
  }
}

void ValidationReport::add(std::string code, std::string message) {
  issues.push_back({std::move(code), std::move(message)});
}

const Outcome& Scf::at(int state) const {
  if (state < 0 || state >= static_cast<int>(by_state.size())) {
    throw DomainError("SCF: state index out of range");
  }
  return by_state[state];
}

const std::vector<Outcome>& Scc::at(int state) const {
  if (state < 0 || state >= static_cast<int>(by_state.size())) {
    throw DomainError("SCC: state index out of range");
  }
  return by_state[state];
}

double expected_utility(const Environment& env, const Outcome& outcome, int agent, int type) {
  env.check_type(agent, type);
  if (static_cast<int>(outcome.transfers.size()) != env.agent_count()) {
    throw DomainError("outcome transfer vector has wrong length");
  }
  double u = outcome.transfers[agent];
  for (const auto& [alt, p] : outcome.lottery.weights()) {
    if (alt < 0 || alt >= env.alternative_count()) {
      throw DomainError("outcome lottery references unknown alternative");
    }
    u += p * env.utility[alt][agent][type];
  }
  return u;
}

Outcome compound(double alpha, const Outcome& x, const Outcome& y) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw DomainError("compound: alpha must lie in [0,1]");
  }
  if (x.transfers.size() != y.transfers.size()) {
    throw DomainError("compound: mismatched transfer vectors");
  }
  std::vector<std::pair<int, double>> w;
  for (const auto& [alt, p] : x.lottery.weights()) w.emplace_back(alt, alpha * p);
  for (const auto& [alt, p] : y.lottery.weights()) w.emplace_back(alt, (1.0 - alpha) * p);
  Outcome out;
  out.lottery = Lottery::from_weights(std::move(w));
  out.transfers.resize(x.transfers.size());
  for (size_t i = 0; i < out.transfers.size(); ++i) {
    out.transfers[i] = alpha * x.transfers[i] + (1.0 - alpha) * y.transfers[i];
  }
  return out;
}

Outcome mix_equal(const std::vector<Outcome>& outcomes) {
  if (outcomes.empty()) throw DomainError("mix_equal: empty list");
  const double w = 1.0 / static_cast<double>(outcomes.size());
  std::vector<std::pair<int, double>> weights;
  std::vector<double> transfers(outcomes.front().transfers.size(), 0.0);
  for (const auto& o : outcomes) {
    if (o.transfers.size() != transfers.size()) {
      throw DomainError("mix_equal: mismatched transfer vectors");
    }
    for (const auto& [alt, p] : o.lottery.weights()) weights.emplace_back(alt, w * p);
    for (size_t i = 0; i < transfers.size(); ++i) transfers[i] += w * o.transfers[i];
  }
  return Outcome{Lottery::from_weights(std::move(weights)), std::move(transfers)};
}

namespace {

// Deterministic probe lotteries: all point masses, all pairwise midpoints, and a
// few hash-seeded mixtures. Two types with identical orderings on this grid are
// flagged as preference-indistinct.
std::vector<std::vector<double>> probe_lotteries(int alternatives) {
  std::vector<std::vector<double>> probes;
  for (int a = 0; a < alternatives; ++a) {
    std::vector<double> p(alternatives, 0.0);
    p[a] = 1.0;
    probes.push_back(p);
  }
  for (int a = 0; a < alternatives; ++a) {
    for (int b = a + 1; b < alternatives; ++b) {
      std::vector<double> p(alternatives, 0.0);
      p[a] = 0.5;
      p[b] = 0.5;
      probes.push_back(p);
    }
  }
  uint64_t h = 0x9e3779b97f4a7c15ull;
  for (int k = 0; k < 8; ++k) {
    std::vector<double> p(alternatives, 0.0);
    double total = 0.0;
    for (int a = 0; a < alternatives; ++a) {
      h ^= h >> 33;
      h *= 0xff51afd7ed558ccdull;
      h ^= h >> 29;
      p[a] = 1.0 + static_cast<double>(h % 97);
      total += p[a];
    }
    for (auto& v : p) v /= total;
    probes.push_back(p);
  }
  return probes;
}

int sign_with_tol(double x, double tol) { return x > tol ? 1 : (x < -tol ? -1 : 0); }

}  // namespace

ValidationReport validate_environment(const Environment& env) {
  ValidationReport report;
  const int I = env.agent_count();
  if (I < 2) report.add("agent-count", "environment must have at least 2 agents, has " + std::to_string(I));
  if (env.alternative_count() == 0) report.add("alternatives-empty", "no alternatives declared");
  if (env.state_count() == 0) report.add("states-empty", "no admissible states declared");

  // shape of the utility table
  if (static_cast<int>(env.utility.size()) != env.alternative_count()) {
    report.add("utility-shape", "utility table does not cover every alternative");
    return report;
  }
  for (int a = 0; a < env.alternative_count(); ++a) {
    if (static_cast<int>(env.utility[a].size()) != I) {
      report.add("utility-shape", "utility table for alternative " + env.alternative_names[a] +
                                      " does not cover every agent");
      return report;
    }
    for (int i = 0; i < I; ++i) {
      if (env.utility[a][i].size() != env.type_names[i].size()) {
        report.add("utility-shape", "utility table for alternative " + env.alternative_names[a] +
                                        ", agent " + env.agent_names[i] +
                                        " does not cover every type");
        return report;
      }
    }
  }

  for (int s = 0; s < env.state_count(); ++s) {
    if (static_cast<int>(env.states[s].size()) != I) {
      report.add("state-shape", "state " + std::to_string(s) + " has wrong profile length");
      return report;
    }
    for (int i = 0; i < I; ++i) {
      if (env.states[s][i] < 0 || env.states[s][i] >= static_cast<int>(env.type_names[i].size())) {
        report.add("state-shape", "state " + std::to_string(s) + " references unknown type");
        return report;
      }
    }
  }

  // no redundancy: distinct states must differ somewhere
  for (int s = 0; s < env.state_count(); ++s) {
    for (int t = s + 1; t < env.state_count(); ++t) {
      if (env.states[s] == env.states[t]) {
        report.add("state-redundancy", "states " + std::to_string(s) + " and " + std::to_string(t) +
                                           " are identical type profiles");
      }
    }
  }

  // never indifferent over all of A
  for (int i = 0; i < I; ++i) {
    for (size_t t = 0; t < env.type_names[i].size(); ++t) {
      double lo = env.utility[0][i][t], hi = env.utility[0][i][t];
      for (int a = 1; a < env.alternative_count(); ++a) {
        lo = std::min(lo, env.utility[a][i][t]);
        hi = std::max(hi, env.utility[a][i][t]);
      }
      if (hi - lo <= kUtilityTol) {
        report.add("type-indifferent", "agent " + env.agent_names[i] + " type " +
                                           env.type_names[i][t] +
                                           " is indifferent over all alternatives");
      }
    }
  }

  // distinct types induce distinct orderings over lotteries, checked on a probe grid
  const auto probes = probe_lotteries(env.alternative_count());
  auto probe_value = [&](const std::vector<double>& p, int agent, int type) {
    double v = 0.0;
    for (int a = 0; a < env.alternative_count(); ++a) v += p[a] * env.utility[a][agent][type];
    return v;
  };
  for (int i = 0; i < I; ++i) {
    const int T = static_cast<int>(env.type_names[i].size());
    for (int t1 = 0; t1 < T; ++t1) {
      for (int t2 = t1 + 1; t2 < T; ++t2) {
        bool distinct = false;
        for (size_t p = 0; p < probes.size() && !distinct; ++p) {
          for (size_t q = p + 1; q < probes.size() && !distinct; ++q) {
            const int s1 = sign_with_tol(probe_value(probes[p], i, t1) - probe_value(probes[q], i, t1), kUtilityTol);
            const int s2 = sign_with_tol(probe_value(probes[p], i, t2) - probe_value(probes[q], i, t2), kUtilityTol);
            if (s1 != s2) distinct = true;
          }
        }
        if (!distinct) {
          report.add("types-same-ordering",
                     "agent " + env.agent_names[i] + " types " + env.type_names[i][t1] + " and " +
                         env.type_names[i][t2] + " induce the same ordering over the probe lotteries");
        }
      }
    }
  }
  return report;
}

ValidationReport validate_outcome(const Environment& env, const Outcome& outcome) {
  ValidationReport report;
  if (static_cast<int>(outcome.transfers.size()) != env.agent_count()) {
    report.add("outcome-transfers", "transfer vector length " + std::to_string(outcome.transfers.size()) +
                                        " != agent count " + std::to_string(env.agent_count()));
  }
  double mass = 0.0;
  for (const auto& [alt, p] : outcome.lottery.weights()) {
    if (alt < 0 || alt >= env.alternative_count()) {
      report.add("outcome-support", "lottery support contains unknown alternative index " + std::to_string(alt));
    }
    if (p < -kProbTol) report.add("outcome-prob", "negative lottery probability");
    mass += p;
  }
  if (std::abs(mass - 1.0) > kProbTol) {
    std::ostringstream os;
    os << "lottery mass " << mass << " != 1";
    report.add("outcome-mass", os.str());
  }
  return report;
}

}  // namespace mechsim
