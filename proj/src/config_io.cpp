#include "mechsim/config_io.hpp"

#include <fstream>
#include <sstream>

namespace mechsim {

using nlohmann::json;

namespace {

std::vector<int> parse_state_key(const Environment& env, const std::string& key) {
  std::vector<int> profile;
  std::stringstream ss(key);
  std::string part;
  int agent = 0;
  while (std::getline(ss, part, ',')) {
    if (agent >= env.agent_count()) throw ConfigError("state key '" + key + "' has too many types");
    profile.push_back(env.type_index(agent, part));
    ++agent;
  }
  if (agent != env.agent_count()) throw ConfigError("state key '" + key + "' has too few types");
  return profile;
}

std::string state_key(const Environment& env, int state) {
  std::string key;
  for (int i = 0; i < env.agent_count(); ++i) {
    if (i) key += ",";
    key += env.type_names[i][env.states[state][i]];
  }
  return key;
}

Outcome parse_outcome(const Environment& env, const json& j) {
  Outcome o;
  o.transfers.assign(env.agent_count(), 0.0);
  if (!j.contains("lottery") || !j.at("lottery").is_object()) {
    throw ConfigError("outcome needs a 'lottery' object mapping alternatives to probabilities");
  }
  std::vector<std::pair<int, double>> weights;
  for (const auto& [name, prob] : j.at("lottery").items()) {
    weights.emplace_back(env.alternative_index(name), prob.get<double>());
  }
  o.lottery = Lottery::from_weights(std::move(weights));
  if (j.contains("transfers")) {
    const auto& t = j.at("transfers");
    if (!t.is_array() || static_cast<int>(t.size()) != env.agent_count()) {
      throw ConfigError("outcome 'transfers' must list one value per agent");
    }
    for (int i = 0; i < env.agent_count(); ++i) o.transfers[i] = t[i].get<double>();
  }
  return o;
}

json outcome_json(const Environment& env, const Outcome& o) {
  json lottery = json::object();
  for (const auto& [alt, p] : o.lottery.weights()) lottery[env.alternative_names[alt]] = p;
  json out;
  out["lottery"] = lottery;
  bool any_transfer = false;
  for (double t : o.transfers) any_transfer = any_transfer || t != 0.0;
  if (any_transfer) out["transfers"] = o.transfers;
  return out;
}

int agent_index(const Environment& env, const json& j) {
  if (j.is_number_integer()) {
    const int i = j.get<int>();
    env.check_agent(i);
    return i;
  }
  const std::string name = j.get<std::string>();
  for (int i = 0; i < env.agent_count(); ++i) {
    if (env.agent_names[i] == name) return i;
  }
  throw ConfigError("unknown agent '" + name + "'");
}

}  // namespace

ChallengeScheme trivial_scheme(const Environment& env, const Scf& f) {
  ChallengeScheme x;
  x.table.resize(env.state_count());
  for (int s = 0; s < env.state_count(); ++s) {
    x.table[s].resize(env.agent_count());
    for (int i = 0; i < env.agent_count(); ++i) {
      x.table[s][i].assign(env.type_count(i), f.at(s));
    }
  }
  return x;
}

SccChallengeScheme trivial_scc_scheme(const Environment& env, const Scc& F) {
  SccChallengeScheme x;
  x.table.resize(env.state_count());
  for (int s = 0; s < env.state_count(); ++s) {
    const auto& zs = F.at(s);
    x.table[s].resize(zs.size());
    for (size_t z = 0; z < zs.size(); ++z) {
      x.table[s][z].resize(env.agent_count());
      for (int i = 0; i < env.agent_count(); ++i) {
        x.table[s][z][i].assign(env.type_count(i), zs[z]);
      }
    }
  }
  return x;
}

Model load_model(const json& j) {
  Model model;
  Environment& env = model.env;
  try {
    for (const auto& a : j.at("agents")) env.agent_names.push_back(a.get<std::string>());
    if (env.agent_names.empty()) throw ConfigError("'agents' must be nonempty");
    const auto& types = j.at("types");
    if (types.size() != env.agent_names.size()) throw ConfigError("'types' must list one set per agent");
    for (const auto& per_agent : types) {
      std::vector<std::string> names;
      for (const auto& t : per_agent) names.push_back(t.get<std::string>());
      if (names.empty()) throw ConfigError("every agent needs at least one type");
      env.type_names.push_back(std::move(names));
    }
    for (const auto& a : j.at("alternatives")) {
      env.alternative_names.push_back(a.get<std::string>());
    }

    const auto& util = j.at("utilities");
    env.utility.resize(env.alternative_count());
    for (int a = 0; a < env.alternative_count(); ++a) {
      const auto& per_alt = util.at(env.alternative_names[a]);
      if (per_alt.size() != env.agent_names.size()) {
        throw ConfigError("utilities for '" + env.alternative_names[a] + "' must cover every agent");
      }
      env.utility[a].resize(env.agent_count());
      for (int i = 0; i < env.agent_count(); ++i) {
        env.utility[a][i].resize(env.type_names[i].size());
        for (size_t t = 0; t < env.type_names[i].size(); ++t) {
          env.utility[a][i][t] = per_alt[i].at(env.type_names[i][t]).get<double>();
        }
      }
    }

    const auto& states = j.at("states");
    if (states.empty()) throw ConfigError("'states' must be nonempty");
    for (const auto& st : states) {
      if (st.size() != env.agent_names.size()) throw ConfigError("state profile has wrong length");
      std::vector<int> profile;
      for (int i = 0; i < env.agent_count(); ++i) {
        profile.push_back(env.type_index(i, st[i].get<std::string>()));
      }
      env.states.push_back(std::move(profile));
    }

    if (j.contains("scf")) {
      Scf f;
      f.by_state.resize(env.state_count());
      std::vector<bool> seen(env.state_count(), false);
      for (const auto& [key, value] : j.at("scf").items()) {
        const auto profile = parse_state_key(env, key);
        const int s = env.state_index(profile);
        if (s < 0) throw ConfigError("scf key '" + key + "' is not an admissible state");
        f.by_state[s] = parse_outcome(env, value);
        seen[s] = true;
      }
      for (int s = 0; s < env.state_count(); ++s) {
        if (!seen[s]) throw ConfigError("scf is missing state " + state_key(env, s));
      }
      model.scf = std::move(f);
    }

    if (j.contains("scc")) {
      Scc F;
      F.by_state.resize(env.state_count());
      std::vector<bool> seen(env.state_count(), false);
      for (const auto& [key, value] : j.at("scc").items()) {
        const auto profile = parse_state_key(env, key);
        const int s = env.state_index(profile);
        if (s < 0) throw ConfigError("scc key '" + key + "' is not an admissible state");
        for (const auto& o : value) F.by_state[s].push_back(parse_outcome(env, o));
        if (F.by_state[s].empty()) throw ConfigError("scc value for '" + key + "' is empty");
        seen[s] = true;
      }
      for (int s = 0; s < env.state_count(); ++s) {
        if (!seen[s]) throw ConfigError("scc is missing state " + state_key(env, s));
      }
      model.scc = std::move(F);
    }

    if (j.contains("dictator_lotteries")) {
      const auto& dl = j.at("dictator_lotteries");
      if (dl.size() != env.agent_names.size()) {
        throw ConfigError("'dictator_lotteries' must list one menu per agent");
      }
      DictatorLotteries y;
      y.table.resize(env.agent_count());
      for (int i = 0; i < env.agent_count(); ++i) {
        y.table[i].resize(env.type_names[i].size());
        for (size_t t = 0; t < env.type_names[i].size(); ++t) {
          y.table[i][t] = parse_outcome(env, dl[i].at(env.type_names[i][t]));
        }
      }
      model.lotteries = std::move(y);
    }

    if (j.contains("challenge_scheme")) {
      if (!model.scf) throw ConfigError("'challenge_scheme' requires an 'scf'");
      ChallengeScheme x = trivial_scheme(env, *model.scf);
      for (const auto& entry : j.at("challenge_scheme")) {
        const auto profile = parse_state_key(env, entry.at("state").get<std::string>());
        const int s = env.state_index(profile);
        if (s < 0) throw ConfigError("challenge_scheme entry names a non-state");
        const int i = agent_index(env, entry.at("agent"));
        const int t = env.type_index(i, entry.at("type").get<std::string>());
        x.table[s][i][t] = parse_outcome(env, entry.at("outcome"));
      }
      model.scheme = std::move(x);
    }

    if (j.contains("scc_challenge_scheme")) {
      if (!model.scc) throw ConfigError("'scc_challenge_scheme' requires an 'scc'");
      SccChallengeScheme x = trivial_scc_scheme(env, *model.scc);
      for (const auto& entry : j.at("scc_challenge_scheme")) {
        const auto profile = parse_state_key(env, entry.at("state").get<std::string>());
        const int s = env.state_index(profile);
        if (s < 0) throw ConfigError("scc_challenge_scheme entry names a non-state");
        const int z = entry.at("alloc").get<int>();
        if (z < 0 || z >= static_cast<int>(model.scc->at(s).size())) {
          throw ConfigError("scc_challenge_scheme entry has an out-of-range 'alloc'");
        }
        const int i = agent_index(env, entry.at("agent"));
        const int t = env.type_index(i, entry.at("type").get<std::string>());
        x.table[s][z][i][t] = parse_outcome(env, entry.at("outcome"));
      }
      model.scc_scheme = std::move(x);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  }
  return model;
}

Model load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return load_model(j);
}

nlohmann::json to_json(const Model& model) {
  const Environment& env = model.env;
  json j;
  j["agents"] = env.agent_names;
  j["types"] = env.type_names;
  j["alternatives"] = env.alternative_names;
  json util = json::object();
  for (int a = 0; a < env.alternative_count(); ++a) {
    json per_alt = json::array();
    for (int i = 0; i < env.agent_count(); ++i) {
      json per_agent = json::object();
      for (size_t t = 0; t < env.type_names[i].size(); ++t) {
        per_agent[env.type_names[i][t]] = env.utility[a][i][t];
      }
      per_alt.push_back(per_agent);
    }
    util[env.alternative_names[a]] = per_alt;
  }
  j["utilities"] = util;
  json states = json::array();
  for (int s = 0; s < env.state_count(); ++s) {
    json st = json::array();
    for (int i = 0; i < env.agent_count(); ++i) st.push_back(env.type_names[i][env.states[s][i]]);
    states.push_back(st);
  }
  j["states"] = states;

  if (model.scf) {
    json f = json::object();
    for (int s = 0; s < env.state_count(); ++s) {
      f[state_key(env, s)] = outcome_json(env, model.scf->at(s));
    }
    j["scf"] = f;
  }
  if (model.scc) {
    json F = json::object();
    for (int s = 0; s < env.state_count(); ++s) {
      json list = json::array();
      for (const auto& o : model.scc->at(s)) list.push_back(outcome_json(env, o));
      F[state_key(env, s)] = list;
    }
    j["scc"] = F;
  }
  if (model.lotteries) {
    json dl = json::array();
    for (int i = 0; i < env.agent_count(); ++i) {
      json menu = json::object();
      for (size_t t = 0; t < env.type_names[i].size(); ++t) {
        menu[env.type_names[i][t]] = outcome_json(env, model.lotteries->at(i, static_cast<int>(t)));
      }
      dl.push_back(menu);
    }
    j["dictator_lotteries"] = dl;
  }
  if (model.scheme && model.scf) {
    json entries = json::array();
    for (int s = 0; s < env.state_count(); ++s) {
      for (int i = 0; i < env.agent_count(); ++i) {
        for (int t = 0; t < env.type_count(i); ++t) {
          const Outcome& o = model.scheme->at(s, i, t);
          if (outcome_close(o, model.scf->at(s))) continue;
          json e;
          e["state"] = state_key(env, s);
          e["agent"] = env.agent_names[i];
          e["type"] = env.type_names[i][t];
          e["outcome"] = outcome_json(env, o);
          entries.push_back(e);
        }
      }
    }
    j["challenge_scheme"] = entries;
  }
  if (model.scc_scheme && model.scc) {
    json entries = json::array();
    for (int s = 0; s < env.state_count(); ++s) {
      const auto& zs = model.scc->at(s);
      for (size_t z = 0; z < zs.size(); ++z) {
        for (int i = 0; i < env.agent_count(); ++i) {
          for (int t = 0; t < env.type_count(i); ++t) {
            const Outcome& o = model.scc_scheme->at(s, static_cast<int>(z), i, t);
            if (outcome_close(o, zs[z])) continue;
            json e;
            e["state"] = state_key(env, s);
            e["alloc"] = static_cast<int>(z);
            e["agent"] = env.agent_names[i];
            e["type"] = env.type_names[i][t];
            e["outcome"] = outcome_json(env, o);
            entries.push_back(e);
          }
        }
      }
    }
    j["scc_challenge_scheme"] = entries;
  }
  return j;
}

std::string outcome_to_string(const Environment& env, const Outcome& o) {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (const auto& [alt, p] : o.lottery.weights()) {
    if (!first) os << ", ";
    first = false;
    os << env.alternative_names[alt] << ": " << p;
  }
  os << "}";
  bool any = false;
  for (double t : o.transfers) any = any || t != 0.0;
  if (any) {
    os << " + transfers (";
    for (size_t i = 0; i < o.transfers.size(); ++i) {
      if (i) os << ", ";
      os << o.transfers[i];
    }
    os << ")";
  }
  return os.str();
}

}  // namespace mechsim
