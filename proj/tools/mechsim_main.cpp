// mechsim: build, verify and simulate implementation mechanisms over finite
// environments with lottery-plus-transfer outcomes.
//
// Subcommands: validate | build-mechanism | solve-ce | simulate | pipeline.
// Exit codes: 0 success, 2 validation failure, 3 verification failure, 4 I/O.

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "mechsim/config_io.hpp"
#include "mechsim/game.hpp"
#include "mechsim/learn.hpp"
#include "mechsim/mech_scc.hpp"
#include "mechsim/mech_scf.hpp"
#include "mechsim/schemes.hpp"

namespace {

using namespace mechsim;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitVerification = 3;
constexpr int kExitIo = 4;

struct CommonOptions {
  std::string preset;
  std::string config_path;
  bool scc = false;
};

Model load(const CommonOptions& opt) {
  if (!opt.preset.empty()) {
    if (opt.preset != "bilateral") throw ConfigError("unknown preset '" + opt.preset + "'");
    return bilateral_trade_preset();
  }
  if (opt.config_path.empty()) throw ConfigError("need --preset or --config");
  return load_model_file(opt.config_path);
}

int parse_state(const Environment& env, const std::string& label) {
  std::vector<int> profile;
  std::stringstream ss(label);
  std::string part;
  int agent = 0;
  while (std::getline(ss, part, ',')) {
    if (agent >= env.agent_count()) throw ConfigError("state '" + label + "' has too many types");
    profile.push_back(env.type_index(agent, part));
    ++agent;
  }
  const int s = env.state_index(profile);
  if (s < 0) throw ConfigError("'" + label + "' does not identify an admissible state");
  return s;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot write '" + path + "'");
  return out;
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot hash '" + path + "'");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx.get(), buf, static_cast<size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

std::uint64_t effective_seed(std::uint64_t cli_seed) {
  if (const char* env = std::getenv("MECHSIM_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return cli_seed;
}

// ---- validate ---------------------------------------------------------------

struct ValidateResult {
  bool ok = true;
  json report = json::object();
};

void print_dictator_report(const Environment& env, const DictatorReport& r, std::ostream& os,
                           json& out) {
  os << "dictator lotteries:\n";
  json checks = json::array();
  for (const auto& c : r.checks) {
    os << "  agent " << env.agent_names[c.agent] << ", true "
       << env.type_names[c.agent][c.true_type] << " vs " << env.type_names[c.agent][c.other_type]
       << ": " << c.u_true << " > " << c.u_other << (c.pass ? "  [ok]" : "  [VIOLATED]") << "\n";
    checks.push_back({{"agent", env.agent_names[c.agent]},
                      {"true_type", env.type_names[c.agent][c.true_type]},
                      {"other_type", env.type_names[c.agent][c.other_type]},
                      {"u_true", c.u_true},
                      {"u_other", c.u_other},
                      {"pass", c.pass}});
  }
  out["dictator_checks"] = checks;
}

void print_scheme_report(const Environment& env, int true_state, const ChallengeSchemeReport& r,
                         std::ostream& os, json& out) {
  os << "challenge scheme at true state " << env.state_label(true_state) << ":\n";
  json checks = json::array();
  for (const auto& c : r.checks) {
    os << "  lie " << env.state_label(c.lie_state) << ", whistle-blower "
       << env.agent_names[c.agent] << " (" << env.type_names[c.agent][c.true_type]
       << "): " << c.cond1_lhs << " >= " << c.cond1_rhs << (c.cond1 ? " [ok]" : " [VIOLATED]")
       << ", " << c.cond2_lhs << " > " << c.cond2_rhs
       << (c.cond2 ? " [ok]" : " [no strict gain]") << "\n";
    checks.push_back({{"lie", env.state_label(c.lie_state)},
                      {"agent", env.agent_names[c.agent]},
                      {"cond1_lhs", c.cond1_lhs},
                      {"cond1_rhs", c.cond1_rhs},
                      {"cond2_lhs", c.cond2_lhs},
                      {"cond2_rhs", c.cond2_rhs},
                      {"cond1", c.cond1},
                      {"cond2", c.cond2}});
  }
  for (int lie : r.lies_without_whistleblower) {
    os << "  lie " << env.state_label(lie) << ": NO whistle-blower\n";
  }
  out["checks"] = checks;
}

ValidateResult run_validate(const Model& model, std::ostream& os) {
  ValidateResult result;
  const Environment& env = model.env;

  const ValidationReport env_report = validate_environment(env);
  os << "environment: " << (env_report.ok() ? "ok" : "INVALID") << "\n";
  for (const auto& issue : env_report.issues) {
    os << "  [" << issue.code << "] " << issue.message << "\n";
  }
  result.ok = result.ok && env_report.ok();
  json env_issues = json::array();
  for (const auto& issue : env_report.issues) env_issues.push_back(issue.message);
  result.report["environment_issues"] = env_issues;

  if (model.lotteries) {
    const DictatorReport r = validate_dictator_lotteries(env, *model.lotteries);
    print_dictator_report(env, r, os, result.report);
    result.ok = result.ok && r.ok();
  }

  if (model.scf && model.scheme) {
    const ValidationReport structure =
        validate_challenge_scheme_structure(env, *model.scf, *model.scheme);
    os << "challenge scheme structure: " << (structure.ok() ? "ok" : "INVALID") << "\n";
    for (const auto& issue : structure.issues) os << "  " << issue.message << "\n";
    result.ok = result.ok && structure.ok();

    json per_state = json::object();
    for (int s = 0; s < env.state_count(); ++s) {
      const ChallengeSchemeReport r = validate_challenge_scheme(env, *model.scf, *model.scheme, s);
      json state_out = json::object();
      print_scheme_report(env, s, r, os, state_out);
      per_state[env.state_label(s)] = state_out;
      result.ok = result.ok && r.lies_without_whistleblower.empty();
    }
    result.report["challenge_scheme"] = per_state;

    const auto candidates = default_monotonicity_candidates(env, *model.scf, &*model.scheme);
    const MonotonicityReport mono = check_maskin_monotonicity(env, *model.scf, candidates);
    os << "Maskin monotonicity (over " << candidates.size()
       << " candidate allocations): " << (mono.holds ? "holds" : "FAILS") << "\n";
    json failures = json::array();
    for (const auto& f : mono.failures) {
      os << "  no test allocation for lie " << env.state_label(f.reported_state)
         << " against true " << env.state_label(f.true_state) << "\n";
      failures.push_back({{"reported", env.state_label(f.reported_state)},
                          {"true", env.state_label(f.true_state)}});
    }
    for (const auto& [pair, witness] : mono.witnesses) {
      os << "  witness for (" << env.state_label(pair.first) << " reported, "
         << env.state_label(pair.second) << " true): agent " << env.agent_names[witness.agent]
         << " with " << outcome_to_string(env, witness.allocation) << "\n";
    }
    result.report["monotonicity_holds"] = mono.holds;
    result.report["monotonicity_failures"] = failures;
    result.ok = result.ok && mono.holds;
  }

  if (model.scc && model.scc_scheme) {
    const ValidationReport structure =
        validate_scc_challenge_scheme_structure(env, *model.scc, *model.scc_scheme);
    os << "SCC challenge scheme structure: " << (structure.ok() ? "ok" : "INVALID") << "\n";
    for (const auto& issue : structure.issues) os << "  " << issue.message << "\n";
    result.ok = result.ok && structure.ok();
  }

  result.report["ok"] = result.ok;
  os << (result.ok ? "validation passed" : "validation FAILED") << "\n";
  return result;
}

// ---- mechanism construction ---------------------------------------------------

struct BuiltMechanism {
  Mechanism mech;
  CalibrationResult cal;
  std::vector<int> message_counts;
  std::shared_ptr<const ScfMechanism> scf_mech;  // null in SCC mode
  std::shared_ptr<const SccMechanism> scc_mech;  // null in SCF mode
};

BuiltMechanism build(const Model& model, bool scc_mode) {
  BuiltMechanism out;
  if (scc_mode) {
    if (!model.scc || !model.lotteries) {
      throw ConfigError("SCC mode needs 'scc' and 'dictator_lotteries'");
    }
    SccChallengeScheme scheme =
        model.scc_scheme ? *model.scc_scheme : trivial_scc_scheme(model.env, *model.scc);
    out.cal = scc_calibrate(model.env, *model.scc, scheme, *model.lotteries);
    if (!out.cal.ok) return out;
    out.scc_mech = std::make_shared<SccMechanism>(model.env, *model.scc, scheme, *model.lotteries,
                                                  out.cal.params);
    out.mech = as_mechanism(out.scc_mech);
  } else {
    if (!model.scf || !model.scheme || !model.lotteries) {
      throw ConfigError("SCF mode needs 'scf', 'challenge_scheme' and 'dictator_lotteries'");
    }
    out.cal = calibrate(model.env, *model.scf, *model.scheme, *model.lotteries);
    if (!out.cal.ok) return out;
    out.scf_mech = std::make_shared<ScfMechanism>(model.env, *model.scf, *model.scheme,
                                                  *model.lotteries, out.cal.params);
    out.mech = as_mechanism(out.scf_mech);
  }
  out.message_counts = out.mech.message_counts;
  return out;
}

void print_build_summary(const Model& model, const BuiltMechanism& b, std::ostream& os) {
  os << "message spaces:";
  for (int i = 0; i < model.env.agent_count(); ++i) {
    os << " " << model.env.agent_names[i] << "=" << b.message_counts[i];
  }
  os << "\ncalibrated: epsilon=" << b.cal.params.epsilon << " eta=" << b.cal.params.eta
     << " small_fee=" << b.cal.params.small_fee << "\n";
  int passed = 0;
  for (const auto& c : b.cal.certificate) passed += c.pass ? 1 : 0;
  os << "certificate: " << passed << "/" << b.cal.certificate.size() << " checks pass\n";
  for (const auto& c : b.cal.certificate) {
    if (c.kind == "D") {
      os << "  eta dominance: " << c.lhs << " > " << c.rhs << (c.pass ? " [ok]" : " [VIOLATED]")
         << "\n";
    }
  }
}

void dump_payoff_csv(const Model& model, const BuiltMechanism& b, int state,
                     const std::string& path) {
  const NormalFormGame game = induce_game(b.mech, model.env, state);
  auto out = open_out(path);
  for (size_t i = 0; i < b.message_counts.size(); ++i) out << "m" << i << ",";
  out << "agent,utility,transfer\n";
  for (long long idx = 0; idx < game.profile_count(); ++idx) {
    const auto profile = game.decode(idx);
    for (int i = 0; i < game.agents(); ++i) {
      for (int mk : profile) out << mk << ",";
      out << i << "," << game.outcome_utility(idx, i) << "," << game.transfer(idx, i) << "\n";
    }
  }
}

// ---- solve-ce -------------------------------------------------------------------

std::vector<Outcome> desired_outcomes(const Model& model, bool scc_mode, int state) {
  if (scc_mode) return model.scc->at(state);
  return {model.scf->at(state)};
}

std::vector<std::vector<int>> nash_candidates(const BuiltMechanism& b, int state,
                                              const Model& model, bool scc_mode) {
  std::vector<std::vector<int>> out;
  const int I = model.env.agent_count();
  if (scc_mode) {
    for (int z = 0; z < static_cast<int>(model.scc->at(state).size()); ++z) {
      out.push_back(std::vector<int>(I, b.scc_mech->truthful_message(state, z)));
    }
  } else {
    out.push_back(std::vector<int>(I, b.scf_mech->truthful_message(state)));
  }
  return out;
}

CEVerificationReport solve_state(const Model& model, const BuiltMechanism& b, bool scc_mode,
                                 int state, double tol) {
  const NormalFormGame game = induce_game(b.mech, model.env, state);
  const auto target = target_profiles(b.mech, model.env, desired_outcomes(model, scc_mode, state));
  return verify_implementation(game, target, nash_candidates(b, state, model, scc_mode), tol);
}

void dump_lp_text(const Model& model, const BuiltMechanism& b, bool scc_mode, int state,
                  const std::string& path) {
  const NormalFormGame game = induce_game(b.mech, model.env, state);
  const auto target = target_profiles(b.mech, model.env, desired_outcomes(model, scc_mode, state));
  auto out = open_out(path);
  out << "maximize sum of sigma(m) over off-target profiles m\n";
  out << "off-target profiles:";
  for (long long m = 0; m < game.profile_count(); ++m) {
    if (!target[m]) out << " " << m;
  }
  out << "\nsubject to\n  sum_m sigma(m) = 1\n  sigma(m) >= 0 for all m\n";
  for (int i = 0; i < game.agents(); ++i) {
    for (int a = 0; a < game.message_counts()[i]; ++a) {
      for (int c = 0; c < game.message_counts()[i]; ++c) {
        if (a == c) continue;
        out << "  ce agent=" << i << " from=" << a << " to=" << c << ":";
        for (long long m = 0; m < game.profile_count(); ++m) {
          if (game.message_of(m, i) != a) continue;
          const double coeff = game.payoff(m, i) - game.payoff(game.replace(m, i, c), i);
          if (coeff != 0.0) {
            out << " " << std::showpos << coeff << std::noshowpos << "*s" << m;
          }
        }
        out << " >= 0\n";
      }
    }
  }
}

void dump_witness_csv(const NormalFormGame& game, const CorrelatedStrategy& sigma,
                      const std::string& path) {
  auto out = open_out(path);
  out << "profile";
  for (int i = 0; i < game.agents(); ++i) out << ",m" << i;
  out << ",probability\n";
  for (long long m = 0; m < game.profile_count(); ++m) {
    if (sigma.prob[m] <= 0.0) continue;
    out << m;
    for (int v : game.decode(m)) out << "," << v;
    out << "," << sigma.prob[m] << "\n";
  }
}

// ---- simulate -------------------------------------------------------------------

void write_trace_csv(const NormalFormGame& game, const SimulationResult& sim,
                     const std::string& path) {
  auto out = open_out(path);
  out << "period,agent,message_index,prob,realized_profile,gains_from_trade,transfer_total,"
         "avg_max_regret\n";
  for (const auto& rec : sim.trace) {
    std::string profile;
    for (size_t i = 0; i < rec.realized.size(); ++i) {
      if (i) profile += "-";
      profile += std::to_string(rec.realized[i]);
    }
    for (int i = 0; i < game.agents(); ++i) {
      for (int m = 0; m < game.message_counts()[i]; ++m) {
        out << rec.period << "," << i << "," << m << "," << rec.strategies[i][m] << "," << profile
            << "," << rec.gains_from_trade << "," << rec.transfers[i] << ","
            << rec.avg_max_regret[i] << "\n";
      }
    }
  }
}

// Minimal line chart: trailing modal-profile frequency, gains from trade and
// cumulative absolute transfers over the recorded periods.
void write_svg(const NormalFormGame& game, const SimulationResult& sim, const std::string& path) {
  const int W = 760, H = 420, pad = 48;
  auto out = open_out(path);

  std::vector<double> modal_freq, gains, cum_transfers;
  std::deque<long long> window;
  std::map<long long, int> counts;
  double cum = 0.0;
  for (const auto& rec : sim.trace) {
    const long long idx = game.encode(rec.realized);
    window.push_back(idx);
    counts[idx] += 1;
    if (window.size() > 100) {
      const long long old = window.front();
      window.pop_front();
      if (--counts[old] == 0) counts.erase(old);
    }
    int best = 0;
    for (const auto& [p, c] : counts) {
      (void)p;
      best = std::max(best, c);
    }
    modal_freq.push_back(static_cast<double>(best) / static_cast<double>(window.size()));
    gains.push_back(rec.gains_from_trade);
    for (double t : rec.transfers) cum += std::abs(t);
    cum_transfers.push_back(cum);
  }

  double gmax = 1.0, tmax = 1.0;
  for (double v : gains) gmax = std::max(gmax, std::abs(v));
  for (double v : cum_transfers) tmax = std::max(tmax, v);

  auto polyline = [&](const std::vector<double>& ys, double ymax, const char* color) {
    std::ostringstream os;
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (size_t k = 0; k < ys.size(); ++k) {
      const double x =
          pad + (W - 2.0 * pad) * (ys.size() > 1 ? static_cast<double>(k) / (ys.size() - 1) : 0.0);
      const double y = H - pad - (H - 2.0 * pad) * (ys[k] / ymax);
      os << x << "," << y << " ";
    }
    os << "\"/>\n";
    return os.str();
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << pad << "\" y1=\"" << H - pad << "\" x2=\"" << W - pad << "\" y2=\""
      << H - pad << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << H - pad
      << "\" stroke=\"black\"/>\n";
  out << polyline(modal_freq, 1.0, "#1f77b4");
  out << polyline(gains, gmax, "#2ca02c");
  out << polyline(cum_transfers, tmax, "#d62728");
  out << "<text x=\"" << pad << "\" y=\"" << pad - 10
      << "\" font-size=\"12\">blue: trailing modal-profile frequency | green: gains from trade "
         "(max "
      << gmax << ") | red: cumulative |transfers| (max " << tmax << ")</text>\n";
  out << "</svg>\n";
}

// ---- main ------------------------------------------------------------------------

int run(int argc, char** argv) {
  CLI::App app{"simulation and verification engine for implementation mechanisms"};
  app.require_subcommand(1);

  CommonOptions common;
  app.add_option("--preset", common.preset, "bundled example ('bilateral')");
  app.add_option("--config", common.config_path, "JSON model description");
  app.add_flag("--scc", common.scc, "treat the model as a social choice correspondence");

  auto* cmd_validate = app.add_subcommand("validate", "run every validator and print the report");
  std::string validate_json;
  cmd_validate->add_option("--json", validate_json, "also write the report as JSON");

  auto* cmd_build = app.add_subcommand("build-mechanism", "calibrate and summarize the mechanism");
  std::string build_state, payoff_csv;
  cmd_build->add_option("--state", build_state, "state label, e.g. \"L,H\" (for --payoff-csv)");
  cmd_build->add_option("--payoff-csv", payoff_csv, "dump the full payoff tensor");

  auto* cmd_solve = app.add_subcommand("solve-ce", "verify implementation over the CE polytope");
  std::string solve_state_label, dump_lp, witness_csv;
  double tol = 1e-8;
  bool all_states = false;
  cmd_solve->add_option("--state", solve_state_label, "state label");
  cmd_solve->add_flag("--all-states", all_states, "verify every admissible state");
  cmd_solve->add_option("--tol", tol, "off-target mass tolerance")->capture_default_str();
  cmd_solve->add_option("--dump-lp", dump_lp, "write the LP as plain-text inequalities");
  cmd_solve->add_option("--witness-csv", witness_csv, "write the off-path witness distribution");

  auto* cmd_sim = app.add_subcommand("simulate", "regret-matching dynamics on the induced game");
  std::string sim_state, trace_out, svg_out;
  long iterations = 2000, record_every = 1;
  std::uint64_t seed = 1;
  int seed_sweep = 1;
  bool inertia = false;
  cmd_sim->add_option("--state", sim_state, "state label")->required();
  cmd_sim->add_option("--iterations", iterations, "periods to play")->capture_default_str();
  cmd_sim->add_option("--seed", seed, "base random seed")->capture_default_str();
  cmd_sim->add_option("--seeds", seed_sweep, "number of seeds (sweep upward from --seed)")->capture_default_str();
  cmd_sim->add_option("--record-every", record_every, "trace thinning")->capture_default_str();
  cmd_sim->add_option("--out", trace_out, "trace CSV path");
  cmd_sim->add_option("--svg", svg_out, "line chart of the run");
  cmd_sim->add_flag("--inertia", inertia, "inertia update rule instead of plain proportional");

  auto* cmd_pipe = app.add_subcommand("pipeline", "validate, calibrate, verify and simulate");
  std::string out_dir = "mechsim_out";
  long pipe_iterations = 2000;
  int pipe_seeds = 5;
  std::uint64_t pipe_seed = 1;
  bool pipe_inertia = false;
  cmd_pipe->add_option("--out-dir", out_dir, "output directory")->capture_default_str();
  cmd_pipe->add_option("--iterations", pipe_iterations, "simulation periods")->capture_default_str();
  cmd_pipe->add_option("--seeds", pipe_seeds, "seed sweep size")->capture_default_str();
  cmd_pipe->add_option("--seed", pipe_seed, "base seed")->capture_default_str();
  cmd_pipe->add_flag("--inertia", pipe_inertia, "inertia update rule");

  CLI11_PARSE(app, argc, argv);

  const Model model = load(common);

  if (cmd_validate->parsed()) {
    const ValidateResult result = run_validate(model, std::cout);
    if (!validate_json.empty()) {
      auto out = open_out(validate_json);
      out << result.report.dump(2) << "\n";
    }
    return result.ok ? kExitOk : kExitValidation;
  }

  if (cmd_build->parsed()) {
    const BuiltMechanism b = build(model, common.scc);
    if (!b.cal.ok) {
      std::cout << "calibration FAILED: " << b.cal.failure << "\n";
      return kExitValidation;
    }
    print_build_summary(model, b, std::cout);
    if (!payoff_csv.empty()) {
      if (build_state.empty()) throw ConfigError("--payoff-csv needs --state");
      dump_payoff_csv(model, b, parse_state(model.env, build_state), payoff_csv);
      std::cout << "payoff tensor written to " << payoff_csv << "\n";
    }
    return kExitOk;
  }

  if (cmd_solve->parsed()) {
    const BuiltMechanism b = build(model, common.scc);
    if (!b.cal.ok) {
      std::cout << "calibration FAILED: " << b.cal.failure << "\n";
      return kExitValidation;
    }
    std::vector<int> states;
    if (all_states) {
      for (int s = 0; s < model.env.state_count(); ++s) states.push_back(s);
    } else {
      if (solve_state_label.empty()) throw ConfigError("need --state or --all-states");
      states.push_back(parse_state(model.env, solve_state_label));
    }
    bool all_ok = true;
    for (int s : states) {
      const CEVerificationReport report = solve_state(model, b, common.scc, s, tol);
      if (!report.error.empty()) {
        std::cout << "state " << model.env.state_label(s) << ": ERROR " << report.error << "\n";
        all_ok = false;
        continue;
      }
      std::cout << "state " << model.env.state_label(s)
                << ": max off-target CE mass = " << report.max_offpath_mass
                << ", truthful profile " << (report.truthful_profile_is_nash ? "is" : "is NOT")
                << " a pure Nash equilibrium, implemented: "
                << (report.implemented ? "true" : "false") << "\n";
      if (!dump_lp.empty() && states.size() == 1) dump_lp_text(model, b, common.scc, s, dump_lp);
      if (!witness_csv.empty() && states.size() == 1 && report.offpath_witness) {
        const NormalFormGame game = induce_game(b.mech, model.env, s);
        dump_witness_csv(game, *report.offpath_witness, witness_csv);
      }
      all_ok = all_ok && report.implemented;
    }
    return all_ok ? kExitOk : kExitVerification;
  }

  if (cmd_sim->parsed()) {
    const BuiltMechanism b = build(model, common.scc);
    if (!b.cal.ok) {
      std::cout << "calibration FAILED: " << b.cal.failure << "\n";
      return kExitValidation;
    }
    const int state = parse_state(model.env, sim_state);
    const NormalFormGame game = induce_game(b.mech, model.env, state);
    LearningConfig cfg;
    cfg.iterations = iterations;
    cfg.record_every = record_every;
    cfg.inertia = inertia;
    const std::uint64_t base_seed = effective_seed(seed);
    for (int k = 0; k < seed_sweep; ++k) {
      cfg.seed = base_seed + static_cast<std::uint64_t>(k);
      const SimulationResult sim = simulate(game, cfg);
      const auto fr = average_max_regret(sim.final_state);
      std::cout << "seed " << cfg.seed << ": "
                << (sim.convergence.converged
                        ? "converged at period " + std::to_string(sim.convergence.first_period)
                        : "did not converge")
                << ", modal frequency " << sim.convergence.modal_frequency
                << ", final max regret";
      for (double v : fr) std::cout << " " << v;
      std::cout << "\n";
      if (!trace_out.empty()) {
        const std::string path =
            seed_sweep == 1 ? trace_out : trace_out + "." + std::to_string(cfg.seed);
        write_trace_csv(game, sim, path);
      }
      if (!svg_out.empty()) {
        const std::string path =
            seed_sweep == 1 ? svg_out : svg_out + "." + std::to_string(cfg.seed) + ".svg";
        write_svg(game, sim, path);
      }
    }
    return kExitOk;
  }

  if (cmd_pipe->parsed()) {
    std::filesystem::create_directories(out_dir);
    json manifest;
    manifest["outputs"] = json::array();
    auto add_output = [&](const std::string& path) {
      manifest["outputs"].push_back({{"path", path}, {"sha256", sha256_file(path)}});
    };
    auto write_manifest = [&] {
      auto out = open_out(out_dir + "/manifest.json");
      out << manifest.dump(2) << "\n";
    };

    {
      const std::string path = out_dir + "/validate.txt";
      auto out = open_out(path);
      const ValidateResult v = run_validate(model, out);
      add_output(path);
      if (!v.ok) {
        write_manifest();
        std::cout << "pipeline halted at stage validate: see " << path << "\n";
        return kExitValidation;
      }
    }
    const BuiltMechanism b = build(model, common.scc);
    if (!b.cal.ok) {
      write_manifest();
      std::cout << "pipeline halted at stage calibrate: " << b.cal.failure << "\n";
      return kExitValidation;
    }
    {
      const std::string path = out_dir + "/mechanism.txt";
      auto out = open_out(path);
      print_build_summary(model, b, out);
      add_output(path);
    }
    {
      const std::string path = out_dir + "/solve_ce.txt";
      auto out = open_out(path);
      bool implemented = true;
      for (int s = 0; s < model.env.state_count(); ++s) {
        const CEVerificationReport report = solve_state(model, b, common.scc, s, 1e-8);
        out << "state " << model.env.state_label(s) << ": max off-target mass "
            << report.max_offpath_mass << ", implemented "
            << (report.implemented ? "true" : "false") << "\n";
        implemented = implemented && report.implemented;
      }
      add_output(path);
      if (!implemented) {
        write_manifest();
        std::cout << "pipeline halted at stage solve-ce: some state is not implemented; see "
                  << path << "\n";
        return kExitVerification;
      }
    }
    {
      const std::uint64_t base_seed = effective_seed(pipe_seed);
      for (int s = 0; s < model.env.state_count(); ++s) {
        const NormalFormGame game = induce_game(b.mech, model.env, s);
        LearningConfig cfg;
        cfg.iterations = pipe_iterations;
        cfg.record_every = 1;
        cfg.inertia = pipe_inertia;
        for (int k = 0; k < pipe_seeds; ++k) {
          cfg.seed = base_seed + static_cast<std::uint64_t>(k);
          const SimulationResult sim = simulate(game, cfg);
          const std::string path = out_dir + "/trace_state" + std::to_string(s) + "_seed" +
                                   std::to_string(cfg.seed) + ".csv";
          write_trace_csv(game, sim, path);
          add_output(path);
        }
      }
    }
    write_manifest();
    std::cout << "pipeline complete; manifest at " << out_dir << "/manifest.json\n";
    return kExitOk;
  }

  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerification;
  }
}
