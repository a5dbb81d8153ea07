#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "mechsim/config_io.hpp"
#include "mechsim/game.hpp"
#include "mechsim/learn.hpp"
#include "mechsim/mech_scc.hpp"
#include "mechsim/mech_scf.hpp"
#include "mechsim/schemes.hpp"

namespace py = pybind11;
using namespace mechsim;

namespace {

std::vector<std::pair<int, double>> lottery_weights(const Outcome& o) {
  return o.lottery.weights();
}

Model load_model_from_string(const std::string& text) {
  return load_model(nlohmann::json::parse(text));
}

std::string model_to_json_string(const Model& m) { return to_json(m).dump(2); }

}  // namespace

PYBIND11_MODULE(_mechsim, m) {
  m.doc() = "mechanism construction, correlated-equilibrium verification and "
            "regret-matching simulation over finite environments";

  py::register_exception<DomainError>(m, "DomainError");
  py::register_exception<ConfigError>(m, "ConfigError");

  py::class_<Outcome>(m, "Outcome")
      .def(py::init([](std::vector<std::pair<int, double>> weights, std::vector<double> transfers) {
             Outcome o;
             o.lottery = Lottery::from_weights(std::move(weights));
             o.transfers = std::move(transfers);
             return o;
           }),
           py::arg("lottery"), py::arg("transfers"))
      .def_static("point_mass", &Outcome::point_mass, py::arg("alternative"), py::arg("transfers"))
      .def_property_readonly("lottery", &lottery_weights)
      .def_readonly("transfers", &Outcome::transfers);
  m.def("outcome_close", &outcome_close, py::arg("a"), py::arg("b"), py::arg("tol") = kUtilityTol);
  m.def("compound", &compound, py::arg("alpha"), py::arg("x"), py::arg("y"));

  py::class_<Environment>(m, "Environment")
      .def_readonly("agent_names", &Environment::agent_names)
      .def_readonly("type_names", &Environment::type_names)
      .def_readonly("states", &Environment::states)
      .def_readonly("alternative_names", &Environment::alternative_names)
      .def("agent_count", &Environment::agent_count)
      .def("state_count", &Environment::state_count)
      .def("state_label", &Environment::state_label)
      .def("type_index", &Environment::type_index)
      .def("alternative_index", &Environment::alternative_index)
      .def("state_index",
           [](const Environment& env, const std::vector<int>& profile) {
             return env.state_index(profile);
           });
  m.def("expected_utility", &expected_utility, py::arg("env"), py::arg("outcome"), py::arg("agent"),
        py::arg("type"));

  py::class_<ValidationIssue>(m, "ValidationIssue")
      .def_readonly("code", &ValidationIssue::code)
      .def_readonly("message", &ValidationIssue::message);
  py::class_<ValidationReport>(m, "ValidationReport")
      .def("ok", &ValidationReport::ok)
      .def_readonly("issues", &ValidationReport::issues);
  m.def("validate_environment", &validate_environment);

  py::class_<Scf>(m, "Scf").def("at", &Scf::at, py::return_value_policy::reference_internal);
  py::class_<Scc>(m, "Scc").def("at", &Scc::at, py::return_value_policy::reference_internal);
  py::class_<DictatorLotteries>(m, "DictatorLotteries")
      .def("at", &DictatorLotteries::at, py::return_value_policy::reference_internal);
  py::class_<ChallengeScheme>(m, "ChallengeScheme")
      .def("at", &ChallengeScheme::at, py::return_value_policy::reference_internal);
  py::class_<SccChallengeScheme>(m, "SccChallengeScheme")
      .def("at", &SccChallengeScheme::at, py::return_value_policy::reference_internal);

  py::class_<Model>(m, "Model")
      .def_readonly("env", &Model::env)
      .def_readonly("scf", &Model::scf)
      .def_readonly("scc", &Model::scc)
      .def_readonly("lotteries", &Model::lotteries)
      .def_readonly("scheme", &Model::scheme)
      .def_readonly("scc_scheme", &Model::scc_scheme);
  m.def("bilateral_trade_preset", &bilateral_trade_preset);
  m.def("load_model_file", &load_model_file, py::arg("path"));
  m.def("load_model_json", &load_model_from_string, py::arg("text"));
  m.def("model_to_json", &model_to_json_string, py::arg("model"));

  py::class_<DictatorCheck>(m, "DictatorCheck")
      .def_readonly("agent", &DictatorCheck::agent)
      .def_readonly("true_type", &DictatorCheck::true_type)
      .def_readonly("other_type", &DictatorCheck::other_type)
      .def_readonly("u_true", &DictatorCheck::u_true)
      .def_readonly("u_other", &DictatorCheck::u_other)
      .def_readonly("passed", &DictatorCheck::pass);
  py::class_<DictatorReport>(m, "DictatorReport")
      .def("ok", &DictatorReport::ok)
      .def_readonly("checks", &DictatorReport::checks);
  m.def("validate_dictator_lotteries", &validate_dictator_lotteries);

  py::class_<ChallengeCheck>(m, "ChallengeCheck")
      .def_readonly("lie_state", &ChallengeCheck::lie_state)
      .def_readonly("agent", &ChallengeCheck::agent)
      .def_readonly("cond1_lhs", &ChallengeCheck::cond1_lhs)
      .def_readonly("cond1_rhs", &ChallengeCheck::cond1_rhs)
      .def_readonly("cond2_lhs", &ChallengeCheck::cond2_lhs)
      .def_readonly("cond2_rhs", &ChallengeCheck::cond2_rhs)
      .def_readonly("cond1", &ChallengeCheck::cond1)
      .def_readonly("cond2", &ChallengeCheck::cond2);
  py::class_<ChallengeSchemeReport>(m, "ChallengeSchemeReport")
      .def("ok", &ChallengeSchemeReport::ok)
      .def_readonly("checks", &ChallengeSchemeReport::checks)
      .def_readonly("lies_without_whistleblower", &ChallengeSchemeReport::lies_without_whistleblower);
  m.def("validate_challenge_scheme", &validate_challenge_scheme);
  m.def("validate_challenge_scheme_structure", &validate_challenge_scheme_structure);
  m.def("validate_scc_challenge_scheme_structure", &validate_scc_challenge_scheme_structure);
  m.def("best_challenge_transform", &best_challenge_transform);
  m.def("whistleblower_set", &whistleblower_set);

  py::class_<MonotonicityWitness>(m, "MonotonicityWitness")
      .def_readonly("agent", &MonotonicityWitness::agent)
      .def_readonly("allocation", &MonotonicityWitness::allocation);
  py::class_<MonotonicityFailure>(m, "MonotonicityFailure")
      .def_readonly("reported_state", &MonotonicityFailure::reported_state)
      .def_readonly("true_state", &MonotonicityFailure::true_state);
  py::class_<MonotonicityReport>(m, "MonotonicityReport")
      .def_readonly("holds", &MonotonicityReport::holds)
      .def_readonly("witnesses", &MonotonicityReport::witnesses)
      .def_readonly("failures", &MonotonicityReport::failures);
  m.def("check_maskin_monotonicity", &check_maskin_monotonicity);
  m.def("default_monotonicity_candidates",
        [](const Environment& env, const Scf& f, const ChallengeScheme* scheme) {
          return default_monotonicity_candidates(env, f, scheme);
        },
        py::arg("env"), py::arg("scf"), py::arg("scheme") = nullptr);

  py::class_<MechanismParams>(m, "MechanismParams")
      .def(py::init<>())
      .def_readwrite("epsilon", &MechanismParams::epsilon)
      .def_readwrite("eta", &MechanismParams::eta)
      .def_readwrite("small_fee", &MechanismParams::small_fee);
  py::class_<CalibrationCheck>(m, "CalibrationCheck")
      .def_readonly("kind", &CalibrationCheck::kind)
      .def_readonly("detail", &CalibrationCheck::detail)
      .def_readonly("lhs", &CalibrationCheck::lhs)
      .def_readonly("rhs", &CalibrationCheck::rhs)
      .def_readonly("passed", &CalibrationCheck::pass);
  py::class_<CalibrationResult>(m, "CalibrationResult")
      .def_readonly("params", &CalibrationResult::params)
      .def_readonly("certificate", &CalibrationResult::certificate)
      .def_readonly("ok", &CalibrationResult::ok)
      .def_readonly("failure", &CalibrationResult::failure);
  m.def("calibrate", &calibrate, py::arg("env"), py::arg("scf"), py::arg("scheme"),
        py::arg("lotteries"), py::arg("tau1_includes_nonstate") = true);
  m.def("scc_calibrate", &scc_calibrate);

  py::class_<ScfMessage>(m, "ScfMessage")
      .def_readonly("report1", &ScfMessage::report1)
      .def_readonly("report2", &ScfMessage::report2);
  py::class_<ScfMechanism, std::shared_ptr<ScfMechanism>>(m, "ScfMechanism")
      .def(py::init<Environment, Scf, ChallengeScheme, DictatorLotteries, MechanismParams, bool>(),
           py::arg("env"), py::arg("scf"), py::arg("scheme"), py::arg("lotteries"),
           py::arg("params"), py::arg("tau1_includes_nonstate") = true)
      .def("message_count", &ScfMechanism::message_count)
      .def("truthful_message", &ScfMechanism::truthful_message)
      .def("decode_message", &ScfMechanism::decode_message)
      .def("outcome_g",
           [](const ScfMechanism& mech, const std::vector<int>& joint) {
             return mech.outcome_g(joint);
           })
      .def("transfer_tau",
           [](const ScfMechanism& mech, const std::vector<int>& joint, int agent) {
             return mech.transfer_tau(joint, agent);
           })
      .def("compound_challenge",
           [](const ScfMechanism& mech, const std::vector<int>& joint, int i, int j) {
             return mech.compound_challenge(joint, i, j);
           });

  py::class_<SccMessage>(m, "SccMessage")
      .def_readonly("report1", &SccMessage::report1)
      .def_readonly("report2", &SccMessage::report2)
      .def_readonly("alloc", &SccMessage::alloc)
      .def_readonly("bets", &SccMessage::bets);
  py::class_<SccMechanism, std::shared_ptr<SccMechanism>>(m, "SccMechanism")
      .def(py::init<Environment, Scc, SccChallengeScheme, DictatorLotteries, MechanismParams>())
      .def("message_count", &SccMechanism::message_count)
      .def("truthful_message", &SccMechanism::truthful_message)
      .def("decode_message", &SccMechanism::decode_message)
      .def("effective_allocation",
           [](const SccMechanism& mech, const std::vector<int>& joint) {
             return mech.effective_allocation(joint);
           })
      .def("challenges",
           [](const SccMechanism& mech, const std::vector<int>& joint, int i, int j) {
             return mech.challenges(joint, i, j);
           })
      .def("outcome_g",
           [](const SccMechanism& mech, const std::vector<int>& joint) {
             return mech.outcome_g(joint);
           })
      .def("transfer",
           [](const SccMechanism& mech, const std::vector<int>& joint, int agent) {
             return mech.transfer(joint, agent);
           });
  m.def("scoring_rule", &scoring_rule, py::arg("c"), py::arg("event"));

  py::class_<Mechanism>(m, "Mechanism")
      .def_readonly("message_counts", &Mechanism::message_counts)
      .def("outcome",
           [](const Mechanism& mech, const std::vector<int>& joint) {
             return mech.outcome_fn(joint);
           })
      .def("transfer", [](const Mechanism& mech, const std::vector<int>& joint, int agent) {
        return mech.transfer_fn(joint, agent);
      });
  m.def("as_mechanism",
        [](std::shared_ptr<ScfMechanism> mech) { return as_mechanism(std::move(mech)); });
  m.def("as_scc_mechanism",
        [](std::shared_ptr<SccMechanism> mech) { return as_mechanism(std::move(mech)); });

  py::class_<NormalFormGame>(m, "NormalFormGame")
      .def("agents", &NormalFormGame::agents)
      .def("message_counts", &NormalFormGame::message_counts)
      .def("profile_count", &NormalFormGame::profile_count)
      .def("encode",
           [](const NormalFormGame& g, const std::vector<int>& profile) { return g.encode(profile); })
      .def("decode", &NormalFormGame::decode)
      .def("payoff", &NormalFormGame::payoff)
      .def("outcome_utility", &NormalFormGame::outcome_utility)
      .def("transfer", &NormalFormGame::transfer);
  m.def("induce_game", &induce_game, py::arg("mechanism"), py::arg("env"), py::arg("true_state"));

  py::class_<CorrelatedStrategy>(m, "CorrelatedStrategy")
      .def(py::init([](std::vector<double> prob) {
             CorrelatedStrategy s;
             s.prob = std::move(prob);
             return s;
           }),
           py::arg("prob"))
      .def_readonly("prob", &CorrelatedStrategy::prob);
  py::class_<CeViolation>(m, "CeViolation")
      .def_readonly("agent", &CeViolation::agent)
      .def_readonly("recommended", &CeViolation::recommended)
      .def_readonly("deviation", &CeViolation::deviation)
      .def_readonly("amount", &CeViolation::amount);
  py::class_<CeCheckResult>(m, "CeCheckResult")
      .def_readonly("passed", &CeCheckResult::pass)
      .def_readonly("worst", &CeCheckResult::worst);
  m.def("ce_check", &ce_check, py::arg("game"), py::arg("sigma"), py::arg("tol"));
  m.def("is_pure_nash",
        [](const NormalFormGame& game, const std::vector<int>& profile, double tol) {
          return is_pure_nash(game, profile, tol);
        },
        py::arg("game"), py::arg("profile"), py::arg("tol") = kUtilityTol);

  py::class_<CEVerificationReport>(m, "CEVerificationReport")
      .def_readonly("truthful_profile_is_nash", &CEVerificationReport::truthful_profile_is_nash)
      .def_readonly("max_offpath_mass", &CEVerificationReport::max_offpath_mass)
      .def_readonly("offpath_witness", &CEVerificationReport::offpath_witness)
      .def_readonly("implemented", &CEVerificationReport::implemented)
      .def_readonly("error", &CEVerificationReport::error);
  m.def("verify_implementation",
        [](const NormalFormGame& game, const std::vector<bool>& target,
           const std::vector<std::vector<int>>& nash_candidates, double tol) {
          std::vector<char> mask(target.begin(), target.end());
          return verify_implementation(game, mask, nash_candidates, tol);
        },
        py::arg("game"), py::arg("target"), py::arg("nash_candidates"), py::arg("tol") = 1e-8);
  m.def("target_profiles",
        [](const Mechanism& mech, const Environment& env, const std::vector<Outcome>& desired,
           double tol) {
          const auto mask = target_profiles(mech, env, desired, tol);
          return std::vector<bool>(mask.begin(), mask.end());
        },
        py::arg("mechanism"), py::arg("env"), py::arg("desired"), py::arg("tol") = kUtilityTol);

  py::class_<LearningConfig> learning_config(m, "LearningConfig");
  py::enum_<LearningConfig::Fallback>(learning_config, "Fallback")
      .value("UNIFORM", LearningConfig::Fallback::kUniform)
      .value("PRIOR", LearningConfig::Fallback::kPrior);
  learning_config.def(py::init<>())
      .def_readwrite("iterations", &LearningConfig::iterations)
      .def_readwrite("seed", &LearningConfig::seed)
      .def_readwrite("fallback", &LearningConfig::fallback)
      .def_readwrite("prior", &LearningConfig::prior)
      .def_readwrite("record_every", &LearningConfig::record_every)
      .def_readwrite("inertia", &LearningConfig::inertia)
      .def_readwrite("inertia_mu", &LearningConfig::inertia_mu);
  py::class_<TraceRecord>(m, "TraceRecord")
      .def_readonly("period", &TraceRecord::period)
      .def_readonly("strategies", &TraceRecord::strategies)
      .def_readonly("realized", &TraceRecord::realized)
      .def_readonly("outcome_utilities", &TraceRecord::outcome_utilities)
      .def_readonly("gains_from_trade", &TraceRecord::gains_from_trade)
      .def_readonly("transfers", &TraceRecord::transfers)
      .def_readonly("avg_max_regret", &TraceRecord::avg_max_regret);
  py::class_<ConvergenceInfo>(m, "ConvergenceInfo")
      .def_readonly("converged", &ConvergenceInfo::converged)
      .def_readonly("first_period", &ConvergenceInfo::first_period)
      .def_readonly("modal_profile", &ConvergenceInfo::modal_profile)
      .def_readonly("modal_frequency", &ConvergenceInfo::modal_frequency);
  py::class_<RegretState>(m, "RegretState")
      .def_readonly("periods", &RegretState::periods)
      .def("regrets", &RegretState::regrets);
  py::class_<SimulationResult>(m, "SimulationResult")
      .def_readonly("trace", &SimulationResult::trace)
      .def_readonly("final_state", &SimulationResult::final_state)
      .def_readonly("convergence", &SimulationResult::convergence)
      .def_readonly("empirical_last_window", &SimulationResult::empirical_last_window)
      .def_readonly("empirical_window", &SimulationResult::empirical_window);
  m.def("simulate", &simulate, py::arg("game"), py::arg("config"),
        py::arg("empirical_window") = 1000, py::arg("convergence_window") = 100,
        py::arg("convergence_threshold") = 0.9);
  m.def("average_max_regret", &average_max_regret);

  py::class_<LpProblem>(m, "LpProblem")
      .def(py::init<>())
      .def_readwrite("num_vars", &LpProblem::num_vars)
      .def_readwrite("objective", &LpProblem::objective)
      .def_readwrite("eq_rows", &LpProblem::eq_rows)
      .def_readwrite("eq_rhs", &LpProblem::eq_rhs)
      .def_readwrite("ge_rows", &LpProblem::ge_rows)
      .def_readwrite("ge_rhs", &LpProblem::ge_rhs);
  py::enum_<LpStatus>(m, "LpStatus")
      .value("OPTIMAL", LpStatus::kOptimal)
      .value("INFEASIBLE", LpStatus::kInfeasible)
      .value("UNBOUNDED", LpStatus::kUnbounded)
      .value("ITERATION_LIMIT", LpStatus::kIterationLimit);
  py::class_<LpResult>(m, "LpResult")
      .def_readonly("status", &LpResult::status)
      .def_readonly("objective", &LpResult::objective)
      .def_readonly("x", &LpResult::x)
      .def_readonly("dual_eq", &LpResult::dual_eq)
      .def_readonly("dual_ge", &LpResult::dual_ge)
      .def_readonly("max_primal_residual", &LpResult::max_primal_residual)
      .def_readonly("max_dual_violation", &LpResult::max_dual_violation)
      .def_readonly("duality_gap", &LpResult::duality_gap)
      .def_readonly("iterations", &LpResult::iterations);
  m.def("lp_solve", [](const LpProblem& p) { return lp_solve(p); }, py::arg("problem"));

  m.def("trivial_scheme", &trivial_scheme);
  m.def("trivial_scc_scheme", &trivial_scc_scheme);
}
