#ifndef MECHSIM_CONFIG_IO_HPP
#define MECHSIM_CONFIG_IO_HPP

#include <optional>
#include <string>

#include <json.hpp>

#include "mechsim/env.hpp"
#include "mechsim/schemes.hpp"

namespace mechsim {

/// Everything a run can be configured with. The challenge schemes are stored
/// densely; config files list only the entries that differ from f (resp. z).
struct Model {
  Environment env;
  std::optional<Scf> scf;
  std::optional<Scc> scc;
  std::optional<DictatorLotteries> lotteries;
  std::optional<ChallengeScheme> scheme;
  std::optional<SccChallengeScheme> scc_scheme;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Model load_model(const nlohmann::json& j);
Model load_model_file(const std::string& path);
nlohmann::json to_json(const Model& model);

/// The bundled bilateral-trade example: two-type buyer and seller, the four-state
/// social choice rule, its test allocations and dictator menus.
Model bilateral_trade_preset();

/// Challenge scheme filled with f(state) everywhere.
ChallengeScheme trivial_scheme(const Environment& env, const Scf& f);
SccChallengeScheme trivial_scc_scheme(const Environment& env, const Scc& F);

std::string outcome_to_string(const Environment& env, const Outcome& o);

}  // namespace mechsim

#endif  // MECHSIM_CONFIG_IO_HPP
