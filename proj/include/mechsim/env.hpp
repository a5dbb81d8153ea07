#ifndef MECHSIM_ENV_HPP
#define MECHSIM_ENV_HPP

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mechsim {

inline constexpr double kUtilityTol = 1e-9;   // comparisons between utilities
inline constexpr double kProbTol = 1e-12;     // lottery normalization

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Finite-support lottery over alternatives, stored as (alternative index, probability)
/// pairs sorted by index with strictly positive weights.
class Lottery {
 public:
  Lottery() = default;
  static Lottery point_mass(int alternative);
  static Lottery from_weights(std::vector<std::pair<int, double>> weights);

  const std::vector<std::pair<int, double>>& weights() const { return weights_; }
  double prob(int alternative) const;
  double total_mass() const;
  bool empty() const { return weights_.empty(); }

 private:
  std::vector<std::pair<int, double>> weights_;
};

/// An allocation: lottery over pure alternatives plus a transfer to each agent.
struct Outcome {
  Lottery lottery;
  std::vector<double> transfers;

  static Outcome point_mass(int alternative, std::vector<double> transfers);
};

bool outcome_close(const Outcome& a, const Outcome& b, double tol = kUtilityTol);

/// Complete-information environment: agents, per-agent type sets, admissible
/// states (type profiles), pure alternatives, and the utility table v_i(a, t).
/// Immutable after construction.
struct Environment {
  std::vector<std::string> agent_names;                 // size I
  std::vector<std::vector<std::string>> type_names;     // [agent][type]
  std::vector<std::vector<int>> states;                 // [state][agent] -> type index
  std::vector<std::string> alternative_names;
  // utility[alt][agent][type] = v_agent(alt, type)
  std::vector<std::vector<std::vector<double>>> utility;

  int agent_count() const { return static_cast<int>(agent_names.size()); }
  int state_count() const { return static_cast<int>(states.size()); }
  int alternative_count() const { return static_cast<int>(alternative_names.size()); }
  int type_count(int agent) const;

  int type_index(int agent, const std::string& name) const;
  int alternative_index(const std::string& name) const;
  // index of a type profile within Theta, or -1 if it identifies no state
  int state_index(std::span<const int> profile) const;
  std::string state_label(int state) const;

  // number of type profiles in the full product x_i Theta_i
  long long profile_space_size() const;

  void check_agent(int agent) const;
  void check_type(int agent, int type) const;
  void check_state(int state) const;
};

struct ValidationIssue {
  std::string code;     // short machine tag, e.g. "state-redundancy"
  std::string message;  // human-readable, carries the offending values
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  void add(std::string code, std::string message);
};

/// Social choice function f: Theta -> X.
struct Scf {
  std::vector<Outcome> by_state;  // indexed like Environment::states
  const Outcome& at(int state) const;
};

/// Social choice correspondence F: Theta -> finite nonempty sets of outcomes.
struct Scc {
  std::vector<std::vector<Outcome>> by_state;
  const std::vector<Outcome>& at(int state) const;
};

/// Sum_a l(a) v_agent(a, type) + transfers[agent].
double expected_utility(const Environment& env, const Outcome& outcome, int agent, int type);

/// alpha x + (1-alpha) y, mixing lotteries pointwise and transfers linearly.
Outcome compound(double alpha, const Outcome& x, const Outcome& y);

/// Equal-weight mixture of a list of outcomes.
Outcome mix_equal(const std::vector<Outcome>& outcomes);

/// Checks every Environment invariant; returns all violations, never throws.
ValidationReport validate_environment(const Environment& env);

ValidationReport validate_outcome(const Environment& env, const Outcome& outcome);

}  // namespace mechsim

#endif  // MECHSIM_ENV_HPP
