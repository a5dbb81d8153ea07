#include "mechsim/learn.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace mechsim {

RegretState RegretState::zero(const NormalFormGame& game) {
  RegretState s;
  s.cum_counterfactual.resize(game.agents());
  for (int i = 0; i < game.agents(); ++i) {
    s.cum_counterfactual[i].assign(game.message_counts()[i], 0.0);
  }
  s.cum_realized.assign(game.agents(), 0.0);
  return s;
}

std::vector<double> RegretState::regrets(int agent) const {
  std::vector<double> r(cum_counterfactual[agent].size(), 0.0);
  if (periods == 0) return r;
  for (size_t m = 0; m < r.size(); ++m) {
    r[m] = (cum_counterfactual[agent][m] - cum_realized[agent]) / static_cast<double>(periods);
  }
  return r;
}

void regret_update(RegretState& state, const NormalFormGame& game, std::span<const int> realized) {
  const long long idx = game.encode(realized);
  for (int i = 0; i < game.agents(); ++i) {
    const int Mi = game.message_counts()[i];
    if (realized[i] < 0 || realized[i] >= Mi) throw DomainError("regret_update: message out of range");
    for (int m = 0; m < Mi; ++m) {
      state.cum_counterfactual[i][m] += game.payoff(game.replace(idx, i, m), i);
    }
    state.cum_realized[i] += game.payoff(idx, i);
  }
  state.periods += 1;
}

namespace {

std::vector<double> uniform_strategy(int n) {
  return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

std::vector<double> fallback_strategy(const LearningConfig& config, int agent, int n) {
  if (config.fallback == LearningConfig::Fallback::kPrior &&
      agent < static_cast<int>(config.prior.size()) && !config.prior[agent].empty()) {
    return config.prior[agent];
  }
  return uniform_strategy(n);
}

}  // namespace

namespace {

double payoff_range(const NormalFormGame& game) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (long long m = 0; m < game.profile_count(); ++m) {
    for (int agent = 0; agent < game.agents(); ++agent) {
      const double u = game.payoff(m, agent);
      lo = std::min(lo, u);
      hi = std::max(hi, u);
    }
  }
  return hi - lo;
}

}  // namespace

std::vector<std::vector<double>> strategy_from_regrets(const RegretState& state,
                                                       const NormalFormGame& game,
                                                       const LearningConfig& config) {
  std::vector<std::vector<double>> out(game.agents());
  for (int i = 0; i < game.agents(); ++i) {
    const int Mi = game.message_counts()[i];
    const auto r = state.regrets(i);
    std::vector<double> positive(Mi, 0.0);
    double total = 0.0;
    for (int m = 0; m < Mi; ++m) {
      positive[m] = std::max(r[m], 0.0);
      total += positive[m];
    }
    if (!config.inertia) {
      if (total <= 0.0) {
        out[i] = fallback_strategy(config, i, Mi);
        continue;
      }
      for (auto& v : positive) v /= total;
      out[i] = std::move(positive);
    } else {
      // inertia rule: switch away from the last played message with probability
      // proportional to positive regret over a large fixed normalizer, so play
      // locks in as regrets vanish; with no positive regret, stay put
      const int last = state.last_played.empty() ? 0 : state.last_played[i];
      // default normalizer: half the game's payoff range, so switch
      // probabilities start meaningful and vanish with the regrets
      const double mu =
          config.inertia_mu > 0.0 ? config.inertia_mu : std::max(payoff_range(game), 1e-9) / 2.0;
      std::vector<double> p(Mi, 0.0);
      double spread = 0.0;
      for (int m = 0; m < Mi; ++m) {
        if (m == last) continue;
        p[m] = positive[m] / mu;
        spread += p[m];
      }
      p[last] = std::max(0.0, 1.0 - spread);
      double s = 0.0;
      for (double v : p) s += v;
      for (auto& v : p) v /= s;
      out[i] = std::move(p);
    }
  }
  return out;
}

std::vector<double> average_max_regret(const RegretState& state) {
  std::vector<double> out(state.cum_realized.size(), 0.0);
  for (size_t i = 0; i < out.size(); ++i) {
    const auto r = state.regrets(static_cast<int>(i));
    out[i] = *std::max_element(r.begin(), r.end());
  }
  return out;
}

double counter_uniform(std::uint64_t seed, long period, int agent) {
  // splitmix64 over a (seed, period, agent) key
  std::uint64_t z = seed;
  z ^= 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(period) * 0xbf58476d1ce4e5b9ull;
  z ^= 0x94d049bb133111ebull * (static_cast<std::uint64_t>(agent) + 1);
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  z = z ^ (z >> 31);
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

namespace {

int sample_from(const std::vector<double>& p, double u) {
  double acc = 0.0;
  for (size_t m = 0; m < p.size(); ++m) {
    acc += p[m];
    if (u < acc) return static_cast<int>(m);
  }
  return static_cast<int>(p.size()) - 1;
}

}  // namespace

SimulationResult simulate(const NormalFormGame& game, const LearningConfig& config,
                          long empirical_window, long convergence_window,
                          double convergence_threshold) {
  if (config.iterations < 1) throw DomainError("simulate: iterations must be >= 1");
  if (config.record_every < 1 || config.record_every > config.iterations) {
    throw DomainError("simulate: record_every must lie in [1, iterations]");
  }
  const int I = game.agents();
  SimulationResult result;
  RegretState state = RegretState::zero(game);
  state.last_played.assign(I, 0);

  std::vector<std::vector<double>> strategies(I);
  for (int i = 0; i < I; ++i) strategies[i] = fallback_strategy(config, i, game.message_counts()[i]);

  std::vector<long long> window;  // realized profiles, ring over convergence_window
  std::unordered_map<long long, long> window_counts;
  std::vector<long long> tail;  // final empirical_window profiles
  tail.reserve(std::min<long>(empirical_window, config.iterations));

  for (long period = 1; period <= config.iterations; ++period) {
    std::vector<int> realized(I);
    for (int i = 0; i < I; ++i) {
      realized[i] = sample_from(strategies[i], counter_uniform(config.seed, period, i));
    }
    const long long idx = game.encode(realized);

    regret_update(state, game, realized);
    state.last_played.assign(realized.begin(), realized.end());

    // trailing-window modal frequency
    window.push_back(idx);
    window_counts[idx] += 1;
    if (static_cast<long>(window.size()) > convergence_window) {
      const long long old = window.front();
      window.erase(window.begin());
      if (--window_counts[old] == 0) window_counts.erase(old);
    }
    const long effective_window = std::min<long>(convergence_window, config.iterations);
    if (!result.convergence.converged && static_cast<long>(window.size()) == effective_window) {
      long best = 0;
      long long best_profile = -1;
      for (const auto& [prof, count] : window_counts) {
        if (count > best) {
          best = count;
          best_profile = prof;
        }
      }
      const double freq = static_cast<double>(best) / static_cast<double>(effective_window);
      if (freq > convergence_threshold) {
        result.convergence.converged = true;
        result.convergence.first_period = period;
        result.convergence.modal_profile = best_profile;
        result.convergence.modal_frequency = freq;
      }
    }

    if (config.iterations - period < empirical_window) tail.push_back(idx);

    strategies = strategy_from_regrets(state, game, config);

    if (period % config.record_every == 0 || period == config.iterations) {
      TraceRecord rec;
      rec.period = period;
      rec.strategies = strategies;
      rec.realized = realized;
      rec.outcome_utilities.resize(I);
      rec.transfers.resize(I);
      rec.gains_from_trade = 0.0;
      for (int i = 0; i < I; ++i) {
        rec.outcome_utilities[i] = game.outcome_utility(idx, i);
        rec.transfers[i] = game.transfer(idx, i);
        rec.gains_from_trade += rec.outcome_utilities[i];
      }
      rec.avg_max_regret = average_max_regret(state);
      result.trace.push_back(std::move(rec));
    }
  }

  // final modal stats even when never converged
  if (!result.convergence.converged && !window_counts.empty()) {
    long best = 0;
    for (const auto& [prof, count] : window_counts) {
      if (count > best) {
        best = count;
        result.convergence.modal_profile = prof;
      }
    }
    result.convergence.modal_frequency =
        static_cast<double>(best) / static_cast<double>(window.size());
  }

  result.empirical_window = static_cast<long>(tail.size());
  result.empirical_last_window.prob.assign(game.profile_count(), 0.0);
  if (!tail.empty()) {
    const double w = 1.0 / static_cast<double>(tail.size());
    for (long long prof : tail) result.empirical_last_window.prob[prof] += w;
  }
  result.final_state = std::move(state);
  return result;
}

}  // namespace mechsim
