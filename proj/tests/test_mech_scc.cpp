#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "mechsim/game.hpp"
#include "mechsim/mech_scc.hpp"
#include "scc_fixtures.hpp"
#include "test_support.hpp"

using namespace mechsim;

namespace {

struct TwoState {
  testing::SccFixture fx = testing::scc_two_state_instance();
  CalibrationResult cal;
  std::shared_ptr<SccMechanism> mech;

  TwoState() {
    REQUIRE(validate_environment(fx.env).ok());
    REQUIRE(validate_scc_challenge_scheme_structure(fx.env, fx.F, fx.scheme).ok());
    cal = scc_calibrate(fx.env, fx.F, fx.scheme, fx.lotteries);
    REQUIRE(cal.ok);
    mech = std::make_shared<SccMechanism>(fx.env, fx.F, fx.scheme, fx.lotteries, cal.params);
  }
};

// Straight-line reimplementation of the SCC transfer, independent of
// SccMechanism::transfer.
double scc_tau_reference(const SccMechanism& mech, const Environment& env, const Scc& F,
                         const SccChallengeScheme& scheme, const std::vector<int>& joint, int i) {
  const int I = env.agent_count();
  std::vector<SccMessage> msg;
  for (int k = 0; k < I; ++k) msg.push_back(mech.decode_message(joint[k]));
  auto announced = [&](int k) -> const Outcome& { return F.at(msg[k].report2)[msg[k].alloc]; };
  const Outcome* phi = &announced(0);
  for (int k = 0; k < I; ++k) {
    int count = 0;
    for (int l = 0; l < I; ++l) {
      if (outcome_close(announced(l), announced(k))) ++count;
    }
    if (count >= I - 1) {
      phi = &announced(k);
      break;
    }
  }
  auto entry = [&](int state, const Outcome& z, int agent, int type) -> Outcome {
    const auto& zs = F.at(state);
    for (int k = 0; k < static_cast<int>(zs.size()); ++k) {
      if (outcome_close(zs[k], z)) return scheme.at(state, k, agent, type);
    }
    return z;
  };
  auto challenges = [&](int target, int challenger) {
    if (!outcome_close(announced(target), *phi)) return false;
    const int tj = env.states[msg[challenger].report1][challenger];
    return !outcome_close(entry(msg[target].report2, *phi, challenger, tj), *phi);
  };
  double total = 0.0;
  for (int j = 0; j < I; ++j) {
    if (j == i) continue;
    const double c_ij = mech.bet_value(msg[i], i, j);
    const bool j_self = challenges(j, j);
    total += j_self ? (-c_ij * c_ij - (1 - c_ij) * (1 - c_ij) + 2 * c_ij - 1)
                    : (-c_ij * c_ij - (1 - c_ij) * (1 - c_ij) + 2 * (1 - c_ij) - 1);
    if (challenges(i, j)) total += -2.0 * mech.params().eta;
    if (j_self && env.states[msg[i].report1][j] != env.states[msg[j].report1][j]) {
      total += -mech.params().epsilon;
    }
    if (mech.bet_value(msg[j], j, i) > 0.0 &&
        env.states[msg[i].report2][i] != env.states[msg[j].report1][i]) {
      total += -mech.params().eta;
    }
  }
  return total;
}

}  // namespace

TEST_CASE("scoring rule values and propriety on the grid") {
  CHECK(scoring_rule(1.0, true) == 0.0);
  CHECK(scoring_rule(0.0, false) == 0.0);
  CHECK(scoring_rule(0.5, true) == -0.5);
  CHECK(scoring_rule(0.5, false) == -0.5);
  CHECK(scoring_rule(1.0, false) == -2.0);
  CHECK(scoring_rule(0.0, true) == -2.0);
  CHECK_THROWS_AS(scoring_rule(0.3, true), DomainError);

  // propriety: for event probability p on the grid, the expected score is
  // uniquely maximized at c = p (the full 9-case table)
  for (double p : kBetGrid) {
    double best = -1e18;
    double best_c = -1.0;
    for (double c : kBetGrid) {
      const double expected = p * scoring_rule(c, true) + (1 - p) * scoring_rule(c, false);
      if (expected > best) {
        best = expected;
        best_c = c;
      }
    }
    CHECK(best_c == p);
    for (double c : kBetGrid) {
      if (c == p) continue;
      const double expected = p * scoring_rule(c, true) + (1 - p) * scoring_rule(c, false);
      CHECK(expected < best);
    }
  }
}

TEST_CASE("the SCC mechanism needs at least three agents") {
  Environment env;
  env.agent_names = {"a", "b"};
  env.type_names = {{"A"}, {"A"}};
  env.alternative_names = {"x", "y"};
  env.utility = {{{1}, {0}}, {{0}, {1}}};
  env.states = {{0, 0}};
  Scc F;
  F.by_state = {{Outcome::point_mass(0, {0, 0})}};
  SccChallengeScheme x = trivial_scc_scheme(env, F);
  DictatorLotteries y;
  y.table = {{Outcome::point_mass(0, {0, 0})}, {Outcome::point_mass(1, {0, 0})}};
  CHECK_THROWS_AS(SccMechanism(env, F, x, y, MechanismParams{0.25, 10.0, 0.01}), DomainError);
}

TEST_CASE("message codec round-trips") {
  TwoState t;
  const int M = t.mech->message_count();
  CHECK(M == 2 * 3 * 9);
  for (int msg = 0; msg < M; ++msg) {
    const SccMessage m = t.mech->decode_message(msg);
    CHECK(t.mech->encode_message(m) == msg);
    CHECK(m.alloc < static_cast<int>(t.fx.F.at(m.report2).size()));
  }
}

TEST_CASE("effective allocation: unanimity, I-1 agreement, all distinct") {
  TwoState t;
  const int z1 = 0, z2 = 1;

  const int m_z1 = t.mech->truthful_message(0, z1);
  const int m_z2 = t.mech->truthful_message(0, z2);
  const int m_w = t.mech->truthful_message(1, 0);

  // unanimity
  CHECK(outcome_close(t.mech->effective_allocation(std::vector<int>{m_z1, m_z1, m_z1}),
                      t.fx.F.at(0)[z1]));
  // I-1 = 2 adherents
  CHECK(outcome_close(t.mech->effective_allocation(std::vector<int>{m_z1, m_z1, m_w}),
                      t.fx.F.at(0)[z1]));
  CHECK(outcome_close(t.mech->effective_allocation(std::vector<int>{m_w, m_z2, m_z2}),
                      t.fx.F.at(0)[z2]));
  // all three distinct: agent 1's announcement prevails
  CHECK(outcome_close(t.mech->effective_allocation(std::vector<int>{m_z2, m_z1, m_w}),
                      t.fx.F.at(0)[z2]));
}

TEST_CASE("phi is invariant to permuting the other agents' announcements") {
  TwoState t;
  testing::Rng rng(11);
  const int M = t.mech->message_count();
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> joint = {rng.uniform_int(0, M - 1), rng.uniform_int(0, M - 1),
                              rng.uniform_int(0, M - 1)};
    std::vector<int> swapped = {joint[0], joint[2], joint[1]};
    CHECK(outcome_close(t.mech->effective_allocation(joint),
                        t.mech->effective_allocation(swapped)));
  }
}

TEST_CASE("challenge predicate equals its definition on random profiles") {
  TwoState t;
  const auto& env = t.fx.env;
  testing::Rng rng(17);
  const int M = t.mech->message_count();
  int fired = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<int> joint = {rng.uniform_int(0, M - 1), rng.uniform_int(0, M - 1),
                              rng.uniform_int(0, M - 1)};
    const Outcome phi = t.mech->effective_allocation(joint);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const SccMessage mi = t.mech->decode_message(joint[i]);
        const SccMessage mj = t.mech->decode_message(joint[j]);
        bool expected = outcome_close(t.fx.F.at(mi.report2)[mi.alloc], phi);
        if (expected) {
          const int tj = env.states[mj.report1][j];
          const auto& zs = t.fx.F.at(mi.report2);
          Outcome entry = phi;
          for (int k = 0; k < static_cast<int>(zs.size()); ++k) {
            if (outcome_close(zs[k], phi)) {
              entry = t.fx.scheme.at(mi.report2, k, j, tj);
              break;
            }
          }
          expected = !outcome_close(entry, phi);
        }
        if (expected) ++fired;
        CHECK(t.mech->challenges(joint, i, j) == expected);
      }
    }
  }
  CHECK(fired > 0);
}

TEST_CASE("unanimous truthful profiles give g = z and zero transfers") {
  TwoState t;
  for (int s = 0; s < t.fx.env.state_count(); ++s) {
    for (int z = 0; z < static_cast<int>(t.fx.F.at(s).size()); ++z) {
      const int msg = t.mech->truthful_message(s, z);
      const std::vector<int> joint = {msg, msg, msg};
      CHECK(outcome_close(t.mech->outcome_g(joint), t.fx.F.at(s)[z], 1e-12));
      for (int i = 0; i < 3; ++i) CHECK(t.mech->transfer(joint, i) == 0.0);
    }
  }
}

TEST_CASE("single challenging pair expands to the documented mixture") {
  TwoState t;
  const auto& env = t.fx.env;
  const double eps = t.cal.params.epsilon;
  // everyone announces (state 1, z1) but reports own types via state 2's
  // profile (all B) in report1: p1's B type challenges z1, itself included
  SccMessage m;
  m.report1 = 1;
  m.report2 = 0;
  m.alloc = 0;  // z1
  m.bets = {0, 0};
  const int msg = t.mech->encode_message(m);
  const std::vector<int> joint = {msg, msg, msg};

  for (int i = 0; i < 3; ++i) {
    CHECK(t.mech->challenges(joint, i, 0));
    CHECK_FALSE(t.mech->challenges(joint, i, 1));
    CHECK_FALSE(t.mech->challenges(joint, i, 2));
  }
  CHECK(t.mech->self_challenge(joint, 0));

  // g = (3/9) C + (6/9) z1 with C = eps db + (1 - eps) tz
  const Outcome g = t.mech->outcome_g(joint);
  CHECK(g.lottery.prob(env.alternative_index("z1")) == doctest::Approx(2.0 / 3.0));
  CHECK(g.lottery.prob(env.alternative_index("tz")) == doctest::Approx((1.0 - eps) / 3.0));
  CHECK(g.lottery.prob(env.alternative_index("db")) == doctest::Approx(eps / 3.0));

  // p2 and p3 pay the 2 eta fine (challenged by p1) plus the missed bet's -2
  // score; p1 pays nothing
  CHECK(t.mech->transfer(joint, 0) == doctest::Approx(0.0));
  CHECK(t.mech->transfer(joint, 1) == doctest::Approx(-2.0 * t.cal.params.eta - 2.0));
  CHECK(t.mech->transfer(joint, 2) == doctest::Approx(-2.0 * t.cal.params.eta - 2.0));
}

TEST_CASE("epsilon = 0 reduces g to the pure scheme-entry average") {
  TwoState t;
  MechanismParams degenerate = t.cal.params;
  degenerate.epsilon = 0.0;
  SccMechanism mech0(t.fx.env, t.fx.F, t.fx.scheme, t.fx.lotteries, degenerate);
  testing::Rng rng(23);
  const int M = mech0.message_count();
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> joint = {rng.uniform_int(0, M - 1), rng.uniform_int(0, M - 1),
                              rng.uniform_int(0, M - 1)};
    const Outcome phi = mech0.effective_allocation(joint);
    std::vector<Outcome> parts;
    for (int i = 0; i < 3; ++i) {
      const SccMessage mi = mech0.decode_message(joint[i]);
      for (int j = 0; j < 3; ++j) {
        const int tj = t.fx.env.states[mech0.decode_message(joint[j]).report1][j];
        const auto& zs = t.fx.F.at(mi.report2);
        Outcome entry = phi;
        for (int k = 0; k < static_cast<int>(zs.size()); ++k) {
          if (outcome_close(zs[k], phi)) {
            entry = t.fx.scheme.at(mi.report2, k, j, tj);
            break;
          }
        }
        parts.push_back(entry);
      }
    }
    CHECK(outcome_close(mech0.outcome_g(joint), mix_equal(parts), 1e-9));
  }
}

TEST_CASE("tau2 charges epsilon when j self-challenges and the type reports disagree") {
  TwoState t;
  // p1 self-challenges; p2's report1 calls p1's type A, mismatching p1's own B
  SccMessage self;
  self.report1 = 1;
  self.report2 = 0;
  self.alloc = 0;
  self.bets = {0, 0};
  SccMessage other = self;
  other.report1 = 0;
  const std::vector<int> joint = {t.mech->encode_message(self), t.mech->encode_message(other),
                                  t.mech->encode_message(self)};
  REQUIRE(t.mech->self_challenge(joint, 0));
  const double with_mismatch = t.mech->transfer(joint, 1);
  const double without_mismatch = t.mech->transfer(joint, 2);
  CHECK(with_mismatch == doctest::Approx(without_mismatch - t.cal.params.epsilon));
}

TEST_CASE("transfers match the independent reimplementation on random profiles") {
  TwoState t;
  testing::Rng rng(29);
  const int M = t.mech->message_count();
  for (int trial = 0; trial < 3000; ++trial) {
    std::vector<int> joint = {rng.uniform_int(0, M - 1), rng.uniform_int(0, M - 1),
                              rng.uniform_int(0, M - 1)};
    for (int i = 0; i < 3; ++i) {
      CHECK(t.mech->transfer(joint, i) ==
            doctest::Approx(scc_tau_reference(*t.mech, t.fx.env, t.fx.F, t.fx.scheme, joint, i))
                .epsilon(1e-12));
    }
  }
}

TEST_CASE("single-state instance: unanimity profiles are Nash, bets are dominated") {
  testing::SccFixture fx = testing::scc_single_state_instance();
  REQUIRE(validate_environment(fx.env).ok());
  const CalibrationResult cal = scc_calibrate(fx.env, fx.F, fx.scheme, fx.lotteries);
  REQUIRE(cal.ok);
  auto mech = std::make_shared<SccMechanism>(fx.env, fx.F, fx.scheme, fx.lotteries, cal.params);
  CHECK(mech->message_count() == 18);

  const Mechanism generic = as_mechanism(std::shared_ptr<const SccMechanism>(mech));
  const NormalFormGame game = induce_game(generic, fx.env, 0);
  CHECK(game.profile_count() == 18 * 18 * 18);

  for (int z = 0; z < 2; ++z) {
    const int msg = mech->truthful_message(0, z);
    const std::vector<int> joint = {msg, msg, msg};
    CHECK(outcome_close(mech->outcome_g(joint), fx.F.at(0)[z], 1e-12));
    for (int i = 0; i < 3; ++i) CHECK(mech->transfer(joint, i) == 0.0);
    CHECK(is_pure_nash(game, joint));
  }

  // any positive bet strictly loses against every opponent profile
  SccMessage bet = mech->decode_message(mech->truthful_message(0, 0));
  bet.bets = {2, 0};  // bet 1.0 on p2
  const int bet_msg = mech->encode_message(bet);
  const int base_msg = mech->truthful_message(0, 0);
  for (int o1 = 0; o1 < 18; ++o1) {
    for (int o2 = 0; o2 < 18; ++o2) {
      const long long with_bet = game.encode(std::vector<int>{bet_msg, o1, o2});
      const long long without = game.encode(std::vector<int>{base_msg, o1, o2});
      CHECK(game.payoff(with_bet, 0) < game.payoff(without, 0));
    }
  }
}
