#include "mechsim/config_io.hpp"

namespace mechsim {

namespace {

// Alternatives of the bilateral-trade example are trade triples (q, t_B, t_S):
// quantity traded, buyer payment, seller receipt. Utilities are u_B = q v + t_B
// and u_S = t_S - q c for valuations v in {20, 12} and costs c in {8, 2}.
struct Triple {
  const char* name;
  double q, tb, ts;
};

constexpr Triple kTriples[] = {
    {"trade_price_6", 1.0, -6.0, 6.0},
    {"trade_price_10", 1.0, -10.0, 10.0},
    {"half_trade_price_2", 0.5, -2.0, 2.0},
    {"half_trade_price_3", 0.5, -3.0, 3.0},
    {"buyer_dictator_trade", 1.0, -15.0, 15.0},
    {"no_trade", 0.0, 0.0, 0.0},
    {"seller_dictator_trade", 1.0, -4.0, 4.0},
};

constexpr double kBuyerValue[] = {20.0, 12.0};  // H, L
constexpr double kSellerCost[] = {8.0, 2.0};    // H, L

}  // namespace

Model bilateral_trade_preset() {
  Model model;
  Environment& env = model.env;
  env.agent_names = {"buyer", "seller"};
  env.type_names = {{"H", "L"}, {"H", "L"}};
  for (const auto& t : kTriples) env.alternative_names.push_back(t.name);
  env.utility.resize(std::size(kTriples));
  for (size_t a = 0; a < std::size(kTriples); ++a) {
    env.utility[a] = {
        {kTriples[a].q * kBuyerValue[0] + kTriples[a].tb,
         kTriples[a].q * kBuyerValue[1] + kTriples[a].tb},
        {kTriples[a].ts - kTriples[a].q * kSellerCost[0],
         kTriples[a].ts - kTriples[a].q * kSellerCost[1]},
    };
  }
  const int H = 0, L = 1;
  env.states = {{L, L}, {H, H}, {H, L}, {L, H}};

  auto pure = [&](const char* name) {
    return Outcome::point_mass(env.alternative_index(name), {0.0, 0.0});
  };

  Scf f;
  f.by_state = {pure("trade_price_6"), pure("trade_price_10"), pure("trade_price_10"),
                pure("trade_price_10")};
  model.scf = f;

  ChallengeScheme x = trivial_scheme(env, f);
  // seller whistle-blows a reported low cost, buyer a reported high valuation
  x.table[env.state_index(std::vector<int>{L, L})][1][H] = pure("half_trade_price_3");
  x.table[env.state_index(std::vector<int>{H, H})][0][L] = pure("half_trade_price_2");
  x.table[env.state_index(std::vector<int>{H, L})][0][L] = pure("half_trade_price_2");
  model.scheme = std::move(x);

  DictatorLotteries y;
  y.table = {
      {pure("buyer_dictator_trade"), pure("no_trade")},   // buyer H, L
      {pure("no_trade"), pure("seller_dictator_trade")},  // seller H, L
  };
  model.lotteries = std::move(y);
  return model;
}

}  // namespace mechsim
