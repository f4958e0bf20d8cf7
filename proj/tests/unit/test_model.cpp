#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "builders.hpp"
#include "mora/allocation.hpp"
#include "oracles.hpp"

using namespace mora;

namespace {

Allocation grants(std::initializer_list<std::pair<std::uint32_t, double>> g) {
  std::vector<Allocation::Grant> v;
  for (auto [b, f] : g) v.push_back({StationId{b}, f});
  return Allocation(std::move(v));
}

}  // namespace

TEST(UserRate, FullAllocationIsCapacity) {
  const auto s = build::state({1.0}, {{0, {10e6}}});
  EXPECT_DOUBLE_EQ(user_rate(s, build::assoc({0}), grants({{0, 1.0}}), UserId{0}), 10e6);
}

TEST(UserRate, HalfAllocation) {
  const auto s = build::state({1.0}, {{0, {8e6, 1.0}}});
  EXPECT_DOUBLE_EQ(user_rate(s, build::assoc({0}), grants({{0, 0.5}}), UserId{0}), 4e6);
}

TEST(UserRate, UnknownUserIsLookupError) {
  const auto s = build::state({1.0}, {{0, {1.0}}});
  EXPECT_THROW(user_rate(s, build::assoc({0}), grants({{0, 1.0}}), UserId{7}), LookupError);
}

TEST(UserRate, RandomInstanceMatchesTermByTerm) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    const auto s = oracle::random_state(rng, 4, 3, 2, 0.0, 4);
    oracle::Stations x;
    for (std::size_t u = 0; u < s.num_users(); ++u) x.push_back(static_cast<std::uint32_t>(rng() % s.num_stations()));
    const auto a = oracle::to_association(x);
    const auto f = mora_allocation(s, a);
    const auto expect = oracle::mora_rates(s, x);
    for (std::size_t u = 0; u < s.num_users(); ++u) {
      EXPECT_NEAR(user_rate(s, a, f, s.users()[u].id), expect[u], 1e-9 * expect[u]);
    }
  }
}

TEST(Weights, EqualSplit) {
  const auto s = build::state({1.0}, {{0, {1}}, {0, {1}}, {0, {1}}, {0, {1}}});
  for (double w : compute_weights(s)) EXPECT_DOUBLE_EQ(w, 0.25);
}

TEST(Weights, TwoOperatorsHalfShares) {
  const auto s = build::state({0.5, 0.5}, {{0, {1}}, {1, {1}}, {1, {1}}});
  EXPECT_EQ(compute_weights(s), (std::vector<double>{0.5, 0.25, 0.25}));
}

TEST(Weights, SharesMatchingLoad) {
  const auto s = build::state({0.6, 0.4}, {{0, {1}}, {0, {1}}, {0, {1}}, {1, {1}}, {1, {1}}});
  for (double w : compute_weights(s)) EXPECT_NEAR(w, 0.2, 1e-15);
}

TEST(Weights, IdleOperatorExcludedAndFlagged) {
  const auto s = build::state({0.5, 0.5}, {{0, {1}}, {0, {1}}});
  ASSERT_EQ(s.idle_operators().size(), 1u);
  EXPECT_EQ(s.idle_operators()[0], OperatorId{1});
  EXPECT_EQ(compute_weights(s), (std::vector<double>{0.25, 0.25}));
}

TEST(Weights, ConserveTotalShare) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 200; ++rep) {
    const auto s = oracle::random_state(rng, 12, 3, 4);
    if (!s.idle_operators().empty()) continue;
    double sum = 0.0;
    for (double w : compute_weights(s)) sum += w;
    EXPECT_NEAR(sum, 1.0, 1e-9);
    EXPECT_EQ(compute_weights(s), oracle::weights(s));
  }
}

TEST(NetworkUtility, SingleUser) {
  const auto s = build::state({1.0}, {{0, {2.0}}});
  EXPECT_NEAR(network_utility(s, build::assoc({0}), grants({{0, 1.0}})), std::log(2.0), 1e-15);
}

TEST(NetworkUtility, UnitRatesGiveZero) {
  const auto s = build::state({1.0}, {{0, {1.0, 1.0}}, {0, {1.0, 1.0}}});
  EXPECT_DOUBLE_EQ(network_utility(s, build::assoc({0, 1}), grants({{0, 1.0}, {1, 1.0}})), 0.0);
}

TEST(NetworkUtility, ZeroRateIsInfeasible) {
  const auto s = build::state({1.0}, {{0, {1.0}}, {0, {1.0}}});
  EXPECT_THROW(network_utility(s, build::assoc({0, 0}), grants({{0, 1.0}, {0, 0.0}})), InfeasibleError);
}

TEST(NetworkUtility, RandomMatchesOracleAndDecomposes) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 300; ++rep) {
    const auto s = oracle::random_state(rng, 6, 4, 3, 0.0);
    oracle::Stations x;
    for (std::size_t u = 0; u < s.num_users(); ++u) x.push_back(static_cast<std::uint32_t>(rng() % s.num_stations()));
    const auto a = oracle::to_association(x);
    const auto f = mora_allocation(s, a);
    const double w = network_utility(s, a, f);
    EXPECT_NEAR(w, oracle::mora_utility(s, x), 1e-12 * std::max(1.0, std::abs(w)));
    double decomposed = 0.0;
    for (std::size_t o = 0; o < s.num_operators(); ++o) {
      if (s.user_count(o) == 0) continue;
      decomposed += s.operators()[o].share * operator_utility(s, a, f, s.operators()[o].id);
    }
    EXPECT_NEAR(w, decomposed, 1e-9);
  }
}

TEST(NetworkUtility, StrictlyIncreasingInOneRate) {
  const auto s = build::state({0.7, 0.3}, {{0, {3.0, 1.0}}, {1, {2.0, 5.0}}, {1, {4.0, 4.0}}});
  const auto a = build::assoc({0, 1, 0});
  const double before = network_utility(s, a, mora_allocation(s, a));
  RateMatrix r = s.rates();
  r(1, StationId{1}) *= 1.5;
  const NetworkState t({s.operators().begin(), s.operators().end()}, {s.users().begin(), s.users().end()}, 2, r);
  EXPECT_GT(network_utility(t, a, mora_allocation(t, a)), before);
}

TEST(OperatorUtility, RateEGivesOne) {
  const auto s = build::state({1.0}, {{0, {std::exp(1.0)}}});
  EXPECT_NEAR(operator_utility(s, build::assoc({0}), grants({{0, 1.0}}), OperatorId{0}), 1.0, 1e-15);
}

TEST(OperatorUtility, EqualRatesGiveLogRate) {
  const auto s = build::state({1.0}, {{0, {4.0, 0}}, {0, {0, 2.0}}});
  EXPECT_NEAR(operator_utility(s, build::assoc({0, 1}), grants({{0, 0.5}, {1, 1.0}}), OperatorId{0}), std::log(2.0),
              1e-15);
}

TEST(OperatorUtility, UnknownOrIdleOperatorIsLookupError) {
  const auto s = build::state({0.5, 0.5}, {{0, {1.0}}});
  const auto a = build::assoc({0});
  EXPECT_THROW(operator_utility(s, a, grants({{0, 1.0}}), OperatorId{1}), LookupError);
  EXPECT_THROW(operator_utility(s, a, grants({{0, 1.0}}), OperatorId{9}), LookupError);
}

TEST(NetworkState, RejectsBadShares) {
  EXPECT_THROW(build::state({0.5, 0.4}, {{0, {1}}}), ValidationError);
  EXPECT_THROW(build::state({1.2, -0.2}, {{0, {1}}}), ValidationError);
  EXPECT_THROW(build::state({}, {}), ValidationError);
}

TEST(NetworkState, RejectsUnknownOperatorAndBadRates) {
  EXPECT_THROW(build::state({1.0}, {{3, {1}}}), LookupError);
  EXPECT_THROW(build::state({1.0}, {{0, {-1.0, 2.0}}}), ValidationError);
  EXPECT_THROW(build::state({1.0}, {{0, {NAN, 2.0}}}), ValidationError);
  EXPECT_THROW(build::state({1.0}, {{0, {0.0, 0.0}}}), InfeasibleError);
}

TEST(NetworkState, RejectsUnsortedUsers) {
  std::vector<User> users{{UserId{2}, OperatorId{0}, std::nullopt}, {UserId{1}, OperatorId{0}, std::nullopt}};
  EXPECT_THROW(NetworkState({{OperatorId{0}, 1.0}}, users, 1, RateMatrix(2, 1, 1.0)), ValidationError);
}

TEST(NetworkState, WithoutUserRecomputesWeights) {
  const auto s = build::state({0.5, 0.5}, {{0, {1}}, {0, {2}}, {1, {3}}});
  const auto t = s.without_user(UserId{0});
  ASSERT_EQ(t.num_users(), 2u);
  EXPECT_DOUBLE_EQ(t.weight(0), 0.5);
  EXPECT_DOUBLE_EQ(t.rate(0, StationId{0}), 2.0);
  EXPECT_THROW(s.without_user(UserId{9}), LookupError);
}

TEST(Association, ValidationRules) {
  const auto s = build::state({1.0}, {{0, {1.0, 0.0}}, {0, {1.0, 1.0}}});
  EXPECT_NO_THROW(validate_association(s, build::assoc({0, 1})));
  EXPECT_THROW(validate_association(s, build::assoc({1, 1})), ValidationError);  // zero rate
  EXPECT_THROW(validate_association(s, build::assoc({0, 5})), ValidationError);
  EXPECT_THROW(validate_association(s, build::assoc({0})), ValidationError);
  EXPECT_THROW(validate_association(s, Association(2)), ValidationError);
}

TEST(Allocation, ValidationRules) {
  const auto s = build::state({1.0}, {{0, {1.0, 1.0}}, {0, {1.0, 1.0}}});
  const auto a = build::assoc({0, 0});
  EXPECT_NO_THROW(validate_allocation(s, a, grants({{0, 0.5}, {0, 0.5}})));
  EXPECT_THROW(validate_allocation(s, a, grants({{0, 0.75}, {0, 0.75}})), ValidationError);
  EXPECT_THROW(validate_allocation(s, a, grants({{0, 0.5}, {1, 0.5}})), ValidationError);
  EXPECT_THROW(validate_allocation(s, a, grants({{0, -0.1}, {0, 0.5}})), ValidationError);
}

TEST(Association, LexicographicOrder) {
  EXPECT_TRUE(build::assoc({0, 1, 2}).lexicographically_less(build::assoc({0, 2, 0})));
  EXPECT_FALSE(build::assoc({1, 0}).lexicographically_less(build::assoc({0, 9})));
}
