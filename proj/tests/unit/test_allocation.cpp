#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "builders.hpp"
#include "mora/allocation.hpp"
#include "oracles.hpp"

using namespace mora;

namespace {

oracle::Stations random_x(std::mt19937_64& rng, const NetworkState& s) {
  oracle::Stations x;
  for (std::size_t u = 0; u < s.num_users(); ++u) {
    std::vector<std::uint32_t> ok;
    for (std::uint32_t b = 0; b < s.num_stations(); ++b) {
      if (s.rate(u, StationId{b}) > 0.0) ok.push_back(b);
    }
    x.push_back(ok[rng() % ok.size()]);
  }
  return x;
}

}  // namespace

TEST(MoraAllocation, SymmetricSplit) {
  const auto s = build::state({1.0}, {{0, {1.0}}, {0, {3.0}}});
  const auto f = mora_allocation(s, build::assoc({0, 0}));
  EXPECT_DOUBLE_EQ(f[0].fraction, 0.5);
  EXPECT_DOUBLE_EQ(f[1].fraction, 0.5);
}

TEST(MoraAllocation, ProportionalToWeights) {
  // weights 0.5 and 0.25 on one station
  const auto s = build::state({0.5, 0.5}, {{0, {1.0}}, {1, {1.0}}, {1, {1.0}}});
  const auto f = mora_allocation(s, build::assoc({0, 0, 0}));
  EXPECT_NEAR(f[0].fraction, 0.5, 1e-15);  // 0.5 / (0.5 + 0.25 + 0.25)
  const auto t = build::state({0.5, 0.5}, {{0, {1.0, 1.0}}, {1, {1.0, 1.0}}, {1, {1.0, 1.0}}});
  const auto g = mora_allocation(t, build::assoc({0, 0, 1}));
  EXPECT_NEAR(g[0].fraction, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(g[1].fraction, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(g[2].fraction, 1.0, 1e-15);
}

TEST(MoraAllocation, SumsToOneOnOccupiedStations) {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 500; ++rep) {
    const auto s = oracle::random_state(rng, 10, 4, 3);
    const auto x = random_x(rng, s);
    const auto f = mora_allocation(s, oracle::to_association(x));
    const auto totals = f.station_totals(s.num_stations());
    for (std::uint32_t b = 0; b < s.num_stations(); ++b) {
      const bool used = std::find(x.begin(), x.end(), b) != x.end();
      EXPECT_NEAR(totals[b], used ? 1.0 : 0.0, 1e-9);
    }
  }
}

TEST(MoraAllocation, MaximizesUtilityForFixedAssociation) {
  // Numeric inner maximization on a 3-user station: grid over the simplex.
  const auto s = build::state({0.6, 0.4}, {{0, {5.0}}, {1, {2.0}}, {1, {7.0}}});
  const auto a = build::assoc({0, 0, 0});
  const double w_star = network_utility(s, a, mora_allocation(s, a));
  const auto w = oracle::weights(s);
  double best = -INFINITY;
  for (int i = 1; i < 400; ++i) {
    for (int j = 1; i + j < 400; ++j) {
      const double f0 = i / 400.0, f1 = j / 400.0, f2 = 1.0 - f0 - f1;
      const double v = w[0] * std::log(f0 * 5.0) + w[1] * std::log(f1 * 2.0) + w[2] * std::log(f2 * 7.0);
      best = std::max(best, v);
    }
  }
  EXPECT_GE(w_star, best - 1e-12);
  EXPECT_LT(w_star - best, 1e-4);
}

TEST(MoraAllocation, PerturbationNeverIncreasesUtility) {
  std::mt19937_64 rng(8);
  constexpr double eps = 1e-4;
  for (int rep = 0; rep < 300; ++rep) {
    const auto s = oracle::random_state(rng, 8, 3, 3);
    const auto a = oracle::to_association(random_x(rng, s));
    const auto f = mora_allocation(s, a);
    const double w0 = network_utility(s, a, f);
    for (std::size_t u = 0; u < s.num_users(); ++u) {
      for (std::size_t v = 0; v < s.num_users(); ++v) {
        if (u == v || a[u] != a[v] || f[v].fraction <= eps) continue;
        Allocation g = f;
        g[u].fraction += eps;
        g[v].fraction -= eps;
        EXPECT_LE(network_utility(s, a, g), w0 + 1e-12);
      }
    }
  }
}

TEST(SsAllocation, SingleTenantEqualsMora) {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 100; ++rep) {
    const auto s = oracle::random_state(rng, 8, 3, 1);
    const auto a = oracle::to_association(random_x(rng, s));
    const auto fm = mora_allocation(s, a);
    const auto fs = ss_allocation(s, a);
    for (std::size_t u = 0; u < s.num_users(); ++u) EXPECT_NEAR(fm[u].fraction, fs[u].fraction, 1e-15);
  }
}

TEST(SsAllocation, HalfShareTwoUsers) {
  const auto s = build::state({0.5, 0.5}, {{0, {1.0}}, {0, {1.0}}, {1, {1.0}}});
  const auto f = ss_allocation(s, build::assoc({0, 0, 0}));
  EXPECT_DOUBLE_EQ(f[0].fraction, 0.25);
  EXPECT_DOUBLE_EQ(f[1].fraction, 0.25);
  EXPECT_DOUBLE_EQ(f[2].fraction, 0.5);
}

TEST(SsAllocation, SliceSumsEqualShare) {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 500; ++rep) {
    const auto s = oracle::random_state(rng, 10, 4, 3);
    const auto x = random_x(rng, s);
    const auto f = ss_allocation(s, oracle::to_association(x));
    std::vector<double> slice(s.num_operators() * s.num_stations(), 0.0);
    for (std::size_t u = 0; u < x.size(); ++u) slice[s.operator_index_of_user(u) * s.num_stations() + x[u]] += f[u].fraction;
    for (std::size_t o = 0; o < s.num_operators(); ++o) {
      for (std::size_t b = 0; b < s.num_stations(); ++b) {
        const double v = slice[o * s.num_stations() + b];
        if (v > 0.0) {
          EXPECT_NEAR(v, s.operators()[o].share, 1e-12);
        }
      }
    }
    for (double t : f.station_totals(s.num_stations())) EXPECT_LE(t, 1.0 + 1e-9);
    EXPECT_NO_THROW(validate_allocation(s, oracle::to_association(x), f));
  }
}

// For any fixed association every operator does at least as well under f^M.
TEST(SsAllocation, MoraDominatesPerOperator) {
  std::mt19937_64 rng(2024);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto s = oracle::random_state(rng, 10, 4, 3);
    const auto x = random_x(rng, s);
    const auto rm = oracle::mora_rates(s, x);
    const auto rs = oracle::ss_rates(s, x);
    const auto a = oracle::to_association(x);
    const auto fm = mora_allocation(s, a);
    const auto fs = ss_allocation(s, a);
    for (std::size_t o = 0; o < s.num_operators(); ++o) {
      if (s.user_count(o) == 0) continue;
      const OperatorId id = s.operators()[o].id;
      const double um = operator_utility(s, a, fm, id), us = operator_utility(s, a, fs, id);
      EXPECT_NEAR(um, oracle::operator_mean_log(s, rm, o), 1e-9);
      EXPECT_NEAR(us, oracle::operator_mean_log(s, rs, o), 1e-9);
      EXPECT_GE(um, us - 1e-12) << "instance " << rep;
    }
  }
}

TEST(SsOptimize, SingleUserTakesBestStation) {
  const auto s = build::state({1.0}, {{0, {3.0, 9.0, 1.0}}});
  const auto plan = ss_optimize(s, OperatorId{0}, SsMethod::exact);
  EXPECT_EQ(plan.stations.front(), StationId{1});
  EXPECT_NEAR(plan.utility, std::log(9.0), 1e-12);
}

TEST(SsOptimize, LoadBalancesEqualRates) {
  const auto s = build::state({1.0}, {{0, {1.0, 1.0}}, {0, {1.0, 1.0}}});
  for (auto method : {SsMethod::exact, SsMethod::greedy}) {
    const auto plan = ss_optimize(s, OperatorId{0}, method);
    EXPECT_NE(plan.stations[0], plan.stations[1]);
  }
}

TEST(SsOptimize, ExactMatchesEnumeration) {
  std::mt19937_64 rng(77);
  for (int rep = 0; rep < 100; ++rep) {
    const auto s = oracle::random_state(rng, 6, 3, 2, 0.2, 4);
    for (std::size_t o = 0; o < s.num_operators(); ++o) {
      if (s.user_count(o) == 0) continue;
      const auto plan = ss_optimize(s, s.operators()[o].id, SsMethod::exact);
      EXPECT_NEAR(plan.utility, oracle::ss_operator_optimum(s, o), 1e-9);
    }
  }
}

TEST(SsOptimize, GreedyNeverBeatsExact) {
  std::mt19937_64 rng(78);
  for (int rep = 0; rep < 100; ++rep) {
    const auto s = oracle::random_state(rng, 7, 3, 2);
    for (std::size_t o = 0; o < s.num_operators(); ++o) {
      if (s.user_count(o) == 0) continue;
      const OperatorId id = s.operators()[o].id;
      EXPECT_LE(ss_optimize(s, id, SsMethod::greedy).utility, ss_optimize(s, id, SsMethod::exact).utility + 1e-9);
    }
  }
}

TEST(SsOptimize, GuardAndLookup) {
  std::vector<build::Row> rows(12, build::Row{0, {1.0, 2.0, 3.0, 4.0}});
  const auto s = build::state({1.0}, rows);
  EXPECT_THROW(ss_optimize(s, OperatorId{0}, SsMethod::exact), SizeError);
  EXPECT_NO_THROW(ss_optimize(s, OperatorId{0}, SsMethod::greedy));
  const auto t = build::state({0.5, 0.5}, {{0, {1.0}}});
  EXPECT_THROW(ss_optimize(t, OperatorId{1}, SsMethod::exact), LookupError);
}
