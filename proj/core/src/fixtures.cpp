#include "mora/fixtures.hpp"

#include <cmath>
#include <functional>
#include <string>

#include "mora/solvers.hpp"

namespace mora {

namespace {

void check_family(const ThreeDmFamily& f) {
  const std::size_t n = f.n;
  if (n == 0) throw ValidationError("3DM family needs n >= 1");
  if (f.triples.size() < n) throw ValidationError("3DM family needs m >= n triples");
  std::vector<int> seen_c(n, 0), seen_d(n, 0), seen_e(n, 0);
  for (const Triple& t : f.triples) {
    if (t.c >= n || t.d >= n || t.e >= n) throw ValidationError("triple element out of range");
    seen_c[t.c] = seen_d[t.d] = seen_e[t.e] = 1;
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!seen_c[j] || !seen_d[j] || !seen_e[j]) {
      throw ValidationError("element " + std::to_string(j) + " is not covered by any triple");
    }
  }
}

bool covers_all(const ThreeDmFamily& f) {
  try {
    check_family(f);
    return true;
  } catch (const ValidationError&) {
    return false;
  }
}

}  // namespace

NetworkState build_3dm_instance(const ThreeDmFamily& family, double rate) {
  check_family(family);
  if (!(rate > 0.0)) throw ValidationError("rate must be positive");
  const std::size_t n = family.n;
  const std::size_t m = family.triples.size();

  std::vector<Operator> ops{{OperatorId{0}, static_cast<double>(n) / static_cast<double>(m)}};
  if (m > n) ops.push_back({OperatorId{1}, static_cast<double>(m - n) / static_cast<double>(m)});
  else ops[0].share = 1.0;

  std::vector<User> users;
  std::vector<std::vector<double>> rows;
  std::uint64_t next_id = 0;
  auto add = [&](OperatorId op, auto&& reaches) {
    std::vector<double> row(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      if (reaches(family.triples[i])) row[i] = rate;
    }
    users.push_back(User{UserId{next_id++}, op, std::nullopt});
    rows.push_back(std::move(row));
  };
  for (std::uint32_t k = 0; k < n; ++k) add(OperatorId{0}, [k](const Triple& t) { return t.d == k; });
  for (std::uint32_t k = 0; k < n; ++k) add(OperatorId{0}, [k](const Triple& t) { return t.e == k; });
  for (std::uint32_t j = 0; j < n; ++j) {
    std::size_t t_j = 0;
    for (const Triple& t : family.triples) t_j += t.c == j ? 1 : 0;
    for (std::size_t k = 1; k < t_j; ++k) add(OperatorId{1}, [j](const Triple& t) { return t.c == j; });
  }

  RateMatrix c(users.size(), m);
  for (std::size_t u = 0; u < users.size(); ++u) {
    std::copy(rows[u].begin(), rows[u].end(), c.row(u).begin());
  }
  return NetworkState(std::move(ops), std::move(users), m, std::move(c));
}

double three_dm_matching_utility(std::size_t n, std::size_t m, double rate) {
  const double nm = static_cast<double>(n) / static_cast<double>(m);
  return nm * std::log(rate / 2.0) + (1.0 - nm) * std::log(rate);
}

bool has_three_dm_matching(const ThreeDmFamily& family) {
  const std::size_t n = family.n;
  std::vector<bool> used_d(n, false), used_e(n, false);
  std::function<bool(std::uint32_t)> pick = [&](std::uint32_t j) {
    if (j == n) return true;
    for (const Triple& t : family.triples) {
      if (t.c != j || used_d[t.d] || used_e[t.e]) continue;
      used_d[t.d] = used_e[t.e] = true;
      if (pick(j + 1)) return true;
      used_d[t.d] = used_e[t.e] = false;
    }
    return false;
  };
  return pick(0);
}

ThreeDmFamily random_three_dm_family(std::size_t n, std::size_t m, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(n - 1));
  ThreeDmFamily f;
  f.n = n;
  do {
    f.triples.clear();
    for (std::size_t i = 0; i < m; ++i) f.triples.push_back({pick(rng), pick(rng), pick(rng)});
  } while (!covers_all(f));
  return f;
}

OnlineScript online_worst_case_fixture(std::size_t num_stations) {
  if (num_stations < 2) throw ValidationError("worst-case script needs at least 2 stations");
  OnlineScript script;
  script.num_stations = num_stations;
  const std::size_t total = num_stations * num_stations;
  for (std::size_t k = 0; k < total; ++k) {
    script.events.push_back({ScriptEvent::Kind::join, UserId{k}});
  }
  for (std::size_t k = 0; k < total; ++k) {
    if (k % num_stations != 0) script.events.push_back({ScriptEvent::Kind::leave, UserId{k}});
  }
  return script;
}

LiveNetwork replay_online(const OnlineScript& script) {
  LiveNetwork net({Operator{OperatorId{0}, 1.0}}, script.num_stations);
  const std::vector<double> ones(script.num_stations, 1.0);
  SolverParams online;
  online.m = 0;
  for (const ScriptEvent& e : script.events) {
    if (e.kind == ScriptEvent::Kind::join) {
      gllg_on_join(net, e.user, 0, ones, online);
    } else {
      gllg_on_leave(net, e.user, online);
    }
  }
  return net;
}

}  // namespace mora
