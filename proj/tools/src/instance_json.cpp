#include "mora_cli/instance_json.hpp"

#include <json.hpp>

namespace mora::cli {

using nlohmann::json;

std::string counterexample_to_json(const Counterexample& c) {
  json doc;
  doc["suite"] = c.suite;
  doc["property"] = c.property;
  doc["seed"] = c.seed;
  doc["instance"] = c.instance;
  doc["detail"] = c.detail;
  doc["num_stations"] = c.state.num_stations();
  json ops = json::array();
  for (const Operator& o : c.state.operators()) ops.push_back({{"id", o.id.value}, {"share", o.share}});
  doc["operators"] = ops;
  json users = json::array();
  for (std::size_t u = 0; u < c.state.num_users(); ++u) {
    const auto row = c.state.rates().row(u);
    users.push_back({{"id", c.state.users()[u].id.value},
                     {"operator", c.state.users()[u].op.value},
                     {"rates", std::vector<double>(row.begin(), row.end())}});
  }
  doc["users"] = users;
  json x = json::array();
  for (std::size_t u = 0; u < c.association.size(); ++u) {
    if (c.association[u] == kUnassigned) {
      x.push_back(nullptr);
    } else {
      x.push_back(c.association[u].value);
    }
  }
  doc["association"] = x;
  return doc.dump(2) + "\n";
}

Counterexample counterexample_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("counterexample: ") + e.what());
  }
  try {
    const std::size_t stations = doc.at("num_stations").get<std::size_t>();
    std::vector<Operator> ops;
    for (const auto& o : doc.at("operators")) {
      ops.push_back({OperatorId{o.at("id").get<std::uint32_t>()}, o.at("share").get<double>()});
    }
    const auto& us = doc.at("users");
    std::vector<User> users;
    RateMatrix rates(us.size(), stations);
    for (std::size_t u = 0; u < us.size(); ++u) {
      users.push_back({UserId{us[u].at("id").get<std::uint64_t>()},
                       OperatorId{us[u].at("operator").get<std::uint32_t>()}, std::nullopt});
      const auto row = us[u].at("rates").get<std::vector<double>>();
      if (row.size() != stations) throw ConfigError("counterexample: rate row length mismatch");
      std::copy(row.begin(), row.end(), rates.row(u).begin());
    }
    std::vector<StationId> x;
    for (const auto& b : doc.at("association")) {
      x.push_back(b.is_null() ? kUnassigned : StationId{b.get<std::uint32_t>()});
    }
    Counterexample c{
        .suite = doc.value("suite", ""),
        .property = doc.at("property").get<std::string>(),
        .seed = doc.value("seed", std::uint64_t{0}),
        .instance = doc.value("instance", std::size_t{0}),
        .detail = doc.value("detail", ""),
        .state = NetworkState(std::move(ops), std::move(users), stations, std::move(rates)),
        .association = Association(std::move(x)),
    };
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("counterexample: ") + e.what());
  }
}

}  // namespace mora::cli
