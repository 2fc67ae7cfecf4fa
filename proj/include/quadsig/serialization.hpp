#pragma once

// JSON persistence for covering codes and scheme configs. Doubles are written
// with round-trip precision, so load(save(c)) reproduces every center exactly.

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "json.hpp"
#include "quadsig/covering.hpp"
#include "quadsig/scheme.hpp"

namespace quadsig {

using Json = nlohmann::json;

inline Json to_json(const SchemeConfig& c) {
  return Json{{"n", c.n},           {"d", c.d},
              {"sigma_x2", c.sigma_x2}, {"eta", c.eta},
              {"mode", to_string(c.mode)}, {"sigma_max2", c.sigma_max2},
              {"d0", c.d0}};
}

inline SchemeConfig scheme_from_json(const Json& j) {
  SchemeConfig c;
  c.n = j.at("n").get<int>();
  c.d = j.at("d").get<double>();
  c.sigma_x2 = j.at("sigma_x2").get<double>();
  c.eta = j.at("eta").get<double>();
  c.mode = parse_mode(j.at("mode").get<std::string>());
  c.sigma_max2 = j.at("sigma_max2").get<double>();
  c.d0 = j.at("d0").get<double>();
  c.validate();
  return c;
}

inline Json to_json(const CoveringCode& code, const std::optional<SchemeConfig>& scheme = {}) {
  Json centers = Json::array();
  for (std::size_t i = 0; i < code.size(); ++i) {
    const auto c = code.center(i);
    centers.push_back(Json(std::vector<double>(c.begin(), c.end())));
  }
  Json j{{"n", code.n},       {"sigma2", code.sigma2}, {"d0", code.d0},
         {"seed", code.seed}, {"centers", std::move(centers)}};
  if (scheme) j["scheme"] = to_json(*scheme);
  return j;
}

inline CoveringCode covering_from_json(const Json& j) {
  CoveringCode code;
  code.n = j.at("n").get<int>();
  code.sigma2 = j.at("sigma2").get<double>();
  code.d0 = j.at("d0").get<double>();
  code.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& row : j.at("centers")) {
    const auto v = row.get<std::vector<double>>();
    if (v.size() != static_cast<std::size_t>(code.n)) {
      throw std::invalid_argument("covering code: center of length " + std::to_string(v.size()) +
                                  ", expected " + std::to_string(code.n));
    }
    code.centers.insert(code.centers.end(), v.begin(), v.end());
  }
  code.validate();
  return code;
}

inline void save_covering(const std::string& path, const CoveringCode& code,
                          const std::optional<SchemeConfig>& scheme = {}) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << to_json(code, scheme).dump() << '\n';
  if (!out) throw std::runtime_error("write to " + path + " failed");
}

inline CoveringCode load_covering(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return covering_from_json(Json::parse(in));
}

}  // namespace quadsig
