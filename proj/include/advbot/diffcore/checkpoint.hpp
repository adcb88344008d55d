#pragma once

// Versioned JSON checkpoint container:
//   {"format": "advbot-checkpoint", "version": 1, "kind": str, "meta": {...},
//    "params": [{"name": str, "shape": [..], "values": [..]}, ...]}
// Values are written with round-trip precision.

#include <fstream>
#include <span>
#include <string>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "advbot/common/error.hpp"
#include "advbot/diffcore/tape.hpp"

namespace advbot::diff {

inline constexpr int kCheckpointVersion = 1;

inline nlohmann::ordered_json params_to_json(std::string_view kind, const nlohmann::ordered_json& meta,
                                             std::span<const Parameter* const> params) {
  nlohmann::ordered_json j;
  j["format"] = "advbot-checkpoint";
  j["version"] = kCheckpointVersion;
  j["kind"] = std::string(kind);
  j["meta"] = meta;
  j["params"] = nlohmann::ordered_json::array();
  for (const auto* p : params) {
    j["params"].push_back({{"name", p->name}, {"shape", p->value.shape()}, {"values", p->value.storage()}});
  }
  return j;
}

// Loads values into existing parameters by name; shapes must match exactly.
inline void params_from_json(const nlohmann::json& j, std::string_view kind, std::span<Parameter* const> params) {
  try {
    if (j.at("format").get<std::string>() != "advbot-checkpoint") throw DataError("not an advbot checkpoint");
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw DataError("unsupported checkpoint version " + std::to_string(j.at("version").get<int>()));
    }
    if (j.at("kind").get<std::string>() != kind) {
      throw DataError("checkpoint kind '" + j.at("kind").get<std::string>() + "', expected '" + std::string(kind) + "'");
    }
    std::unordered_map<std::string, const nlohmann::json*> by_name;
    for (const auto& e : j.at("params")) by_name[e.at("name").get<std::string>()] = &e;
    for (auto* p : params) {
      auto it = by_name.find(p->name);
      if (it == by_name.end()) throw DataError("checkpoint lacks parameter " + p->name);
      const auto shape = it->second->at("shape").get<Shape>();
      if (shape != p->value.shape()) {
        throw DataError("checkpoint shape mismatch for " + p->name + ": file " + shape_str(shape) + ", model " +
                        shape_str(p->value.shape()));
      }
      auto values = it->second->at("values").get<std::vector<double>>();
      p->value = Tensor(shape, std::move(values));
      require_finite(p->value, "checkpoint load");
      p->grad = Tensor(shape);
    }
    if (by_name.size() != params.size()) throw DataError("checkpoint has unexpected extra parameters");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
}

inline void write_json_file(const std::string& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump() << '\n';
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace advbot::diff
