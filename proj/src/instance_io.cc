// Copyright 2026 The mcrelax Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mcrelax/instance_io.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace mcrelax {

using nlohmann::json;

namespace {

double ParseReal(const json& node, const char* what) {
  if (node.is_number()) return node.get<double>();
  if (!node.is_string()) {
    throw std::invalid_argument(std::string("expected a real for '") + what + "'");
  }
  const std::string s = node.get<std::string>();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw std::invalid_argument(std::string("malformed real '") + s +
                                "' for '" + what + "'");
  }
  return v;
}

json RealArray(const std::vector<double>& values) {
  json out = json::array();
  for (double v : values) out.push_back(ExactDecimal(v));
  return out;
}

std::vector<double> ParseRealArray(const json& node, const char* what) {
  if (!node.is_array()) {
    throw std::invalid_argument(std::string("expected an array for '") + what + "'");
  }
  std::vector<double> out;
  out.reserve(node.size());
  for (const auto& v : node) out.push_back(ParseReal(v, what));
  return out;
}

const json& Field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw std::invalid_argument(std::string("missing field '") + key + "'");
  }
  return *it;
}

}  // namespace

std::string ExactDecimal(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::uint64_t Fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string HexDigest(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::string InstanceToJson(const Instance& instance) {
  json doc;
  doc["horizon"] = instance.horizon;
  doc["seed"] = instance.seed;
  doc["group"] = instance.group_tag;
  json elementary = json::array();
  for (const auto& e : instance.elementary) {
    json o;
    o["id"] = e.id;
    o["quantities"] = RealArray(e.quantities);
    o["prices"] = RealArray(e.prices);
    if (e.load_gradient) {
      o["load_gradient"] = {{"up", ExactDecimal(e.load_gradient->up)},
                            {"down", ExactDecimal(e.load_gradient->down)}};
    } else {
      o["load_gradient"] = nullptr;
    }
    elementary.push_back(std::move(o));
  }
  doc["elementary"] = std::move(elementary);
  json blocks = json::array();
  for (const auto& b : instance.blocks) {
    json o;
    o["id"] = b.id;
    o["profile"] = RealArray(b.profile);
    o["price"] = ExactDecimal(b.price);
    o["min_ratio"] = ExactDecimal(b.min_ratio);
    o["is_profile_block"] = b.is_profile_block;
    if (b.exclusive_group) {
      o["exclusive_group"] = *b.exclusive_group;
    } else {
      o["exclusive_group"] = nullptr;
    }
    o["parents"] = b.parents;
    blocks.push_back(std::move(o));
  }
  doc["blocks"] = std::move(blocks);
  json flexible = json::array();
  for (const auto& f : instance.flexible) {
    flexible.push_back({{"id", f.id},
                        {"quantity", ExactDecimal(f.quantity)},
                        {"price", ExactDecimal(f.price)}});
  }
  doc["flexible"] = std::move(flexible);
  return doc.dump(2) + "\n";
}

Instance InstanceFromJson(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("instance JSON: ") + e.what());
  }
  Instance inst;
  try {
    inst.horizon = Field(doc, "horizon").get<int>();
    inst.seed = doc.value("seed", std::uint64_t{0});
    if (doc.contains("group") && doc["group"].is_string()) {
      inst.group_tag = doc["group"].get<std::string>();
    }
    for (const auto& o : Field(doc, "elementary")) {
      ElementaryOrder e;
      e.id = Field(o, "id").get<std::string>();
      e.quantities = ParseRealArray(Field(o, "quantities"), "quantities");
      e.prices = ParseRealArray(Field(o, "prices"), "prices");
      if (o.contains("load_gradient") && !o["load_gradient"].is_null()) {
        const auto& lg = o["load_gradient"];
        e.load_gradient = LoadGradient{ParseReal(Field(lg, "up"), "up"),
                                       ParseReal(Field(lg, "down"), "down")};
      }
      inst.elementary.push_back(std::move(e));
    }
    for (const auto& o : Field(doc, "blocks")) {
      BlockOrder b;
      b.id = Field(o, "id").get<std::string>();
      b.profile = ParseRealArray(Field(o, "profile"), "profile");
      b.price = ParseReal(Field(o, "price"), "price");
      b.min_ratio = ParseReal(Field(o, "min_ratio"), "min_ratio");
      b.is_profile_block = Field(o, "is_profile_block").get<bool>();
      if (o.contains("exclusive_group") && !o["exclusive_group"].is_null()) {
        b.exclusive_group = o["exclusive_group"].get<int>();
      }
      if (o.contains("parents")) {
        b.parents = o["parents"].get<std::vector<std::string>>();
      }
      inst.blocks.push_back(std::move(b));
    }
    for (const auto& o : Field(doc, "flexible")) {
      FlexibleBid f;
      f.id = Field(o, "id").get<std::string>();
      f.quantity = ParseReal(Field(o, "quantity"), "quantity");
      f.price = ParseReal(Field(o, "price"), "price");
      inst.flexible.push_back(std::move(f));
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("instance JSON: ") + e.what());
  }
  inst.Validate();
  return inst;
}

void SaveInstance(const Instance& instance, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << InstanceToJson(instance);
}

Instance LoadInstance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return InstanceFromJson(ss.str());
}

}  // namespace mcrelax
