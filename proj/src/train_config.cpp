/* Copyright 2026 The kpn-translate Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#include "kpn/train_config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace kpn {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* expected) {
  throw ConfigError("config key '" + key + "': cannot parse '" + value +
                    "' as " + expected);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a number");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    bad_value(key, v, "a non-negative integer");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "a boolean");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::vector<KeyValueLine> parse_key_values(const std::string& text) {
  std::vector<KeyValueLine> out;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(number) +
                        ": expected 'key = value'");
    }
    KeyValueLine kv{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), number};
    if (kv.key.empty()) {
      throw ConfigError("config line " + std::to_string(number) + ": empty key");
    }
    out.push_back(std::move(kv));
  }
  return out;
}

void TrainConfig::set(const std::string& key, const std::string& v) {
  if (key == "lr") lr = to_double(key, v);
  else if (key == "batch") batch = to_u64(key, v);
  else if (key == "iterations") iterations = to_u64(key, v);
  else if (key == "seed") seed = to_u64(key, v);
  else if (key == "adam_beta1") adam_beta1 = to_double(key, v);
  else if (key == "adam_beta2") adam_beta2 = to_double(key, v);
  else if (key == "adam_eps") adam_eps = to_double(key, v);
  else if (key == "weight_h") weight_h = to_double(key, v);
  else if (key == "weight_r") weight_r = to_double(key, v);
  else if (key == "weight_id") weight_id = to_double(key, v);
  else if (key == "geometry") {
    if (v == "desk") geometry = Geometry::desk();
    else if (v == "full") geometry = Geometry::full();
    else bad_value(key, v, "desk or full");
  }
  else if (key == "hi_height") geometry.hi_h = to_u64(key, v);
  else if (key == "hi_width") geometry.hi_w = to_u64(key, v);
  else if (key == "lo_height") geometry.lo_h = to_u64(key, v);
  else if (key == "lo_width") geometry.lo_w = to_u64(key, v);
  else if (key == "grid") geometry.grid = to_u64(key, v);
  else if (key == "sigma_min") sigma_bounds.min = to_double(key, v);
  else if (key == "sigma_max") sigma_bounds.max = to_double(key, v);
  else if (key == "enable_affine") enable_affine = to_bool(key, v);
  else if (key == "enable_blur") enable_blur = to_bool(key, v);
  else if (key == "enable_noise") enable_noise = to_bool(key, v);
  else if (key == "n_classes") n_classes = to_u64(key, v);
  else if (key == "encoder") encoder = parse_encoder_mode(v);
  else if (key == "features") features = parse_feature_mode(v);
  else if (key == "encoder_pretrain_iterations") encoder_pretrain_iterations = to_u64(key, v);
  else if (key == "noise_seed") noise_seed = to_u64(key, v);
  else if (key == "checkpoint_every") checkpoint_every = to_u64(key, v);
  else if (key == "sample_every") sample_every = to_u64(key, v);
  else if (key == "two_discriminators") two_discriminators = to_bool(key, v);
  else if (key == "per_location_loss") per_location_loss = to_bool(key, v);
  else throw ConfigError("unknown config key '" + key + "'");
}

TrainConfig TrainConfig::parse(const std::string& text) {
  TrainConfig cfg;
  for (const KeyValueLine& kv : parse_key_values(text)) {
    try {
      cfg.set(kv.key, kv.value);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(e.what()) + " (line " +
                        std::to_string(kv.line) + ")");
    }
  }
  cfg.validate();
  return cfg;
}

TrainConfig TrainConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void TrainConfig::validate() const {
  if (!(lr > 0)) throw ConfigError("lr must be positive");
  if (batch < 1) throw ConfigError("batch must be at least 1");
  if (n_classes < 1 || n_classes > 255) throw ConfigError("n_classes must lie in [1, 255]");
  if (!(sigma_bounds.min > 0) || !(sigma_bounds.max > sigma_bounds.min)) {
    throw ConfigError("sigma bounds must satisfy 0 < sigma_min < sigma_max");
  }
  geometry.validate();
}

std::string TrainConfig::to_text() const {
  std::ostringstream o;
  auto b = [](bool v) { return v ? "true" : "false"; };
  o << "lr = " << fmt(lr) << "\n"
    << "batch = " << batch << "\n"
    << "iterations = " << iterations << "\n"
    << "seed = " << seed << "\n"
    << "adam_beta1 = " << fmt(adam_beta1) << "\n"
    << "adam_beta2 = " << fmt(adam_beta2) << "\n"
    << "adam_eps = " << fmt(adam_eps) << "\n"
    << "weight_h = " << fmt(weight_h) << "\n"
    << "weight_r = " << fmt(weight_r) << "\n"
    << "weight_id = " << fmt(weight_id) << "\n"
    << "hi_height = " << geometry.hi_h << "\n"
    << "hi_width = " << geometry.hi_w << "\n"
    << "lo_height = " << geometry.lo_h << "\n"
    << "lo_width = " << geometry.lo_w << "\n"
    << "grid = " << geometry.grid << "\n"
    << "sigma_min = " << fmt(sigma_bounds.min) << "\n"
    << "sigma_max = " << fmt(sigma_bounds.max) << "\n"
    << "enable_affine = " << b(enable_affine) << "\n"
    << "enable_blur = " << b(enable_blur) << "\n"
    << "enable_noise = " << b(enable_noise) << "\n"
    << "n_classes = " << n_classes << "\n"
    << "encoder = " << encoder_mode_name(encoder) << "\n"
    << "features = " << feature_mode_name(features) << "\n"
    << "encoder_pretrain_iterations = " << encoder_pretrain_iterations << "\n"
    << "noise_seed = " << noise_seed << "\n"
    << "checkpoint_every = " << checkpoint_every << "\n"
    << "sample_every = " << sample_every << "\n"
    << "two_discriminators = " << b(two_discriminators) << "\n"
    << "per_location_loss = " << b(per_location_loss) << "\n";
  return o.str();
}

}  // namespace kpn
