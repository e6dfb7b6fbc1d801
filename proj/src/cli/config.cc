/* Copyright 2026 The AFD-Sizing Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "afd/cli/config.h"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>

namespace afd::cli {
namespace {

constexpr std::string_view kCoeffKeys[] = {
    "coeffs.alpha_A", "coeffs.beta_A", "coeffs.alpha_F",
    "coeffs.beta_F",  "coeffs.alpha_C", "coeffs.beta_C",
};

std::string Trim(std::string_view text) {
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  return std::string(text.substr(b, e - b));
}

double ToDouble(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError(key, "expected a number, got '" + text + "'");
  }
  return v;
}

template <typename Int>
Int ToInt(const std::string& key, const std::string& text) {
  Int v = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(key, "expected an integer, got '" + text + "'");
  }
  return v;
}

std::vector<std::string> SplitList(const std::string& key,
                                   const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (item.empty()) throw ConfigError(key, "empty list element");
    out.push_back(item);
  }
  if (out.empty()) throw ConfigError(key, "list must not be empty");
  return out;
}

template <typename T, typename Conv>
std::vector<T> ParseList(const std::string& key, const std::string& text,
                         Conv conv) {
  std::vector<T> out;
  for (const auto& item : SplitList(key, text)) out.push_back(conv(key, item));
  return out;
}

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

const std::vector<std::string>& KnownKeys() {
  static const std::vector<std::string> keys = {
      "coeffs.file",      "coeffs.alpha_A",  "coeffs.beta_A",
      "coeffs.alpha_F",   "coeffs.beta_F",   "coeffs.alpha_C",
      "coeffs.beta_C",    "workload.mu_P",   "workload.mu_D",
      "workload.p",       "workload.N",      "workload.prefill_dist",
      "bundle.r",         "bundle.B",        "analytic.mode",
      "sweep.r",          "sweep.B",         "sweep.mu_P",
      "sweep.mu_D",       "sweep.seeds",     "seed",
      "run.stop",         "output.path",     "output.trace",
  };
  return keys;
}

KeyValueConfig KeyValueConfig::Parse(std::istream& in) {
  KeyValueConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = Trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", "line " + std::to_string(line_no) +
                                ": expected 'key = value'");
    }
    const std::string key = Trim(std::string_view(body).substr(0, eq));
    if (cfg.Has(key)) {
      throw ConfigError(key, "duplicate key on line " + std::to_string(line_no));
    }
    cfg.Set(key, Trim(std::string_view(body).substr(eq + 1)));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::ParseFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  KeyValueConfig kv = Parse(in);
  // A relative coefficients file is relative to the config that names it.
  if (auto file = kv.Get("coeffs.file")) {
    const std::filesystem::path ref(*file);
    if (ref.is_relative()) {
      kv.Set("coeffs.file",
             (std::filesystem::path(path).parent_path() / ref).string());
    }
  }
  return kv;
}

void KeyValueConfig::Set(const std::string& key, std::string value) {
  const auto& known = KnownKeys();
  if (std::find(known.begin(), known.end(), key) == known.end()) {
    throw ConfigError(key, "unknown configuration key");
  }
  entries_[key] = std::move(value);
}

bool KeyValueConfig::Has(const std::string& key) const {
  return entries_.contains(key);
}

std::optional<std::string> KeyValueConfig::Get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueConfig::Serialize() const {
  std::string out;
  for (const auto& [key, value] : entries_) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  }
  return out;
}

void ExperimentConfig::Require(const std::string& key) const {
  if (!std::binary_search(present.begin(), present.end(), key)) {
    throw ConfigError(key, "required key is missing");
  }
}

const LatencyCoefficients& ExperimentConfig::RequireCoeffs() const {
  if (!coeffs) throw ConfigError("coeffs.alpha_A", "required key is missing");
  return *coeffs;
}

ExperimentConfig BuildExperimentConfig(const KeyValueConfig& input) {
  KeyValueConfig kv = input;
  if (const auto file = kv.Get("coeffs.file")) {
    std::ifstream in(*file);
    if (!in) {
      throw ConfigError("coeffs.file", "cannot open '" + *file + "'");
    }
    const KeyValueConfig from_file = KeyValueConfig::Parse(in);
    for (const auto key : kCoeffKeys) {
      const std::string k(key);
      if (!kv.Has(k)) {
        if (const auto v = from_file.Get(k)) kv.Set(k, *v);
      }
    }
  }

  ExperimentConfig cfg;
  for (const auto& [key, value] : kv.entries()) cfg.present.push_back(key);

  const auto num = [&](const std::string& key) {
    return ToDouble(key, *kv.Get(key));
  };

  // Coefficients: all six or none.
  std::vector<std::string> missing;
  for (const auto key : kCoeffKeys) {
    if (!kv.Has(std::string(key))) missing.emplace_back(key);
  }
  if (missing.size() < std::size(kCoeffKeys)) {
    if (!missing.empty()) throw ConfigError(missing.front(), "required key is missing");
    try {
      cfg.coeffs = LatencyCoefficients::Create(
          num("coeffs.alpha_A"), num("coeffs.beta_A"), num("coeffs.alpha_F"),
          num("coeffs.beta_F"), num("coeffs.alpha_C"), num("coeffs.beta_C"));
    } catch (const std::invalid_argument& e) {
      const std::string what = e.what();
      const std::string key = "coeffs." + what.substr(0, what.find(' '));
      throw ConfigError(key, what);
    }
  }

  if (kv.Has("workload.p") && kv.Has("workload.mu_D")) {
    throw ConfigError("workload.mu_D",
                      "workload.p and workload.mu_D are mutually exclusive");
  }
  if (kv.Has("workload.mu_P")) cfg.workload.mu_P = num("workload.mu_P");
  if (kv.Has("workload.p")) cfg.workload.p = num("workload.p");
  double mu_D = 500.0;  // matches the WorkloadSpec default p = 1/501
  if (kv.Has("workload.mu_D")) {
    mu_D = num("workload.mu_D");
    if (!(mu_D > 0.0)) throw ConfigError("workload.mu_D", "must be > 0");
    cfg.workload.p = WorkloadSpec::PFromMuD(mu_D);
  } else if (kv.Has("workload.p")) {
    mu_D = cfg.workload.mu_D();
  }
  if (kv.Has("workload.N")) {
    cfg.workload.N = ToInt<std::int64_t>("workload.N", *kv.Get("workload.N"));
  }
  if (const auto d = kv.Get("workload.prefill_dist")) {
    try {
      cfg.workload.prefill_dist = ParsePrefillDist(*d);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("workload.prefill_dist", e.what());
    }
  }
  if (!(cfg.workload.mu_P > 0.0)) throw ConfigError("workload.mu_P", "must be > 0");
  if (!(cfg.workload.p > 0.0 && cfg.workload.p < 1.0)) {
    throw ConfigError("workload.p", "must lie in (0, 1)");
  }
  if (cfg.workload.N < 1) throw ConfigError("workload.N", "must be >= 1");

  if (kv.Has("seed")) cfg.workload.seed = ToInt<std::uint64_t>("seed", *kv.Get("seed"));
  if (kv.Has("bundle.r")) cfg.bundle.r_sim = ToInt<int>("bundle.r", *kv.Get("bundle.r"));
  if (kv.Has("bundle.B")) cfg.bundle.B = ToInt<int>("bundle.B", *kv.Get("bundle.B"));
  if (cfg.bundle.r_sim < 1) throw ConfigError("bundle.r", "must be >= 1");
  if (cfg.bundle.B < 1) throw ConfigError("bundle.B", "must be >= 1");

  if (const auto m = kv.Get("analytic.mode")) {
    try {
      cfg.mode = ParseHorizonMode(*m);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("analytic.mode", e.what());
    }
  }

  const auto positive_ints = [&](const std::string& key) {
    auto v = ParseList<int>(key, *kv.Get(key), ToInt<int>);
    for (int x : v) {
      if (x < 1) throw ConfigError(key, "values must be >= 1");
    }
    return v;
  };
  const auto positive_doubles = [&](const std::string& key) {
    auto v = ParseList<double>(key, *kv.Get(key), ToDouble);
    for (double x : v) {
      if (!(x > 0.0)) throw ConfigError(key, "values must be > 0");
    }
    return v;
  };
  cfg.sweep.r = kv.Has("sweep.r") ? positive_ints("sweep.r")
                                  : std::vector<int>{cfg.bundle.r_sim};
  cfg.sweep.B = kv.Has("sweep.B") ? positive_ints("sweep.B")
                                  : std::vector<int>{cfg.bundle.B};
  cfg.sweep.mu_P = kv.Has("sweep.mu_P") ? positive_doubles("sweep.mu_P")
                                        : std::vector<double>{cfg.workload.mu_P};
  cfg.sweep.mu_D = kv.Has("sweep.mu_D") ? positive_doubles("sweep.mu_D")
                                        : std::vector<double>{mu_D};
  if (kv.Has("sweep.seeds")) {
    const std::string text = *kv.Get("sweep.seeds");
    if (Trim(text).empty()) throw ConfigError("sweep.seeds", "list must not be empty");
    cfg.seeds = ParseList<std::uint64_t>("sweep.seeds", text,
                                         ToInt<std::uint64_t>);
  } else {
    cfg.seeds = {cfg.workload.seed};
  }

  if (const auto stop = kv.Get("run.stop")) {
    const std::string prefix = "completions:";
    if (*stop == "drain") {
      cfg.stop_completions.reset();
    } else if (stop->starts_with(prefix)) {
      cfg.stop_completions =
          ToInt<std::int64_t>("run.stop", stop->substr(prefix.size()));
      if (*cfg.stop_completions < 1) throw ConfigError("run.stop", "must be >= 1");
    } else {
      throw ConfigError("run.stop", "expected 'drain' or 'completions:<n>'");
    }
  }
  if (const auto out = kv.Get("output.path")) cfg.output_path = *out;
  if (const auto tr = kv.Get("output.trace")) cfg.trace_path = *tr;
  return cfg;
}

std::uint64_t DeriveStreamSeed(std::uint64_t seed, double mu_P, double mu_D,
                               PrefillDist dist) {
  std::uint64_t h = SplitMix64(seed);
  h = SplitMix64(h ^ std::bit_cast<std::uint64_t>(mu_P));
  h = SplitMix64(h ^ std::bit_cast<std::uint64_t>(mu_D));
  h = SplitMix64(h ^ static_cast<std::uint64_t>(dist));
  return h;
}

}  // namespace afd::cli
