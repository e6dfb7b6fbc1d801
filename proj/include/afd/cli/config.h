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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "afd/analytic.h"
#include "afd/model.h"
#include "afd/simulator.h"

namespace afd::cli {

// Configuration problem attributable to one key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key.empty() ? message : key + ": " + message),
        key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// Every key the experiment configuration understands, in documentation order.
const std::vector<std::string>& KnownKeys();

// Flat "section.key = value" text with '#' comments. Keys are validated
// against KnownKeys(); values stay as text until ExperimentConfig reads them.
class KeyValueConfig {
 public:
  static KeyValueConfig Parse(std::istream& in);
  // Like Parse; a relative coeffs.file is resolved against the file's directory.
  static KeyValueConfig ParseFile(const std::string& path);

  void Set(const std::string& key, std::string value);
  bool Has(const std::string& key) const;
  std::optional<std::string> Get(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const { return entries_; }

  // Sorted "key = value" lines.
  std::string Serialize() const;

  bool operator==(const KeyValueConfig&) const = default;

 private:
  std::map<std::string, std::string> entries_;
};

struct SweepAxes {
  std::vector<int> r;
  std::vector<int> B;
  std::vector<double> mu_P;
  std::vector<double> mu_D;
};

struct ExperimentConfig {
  std::optional<LatencyCoefficients> coeffs;
  WorkloadSpec workload;
  BundleConfig bundle;
  HorizonMode mode = HorizonMode::kFiniteN;
  SweepAxes sweep;
  std::vector<std::uint64_t> seeds;
  std::optional<std::int64_t> stop_completions;  // empty means drain
  std::string output_path;
  std::string trace_path = "trace.csv";
  std::vector<std::string> present;  // keys given explicitly, sorted

  // Throws ConfigError naming key when it was not given.
  void Require(const std::string& key) const;

  // Throws ConfigError naming the first missing coefficient key.
  const LatencyCoefficients& RequireCoeffs() const;
};

// Reads typed values. Coefficients may come from coeffs.file, with inline
// coeffs.* keys taking precedence.
ExperimentConfig BuildExperimentConfig(const KeyValueConfig& kv);

// Counter-based stream seed for one grid point: depends only on the base
// seed and the workload parameters, never on the grid shape.
std::uint64_t DeriveStreamSeed(std::uint64_t seed, double mu_P, double mu_D,
                               PrefillDist dist);

}  // namespace afd::cli
