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

#include "afd/calibrate.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace afd {

LinearFit FitLinear(std::span<const TraceSample> samples) {
  if (samples.size() < 2) {
    throw std::invalid_argument("linear fit needs at least two samples");
  }
  const double n = static_cast<double>(samples.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (const auto& s : samples) {
    mean_x += s.load;
    mean_y += s.latency;
  }
  mean_x /= n;
  mean_y /= n;
  // Centered sums keep the normal equations well conditioned for loads in
  // the 1e5 range.
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& s : samples) {
    const double dx = s.load - mean_x;
    const double dy = s.latency - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0) {
    throw std::invalid_argument(
        "degenerate design: all loads are equal, slope is unidentifiable");
  }
  LinearFit fit;
  fit.alpha = sxy / sxx;
  fit.beta = mean_y - fit.alpha * mean_x;
  double sse = 0.0;
  for (const auto& s : samples) {
    const double e = s.latency - (fit.alpha * s.load + fit.beta);
    sse += e * e;
  }
  fit.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - sse / syy) : 1.0;
  if (samples.size() > 2) {
    const double sigma2 = sse / (n - 2.0);
    fit.alpha_stderr = std::sqrt(sigma2 / sxx);
    fit.beta_stderr = std::sqrt(sigma2 * (1.0 / n + mean_x * mean_x / sxx));
  }
  return fit;
}

std::vector<TraceSample> ReadTraceCsv(std::istream& in) {
  std::vector<TraceSample> out;
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) {
    throw std::runtime_error("trace CSV is empty (expected a header line)");
  }
  ++line_no;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    auto fail = [&](const std::string& why) {
      return std::runtime_error("trace CSV line " + std::to_string(line_no) +
                                ": " + why + " ('" + line + "')");
    };
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw fail("expected exactly two columns");
    }
    TraceSample s;
    try {
      std::size_t used = 0;
      const std::string a = line.substr(0, comma);
      const std::string b = line.substr(comma + 1);
      s.load = std::stod(a, &used);
      if (used != a.size()) throw std::invalid_argument("trailing");
      s.latency = std::stod(b, &used);
      if (used != b.size()) throw std::invalid_argument("trailing");
    } catch (const std::logic_error&) {
      throw fail("not a number");
    }
    if (!std::isfinite(s.load) || s.load < 0.0) throw fail("load must be >= 0");
    if (!std::isfinite(s.latency) || s.latency <= 0.0) {
      throw fail("latency must be > 0");
    }
    out.push_back(s);
  }
  return out;
}

void HardwareParams::Validate() const {
  const auto positive = [](double v, const char* name) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw std::invalid_argument(std::string(name) + " must be > 0");
    }
  };
  positive(pi_peak, "pi_peak");
  positive(beta_HBM, "beta_HBM");
  positive(beta_net, "beta_net");
  positive(N_expert, "N_expert");
  positive(N_expert_per_card, "N_expert_per_card");
  positive(k_route, "k_route");
  positive(H, "H");
  positive(d_expert, "d_expert");
  positive(d_kv, "d_kv");
  if (!(eta_mem > 0.0 && eta_mem <= 1.0)) {
    throw std::invalid_argument("eta_mem must lie in (0, 1]");
  }
  if (!(eta_compute > 0.0 && eta_compute <= 1.0)) {
    throw std::invalid_argument("eta_compute must lie in (0, 1]");
  }
  if (mtp_depth < 0) throw std::invalid_argument("mtp_depth must be >= 0");
  if (k_route > N_expert) {
    throw std::invalid_argument("k_route must not exceed N_expert");
  }
}

double BatchMappingFactor(const HardwareParams& hw) {
  hw.Validate();
  return hw.k_route * (1.0 + hw.mtp_depth) / hw.N_expert;
}

double DeriveAttentionSlope(const HardwareParams& hw) {
  hw.Validate();
  const double bytes_per_token = hw.d_kv * 2.0;
  return bytes_per_token / (hw.beta_HBM * hw.eta_mem);
}

double DeriveFfnSlope(const HardwareParams& hw) {
  const double per_expert_token = hw.N_expert_per_card * 6.0 * hw.H *
                                  hw.d_expert /
                                  (hw.pi_peak * hw.eta_compute);
  return per_expert_token * BatchMappingFactor(hw);
}

double DeriveCommSlope(const HardwareParams& hw) {
  return hw.N_expert_per_card * (3.0 * hw.H / hw.beta_net) *
         BatchMappingFactor(hw);
}

}  // namespace afd
