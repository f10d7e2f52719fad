/*
 * Copyright 2026 The Kairos Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "kairos/baselines.h"

#include <cmath>
#include <vector>

#include "kairos/error.h"

namespace kairos {

double HarmonicMean(std::span<const double> throughputs_mbps) {
  if (throughputs_mbps.empty()) throw DataError("harmonic mean: empty input");
  double denom = 0.0;
  for (double c : throughputs_mbps) {
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw DataError("harmonic mean: throughputs must be positive");
    }
    denom += 1.0 / c;
  }
  return static_cast<double>(throughputs_mbps.size()) / denom;
}

double RobustHarmonicMean(std::span<const double> throughputs_mbps,
                          std::span<const double> recent_relative_errors) {
  double hm = HarmonicMean(throughputs_mbps);
  double max_err = 0.0;
  for (double e : recent_relative_errors) max_err = std::max(max_err, e);
  return hm / (1.0 + max_err);
}

double RobustDiscounter::Apply(double raw_prediction_mbps) {
  double max_err = 0.0;
  for (double e : errors_) max_err = std::max(max_err, e);
  last_prediction_mbps_ = raw_prediction_mbps;
  return raw_prediction_mbps / (1.0 + max_err);
}

void RobustDiscounter::Observe(double actual_mbps) {
  if (last_prediction_mbps_ < 0.0 || actual_mbps <= 0.0) return;
  errors_.push_back(std::fabs(last_prediction_mbps_ - actual_mbps) / actual_mbps);
  while (static_cast<int>(errors_.size()) > horizon_) errors_.erase(errors_.begin());
  last_prediction_mbps_ = -1.0;
}

}  // namespace kairos
