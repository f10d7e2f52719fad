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

#ifndef KAIROS_BASELINES_H_
#define KAIROS_BASELINES_H_

#include <span>

namespace kairos {

// k / sum(1/C); all inputs must be positive.
double HarmonicMean(std::span<const double> throughputs_mbps);

// Harmonic mean discounted by the worst recent relative prediction error:
// HM / (1 + max_err). An empty error history leaves the mean unchanged.
double RobustHarmonicMean(std::span<const double> throughputs_mbps,
                          std::span<const double> recent_relative_errors);

// Tracks |predicted - actual| / actual over a sliding horizon and applies
// the discount above. Predictions are recorded pre-discount.
class RobustDiscounter {
 public:
  explicit RobustDiscounter(int horizon) : horizon_(horizon) {}

  // Discounts `raw` and remembers it for the error update.
  double Apply(double raw_prediction_mbps);
  // Call once the chunk finished with the measured throughput.
  void Observe(double actual_mbps);

  std::span<const double> errors() const { return errors_; }

 private:
  int horizon_;
  double last_prediction_mbps_ = -1.0;
  std::vector<double> errors_;
};

}  // namespace kairos

#endif  // KAIROS_BASELINES_H_
