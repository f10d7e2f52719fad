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

#ifndef KAIROS_WINDOW_H_
#define KAIROS_WINDOW_H_

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "kairos/session.h"

namespace kairos {

// Feature order inside an observation vector.
enum ObservationFeature {
  kFeatThroughput = 0,  // Mbps
  kFeatBuffer = 1,      // s
  kFeatRebuffer = 2,    // s
  kFeatLatency = 3,     // s, full download duration
};

// k observations ordered newest-first with their relative sample times:
// rel_time_s[m] is how long before the newest observation sample m
// completed, so rel_time_s[0] == 0.
struct ObservationWindow {
  std::vector<std::array<double, 4>> features;
  std::vector<double> rel_time_s;
  double truth_mbps = std::nan("");  // training only
  std::string trace_id;

  int k() const { return static_cast<int>(features.size()); }
  bool has_truth() const { return std::isfinite(truth_mbps); }
  void Validate() const;
};

// Regular reference offsets {eta, 2*eta, ..., k*eta} measured backwards
// from the newest sample.
std::vector<double> ReferencePoints(int k, double eta_s);

// Builds a window from completed chunk records (oldest first). Histories
// shorter than k are left-padded with copies of the earliest record, with
// times extrapolated at chunk_duration_s spacing.
ObservationWindow WindowFromHistory(std::span<const ChunkRecord> history, int k,
                                    double chunk_duration_s);

// Sliding full-history windows over a finished session; window i predicts
// record k+i and carries its measured throughput as truth.
std::vector<ObservationWindow> SliceSessionWindows(const SessionResult& session,
                                                   int k,
                                                   double chunk_duration_s);

struct WindowDataset {
  int k = 8;
  double eta_s = 4.0;
  std::vector<ObservationWindow> windows;
  std::vector<std::string> train_traces;
  std::vector<std::string> val_traces;

  std::vector<size_t> TrainIndices() const;
  std::vector<size_t> ValIndices() const;
};

std::string SerializeDataset(const WindowDataset& dataset);
WindowDataset ParseDataset(const std::string& text);

}  // namespace kairos

#endif  // KAIROS_WINDOW_H_
