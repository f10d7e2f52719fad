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

#ifndef KAIROS_SESSION_H_
#define KAIROS_SESSION_H_

#include <string>
#include <vector>

namespace kairos {

// One downloaded chunk. Record 0 covers the startup download: its
// rebuffer_s field holds the startup delay, which QoE excludes.
struct ChunkRecord {
  int index = 0;
  int rung = 0;
  double bitrate_mbps = 0.0;
  double size_mbit = 0.0;
  double start_s = 0.0;
  double end_s = 0.0;
  double duration_s = 0.0;    // includes request rtt
  double throughput_mbps = 0.0;  // size / (duration - rtt), goodput
  double rebuffer_s = 0.0;
  double buffer_s = 0.0;      // after download, post cap
  double sleep_s = 0.0;
  // Predictor outputs used for this decision; zero when no predictor ran.
  double pred_q10 = 0.0;
  double pred_q50 = 0.0;
  double pred_q90 = 0.0;
  double pred_adjusted = 0.0;
};

struct QoeBreakdown {
  double utility = 0.0;             // mean bitrate, Mbps
  double rebuffer_penalty = 0.0;    // lambda * mean stall
  double smoothness_penalty = 0.0;  // mu * mean |delta bitrate|
  double average = 0.0;             // utility - penalties, chunks 2..N
};

struct SessionResult {
  std::string trace_id;
  std::string controller_id;
  std::vector<ChunkRecord> records;
  QoeBreakdown qoe;
};

struct PlayerState {
  double buffer_s = 0.0;
  int last_rung = -1;  // -1 before the first chunk
  int next_chunk = 0;
  double wall_s = 0.0;
};

struct SimConfig {
  double rtt_s = 0.08;
  double b_max_s = 60.0;
};

}  // namespace kairos

#endif  // KAIROS_SESSION_H_
