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

// Trace-driven virtual player: per-chunk downloads over a piecewise
// bandwidth timeline, buffer/rebuffer accounting, and session logging.

#ifndef KAIROS_SIMULATOR_H_
#define KAIROS_SIMULATOR_H_

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "kairos/session.h"
#include "kairos/trace_io.h"

namespace kairos {

inline constexpr char kSessionLogMagic[] = "KAIROS-LOG/1";

// rtt plus the time to drain `size_mbit` integrating the piecewise-constant
// bandwidth from `start_s` (wrapping cyclically).
double DownloadTime(const NetworkTrace& trace, double start_s, double size_mbit,
                    double rtt_s);

struct StepOutcome {
  PlayerState state;
  ChunkRecord record;
};

// Downloads one chunk: stall = max(0, d - B); the buffer drains by the
// download time, gains one chunk, and is capped at b_max with the overflow
// logged as sleep. Wall time advances by download + sleep.
StepOutcome Step(const PlayerState& state, int rung, const NetworkTrace& trace,
                 const VideoManifest& manifest, const SimConfig& sim);

// Per-session decision pipeline; stateful, one instance per session.
class Policy {
 public:
  struct Decision {
    int rung = 0;
    double q10 = 0.0;
    double q50 = 0.0;
    double q90 = 0.0;
    double adjusted = 0.0;
  };

  virtual ~Policy() = default;
  virtual Decision Decide(const PlayerState& state,
                          const std::vector<ChunkRecord>& history) = 0;
  // Feedback after the decided chunk finished downloading.
  virtual void Observe(const ChunkRecord& record) {}
};

SessionResult RunSession(const NetworkTrace& trace, const VideoManifest& manifest,
                         Policy& policy, const SimConfig& sim, double lambda,
                         double mu, const std::string& controller_id);

// Replays a fixed bitrate plan (controller bypassed).
SessionResult RunPlan(const NetworkTrace& trace, const VideoManifest& manifest,
                      std::span<const int> plan, const SimConfig& sim, double lambda,
                      double mu, const std::string& controller_id);

// Line-oriented session log, one record per line, stable field order.
std::string SerializeSessionLog(const SessionResult& session);
SessionResult ParseSessionLog(const std::string& text);

}  // namespace kairos

#endif  // KAIROS_SIMULATOR_H_
