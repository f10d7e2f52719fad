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

#ifndef KAIROS_TRACE_IO_H_
#define KAIROS_TRACE_IO_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace kairos {

struct TraceSample {
  double time_s;
  double bandwidth_mbps;

  bool operator==(const TraceSample&) const = default;
};

// Piecewise-constant bandwidth timeline. Immutable after construction.
// Replays cyclically with period `span_s` when a session outlives it.
class NetworkTrace {
 public:
  // Normalizes times so the first sample sits at t=0 and validates
  // invariants (strictly increasing times, bandwidth in (0, 1e4) Mbps).
  NetworkTrace(std::string id, std::vector<TraceSample> samples,
               std::optional<double> declared_span_s = std::nullopt);

  const std::string& id() const { return id_; }
  const std::vector<TraceSample>& samples() const { return samples_; }

  // Declared via "# span=..." or defaulted to last sample time plus the
  // median inter-sample gap.
  double span_s() const { return span_s_; }
  bool span_declared() const { return span_declared_; }

  // Piecewise-constant lookup; t beyond the span wraps around (t mod span).
  double BandwidthAt(double t_s) const;

  NetworkTrace Scaled(double factor) const;

  bool SameTimeline(const NetworkTrace& other) const {
    return samples_ == other.samples_ && span_s_ == other.span_s_;
  }

 private:
  std::string id_;
  std::vector<TraceSample> samples_;
  double span_s_ = 0.0;
  bool span_declared_ = false;
};

// Canonical trace format: one "time_s bandwidth_mbps" pair per line,
// '#' comments allowed, optional "# span=<seconds>" header.
NetworkTrace ParseTrace(const std::string& text, const std::string& id = "");
std::string SerializeTrace(const NetworkTrace& trace);
NetworkTrace LoadTraceFile(const std::string& path);

// Bitrate ladder plus chunk geometry; chunk sizes default to
// bitrate * duration when no explicit size table is present.
class VideoManifest {
 public:
  VideoManifest(std::vector<double> ladder_mbps, double chunk_duration_s,
                int num_chunks,
                std::optional<std::vector<std::vector<double>>> chunk_sizes_mbit =
                    std::nullopt);

  const std::vector<double>& ladder_mbps() const { return ladder_mbps_; }
  double chunk_duration_s() const { return chunk_duration_s_; }
  int num_chunks() const { return num_chunks_; }
  int num_rungs() const { return static_cast<int>(ladder_mbps_.size()); }
  bool has_size_table() const { return chunk_sizes_mbit_.has_value(); }

  double ChunkSizeMbit(int chunk, int rung) const;

  bool operator==(const VideoManifest& other) const {
    return ladder_mbps_ == other.ladder_mbps_ &&
           chunk_duration_s_ == other.chunk_duration_s_ &&
           num_chunks_ == other.num_chunks_ &&
           chunk_sizes_mbit_ == other.chunk_sizes_mbit_;
  }

 private:
  std::vector<double> ladder_mbps_;
  double chunk_duration_s_;
  int num_chunks_;
  std::optional<std::vector<std::vector<double>>> chunk_sizes_mbit_;
};

VideoManifest ParseManifest(const std::string& text);
std::string SerializeManifest(const VideoManifest& manifest);
VideoManifest LoadManifestFile(const std::string& path);

// Markov-modulated synthetic bandwidth generator settings.
struct SyntheticTraceSpec {
  int state_count = 1;
  std::vector<double> mean_mbps;
  double transition_prob = 0.0;
  double dwell_min_s = 1.0;
  double dwell_max_s = 1.0;
  double noise_std_mbps = 0.0;
  double duration_s = 1.0;

  void Validate() const;
};

SyntheticTraceSpec ParseTraceSpec(const std::string& text);
std::string SerializeTraceSpec(const SyntheticTraceSpec& spec);

// Deterministic for a given seed.
NetworkTrace GenerateTrace(const SyntheticTraceSpec& spec, uint64_t seed,
                           const std::string& id);

}  // namespace kairos

#endif  // KAIROS_TRACE_IO_H_
