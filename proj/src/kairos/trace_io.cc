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

#include "kairos/trace_io.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "kairos/error.h"
#include "kairos/rng.h"
#include "kairos/text_util.h"

namespace kairos {

namespace {

constexpr double kMaxBandwidthMbps = 1e4;
constexpr char kSpanPrefix[] = "span=";

double DefaultSpan(const std::vector<TraceSample>& samples) {
  double last = samples.back().time_s;
  if (samples.size() < 2) return last + 1.0;
  std::vector<double> gaps;
  gaps.reserve(samples.size() - 1);
  for (size_t i = 1; i < samples.size(); ++i) {
    gaps.push_back(samples[i].time_s - samples[i - 1].time_s);
  }
  std::sort(gaps.begin(), gaps.end());
  size_t n = gaps.size();
  double median = (n % 2 == 1) ? gaps[n / 2] : 0.5 * (gaps[n / 2 - 1] + gaps[n / 2]);
  return last + median;
}

}  // namespace

NetworkTrace::NetworkTrace(std::string id, std::vector<TraceSample> samples,
                           std::optional<double> declared_span_s)
    : id_(std::move(id)), samples_(std::move(samples)) {
  if (samples_.empty()) throw DataError("trace '" + id_ + "' has no samples");
  double offset = samples_.front().time_s;
  for (auto& s : samples_) s.time_s -= offset;
  double prev = -1.0;
  for (size_t i = 0; i < samples_.size(); ++i) {
    const TraceSample& s = samples_[i];
    if (!std::isfinite(s.time_s) || !std::isfinite(s.bandwidth_mbps)) {
      throw DataError("trace '" + id_ + "': non-finite sample " + std::to_string(i));
    }
    if (s.time_s <= prev) {
      throw DataError("trace '" + id_ + "': non-increasing time at sample " +
                      std::to_string(i));
    }
    if (s.bandwidth_mbps <= 0.0 || s.bandwidth_mbps >= kMaxBandwidthMbps) {
      throw DataError("trace '" + id_ + "': bandwidth out of range at sample " +
                      std::to_string(i));
    }
    prev = s.time_s;
  }
  if (declared_span_s.has_value()) {
    span_s_ = *declared_span_s;
    span_declared_ = true;
    if (!std::isfinite(span_s_) || span_s_ <= samples_.back().time_s) {
      throw DataError("trace '" + id_ + "': span must exceed last sample time");
    }
  } else {
    span_s_ = DefaultSpan(samples_);
  }
}

double NetworkTrace::BandwidthAt(double t_s) const {
  if (t_s < 0.0) throw DataError("BandwidthAt: negative time");
  double tau = std::fmod(t_s, span_s_);
  // fmod can return span_s_ when t_s is a hair below a multiple of span.
  if (tau >= span_s_) tau = 0.0;
  size_t lo = 0;
  size_t hi = samples_.size();
  while (lo + 1 < hi) {
    size_t mid = (lo + hi) / 2;
    if (samples_[mid].time_s <= tau) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return samples_[lo].bandwidth_mbps;
}

NetworkTrace NetworkTrace::Scaled(double factor) const {
  std::vector<TraceSample> scaled = samples_;
  for (auto& s : scaled) s.bandwidth_mbps *= factor;
  return NetworkTrace(id_ + "-x" + FormatDouble(factor), std::move(scaled), span_s_);
}

NetworkTrace ParseTrace(const std::string& text, const std::string& id) {
  std::vector<TraceSample> samples;
  std::optional<double> span;
  std::vector<std::string> lines = SplitLines(text);
  for (size_t i = 0; i < lines.size(); ++i) {
    std::string where = "line " + std::to_string(i + 1);
    std::string line = Trim(lines[i]);
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = Trim(line.substr(1));
      if (body.rfind(kSpanPrefix, 0) == 0) {
        span = ParseDouble(Trim(body.substr(sizeof(kSpanPrefix) - 1)), where);
      }
      continue;
    }
    std::vector<std::string> fields = SplitWhitespace(line);
    if (fields.size() != 2) {
      throw DataError("trace " + where + ": expected 'time_s bandwidth_mbps', got '" +
                      line + "'");
    }
    double t = ParseDouble(fields[0], where);
    double bw = ParseDouble(fields[1], where);
    if (!samples.empty() && t <= samples.back().time_s) {
      throw DataError("trace " + where + ": non-increasing time");
    }
    if (bw <= 0.0) {
      throw DataError("trace " + where + ": non-positive bandwidth");
    }
    samples.push_back({t, bw});
  }
  if (samples.empty()) throw DataError("trace has no samples");
  // Span was declared against raw times; renormalize to the shifted origin.
  if (span.has_value()) *span -= samples.front().time_s;
  return NetworkTrace(id, std::move(samples), span);
}

std::string SerializeTrace(const NetworkTrace& trace) {
  std::ostringstream out;
  out << "# kairos-trace\n";
  out << "# span=" << FormatDouble(trace.span_s()) << "\n";
  for (const TraceSample& s : trace.samples()) {
    out << FormatDouble(s.time_s) << " " << FormatDouble(s.bandwidth_mbps) << "\n";
  }
  return out.str();
}

NetworkTrace LoadTraceFile(const std::string& path) {
  std::string id = std::filesystem::path(path).stem().string();
  return ParseTrace(ReadFile(path), id);
}

VideoManifest::VideoManifest(
    std::vector<double> ladder_mbps, double chunk_duration_s, int num_chunks,
    std::optional<std::vector<std::vector<double>>> chunk_sizes_mbit)
    : ladder_mbps_(std::move(ladder_mbps)),
      chunk_duration_s_(chunk_duration_s),
      num_chunks_(num_chunks),
      chunk_sizes_mbit_(std::move(chunk_sizes_mbit)) {
  if (ladder_mbps_.size() < 2) throw DataError("manifest: ladder needs >= 2 rungs");
  for (size_t i = 0; i < ladder_mbps_.size(); ++i) {
    if (ladder_mbps_[i] <= 0.0 || !std::isfinite(ladder_mbps_[i])) {
      throw DataError("manifest: ladder bitrates must be positive");
    }
    if (i > 0 && ladder_mbps_[i] <= ladder_mbps_[i - 1]) {
      throw DataError("manifest: ladder must be strictly increasing");
    }
  }
  if (chunk_duration_s_ <= 0.0) throw DataError("manifest: chunk duration must be > 0");
  if (num_chunks_ < 2) throw DataError("manifest: need >= 2 chunks");
  if (chunk_sizes_mbit_.has_value()) {
    if (static_cast<int>(chunk_sizes_mbit_->size()) != num_chunks_) {
      throw DataError("manifest: size table must have num_chunks rows");
    }
    for (const auto& row : *chunk_sizes_mbit_) {
      if (row.size() != ladder_mbps_.size()) {
        throw DataError("manifest: size table row width must match ladder");
      }
      for (double v : row) {
        if (v <= 0.0 || !std::isfinite(v)) {
          throw DataError("manifest: chunk sizes must be positive");
        }
      }
    }
  }
}

double VideoManifest::ChunkSizeMbit(int chunk, int rung) const {
  if (chunk < 0 || chunk >= num_chunks_) throw DataError("chunk index out of range");
  if (rung < 0 || rung >= num_rungs()) throw DataError("rung index out of range");
  if (chunk_sizes_mbit_.has_value()) return (*chunk_sizes_mbit_)[chunk][rung];
  return ladder_mbps_[rung] * chunk_duration_s_;
}

VideoManifest ParseManifest(const std::string& text) {
  std::vector<double> ladder;
  double duration = 0.0;
  int num_chunks = 0;
  std::optional<std::vector<std::vector<double>>> table;
  std::vector<std::string> lines = SplitLines(text);
  size_t i = 0;
  auto next_content_line = [&](size_t& idx) -> std::optional<std::string> {
    while (idx < lines.size()) {
      std::string line = Trim(lines[idx]);
      ++idx;
      if (line.empty() || line[0] == '#') continue;
      return line;
    }
    return std::nullopt;
  };
  while (true) {
    auto line = next_content_line(i);
    if (!line.has_value()) break;
    size_t colon = line->find(':');
    if (colon == std::string::npos) {
      throw DataError("manifest: expected 'key: value', got '" + *line + "'");
    }
    std::string key = Trim(line->substr(0, colon));
    std::string value = Trim(line->substr(colon + 1));
    if (key == "ladder_mbps") {
      for (const std::string& tok : SplitWhitespace(value)) {
        ladder.push_back(ParseDouble(tok, "ladder_mbps"));
      }
    } else if (key == "chunk_duration_s") {
      duration = ParseDouble(value, "chunk_duration_s");
    } else if (key == "num_chunks") {
      num_chunks = static_cast<int>(ParseLong(value, "num_chunks"));
    } else if (key == "chunk_sizes_mbit") {
      if (num_chunks <= 0 || ladder.empty()) {
        throw DataError("manifest: chunk_sizes_mbit must come after ladder and num_chunks");
      }
      std::vector<std::vector<double>> rows;
      for (int r = 0; r < num_chunks; ++r) {
        auto row_line = next_content_line(i);
        if (!row_line.has_value()) {
          throw DataError("manifest: size table truncated at row " + std::to_string(r));
        }
        std::vector<double> row;
        for (const std::string& tok : SplitWhitespace(*row_line)) {
          row.push_back(ParseDouble(tok, "size table row " + std::to_string(r)));
        }
        rows.push_back(std::move(row));
      }
      table = std::move(rows);
    } else {
      throw DataError("manifest: unknown key '" + key + "'");
    }
  }
  return VideoManifest(std::move(ladder), duration, num_chunks, std::move(table));
}

std::string SerializeManifest(const VideoManifest& manifest) {
  std::ostringstream out;
  out << "# kairos-manifest\n";
  out << "ladder_mbps:";
  for (double r : manifest.ladder_mbps()) out << " " << FormatDouble(r);
  out << "\n";
  out << "chunk_duration_s: " << FormatDouble(manifest.chunk_duration_s()) << "\n";
  out << "num_chunks: " << manifest.num_chunks() << "\n";
  if (manifest.has_size_table()) {
    out << "chunk_sizes_mbit:\n";
    for (int c = 0; c < manifest.num_chunks(); ++c) {
      for (int l = 0; l < manifest.num_rungs(); ++l) {
        if (l > 0) out << " ";
        out << FormatDouble(manifest.ChunkSizeMbit(c, l));
      }
      out << "\n";
    }
  }
  return out.str();
}

VideoManifest LoadManifestFile(const std::string& path) {
  return ParseManifest(ReadFile(path));
}

void SyntheticTraceSpec::Validate() const {
  if (state_count < 1) throw DataError("trace spec: state_count must be >= 1");
  if (static_cast<int>(mean_mbps.size()) != state_count) {
    throw DataError("trace spec: means must list one value per state");
  }
  for (double m : mean_mbps) {
    if (m <= 0.0 || !std::isfinite(m)) throw DataError("trace spec: means must be > 0");
  }
  if (transition_prob < 0.0 || transition_prob > 1.0) {
    throw DataError("trace spec: transition_prob must be in [0, 1]");
  }
  if (dwell_min_s <= 0.0 || dwell_max_s < dwell_min_s) {
    throw DataError("trace spec: dwell bounds must satisfy 0 < min <= max");
  }
  if (noise_std_mbps < 0.0) throw DataError("trace spec: noise std must be >= 0");
  if (duration_s <= 0.0) throw DataError("trace spec: duration must be > 0");
}

SyntheticTraceSpec ParseTraceSpec(const std::string& text) {
  SyntheticTraceSpec spec;
  for (const std::string& raw : SplitLines(text)) {
    std::string line = Trim(raw);
    if (line.empty() || line[0] == '#') continue;
    size_t colon = line.find(':');
    if (colon == std::string::npos) {
      throw DataError("trace spec: expected 'key: value', got '" + line + "'");
    }
    std::string key = Trim(line.substr(0, colon));
    std::string value = Trim(line.substr(colon + 1));
    if (key == "states") {
      spec.state_count = static_cast<int>(ParseLong(value, "states"));
    } else if (key == "means_mbps") {
      spec.mean_mbps.clear();
      for (const std::string& tok : SplitWhitespace(value)) {
        spec.mean_mbps.push_back(ParseDouble(tok, "means_mbps"));
      }
    } else if (key == "transition_prob") {
      spec.transition_prob = ParseDouble(value, "transition_prob");
    } else if (key == "dwell_s") {
      std::vector<std::string> toks = SplitWhitespace(value);
      if (toks.size() != 2) throw DataError("trace spec: dwell_s wants 'min max'");
      spec.dwell_min_s = ParseDouble(toks[0], "dwell_s");
      spec.dwell_max_s = ParseDouble(toks[1], "dwell_s");
    } else if (key == "noise_std_mbps") {
      spec.noise_std_mbps = ParseDouble(value, "noise_std_mbps");
    } else if (key == "duration_s") {
      spec.duration_s = ParseDouble(value, "duration_s");
    } else {
      throw DataError("trace spec: unknown key '" + key + "'");
    }
  }
  spec.Validate();
  return spec;
}

std::string SerializeTraceSpec(const SyntheticTraceSpec& spec) {
  std::ostringstream out;
  out << "# kairos-trace-spec\n";
  out << "states: " << spec.state_count << "\n";
  out << "means_mbps:";
  for (double m : spec.mean_mbps) out << " " << FormatDouble(m);
  out << "\n";
  out << "transition_prob: " << FormatDouble(spec.transition_prob) << "\n";
  out << "dwell_s: " << FormatDouble(spec.dwell_min_s) << " "
      << FormatDouble(spec.dwell_max_s) << "\n";
  out << "noise_std_mbps: " << FormatDouble(spec.noise_std_mbps) << "\n";
  out << "duration_s: " << FormatDouble(spec.duration_s) << "\n";
  return out.str();
}

NetworkTrace GenerateTrace(const SyntheticTraceSpec& spec, uint64_t seed,
                           const std::string& id) {
  spec.Validate();
  Rng rng(seed);
  int state = rng.UniformInt(0, spec.state_count - 1);
  std::vector<TraceSample> samples;
  double t = 0.0;
  while (t < spec.duration_s) {
    double bw = spec.mean_mbps[state];
    if (spec.noise_std_mbps > 0.0) bw += rng.Normal(0.0, spec.noise_std_mbps);
    bw = std::clamp(bw, 0.01, kMaxBandwidthMbps - 1.0);
    samples.push_back({t, bw});
    t += rng.Uniform(spec.dwell_min_s, spec.dwell_max_s);
    if (spec.state_count > 1 && rng.Uniform() < spec.transition_prob) {
      int next = rng.UniformInt(0, spec.state_count - 2);
      if (next >= state) ++next;
      state = next;
    }
  }
  return NetworkTrace(id, std::move(samples), spec.duration_s);
}

}  // namespace kairos
