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

#include "kairos/simulator.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kairos/error.h"
#include "kairos/harness.h"
#include "kairos/text_util.h"

namespace kairos {

double DownloadTime(const NetworkTrace& trace, double start_s, double size_mbit,
                    double rtt_s) {
  if (!(size_mbit > 0.0)) throw DataError("download: size must be positive");
  if (start_s < 0.0 || rtt_s < 0.0) throw DataError("download: negative time");
  const std::vector<TraceSample>& samples = trace.samples();
  double span = trace.span_s();
  double remaining = size_mbit;
  double elapsed = 0.0;
  double tau = std::fmod(start_s, span);
  if (tau >= span) tau = 0.0;
  while (true) {
    // Segment containing tau.
    size_t lo = 0;
    size_t hi = samples.size();
    while (lo + 1 < hi) {
      size_t mid = (lo + hi) / 2;
      if (samples[mid].time_s <= tau) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    double bw = samples[lo].bandwidth_mbps;
    double seg_end = lo + 1 < samples.size() ? samples[lo + 1].time_s : span;
    double dt = seg_end - tau;
    double capacity = bw * dt;
    if (capacity >= remaining) {
      elapsed += remaining / bw;
      break;
    }
    remaining -= capacity;
    elapsed += dt;
    tau = seg_end >= span ? 0.0 : seg_end;
  }
  return elapsed + rtt_s;
}

StepOutcome Step(const PlayerState& state, int rung, const NetworkTrace& trace,
                 const VideoManifest& manifest, const SimConfig& sim) {
  if (state.next_chunk >= manifest.num_chunks()) {
    throw DataError("step: no chunks remaining");
  }
  if (rung < 0 || rung >= manifest.num_rungs()) throw DataError("step: bad rung");
  double dhat = manifest.chunk_duration_s();
  double size = manifest.ChunkSizeMbit(state.next_chunk, rung);
  double d = DownloadTime(trace, state.wall_s, size, sim.rtt_s);
  double stall = std::max(0.0, d - state.buffer_s);
  double drained = std::max(0.0, state.buffer_s - d);
  double tentative = drained + dhat;
  double sleep = std::max(0.0, tentative - sim.b_max_s);
  double buffer_after = std::min(tentative, sim.b_max_s);

  ChunkRecord rec;
  rec.index = state.next_chunk;
  rec.rung = rung;
  rec.bitrate_mbps = manifest.ladder_mbps()[static_cast<size_t>(rung)];
  rec.size_mbit = size;
  rec.start_s = state.wall_s;
  rec.end_s = state.wall_s + d;
  rec.duration_s = d;
  rec.throughput_mbps = size / (d - sim.rtt_s);
  rec.rebuffer_s = stall;
  rec.buffer_s = buffer_after;
  rec.sleep_s = sleep;

  PlayerState next = state;
  next.buffer_s = buffer_after;
  next.last_rung = rung;
  next.next_chunk = state.next_chunk + 1;
  next.wall_s = state.wall_s + d + sleep;
  return {next, rec};
}

namespace {

SessionResult FinishSession(const NetworkTrace& trace, std::vector<ChunkRecord> records,
                            double lambda, double mu,
                            const std::string& controller_id) {
  SessionResult session;
  session.trace_id = trace.id();
  session.controller_id = controller_id;
  session.records = std::move(records);
  session.qoe = ComputeQoeBreakdown(session.records, lambda, mu);
  return session;
}

}  // namespace

SessionResult RunSession(const NetworkTrace& trace, const VideoManifest& manifest,
                         Policy& policy, const SimConfig& sim, double lambda,
                         double mu, const std::string& controller_id) {
  PlayerState state;
  std::vector<ChunkRecord> records;
  records.reserve(static_cast<size_t>(manifest.num_chunks()));
  for (int chunk = 0; chunk < manifest.num_chunks(); ++chunk) {
    Policy::Decision decision = policy.Decide(state, records);
    StepOutcome out = Step(state, decision.rung, trace, manifest, sim);
    out.record.pred_q10 = decision.q10;
    out.record.pred_q50 = decision.q50;
    out.record.pred_q90 = decision.q90;
    out.record.pred_adjusted = decision.adjusted;
    policy.Observe(out.record);
    records.push_back(out.record);
    state = out.state;
  }
  return FinishSession(trace, std::move(records), lambda, mu, controller_id);
}

SessionResult RunPlan(const NetworkTrace& trace, const VideoManifest& manifest,
                      std::span<const int> plan, const SimConfig& sim, double lambda,
                      double mu, const std::string& controller_id) {
  if (static_cast<int>(plan.size()) != manifest.num_chunks()) {
    throw DataError("plan length must equal num_chunks");
  }
  PlayerState state;
  std::vector<ChunkRecord> records;
  for (int chunk = 0; chunk < manifest.num_chunks(); ++chunk) {
    StepOutcome out = Step(state, plan[static_cast<size_t>(chunk)], trace, manifest, sim);
    records.push_back(out.record);
    state = out.state;
  }
  return FinishSession(trace, std::move(records), lambda, mu, controller_id);
}

std::string SerializeSessionLog(const SessionResult& session) {
  std::ostringstream out;
  out << kSessionLogMagic << "\n";
  out << "trace " << session.trace_id << "\n";
  out << "controller " << session.controller_id << "\n";
  out << "fields index rung bitrate_mbps size_mbit start_s end_s duration_s "
         "throughput_mbps rebuffer_s buffer_s sleep_s pred_q10 pred_q50 pred_q90 "
         "pred_adjusted\n";
  for (const ChunkRecord& r : session.records) {
    out << r.index << " " << r.rung << " " << FormatDouble(r.bitrate_mbps) << " "
        << FormatDouble(r.size_mbit) << " " << FormatDouble(r.start_s) << " "
        << FormatDouble(r.end_s) << " " << FormatDouble(r.duration_s) << " "
        << FormatDouble(r.throughput_mbps) << " " << FormatDouble(r.rebuffer_s) << " "
        << FormatDouble(r.buffer_s) << " " << FormatDouble(r.sleep_s) << " "
        << FormatDouble(r.pred_q10) << " " << FormatDouble(r.pred_q50) << " "
        << FormatDouble(r.pred_q90) << " " << FormatDouble(r.pred_adjusted) << "\n";
  }
  out << "qoe utility=" << FormatDouble(session.qoe.utility)
      << " rebuffer_penalty=" << FormatDouble(session.qoe.rebuffer_penalty)
      << " smoothness_penalty=" << FormatDouble(session.qoe.smoothness_penalty)
      << " average=" << FormatDouble(session.qoe.average) << "\n";
  return out.str();
}

SessionResult ParseSessionLog(const std::string& text) {
  std::vector<std::string> lines = SplitLines(text);
  if (lines.empty() || Trim(lines[0]) != kSessionLogMagic) {
    throw DataError("session log: missing KAIROS-LOG/1 header");
  }
  SessionResult session;
  for (size_t i = 1; i < lines.size(); ++i) {
    std::string where = "log line " + std::to_string(i + 1);
    std::vector<std::string> toks = SplitWhitespace(lines[i]);
    if (toks.empty()) continue;
    if (toks[0] == "trace" && toks.size() >= 2) {
      session.trace_id = toks[1];
    } else if (toks[0] == "controller" && toks.size() >= 2) {
      session.controller_id = toks[1];
    } else if (toks[0] == "fields") {
      continue;
    } else if (toks[0] == "qoe") {
      for (size_t t = 1; t < toks.size(); ++t) {
        size_t eq = toks[t].find('=');
        if (eq == std::string::npos) throw DataError(where + ": bad qoe field");
        std::string key = toks[t].substr(0, eq);
        double value = ParseDouble(toks[t].substr(eq + 1), where);
        if (key == "utility") session.qoe.utility = value;
        else if (key == "rebuffer_penalty") session.qoe.rebuffer_penalty = value;
        else if (key == "smoothness_penalty") session.qoe.smoothness_penalty = value;
        else if (key == "average") session.qoe.average = value;
        else throw DataError(where + ": unknown qoe key '" + key + "'");
      }
    } else {
      if (toks.size() != 15) throw DataError(where + ": expected 15 record fields");
      ChunkRecord r;
      r.index = static_cast<int>(ParseLong(toks[0], where));
      r.rung = static_cast<int>(ParseLong(toks[1], where));
      r.bitrate_mbps = ParseDouble(toks[2], where);
      r.size_mbit = ParseDouble(toks[3], where);
      r.start_s = ParseDouble(toks[4], where);
      r.end_s = ParseDouble(toks[5], where);
      r.duration_s = ParseDouble(toks[6], where);
      r.throughput_mbps = ParseDouble(toks[7], where);
      r.rebuffer_s = ParseDouble(toks[8], where);
      r.buffer_s = ParseDouble(toks[9], where);
      r.sleep_s = ParseDouble(toks[10], where);
      r.pred_q10 = ParseDouble(toks[11], where);
      r.pred_q50 = ParseDouble(toks[12], where);
      r.pred_q90 = ParseDouble(toks[13], where);
      r.pred_adjusted = ParseDouble(toks[14], where);
      session.records.push_back(r);
    }
  }
  return session;
}

}  // namespace kairos
