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

#include "kairos/window.h"

#include <algorithm>
#include <set>
#include <sstream>

#include "kairos/error.h"
#include "kairos/text_util.h"

namespace kairos {

void ObservationWindow::Validate() const {
  if (features.empty()) throw DataError("window: no observations");
  if (rel_time_s.size() != features.size()) {
    throw DataError("window: time count does not match observation count");
  }
  if (rel_time_s[0] != 0.0) throw DataError("window: newest relative time must be 0");
  for (size_t m = 0; m < rel_time_s.size(); ++m) {
    if (!std::isfinite(rel_time_s[m]) || rel_time_s[m] < 0.0) {
      throw DataError("window: relative times must be finite and nonnegative");
    }
    if (m > 0 && rel_time_s[m] < rel_time_s[m - 1]) {
      throw DataError("window: relative times must be nondecreasing");
    }
    for (double f : features[m]) {
      if (!std::isfinite(f) || f < 0.0) {
        throw DataError("window: features must be finite and nonnegative");
      }
    }
  }
}

std::vector<double> ReferencePoints(int k, double eta_s) {
  if (k < 1) throw DataError("reference points: k must be >= 1");
  if (eta_s <= 0.0) throw DataError("reference points: eta must be > 0");
  std::vector<double> points(k);
  for (int n = 1; n <= k; ++n) points[n - 1] = n * eta_s;
  return points;
}

ObservationWindow WindowFromHistory(std::span<const ChunkRecord> history, int k,
                                    double chunk_duration_s) {
  if (history.empty()) throw DataError("window: history is empty");
  if (k < 1) throw DataError("window: k must be >= 1");
  ObservationWindow w;
  w.features.resize(k);
  w.rel_time_s.resize(k);
  double newest_end = history.back().end_s;
  int have = static_cast<int>(history.size());
  for (int m = 0; m < k; ++m) {
    // m counts backwards from the newest record; clamp onto the earliest
    // one once the history runs out.
    int idx = have - 1 - m;
    const ChunkRecord& r = history[static_cast<size_t>(std::max(idx, 0))];
    w.features[m] = {r.throughput_mbps, r.buffer_s, r.rebuffer_s, r.duration_s};
    if (idx >= 0) {
      w.rel_time_s[m] = newest_end - r.end_s;
    } else {
      double oldest_rel = newest_end - history.front().end_s;
      w.rel_time_s[m] = oldest_rel + chunk_duration_s * static_cast<double>(-idx);
    }
  }
  w.Validate();
  return w;
}

std::vector<ObservationWindow> SliceSessionWindows(const SessionResult& session,
                                                   int k,
                                                   double chunk_duration_s) {
  std::vector<ObservationWindow> windows;
  int n = static_cast<int>(session.records.size());
  for (int next = k; next < n; ++next) {
    std::span<const ChunkRecord> history(session.records.data(),
                                         static_cast<size_t>(next));
    ObservationWindow w = WindowFromHistory(history, k, chunk_duration_s);
    w.truth_mbps = session.records[next].throughput_mbps;
    w.trace_id = session.trace_id;
    windows.push_back(std::move(w));
  }
  return windows;
}

std::vector<size_t> WindowDataset::TrainIndices() const {
  std::set<std::string> train(train_traces.begin(), train_traces.end());
  std::vector<size_t> out;
  for (size_t i = 0; i < windows.size(); ++i) {
    if (train.count(windows[i].trace_id)) out.push_back(i);
  }
  return out;
}

std::vector<size_t> WindowDataset::ValIndices() const {
  std::set<std::string> val(val_traces.begin(), val_traces.end());
  std::vector<size_t> out;
  for (size_t i = 0; i < windows.size(); ++i) {
    if (val.count(windows[i].trace_id)) out.push_back(i);
  }
  return out;
}

std::string SerializeDataset(const WindowDataset& dataset) {
  std::ostringstream out;
  out << "KAIROS-DS/1\n";
  out << "k " << dataset.k << "\n";
  out << "eta " << FormatDouble(dataset.eta_s) << "\n";
  out << "split train";
  for (const std::string& t : dataset.train_traces) out << " " << t;
  out << "\n";
  out << "split val";
  for (const std::string& t : dataset.val_traces) out << " " << t;
  out << "\n";
  for (const ObservationWindow& w : dataset.windows) {
    out << "win " << w.trace_id << " " << FormatDouble(w.truth_mbps);
    for (int m = 0; m < w.k(); ++m) {
      out << " " << FormatDouble(w.rel_time_s[m]);
      for (double f : w.features[m]) out << " " << FormatDouble(f);
    }
    out << "\n";
  }
  return out.str();
}

WindowDataset ParseDataset(const std::string& text) {
  std::vector<std::string> lines = SplitLines(text);
  if (lines.empty() || Trim(lines[0]) != "KAIROS-DS/1") {
    throw DataError("dataset: missing KAIROS-DS/1 header");
  }
  WindowDataset ds;
  for (size_t i = 1; i < lines.size(); ++i) {
    std::string where = "dataset line " + std::to_string(i + 1);
    std::vector<std::string> toks = SplitWhitespace(lines[i]);
    if (toks.empty()) continue;
    if (toks[0] == "k" && toks.size() == 2) {
      ds.k = static_cast<int>(ParseLong(toks[1], where));
    } else if (toks[0] == "eta" && toks.size() == 2) {
      ds.eta_s = ParseDouble(toks[1], where);
    } else if (toks[0] == "split" && toks.size() >= 2) {
      std::vector<std::string>* dest = nullptr;
      if (toks[1] == "train") dest = &ds.train_traces;
      else if (toks[1] == "val") dest = &ds.val_traces;
      else throw DataError(where + ": unknown split '" + toks[1] + "'");
      dest->assign(toks.begin() + 2, toks.end());
    } else if (toks[0] == "win") {
      size_t expected = 3 + static_cast<size_t>(ds.k) * 5;
      if (toks.size() != expected) {
        throw DataError(where + ": expected " + std::to_string(expected) + " fields");
      }
      ObservationWindow w;
      w.trace_id = toks[1];
      w.truth_mbps = ParseDouble(toks[2], where);
      size_t pos = 3;
      for (int m = 0; m < ds.k; ++m) {
        w.rel_time_s.push_back(ParseDouble(toks[pos++], where));
        std::array<double, 4> f{};
        for (int d = 0; d < 4; ++d) f[d] = ParseDouble(toks[pos++], where);
        w.features.push_back(f);
      }
      w.Validate();
      ds.windows.push_back(std::move(w));
    } else {
      throw DataError(where + ": unrecognized entry '" + toks[0] + "'");
    }
  }
  return ds;
}

}  // namespace kairos
