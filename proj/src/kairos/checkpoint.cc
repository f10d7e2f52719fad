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

#include "kairos/checkpoint.h"

#include <map>
#include <sstream>

#include "kairos/error.h"
#include "kairos/text_util.h"

namespace kairos {

std::string SerializeCheckpoint(const ThroughputModel& model, uint64_t seed) {
  const PredictorHyper& h = model.hyper();
  const FeatureScales& s = model.scales();
  std::ostringstream out;
  out << kCheckpointMagic << "\n";
  out << "kind " << ModelKindName(model.kind()) << "\n";
  out << "seed " << seed << "\n";
  out << "k " << h.k << "\n";
  out << "eta " << FormatDouble(h.eta_s) << "\n";
  out << "heads " << h.heads << "\n";
  out << "d_k " << h.d_k << "\n";
  out << "latent " << h.latent << "\n";
  out << "lstm_hidden " << h.lstm_hidden << "\n";
  out << "mlp_hidden " << h.mlp_hidden << "\n";
  out << "quantiles";
  for (double q : h.quantiles) out << " " << FormatDouble(q);
  out << "\n";
  out << "theta " << FormatDouble(h.theta) << "\n";
  out << "literal_second_diff " << (h.literal_second_diff ? 1 : 0) << "\n";
  out << "scale_throughput " << FormatDouble(s.throughput_mbps) << "\n";
  out << "scale_buffer " << FormatDouble(s.buffer_s) << "\n";
  out << "scale_rebuffer " << FormatDouble(s.rebuffer_s) << "\n";
  std::vector<const Param*> params = model.Params();
  out << "params " << params.size() << "\n";
  for (const Param* p : params) {
    out << "param " << p->name << " " << p->shape.size();
    for (size_t d : p->shape) out << " " << d;
    out << "\n";
    for (size_t i = 0; i < p->value.size(); ++i) {
      if (i > 0) out << " ";
      out << FormatDouble(p->value[i]);
    }
    out << "\n";
  }
  out << "end\n";
  return out.str();
}

ThroughputModel ParseCheckpoint(const std::string& text) {
  std::vector<std::string> lines = SplitLines(text);
  size_t i = 0;
  auto next = [&]() -> std::vector<std::string> {
    while (i < lines.size()) {
      std::vector<std::string> toks = SplitWhitespace(lines[i]);
      ++i;
      if (!toks.empty()) return toks;
    }
    throw DataError("checkpoint: truncated file");
  };
  if (lines.empty() || Trim(lines[0]) != kCheckpointMagic) {
    throw DataError("checkpoint: missing KAIROS-TP/1 header");
  }
  ++i;
  ModelKind kind = ModelKind::kMtan;
  PredictorHyper hyper;
  FeatureScales scales;
  size_t param_count = 0;
  while (true) {
    std::vector<std::string> toks = next();
    const std::string& key = toks[0];
    std::string where = "checkpoint key '" + key + "'";
    if (key == "kind") {
      kind = ModelKindFromName(toks.at(1));
    } else if (key == "seed") {
      // informational only
    } else if (key == "k") {
      hyper.k = static_cast<int>(ParseLong(toks.at(1), where));
    } else if (key == "eta") {
      hyper.eta_s = ParseDouble(toks.at(1), where);
    } else if (key == "heads") {
      hyper.heads = static_cast<int>(ParseLong(toks.at(1), where));
    } else if (key == "d_k") {
      hyper.d_k = static_cast<int>(ParseLong(toks.at(1), where));
    } else if (key == "latent") {
      hyper.latent = static_cast<int>(ParseLong(toks.at(1), where));
    } else if (key == "lstm_hidden") {
      hyper.lstm_hidden = static_cast<int>(ParseLong(toks.at(1), where));
    } else if (key == "mlp_hidden") {
      hyper.mlp_hidden = static_cast<int>(ParseLong(toks.at(1), where));
    } else if (key == "quantiles") {
      hyper.quantiles.clear();
      for (size_t t = 1; t < toks.size(); ++t) {
        hyper.quantiles.push_back(ParseDouble(toks[t], where));
      }
    } else if (key == "theta") {
      hyper.theta = ParseDouble(toks.at(1), where);
    } else if (key == "literal_second_diff") {
      hyper.literal_second_diff = ParseLong(toks.at(1), where) != 0;
    } else if (key == "scale_throughput") {
      scales.throughput_mbps = ParseDouble(toks.at(1), where);
    } else if (key == "scale_buffer") {
      scales.buffer_s = ParseDouble(toks.at(1), where);
    } else if (key == "scale_rebuffer") {
      scales.rebuffer_s = ParseDouble(toks.at(1), where);
    } else if (key == "params") {
      param_count = static_cast<size_t>(ParseLong(toks.at(1), where));
      break;
    } else {
      throw DataError("checkpoint: unknown key '" + key + "'");
    }
  }

  ThroughputModel model(kind, hyper, scales);
  std::map<std::string, Param*> by_name;
  for (Param* p : model.Params()) by_name[p->name] = p;
  if (by_name.size() != param_count) {
    throw DataError("checkpoint: parameter count mismatch");
  }
  for (size_t n = 0; n < param_count; ++n) {
    std::vector<std::string> head = next();
    if (head[0] != "param" || head.size() < 3) {
      throw DataError("checkpoint: expected param header");
    }
    const std::string& name = head[1];
    auto it = by_name.find(name);
    if (it == by_name.end()) throw DataError("checkpoint: unexpected param '" + name + "'");
    Param* p = it->second;
    size_t rank = static_cast<size_t>(ParseLong(head[2], "param rank"));
    if (head.size() != 3 + rank) throw DataError("checkpoint: bad shape for '" + name + "'");
    Shape shape;
    for (size_t d = 0; d < rank; ++d) {
      shape.push_back(static_cast<size_t>(ParseLong(head[3 + d], "param dim")));
    }
    if (shape != p->shape) throw DataError("checkpoint: shape mismatch for '" + name + "'");
    std::vector<std::string> vals = next();
    if (vals.size() != p->value.size()) {
      throw DataError("checkpoint: value count mismatch for '" + name + "'");
    }
    for (size_t v = 0; v < vals.size(); ++v) {
      p->value[v] = ParseDouble(vals[v], "param '" + name + "'");
    }
  }
  std::vector<std::string> tail = next();
  if (tail[0] != "end") throw DataError("checkpoint: missing end marker");
  return model;
}

void SaveCheckpoint(const std::string& path, const ThroughputModel& model,
                    uint64_t seed) {
  WriteFile(path, SerializeCheckpoint(model, seed));
}

ThroughputModel LoadCheckpoint(const std::string& path) {
  return ParseCheckpoint(ReadFile(path));
}

}  // namespace kairos
