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

#include "kairos/predictor.h"

#include <algorithm>
#include <cmath>

#include "kairos/error.h"
#include "kairos/rng.h"

namespace kairos {

namespace {

constexpr double kLevelTolerance = 1e-9;

int FindLevel(const std::vector<double>& levels, double q) {
  for (size_t i = 0; i < levels.size(); ++i) {
    if (std::fabs(levels[i] - q) < kLevelTolerance) return static_cast<int>(i);
  }
  return -1;
}

std::vector<double> XavierInit(Rng& rng, size_t fan_in, size_t fan_out) {
  double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<double> values(fan_in * fan_out);
  for (double& v : values) v = rng.Uniform(-bound, bound);
  return values;
}

}  // namespace

int PredictorHyper::MedianIndex() const {
  int idx = FindLevel(quantiles, 0.5);
  if (idx < 0) throw DataError("quantile levels must contain 0.5");
  return idx;
}

int PredictorHyper::LowIndex() const {
  int idx = FindLevel(quantiles, 0.1);
  if (idx < 0) throw DataError("quantile levels must contain 0.1");
  return idx;
}

void PredictorHyper::Validate() const {
  if (k < 1) throw DataError("hyper: k must be >= 1");
  if (eta_s <= 0.0) throw DataError("hyper: eta must be > 0");
  if (heads < 1) throw DataError("hyper: heads must be >= 1");
  if (d_k < 2) throw DataError("hyper: d_k must be >= 2");
  if (latent < 1 || lstm_hidden < 1 || mlp_hidden < 1) {
    throw DataError("hyper: layer widths must be >= 1");
  }
  if (quantiles.size() < 2) throw DataError("hyper: need >= 2 quantile levels");
  for (size_t i = 0; i < quantiles.size(); ++i) {
    if (quantiles[i] <= 0.0 || quantiles[i] >= 1.0) {
      throw DataError("hyper: quantile levels must lie in (0, 1)");
    }
    if (i > 0 && quantiles[i] <= quantiles[i - 1]) {
      throw DataError("hyper: quantile levels must be strictly increasing");
    }
  }
  MedianIndex();
  LowIndex();
  if (theta <= 0.0) throw DataError("hyper: theta must be > 0");
}

double QuantilePrediction::ValueAt(double level) const {
  int idx = FindLevel(levels, level);
  if (idx < 0) {
    throw DataError("prediction is missing quantile level " + std::to_string(level));
  }
  return values_mbps[idx];
}

void QuantilePrediction::Validate() const {
  if (levels.size() != values_mbps.size() || levels.empty()) {
    throw DataError("prediction: levels/values size mismatch");
  }
  for (size_t i = 0; i < values_mbps.size(); ++i) {
    if (!(values_mbps[i] > 0.0) || !std::isfinite(values_mbps[i])) {
      throw NumericError("prediction: values must be positive and finite");
    }
    if (i > 0 && values_mbps[i] < values_mbps[i - 1]) {
      throw NumericError("prediction: quantile values must be nondecreasing");
    }
  }
}

std::string ModelKindName(ModelKind kind) {
  return kind == ModelKind::kMtan ? "mtan" : "lstm";
}

ModelKind ModelKindFromName(const std::string& name) {
  if (name == "mtan") return ModelKind::kMtan;
  if (name == "lstm") return ModelKind::kLstm;
  throw DataError("unknown model kind '" + name + "'");
}

ThroughputModel::ThroughputModel(ModelKind kind, PredictorHyper hyper,
                                 FeatureScales scales)
    : kind_(kind), hyper_(std::move(hyper)), scales_(scales) {
  hyper_.Validate();
  if (scales_.throughput_mbps <= 0.0 || scales_.buffer_s <= 0.0 ||
      scales_.rebuffer_s <= 0.0) {
    throw DataError("feature scales must be positive");
  }
  InitParams(0);
}

void ThroughputModel::InitParams(uint64_t seed) {
  Rng rng(MixSeed(seed, kind_ == ModelKind::kMtan ? 0x6d74616e : 0x6c73746d));
  size_t dk = static_cast<size_t>(hyper_.d_k);
  size_t j = static_cast<size_t>(hyper_.latent);
  size_t hid = static_cast<size_t>(hyper_.lstm_hidden);
  size_t mlp = static_cast<size_t>(hyper_.mlp_hidden);
  size_t m = static_cast<size_t>(hyper_.levels());

  embed_omega_.clear();
  embed_bias_.clear();
  interp_.clear();
  if (kind_ == ModelKind::kMtan) {
    for (int h = 0; h < hyper_.heads; ++h) {
      std::vector<double> omega(dk);
      std::vector<double> bias(dk);
      // Linear term spans the window; sinusoid periods cover ~2..120 s.
      omega[0] = 1.0 / (hyper_.k * hyper_.eta_s);
      bias[0] = 0.0;
      for (size_t d = 1; d < dk; ++d) {
        omega[d] = std::exp(rng.Uniform(std::log(0.05), std::log(3.0)));
        bias[d] = rng.Uniform(0.0, 2.0 * M_PI);
      }
      embed_omega_.push_back(
          MakeParam("embed_omega_" + std::to_string(h), {dk}, std::move(omega)));
      embed_bias_.push_back(
          MakeParam("embed_bias_" + std::to_string(h), {dk}, std::move(bias)));
    }
    std::vector<double> w(dk), v(dk);
    double scale = 1.0 / std::sqrt(static_cast<double>(dk));
    for (size_t d = 0; d < dk; ++d) {
      w[d] = rng.Normal(0.0, scale);
      v[d] = rng.Normal(0.0, scale);
    }
    attn_w_ = MakeParam("attn_w", {dk}, std::move(w));
    attn_v_ = MakeParam("attn_v", {dk}, std::move(v));
    for (int h = 0; h < hyper_.heads; ++h) {
      interp_.push_back(
          MakeParam("interp_" + std::to_string(h), {4, j}, XavierInit(rng, 4, j)));
    }
    glu_w_ = MakeParam("glu_w", {j, j}, XavierInit(rng, j, j));
    glu_b_ = MakeParam("glu_b", {j}, std::vector<double>(j, 0.0));
    ln_gain_ = MakeParam("ln_gain", {j}, std::vector<double>(j, 1.0));
    ln_bias_ = MakeParam("ln_bias", {j}, std::vector<double>(j, 0.0));
  }

  size_t input = kind_ == ModelKind::kMtan ? j : 4;
  lstm_wx_ = MakeParam("lstm_wx", {input, 4 * hid}, XavierInit(rng, input, 4 * hid));
  lstm_wh_ = MakeParam("lstm_wh", {hid, 4 * hid}, XavierInit(rng, hid, 4 * hid));
  std::vector<double> lb(4 * hid, 0.0);
  // Forget gate bias starts open.
  for (size_t i = hid; i < 2 * hid; ++i) lb[i] = 1.0;
  lstm_b_ = MakeParam("lstm_b", {4 * hid}, std::move(lb));
  mlp_w1_ = MakeParam("mlp_w1", {hid, mlp}, XavierInit(rng, hid, mlp));
  mlp_b1_ = MakeParam("mlp_b1", {mlp}, std::vector<double>(mlp, 0.0));
  mlp_w2_ = MakeParam("mlp_w2", {mlp, m}, XavierInit(rng, mlp, m));
  std::vector<double> b2(m, -2.0);
  // Median starts near half the throughput scale so the positive clamp
  // does not zero the initial gradients.
  b2[static_cast<size_t>(hyper_.MedianIndex())] = 0.5;
  mlp_b2_ = MakeParam("mlp_b2", {m}, std::move(b2));
}

std::vector<Param*> ThroughputModel::Params() {
  std::vector<Param*> out;
  if (kind_ == ModelKind::kMtan) {
    for (auto& p : embed_omega_) out.push_back(&p);
    for (auto& p : embed_bias_) out.push_back(&p);
    out.push_back(&attn_w_);
    out.push_back(&attn_v_);
    for (auto& p : interp_) out.push_back(&p);
    out.push_back(&glu_w_);
    out.push_back(&glu_b_);
    out.push_back(&ln_gain_);
    out.push_back(&ln_bias_);
  }
  out.push_back(&lstm_wx_);
  out.push_back(&lstm_wh_);
  out.push_back(&lstm_b_);
  out.push_back(&mlp_w1_);
  out.push_back(&mlp_b1_);
  out.push_back(&mlp_w2_);
  out.push_back(&mlp_b2_);
  return out;
}

std::vector<const Param*> ThroughputModel::Params() const {
  std::vector<const Param*> out;
  for (Param* p : const_cast<ThroughputModel*>(this)->Params()) out.push_back(p);
  return out;
}

Tensor ThroughputModel::ObservationMatrix(Tape& tape, const ObservationWindow& window,
                                          bool oldest_first) const {
  int k = hyper_.k;
  if (window.k() != k) {
    throw DataError("window length " + std::to_string(window.k()) +
                    " does not match model k=" + std::to_string(k));
  }
  std::vector<double> values(static_cast<size_t>(k) * 4);
  for (int row = 0; row < k; ++row) {
    int m = oldest_first ? k - 1 - row : row;
    const auto& f = window.features[static_cast<size_t>(m)];
    values[row * 4 + 0] = f[kFeatThroughput] / scales_.throughput_mbps;
    values[row * 4 + 1] = f[kFeatBuffer] / scales_.buffer_s;
    values[row * 4 + 2] = f[kFeatRebuffer] / scales_.rebuffer_s;
    values[row * 4 + 3] = f[kFeatLatency] / scales_.throughput_mbps;
  }
  return tape.Constant({static_cast<size_t>(k), 4}, std::move(values));
}

Tensor ThroughputModel::TimeEmbedGraph(Tape& tape, const std::vector<double>& times_s,
                                       int head, bool trainable) const {
  if (kind_ != ModelKind::kMtan) throw DataError("time embedding: attention kind only");
  if (head < 0 || head >= hyper_.heads) throw DataError("time embedding: bad head");
  size_t rows = times_s.size();
  size_t dk = static_cast<size_t>(hyper_.d_k);
  auto leaf = [&](const Param& p) {
    return trainable ? tape.Use(const_cast<Param&>(p)) : tape.Frozen(p);
  };
  Tensor t_col = tape.Constant({rows, 1}, times_s);
  Tensor omega = leaf(embed_omega_[static_cast<size_t>(head)]);
  Tensor bias = leaf(embed_bias_[static_cast<size_t>(head)]);
  Tensor phase = AddRowBroadcast(MatMul(t_col, Reshape(omega, {1, dk})), bias);
  Tensor linear = SliceCols(phase, 0, 1);
  Tensor periodic = Sin(SliceCols(phase, 1, dk));
  return ConcatCols({linear, periodic});
}

std::vector<double> ThroughputModel::TimeEmbedValue(double time_s, int head) const {
  Tape tape;
  Tensor row = TimeEmbedGraph(tape, {time_s}, head, false);
  return row.value();
}

Tensor ThroughputModel::EncodeGraph(Tape& tape, const ObservationWindow& window,
                                    bool trainable) const {
  if (kind_ != ModelKind::kMtan) throw DataError("encode: attention kind only");
  int k = hyper_.k;
  size_t dk = static_cast<size_t>(hyper_.d_k);
  size_t kk = static_cast<size_t>(k);
  auto leaf = [&](const Param& p) {
    return trainable ? tape.Use(const_cast<Param&>(p)) : tape.Frozen(p);
  };
  std::vector<double> reference = ReferencePoints(k, hyper_.eta_s);
  Tensor phi = ObservationMatrix(tape, window, /*oldest_first=*/false);
  double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(hyper_.d_k));
  Tensor encoded;
  for (int h = 0; h < hyper_.heads; ++h) {
    Tensor query_embed = TimeEmbedGraph(tape, reference, h, trainable);
    Tensor key_embed = TimeEmbedGraph(tape, window.rel_time_s, h, trainable);
    Tensor q_proj = MatMul(query_embed, Reshape(leaf(attn_w_), {dk, 1}));  // k x 1
    Tensor k_proj = MatMul(key_embed, Reshape(leaf(attn_v_), {dk, 1}));   // k x 1
    Tensor logits = Scale(MatMul(q_proj, Reshape(k_proj, {1, kk})), inv_sqrt_dk);
    Tensor weights = SoftmaxRows(logits);   // queries over keys
    Tensor interpolated = MatMul(weights, phi);  // k x 4
    Tensor head_out = MatMul(interpolated, leaf(interp_[static_cast<size_t>(h)]));
    encoded = h == 0 ? head_out : Add(encoded, head_out);
  }
  return encoded;
}

ThroughputModel::Forward ThroughputModel::Build(Tape& tape,
                                                const ObservationWindow& window,
                                                bool trainable) const {
  window.Validate();
  size_t hid = static_cast<size_t>(hyper_.lstm_hidden);
  size_t m = static_cast<size_t>(hyper_.levels());
  auto leaf = [&](const Param& p) {
    return trainable ? tape.Use(const_cast<Param&>(p)) : tape.Frozen(p);
  };

  Forward out;
  Tensor sequence;  // k rows, oldest first
  if (kind_ == ModelKind::kMtan) {
    Tensor encoded = EncodeGraph(tape, window, trainable);
    out.encoded = encoded;
    Tensor gate = Sigmoid(AddRowBroadcast(MatMul(encoded, leaf(glu_w_)), leaf(glu_b_)));
    Tensor glu = Mul(encoded, gate);
    Tensor skip = Add(glu, encoded);
    Tensor normed = LayerNormRows(skip, leaf(ln_gain_), leaf(ln_bias_));
    // Rows are ordered nearest reference first; the recurrence consumes the
    // oldest reference point first.
    size_t k = static_cast<size_t>(hyper_.k);
    std::vector<Tensor> rows;
    rows.reserve(k);
    for (size_t r = k; r-- > 0;) rows.push_back(SliceRows(normed, r, r + 1));
    Tensor h_t = tape.Constant({1, hid}, std::vector<double>(hid, 0.0));
    Tensor c_t = tape.Constant({1, hid}, std::vector<double>(hid, 0.0));
    Tensor wx = leaf(lstm_wx_);
    Tensor wh = leaf(lstm_wh_);
    Tensor b = leaf(lstm_b_);
    for (const Tensor& x : rows) {
      Tensor gates = AddRowBroadcast(Add(MatMul(x, wx), MatMul(h_t, wh)), b);
      Tensor gi = Sigmoid(SliceCols(gates, 0, hid));
      Tensor gf = Sigmoid(SliceCols(gates, hid, 2 * hid));
      Tensor gg = Tanh(SliceCols(gates, 2 * hid, 3 * hid));
      Tensor go = Sigmoid(SliceCols(gates, 3 * hid, 4 * hid));
      c_t = Add(Mul(gf, c_t), Mul(gi, gg));
      h_t = Mul(go, Tanh(c_t));
    }
    sequence = h_t;
  } else {
    Tensor inputs = ObservationMatrix(tape, window, /*oldest_first=*/true);
    Tensor h_t = tape.Constant({1, hid}, std::vector<double>(hid, 0.0));
    Tensor c_t = tape.Constant({1, hid}, std::vector<double>(hid, 0.0));
    Tensor wx = leaf(lstm_wx_);
    Tensor wh = leaf(lstm_wh_);
    Tensor b = leaf(lstm_b_);
    for (size_t r = 0; r < static_cast<size_t>(hyper_.k); ++r) {
      Tensor x = SliceRows(inputs, r, r + 1);
      Tensor gates = AddRowBroadcast(Add(MatMul(x, wx), MatMul(h_t, wh)), b);
      Tensor gi = Sigmoid(SliceCols(gates, 0, hid));
      Tensor gf = Sigmoid(SliceCols(gates, hid, 2 * hid));
      Tensor gg = Tanh(SliceCols(gates, 2 * hid, 3 * hid));
      Tensor go = Sigmoid(SliceCols(gates, 3 * hid, 4 * hid));
      c_t = Add(Mul(gf, c_t), Mul(gi, gg));
      h_t = Mul(go, Tanh(c_t));
    }
    sequence = h_t;
  }

  Tensor hidden = Tanh(AddRowBroadcast(MatMul(sequence, leaf(mlp_w1_)), leaf(mlp_b1_)));
  Tensor raw = Reshape(AddRowBroadcast(MatMul(hidden, leaf(mlp_w2_)), leaf(mlp_b2_)), {m});

  // Monotone repair: the median is free; the other levels step away from it
  // by softplus offsets, so the outputs can never cross.
  int med = hyper_.MedianIndex();
  std::vector<Tensor> values(m);
  values[static_cast<size_t>(med)] = Element(raw, static_cast<size_t>(med));
  for (int j2 = med + 1; j2 < static_cast<int>(m); ++j2) {
    values[static_cast<size_t>(j2)] =
        Add(values[static_cast<size_t>(j2 - 1)],
            Softplus(Element(raw, static_cast<size_t>(j2))));
  }
  for (int j2 = med - 1; j2 >= 0; --j2) {
    values[static_cast<size_t>(j2)] =
        Sub(values[static_cast<size_t>(j2 + 1)],
            Softplus(Element(raw, static_cast<size_t>(j2))));
  }
  out.values_mbps.resize(m);
  for (size_t j2 = 0; j2 < m; ++j2) {
    Tensor mbps = Scale(values[j2], scales_.throughput_mbps);
    out.values_mbps[j2] =
        AddConst(MaxWithZero(AddConst(mbps, -kPredictionFloorMbps)),
                 kPredictionFloorMbps);
  }
  return out;
}

QuantilePrediction ThroughputModel::Predict(const ObservationWindow& window) const {
  Tape tape;
  Forward fwd = Build(tape, window, /*trainable=*/false);
  QuantilePrediction pred;
  pred.levels = hyper_.quantiles;
  pred.values_mbps.reserve(fwd.values_mbps.size());
  for (const Tensor& t : fwd.values_mbps) pred.values_mbps.push_back(t.Scalar());
  pred.Validate();
  return pred;
}

Tensor QuantileLossGraph(Tape& tape,
                         const std::vector<std::vector<Tensor>>& preds_mbps,
                         std::span<const double> truths_mbps,
                         std::span<const double> levels) {
  if (preds_mbps.empty()) throw DataError("quantile loss: empty batch");
  if (preds_mbps.size() != truths_mbps.size()) {
    throw DataError("quantile loss: batch size mismatch");
  }
  Tensor total = tape.ConstantScalar(0.0);
  for (size_t i = 0; i < preds_mbps.size(); ++i) {
    if (preds_mbps[i].size() != levels.size()) {
      throw DataError("quantile loss: level count mismatch");
    }
    for (size_t q = 0; q < levels.size(); ++q) {
      Tensor diff = AddConst(preds_mbps[i][q], -truths_mbps[i]);  // pred - truth
      Tensor over = MaxWithZero(diff);
      Tensor under = MaxWithZero(Scale(diff, -1.0));
      total = Add(total, Add(Scale(over, levels[q]), Scale(under, 1.0 - levels[q])));
    }
  }
  return Scale(total, 1.0 / static_cast<double>(preds_mbps.size()));
}

Tensor SmoothLossGraph(Tape& tape, const Tensor& encoded,
                       const Tensor& median_pred_mbps,
                       const ObservationWindow& window,
                       const PredictorHyper& hyper) {
  int k = hyper.k;
  Tensor ratio_term = tape.ConstantScalar(0.0);
  double throughput_sum = 0.0;
  for (const auto& f : window.features) throughput_sum += f[kFeatThroughput];
  if (throughput_sum > 0.0) {
    double denom = hyper.theta / static_cast<double>(k) * throughput_sum;
    Tensor ratio = Scale(median_pred_mbps, 1.0 / denom);
    if (ratio.value()[0] > 1.0) ratio_term = ratio;
  }
  Tensor curvature = tape.ConstantScalar(0.0);
  if (k >= 3) {
    if (!encoded.defined()) throw DataError("smooth loss: encoder output required");
    size_t j = encoded.shape()[1];
    for (int n = 2; n < k; ++n) {
      Tensor e_n = SliceRows(encoded, static_cast<size_t>(n), static_cast<size_t>(n) + 1);
      Tensor e_n1 =
          SliceRows(encoded, static_cast<size_t>(n - 1), static_cast<size_t>(n));
      Tensor e_n2 =
          SliceRows(encoded, static_cast<size_t>(n - 2), static_cast<size_t>(n - 1));
      Tensor diff = Sub(e_n, Scale(e_n1, 2.0));
      diff = hyper.literal_second_diff ? Sub(diff, e_n2) : Add(diff, e_n2);
      curvature = Add(curvature, Sum(Square(diff)));
    }
    curvature =
        Scale(curvature, 1.0 / (static_cast<double>(k - 2) * static_cast<double>(j)));
  }
  return Add(Scale(ratio_term, 0.1), curvature);
}

}  // namespace kairos
