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

// Reverse-mode automatic differentiation over dense double tensors.
// A Tape owns the nodes of one forward pass and is rebuilt per pass;
// learnable values live in Param objects that persist across passes.

#ifndef KAIROS_TENSOR_H_
#define KAIROS_TENSOR_H_

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <vector>

namespace kairos {

using Shape = std::vector<size_t>;

size_t NumElements(const Shape& shape);

// Persistent learnable array. Gradients accumulate across Tape::Backward
// calls until ZeroGrad.
struct Param {
  std::string name;
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;

  size_t size() const { return value.size(); }
  void ZeroGrad() { grad.assign(value.size(), 0.0); }
};

Param MakeParam(std::string name, Shape shape, std::vector<double> values);

class Tape;

// Lightweight handle to a tape node.
class Tensor {
 public:
  Tensor() = default;

  bool defined() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  size_t index() const { return index_; }

  const Shape& shape() const;
  const std::vector<double>& value() const;
  const std::vector<double>& grad() const;
  bool requires_grad() const;
  size_t size() const { return value().size(); }
  double Scalar() const;

 private:
  friend class Tape;
  Tensor(Tape* tape, size_t index) : tape_(tape), index_(index) {}

  Tape* tape_ = nullptr;
  size_t index_ = 0;
};

class Tape {
 public:
  struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;  // allocated only when requires_grad
    bool requires_grad = false;
    std::function<void()> backward;  // unset for leaves and constants
  };

  Tensor Constant(Shape shape, std::vector<double> values);
  Tensor ConstantScalar(double value);
  // Learnable leaf: Backward adds into param.grad.
  Tensor Use(Param& param);
  // Read-only leaf for inference on a frozen model.
  Tensor Frozen(const Param& param);

  // Populates gradients of every requires_grad node reachable from `loss`.
  // `loss` must be scalar. Repeated calls accumulate.
  void Backward(const Tensor& loss);

  size_t node_count() const { return nodes_.size(); }

  Node& node(size_t index) { return nodes_[index]; }
  const Node& node(size_t index) const { return nodes_[index]; }

  Tensor Emit(Node node);

 private:
  std::deque<Node> nodes_;
};

// Elementwise; shapes must match.
Tensor Add(const Tensor& a, const Tensor& b);
Tensor Sub(const Tensor& a, const Tensor& b);
Tensor Mul(const Tensor& a, const Tensor& b);

Tensor Scale(const Tensor& a, double factor);
Tensor AddConst(const Tensor& a, double constant);

// {n,m}x{m,p} -> {n,p}; {m}x{m,p} -> {p}; {n,m}x{m} -> {n}.
Tensor MatMul(const Tensor& a, const Tensor& b);

Tensor ConcatCols(const std::vector<Tensor>& parts);
Tensor SliceRows(const Tensor& a, size_t begin, size_t end);
Tensor SliceCols(const Tensor& a, size_t begin, size_t end);
Tensor Element(const Tensor& a, size_t flat_index);  // scalar
Tensor Reshape(const Tensor& a, Shape shape);

Tensor Sum(const Tensor& a);   // scalar
Tensor Mean(const Tensor& a);  // scalar

Tensor MaxWithZero(const Tensor& a);
Tensor Abs(const Tensor& a);
Tensor Exp(const Tensor& a);
Tensor Log(const Tensor& a);
Tensor Sigmoid(const Tensor& a);
Tensor Tanh(const Tensor& a);
Tensor Softplus(const Tensor& a);
Tensor Square(const Tensor& a);
Tensor Sin(const Tensor& a);

// Softmax along the last axis ({m} as one row, {n,m} per row).
Tensor SoftmaxRows(const Tensor& a);

// mat{n,m} + vec{m} broadcast over rows.
Tensor AddRowBroadcast(const Tensor& mat, const Tensor& vec);

// Row-wise layer normalization with learnable gain/shift of width m.
Tensor LayerNormRows(const Tensor& x, const Tensor& gain, const Tensor& bias,
                     double eps = 1e-5);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return Add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return Sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return Mul(a, b); }

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Standard Adam with bias correction; deterministic.
class AdamOptimizer {
 public:
  AdamOptimizer(std::vector<Param*> params, AdamConfig config);

  void Step();
  void ZeroGrad();
  int64_t steps_taken() const { return step_; }

 private:
  std::vector<Param*> params_;
  AdamConfig config_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  int64_t step_ = 0;
};

double GlobalGradNorm(const std::vector<Param*>& params);
// Scales gradients so the global norm is at most max_norm; returns the
// pre-clip norm.
double ClipGradGlobalNorm(const std::vector<Param*>& params, double max_norm);

}  // namespace kairos

#endif  // KAIROS_TENSOR_H_
