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

#include "kairos/tensor.h"

#include <algorithm>
#include <cmath>

#include "kairos/error.h"

namespace kairos {

namespace {

void CheckFinite(const std::vector<double>& values, const char* op) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string("non-finite result in op '") + op + "'");
    }
  }
}

void CheckSameTape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.tape() != b.tape()) {
    throw NumericError(std::string(op) + ": operands from different tapes");
  }
}

void CheckSameShape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw NumericError(std::string(op) + ": shape mismatch");
  }
}

// (rows, cols) view; a vector is one row.
std::pair<size_t, size_t> Rows2D(const Shape& shape, const char* op) {
  if (shape.size() == 1) return {1, shape[0]};
  if (shape.size() == 2) return {shape[0], shape[1]};
  throw NumericError(std::string(op) + ": expected rank 1 or 2");
}

double StableSoftplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

}  // namespace

size_t NumElements(const Shape& shape) {
  size_t n = 1;
  for (size_t d : shape) n *= d;
  return n;
}

Param MakeParam(std::string name, Shape shape, std::vector<double> values) {
  if (values.size() != NumElements(shape)) {
    throw NumericError("param '" + name + "': value count does not match shape");
  }
  CheckFinite(values, name.c_str());
  Param p;
  p.name = std::move(name);
  p.shape = std::move(shape);
  p.value = std::move(values);
  p.grad.assign(p.value.size(), 0.0);
  return p;
}

const Shape& Tensor::shape() const { return tape_->node(index_).shape; }
const std::vector<double>& Tensor::value() const { return tape_->node(index_).value; }
const std::vector<double>& Tensor::grad() const { return tape_->node(index_).grad; }
bool Tensor::requires_grad() const { return tape_->node(index_).requires_grad; }

double Tensor::Scalar() const {
  const std::vector<double>& v = value();
  if (v.size() != 1) throw NumericError("Scalar() on non-scalar tensor");
  return v[0];
}

Tensor Tape::Emit(Node node) {
  if (node.requires_grad) node.grad.assign(node.value.size(), 0.0);
  nodes_.push_back(std::move(node));
  return Tensor(this, nodes_.size() - 1);
}

Tensor Tape::Constant(Shape shape, std::vector<double> values) {
  if (values.size() != NumElements(shape)) {
    throw NumericError("Constant: value count does not match shape");
  }
  CheckFinite(values, "Constant");
  Node n;
  n.shape = std::move(shape);
  n.value = std::move(values);
  return Emit(std::move(n));
}

Tensor Tape::ConstantScalar(double value) { return Constant({}, {value}); }

Tensor Tape::Use(Param& param) {
  Node n;
  n.shape = param.shape;
  n.value = param.value;
  n.requires_grad = true;
  Tensor out = Emit(std::move(n));
  Node* self = &nodes_.back();
  Param* p = &param;
  self->backward = [self, p]() {
    for (size_t i = 0; i < self->grad.size(); ++i) p->grad[i] += self->grad[i];
  };
  return out;
}

Tensor Tape::Frozen(const Param& param) {
  Node n;
  n.shape = param.shape;
  n.value = param.value;
  return Emit(std::move(n));
}

void Tape::Backward(const Tensor& loss) {
  if (loss.tape() != this) throw NumericError("Backward: loss from another tape");
  Node& top = nodes_[loss.index()];
  if (top.value.size() != 1) throw NumericError("Backward: loss must be scalar");
  if (!top.requires_grad) return;
  top.grad[0] += 1.0;
  for (size_t i = nodes_.size(); i-- > 0;) {
    Node& n = nodes_[i];
    if (n.requires_grad && n.backward) n.backward();
  }
  for (const Node& n : nodes_) {
    if (n.requires_grad) CheckFinite(n.grad, "Backward");
  }
}

namespace {

// Builds a same-shape elementwise node with forward values `out` and a
// backward that maps the output grad to each input grad.
Tensor EmitUnary(const Tensor& a, std::vector<double> out, const char* op,
                 std::function<void(const Tape::Node&, Tape::Node&)> accumulate) {
  CheckFinite(out, op);
  Tape* tape = a.tape();
  Tape::Node n;
  n.shape = a.shape();
  n.value = std::move(out);
  n.requires_grad = a.requires_grad();
  Tensor result = tape->Emit(std::move(n));
  if (result.requires_grad()) {
    Tape::Node* self = &tape->node(result.index());
    Tape::Node* pa = &tape->node(a.index());
    tape->node(result.index()).backward = [self, pa, accumulate]() {
      accumulate(*self, *pa);
    };
  }
  return result;
}

}  // namespace

Tensor Add(const Tensor& a, const Tensor& b) {
  CheckSameTape(a, b, "Add");
  CheckSameShape(a, b, "Add");
  const auto& va = a.value();
  const auto& vb = b.value();
  std::vector<double> out(va.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = va[i] + vb[i];
  CheckFinite(out, "Add");
  Tape* tape = a.tape();
  Tape::Node n;
  n.shape = a.shape();
  n.value = std::move(out);
  n.requires_grad = a.requires_grad() || b.requires_grad();
  Tensor result = tape->Emit(std::move(n));
  if (result.requires_grad()) {
    Tape::Node* self = &tape->node(result.index());
    Tape::Node* pa = &tape->node(a.index());
    Tape::Node* pb = &tape->node(b.index());
    self->backward = [self, pa, pb]() {
      if (pa->requires_grad)
        for (size_t i = 0; i < self->grad.size(); ++i) pa->grad[i] += self->grad[i];
      if (pb->requires_grad)
        for (size_t i = 0; i < self->grad.size(); ++i) pb->grad[i] += self->grad[i];
    };
  }
  return result;
}

Tensor Sub(const Tensor& a, const Tensor& b) {
  CheckSameTape(a, b, "Sub");
  CheckSameShape(a, b, "Sub");
  const auto& va = a.value();
  const auto& vb = b.value();
  std::vector<double> out(va.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = va[i] - vb[i];
  CheckFinite(out, "Sub");
  Tape* tape = a.tape();
  Tape::Node n;
  n.shape = a.shape();
  n.value = std::move(out);
  n.requires_grad = a.requires_grad() || b.requires_grad();
  Tensor result = tape->Emit(std::move(n));
  if (result.requires_grad()) {
    Tape::Node* self = &tape->node(result.index());
    Tape::Node* pa = &tape->node(a.index());
    Tape::Node* pb = &tape->node(b.index());
    self->backward = [self, pa, pb]() {
      if (pa->requires_grad)
        for (size_t i = 0; i < self->grad.size(); ++i) pa->grad[i] += self->grad[i];
      if (pb->requires_grad)
        for (size_t i = 0; i < self->grad.size(); ++i) pb->grad[i] -= self->grad[i];
    };
  }
  return result;
}

Tensor Mul(const Tensor& a, const Tensor& b) {
  CheckSameTape(a, b, "Mul");
  CheckSameShape(a, b, "Mul");
  const auto& va = a.value();
  const auto& vb = b.value();
  std::vector<double> out(va.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = va[i] * vb[i];
  CheckFinite(out, "Mul");
  Tape* tape = a.tape();
  Tape::Node n;
  n.shape = a.shape();
  n.value = std::move(out);
  n.requires_grad = a.requires_grad() || b.requires_grad();
  Tensor result = tape->Emit(std::move(n));
  if (result.requires_grad()) {
    Tape::Node* self = &tape->node(result.index());
    Tape::Node* pa = &tape->node(a.index());
    Tape::Node* pb = &tape->node(b.index());
    self->backward = [self, pa, pb]() {
      if (pa->requires_grad)
        for (size_t i = 0; i < self->grad.size(); ++i)
          pa->grad[i] += self->grad[i] * pb->value[i];
      if (pb->requires_grad)
        for (size_t i = 0; i < self->grad.size(); ++i)
          pb->grad[i] += self->grad[i] * pa->value[i];
    };
  }
  return result;
}

Tensor Scale(const Tensor& a, double factor) {
  const auto& va = a.value();
  std::vector<double> out(va.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = va[i] * factor;
  return EmitUnary(a, std::move(out), "Scale",
                   [factor](const Tape::Node& self, Tape::Node& pa) {
                     for (size_t i = 0; i < self.grad.size(); ++i)
                       pa.grad[i] += self.grad[i] * factor;
                   });
}

Tensor AddConst(const Tensor& a, double constant) {
  const auto& va = a.value();
  std::vector<double> out(va.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = va[i] + constant;
  return EmitUnary(a, std::move(out), "AddConst",
                   [](const Tape::Node& self, Tape::Node& pa) {
                     for (size_t i = 0; i < self.grad.size(); ++i)
                       pa.grad[i] += self.grad[i];
                   });
}

Tensor MatMul(const Tensor& a, const Tensor& b) {
  CheckSameTape(a, b, "MatMul");
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  size_t n, m, p;
  Shape out_shape;
  if (sa.size() == 2 && sb.size() == 2) {
    n = sa[0];
    m = sa[1];
    if (sb[0] != m) throw NumericError("MatMul: inner dimensions disagree");
    p = sb[1];
    out_shape = {n, p};
  } else if (sa.size() == 1 && sb.size() == 2) {
    n = 1;
    m = sa[0];
    if (sb[0] != m) throw NumericError("MatMul: inner dimensions disagree");
    p = sb[1];
    out_shape = {p};
  } else if (sa.size() == 2 && sb.size() == 1) {
    n = sa[0];
    m = sa[1];
    if (sb[0] != m) throw NumericError("MatMul: inner dimensions disagree");
    p = 1;
    out_shape = {n};
  } else {
    throw NumericError("MatMul: unsupported ranks");
  }
  const auto& va = a.value();
  const auto& vb = b.value();
  std::vector<double> out(n * p, 0.0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t kk = 0; kk < m; ++kk) {
      double aik = va[i * m + kk];
      if (aik == 0.0) continue;
      const double* brow = vb.data() + kk * p;
      double* orow = out.data() + i * p;
      for (size_t j = 0; j < p; ++j) orow[j] += aik * brow[j];
    }
  }
  CheckFinite(out, "MatMul");
  Tape* tape = a.tape();
  Tape::Node node;
  node.shape = std::move(out_shape);
  node.value = std::move(out);
  node.requires_grad = a.requires_grad() || b.requires_grad();
  Tensor result = tape->Emit(std::move(node));
  if (result.requires_grad()) {
    Tape::Node* self = &tape->node(result.index());
    Tape::Node* pa = &tape->node(a.index());
    Tape::Node* pb = &tape->node(b.index());
    self->backward = [self, pa, pb, n, m, p]() {
      const std::vector<double>& g = self->grad;
      if (pa->requires_grad) {
        // dA = G * B^T
        for (size_t i = 0; i < n; ++i) {
          for (size_t kk = 0; kk < m; ++kk) {
            double acc = 0.0;
            const double* grow = g.data() + i * p;
            const double* brow = pb->value.data() + kk * p;
            for (size_t j = 0; j < p; ++j) acc += grow[j] * brow[j];
            pa->grad[i * m + kk] += acc;
          }
        }
      }
      if (pb->requires_grad) {
        // dB = A^T * G
        for (size_t kk = 0; kk < m; ++kk) {
          for (size_t i = 0; i < n; ++i) {
            double aik = pa->value[i * m + kk];
            if (aik == 0.0) continue;
            const double* grow = g.data() + i * p;
            double* brow = pb->grad.data() + kk * p;
            for (size_t j = 0; j < p; ++j) brow[j] += aik * grow[j];
          }
        }
      }
    };
  }
  return result;
}

Tensor ConcatCols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw NumericError("ConcatCols: no inputs");
  Tape* tape = parts[0].tape();
  size_t rows = Rows2D(parts[0].shape(), "ConcatCols").first;
  size_t total_cols = 0;
  bool requires = false;
  for (const Tensor& t : parts) {
    CheckSameTape(parts[0], t, "ConcatCols");
    auto [r, c] = Rows2D(t.shape(), "ConcatCols");
    if (r != rows) throw NumericError("ConcatCols: row count mismatch");
    total_cols += c;
    requires = requires || t.requires_grad();
  }
  std::vector<double> out(rows * total_cols);
  size_t col_offset = 0;
  for (const Tensor& t : parts) {
    auto [r, c] = Rows2D(t.shape(), "ConcatCols");
    const auto& v = t.value();
    for (size_t i = 0; i < r; ++i) {
      for (size_t j = 0; j < c; ++j) out[i * total_cols + col_offset + j] = v[i * c + j];
    }
    col_offset += c;
  }
  Tape::Node node;
  node.shape = {rows, total_cols};
  node.value = std::move(out);
  node.requires_grad = requires;
  Tensor result = tape->Emit(std::move(node));
  if (requires) {
    Tape::Node* self = &tape->node(result.index());
    std::vector<Tape::Node*> srcs;
    std::vector<size_t> widths;
    for (const Tensor& t : parts) {
      srcs.push_back(&tape->node(t.index()));
      widths.push_back(Rows2D(t.shape(), "ConcatCols").second);
    }
    self->backward = [self, srcs, widths, rows, total_cols]() {
      size_t offset = 0;
      for (size_t s = 0; s < srcs.size(); ++s) {
        size_t c = widths[s];
        if (srcs[s]->requires_grad) {
          for (size_t i = 0; i < rows; ++i) {
            for (size_t j = 0; j < c; ++j) {
              srcs[s]->grad[i * c + j] += self->grad[i * total_cols + offset + j];
            }
          }
        }
        offset += c;
      }
    };
  }
  return result;
}

Tensor SliceRows(const Tensor& a, size_t begin, size_t end) {
  auto [rows, cols] = Rows2D(a.shape(), "SliceRows");
  if (begin >= end || end > rows) throw NumericError("SliceRows: bad range");
  const auto& v = a.value();
  std::vector<double> out(v.begin() + begin * cols, v.begin() + end * cols);
  Tape* tape = a.tape();
  Tape::Node node;
  node.shape = {end - begin, cols};
  node.value = std::move(out);
  node.requires_grad = a.requires_grad();
  Tensor result = tape->Emit(std::move(node));
  if (result.requires_grad()) {
    Tape::Node* self = &tape->node(result.index());
    Tape::Node* pa = &tape->node(a.index());
    size_t offset = begin * cols;
    self->backward = [self, pa, offset]() {
      for (size_t i = 0; i < self->grad.size(); ++i) pa->grad[offset + i] += self->grad[i];
    };
  }
  return result;
}

Tensor SliceCols(const Tensor& a, size_t begin, size_t end) {
  auto [rows, cols] = Rows2D(a.shape(), "SliceCols");
  if (begin >= end || end > cols) throw NumericError("SliceCols: bad range");
  size_t width = end - begin;
  const auto& v = a.value();
  std::vector<double> out(rows * width);
  for (size_t i = 0; i < rows; ++i) {
    for (size_t j = 0; j < width; ++j) out[i * width + j] = v[i * cols + begin + j];
  }
  Tape* tape = a.tape();
  Tape::Node node;
  node.shape = {rows, width};
  node.value = std::move(out);
  node.requires_grad = a.requires_grad();
  Tensor result = tape->Emit(std::move(node));
  if (result.requires_grad()) {
    Tape::Node* self = &tape->node(result.index());
    Tape::Node* pa = &tape->node(a.index());
    self->backward = [self, pa, rows, cols, begin, width]() {
      for (size_t i = 0; i < rows; ++i) {
        for (size_t j = 0; j < width; ++j) {
          pa->grad[i * cols + begin + j] += self->grad[i * width + j];
        }
      }
    };
  }
  return result;
}

Tensor Element(const Tensor& a, size_t flat_index) {
  if (flat_index >= a.size()) throw NumericError("Element: index out of range");
  Tape* tape = a.tape();
  Tape::Node node;
  node.shape = {};
  node.value = {a.value()[flat_index]};
  node.requires_grad = a.requires_grad();
  Tensor result = tape->Emit(std::move(node));
  if (result.requires_grad()) {
    Tape::Node* self = &tape->node(result.index());
    Tape::Node* pa = &tape->node(a.index());
    self->backward = [self, pa, flat_index]() { pa->grad[flat_index] += self->grad[0]; };
  }
  return result;
}

Tensor Reshape(const Tensor& a, Shape shape) {
  if (NumElements(shape) != a.size()) throw NumericError("Reshape: element count mismatch");
  Tape* tape = a.tape();
  Tape::Node node;
  node.shape = std::move(shape);
  node.value = a.value();
  node.requires_grad = a.requires_grad();
  Tensor result = tape->Emit(std::move(node));
  if (result.requires_grad()) {
    Tape::Node* self = &tape->node(result.index());
    Tape::Node* pa = &tape->node(a.index());
    self->backward = [self, pa]() {
      for (size_t i = 0; i < self->grad.size(); ++i) pa->grad[i] += self->grad[i];
    };
  }
  return result;
}

Tensor Sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.value()) total += v;
  CheckFinite({total}, "Sum");
  Tape* tape = a.tape();
  Tape::Node node;
  node.shape = {};
  node.value = {total};
  node.requires_grad = a.requires_grad();
  Tensor result = tape->Emit(std::move(node));
  if (result.requires_grad()) {
    Tape::Node* self = &tape->node(result.index());
    Tape::Node* pa = &tape->node(a.index());
    self->backward = [self, pa]() {
      for (size_t i = 0; i < pa->grad.size(); ++i) pa->grad[i] += self->grad[0];
    };
  }
  return result;
}

Tensor Mean(const Tensor& a) { return Scale(Sum(a), 1.0 / static_cast<double>(a.size())); }

Tensor MaxWithZero(const Tensor& a) {
  const auto& va = a.value();
  std::vector<double> out(va.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::max(va[i], 0.0);
  return EmitUnary(a, std::move(out), "MaxWithZero",
                   [](const Tape::Node& self, Tape::Node& pa) {
                     for (size_t i = 0; i < self.grad.size(); ++i)
                       if (pa.value[i] > 0.0) pa.grad[i] += self.grad[i];
                   });
}

Tensor Abs(const Tensor& a) {
  const auto& va = a.value();
  std::vector<double> out(va.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::fabs(va[i]);
  return EmitUnary(a, std::move(out), "Abs",
                   [](const Tape::Node& self, Tape::Node& pa) {
                     for (size_t i = 0; i < self.grad.size(); ++i) {
                       double s = pa.value[i] > 0.0 ? 1.0 : (pa.value[i] < 0.0 ? -1.0 : 0.0);
                       pa.grad[i] += self.grad[i] * s;
                     }
                   });
}

Tensor Exp(const Tensor& a) {
  const auto& va = a.value();
  std::vector<double> out(va.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::exp(va[i]);
  return EmitUnary(a, std::move(out), "Exp",
                   [](const Tape::Node& self, Tape::Node& pa) {
                     for (size_t i = 0; i < self.grad.size(); ++i)
                       pa.grad[i] += self.grad[i] * self.value[i];
                   });
}

Tensor Log(const Tensor& a) {
  const auto& va = a.value();
  std::vector<double> out(va.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::log(va[i]);
  return EmitUnary(a, std::move(out), "Log",
                   [](const Tape::Node& self, Tape::Node& pa) {
                     for (size_t i = 0; i < self.grad.size(); ++i)
                       pa.grad[i] += self.grad[i] / pa.value[i];
                   });
}

Tensor Sigmoid(const Tensor& a) {
  const auto& va = a.value();
  std::vector<double> out(va.size());
  for (size_t i = 0; i < out.size(); ++i) {
    double x = va[i];
    out[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                      : std::exp(x) / (1.0 + std::exp(x));
  }
  return EmitUnary(a, std::move(out), "Sigmoid",
                   [](const Tape::Node& self, Tape::Node& pa) {
                     for (size_t i = 0; i < self.grad.size(); ++i) {
                       double y = self.value[i];
                       pa.grad[i] += self.grad[i] * y * (1.0 - y);
                     }
                   });
}

Tensor Tanh(const Tensor& a) {
  const auto& va = a.value();
  std::vector<double> out(va.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(va[i]);
  return EmitUnary(a, std::move(out), "Tanh",
                   [](const Tape::Node& self, Tape::Node& pa) {
                     for (size_t i = 0; i < self.grad.size(); ++i) {
                       double y = self.value[i];
                       pa.grad[i] += self.grad[i] * (1.0 - y * y);
                     }
                   });
}

Tensor Softplus(const Tensor& a) {
  const auto& va = a.value();
  std::vector<double> out(va.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = StableSoftplus(va[i]);
  return EmitUnary(a, std::move(out), "Softplus",
                   [](const Tape::Node& self, Tape::Node& pa) {
                     for (size_t i = 0; i < self.grad.size(); ++i) {
                       double x = pa.value[i];
                       double s = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                                           : std::exp(x) / (1.0 + std::exp(x));
                       pa.grad[i] += self.grad[i] * s;
                     }
                   });
}

Tensor Square(const Tensor& a) {
  const auto& va = a.value();
  std::vector<double> out(va.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = va[i] * va[i];
  return EmitUnary(a, std::move(out), "Square",
                   [](const Tape::Node& self, Tape::Node& pa) {
                     for (size_t i = 0; i < self.grad.size(); ++i)
                       pa.grad[i] += self.grad[i] * 2.0 * pa.value[i];
                   });
}

Tensor Sin(const Tensor& a) {
  const auto& va = a.value();
  std::vector<double> out(va.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::sin(va[i]);
  return EmitUnary(a, std::move(out), "Sin",
                   [](const Tape::Node& self, Tape::Node& pa) {
                     for (size_t i = 0; i < self.grad.size(); ++i)
                       pa.grad[i] += self.grad[i] * std::cos(pa.value[i]);
                   });
}

Tensor SoftmaxRows(const Tensor& a) {
  auto [rows, cols] = Rows2D(a.shape(), "SoftmaxRows");
  const auto& v = a.value();
  std::vector<double> out(v.size());
  for (size_t i = 0; i < rows; ++i) {
    const double* in = v.data() + i * cols;
    double* o = out.data() + i * cols;
    double mx = in[0];
    for (size_t j = 1; j < cols; ++j) mx = std::max(mx, in[j]);
    double total = 0.0;
    for (size_t j = 0; j < cols; ++j) {
      o[j] = std::exp(in[j] - mx);
      total += o[j];
    }
    for (size_t j = 0; j < cols; ++j) o[j] /= total;
  }
  return EmitUnary(a, std::move(out), "SoftmaxRows",
                   [rows, cols](const Tape::Node& self, Tape::Node& pa) {
                     for (size_t i = 0; i < rows; ++i) {
                       const double* y = self.value.data() + i * cols;
                       const double* g = self.grad.data() + i * cols;
                       double dot = 0.0;
                       for (size_t j = 0; j < cols; ++j) dot += g[j] * y[j];
                       double* out_grad = pa.grad.data() + i * cols;
                       for (size_t j = 0; j < cols; ++j)
                         out_grad[j] += (g[j] - dot) * y[j];
                     }
                   });
}

Tensor AddRowBroadcast(const Tensor& mat, const Tensor& vec) {
  CheckSameTape(mat, vec, "AddRowBroadcast");
  auto [rows, cols] = Rows2D(mat.shape(), "AddRowBroadcast");
  if (vec.shape().size() != 1 || vec.shape()[0] != cols) {
    throw NumericError("AddRowBroadcast: vector width mismatch");
  }
  const auto& vm = mat.value();
  const auto& vv = vec.value();
  std::vector<double> out(vm.size());
  for (size_t i = 0; i < rows; ++i) {
    for (size_t j = 0; j < cols; ++j) out[i * cols + j] = vm[i * cols + j] + vv[j];
  }
  CheckFinite(out, "AddRowBroadcast");
  Tape* tape = mat.tape();
  Tape::Node node;
  node.shape = mat.shape();
  node.value = std::move(out);
  node.requires_grad = mat.requires_grad() || vec.requires_grad();
  Tensor result = tape->Emit(std::move(node));
  if (result.requires_grad()) {
    Tape::Node* self = &tape->node(result.index());
    Tape::Node* pm = &tape->node(mat.index());
    Tape::Node* pv = &tape->node(vec.index());
    self->backward = [self, pm, pv, rows, cols]() {
      if (pm->requires_grad) {
        for (size_t i = 0; i < self->grad.size(); ++i) pm->grad[i] += self->grad[i];
      }
      if (pv->requires_grad) {
        for (size_t i = 0; i < rows; ++i) {
          for (size_t j = 0; j < cols; ++j) pv->grad[j] += self->grad[i * cols + j];
        }
      }
    };
  }
  return result;
}

Tensor LayerNormRows(const Tensor& x, const Tensor& gain, const Tensor& bias,
                     double eps) {
  CheckSameTape(x, gain, "LayerNormRows");
  CheckSameTape(x, bias, "LayerNormRows");
  auto [rows, cols] = Rows2D(x.shape(), "LayerNormRows");
  if (gain.shape() != Shape{cols} || bias.shape() != Shape{cols}) {
    throw NumericError("LayerNormRows: gain/bias width mismatch");
  }
  const auto& vx = x.value();
  const auto& vg = gain.value();
  const auto& vb = bias.value();
  std::vector<double> xhat(vx.size());
  std::vector<double> inv_std(rows);
  std::vector<double> out(vx.size());
  for (size_t i = 0; i < rows; ++i) {
    const double* row = vx.data() + i * cols;
    double mu = 0.0;
    for (size_t j = 0; j < cols; ++j) mu += row[j];
    mu /= static_cast<double>(cols);
    double var = 0.0;
    for (size_t j = 0; j < cols; ++j) {
      double d = row[j] - mu;
      var += d * d;
    }
    var /= static_cast<double>(cols);
    double inv = 1.0 / std::sqrt(var + eps);
    inv_std[i] = inv;
    for (size_t j = 0; j < cols; ++j) {
      double xh = (row[j] - mu) * inv;
      xhat[i * cols + j] = xh;
      out[i * cols + j] = vg[j] * xh + vb[j];
    }
  }
  CheckFinite(out, "LayerNormRows");
  Tape* tape = x.tape();
  Tape::Node node;
  node.shape = x.shape();
  node.value = std::move(out);
  node.requires_grad = x.requires_grad() || gain.requires_grad() || bias.requires_grad();
  Tensor result = tape->Emit(std::move(node));
  if (result.requires_grad()) {
    Tape::Node* self = &tape->node(result.index());
    Tape::Node* px = &tape->node(x.index());
    Tape::Node* pg = &tape->node(gain.index());
    Tape::Node* pb = &tape->node(bias.index());
    self->backward = [self, px, pg, pb, rows, cols, xhat, inv_std]() {
      for (size_t i = 0; i < rows; ++i) {
        const double* g = self->grad.data() + i * cols;
        const double* xh = xhat.data() + i * cols;
        if (pg->requires_grad) {
          for (size_t j = 0; j < cols; ++j) pg->grad[j] += g[j] * xh[j];
        }
        if (pb->requires_grad) {
          for (size_t j = 0; j < cols; ++j) pb->grad[j] += g[j];
        }
        if (px->requires_grad) {
          double mean_dxhat = 0.0;
          double mean_dxhat_xhat = 0.0;
          for (size_t j = 0; j < cols; ++j) {
            double dxhat = g[j] * pg->value[j];
            mean_dxhat += dxhat;
            mean_dxhat_xhat += dxhat * xh[j];
          }
          mean_dxhat /= static_cast<double>(cols);
          mean_dxhat_xhat /= static_cast<double>(cols);
          for (size_t j = 0; j < cols; ++j) {
            double dxhat = g[j] * pg->value[j];
            px->grad[i * cols + j] +=
                inv_std[i] * (dxhat - mean_dxhat - xh[j] * mean_dxhat_xhat);
          }
        }
      }
    };
  }
  return result;
}

AdamOptimizer::AdamOptimizer(std::vector<Param*> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (Param* p : params_) {
    m_.emplace_back(p->size(), 0.0);
    v_.emplace_back(p->size(), 0.0);
  }
}

void AdamOptimizer::Step() {
  ++step_;
  double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  for (size_t pi = 0; pi < params_.size(); ++pi) {
    Param& p = *params_[pi];
    for (size_t i = 0; i < p.size(); ++i) {
      double g = p.grad[i];
      m_[pi][i] = config_.beta1 * m_[pi][i] + (1.0 - config_.beta1) * g;
      v_[pi][i] = config_.beta2 * v_[pi][i] + (1.0 - config_.beta2) * g * g;
      double mhat = m_[pi][i] / bc1;
      double vhat = v_[pi][i] / bc2;
      double update = config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
      if (!std::isfinite(update)) {
        throw NumericError("Adam: non-finite update for param '" + p.name + "'");
      }
      p.value[i] -= update;
    }
  }
}

void AdamOptimizer::ZeroGrad() {
  for (Param* p : params_) p->ZeroGrad();
}

double GlobalGradNorm(const std::vector<Param*>& params) {
  double total = 0.0;
  for (const Param* p : params) {
    for (double g : p->grad) total += g * g;
  }
  return std::sqrt(total);
}

double ClipGradGlobalNorm(const std::vector<Param*>& params, double max_norm) {
  double norm = GlobalGradNorm(params);
  if (norm > max_norm && norm > 0.0) {
    double scale = max_norm / norm;
    for (Param* p : params) {
      for (double& g : p->grad) g *= scale;
    }
  }
  return norm;
}

}  // namespace kairos
