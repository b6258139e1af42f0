// Copyright 2026 The SPGCL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "spgcl/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spgcl/error.hpp"
#include "spgcl/kernels.hpp"

namespace spgcl::ad {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(op) + ": " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                    std::to_string(b.cols()));
  }
}

void accumulate(Matrix& dst, const Matrix& src, double factor = 1.0) {
  kernels::active().axpy(factor, src.data(), dst.data(), dst.size());
}

Matrix scalar_matrix(double v) { return Matrix(1, 1, v); }

// Row blocks for N x N streamed products: about 4M doubles per block.
// 16M doubles (128 MiB): covers the similarity matrix of ~4k-node graphs.
constexpr std::size_t kSoftmaxCacheEntries = std::size_t{1} << 24;

std::size_t similarity_block_rows(std::size_t n) {
  constexpr std::size_t kBlockEntries = std::size_t{1} << 22;
  return std::max<std::size_t>(1, kBlockEntries / std::max<std::size_t>(n, 1));
}

}  // namespace

// ---------------------------------------------------------------------------
// Tape

Var Tape::constant(Matrix value) { return record("constant", std::move(value), {}, nullptr); }

Var Tape::parameter(Matrix value) {
  Var v = record("parameter", std::move(value), {}, nullptr);
  nodes_[v.index].requires_grad = true;
  return v;
}

double Tape::scalar(Var v) const {
  const Matrix& m = value(v);
  if (m.rows() != 1 || m.cols() != 1) {
    throw Error(ErrorCode::kDimensionMismatch, "node is not a scalar");
  }
  return m(0, 0);
}

Matrix Tape::grad(Var v) const {
  const Node& n = nodes_.at(v.index);
  if (n.grad.empty()) return Matrix(n.value.rows(), n.value.cols());
  return n.grad;
}

Var Tape::record(std::string_view op, Matrix value, std::vector<std::size_t> parents,
                 BackwardFn backward) {
  Node node;
  node.op = std::string(op);
  node.value = std::move(value);
  node.requires_grad = std::any_of(parents.begin(), parents.end(),
                                   [&](std::size_t p) { return nodes_[p].requires_grad; });
  node.parents = std::move(parents);
  node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

Matrix& Tape::grad_slot(std::size_t index) {
  Node& n = nodes_[index];
  if (n.grad.empty() && !n.value.empty()) n.grad = Matrix(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::inject_gradient_fault(std::string op, double factor) {
  fault_op_ = std::move(op);
  fault_factor_ = factor;
}

void Tape::backward(Var loss, double seed) {
  if (nodes_.empty()) throw Error(ErrorCode::kTapeEmpty, "backward on an empty tape");
  if (loss.index >= nodes_.size()) throw Error(ErrorCode::kIndexOutOfRange, "unknown node");
  (void)scalar(loss);
  for (auto& n : nodes_) n.grad = Matrix();
  grad_slot(loss.index)(0, 0) = seed;
  for (std::size_t i = loss.index + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.grad.empty() || !n.requires_grad || !n.backward) continue;
    if (!fault_op_.empty() && n.op == fault_op_) {
      for (double& g : n.grad.values()) g *= fault_factor_;
    }
    n.backward(*this, i);
  }
}

// ---------------------------------------------------------------------------
// Ops

Var matmul(Tape& t, Var a, Var b) {
  Matrix out = spgcl::matmul(t.value(a), t.value(b));
  return t.record("matmul", std::move(out), {a.index, b.index}, [a, b](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad_slot(self);
    const Matrix& av = tp.value_at(a.index);
    const Matrix& bv = tp.value_at(b.index);
    const auto& k = kernels::active();
    if (tp.needs(a.index)) {
      Matrix& ga = tp.grad_slot(a.index);
      k.gemm_nt(g.data(), bv.data(), ga.data(), g.rows(), g.cols(), bv.rows(), true);
    }
    if (tp.needs(b.index)) {
      Matrix& gb = tp.grad_slot(b.index);
      k.gemm_tn(av.data(), g.data(), gb.data(), av.rows(), av.cols(), g.cols(), true);
    }
  });
}

Var spmm(Tape& t, std::shared_ptr<const SparseMatrix> s, Var x) {
  Matrix out = spgcl::spmv(*s, t.value(x));
  return t.record("spmm", std::move(out), {x.index}, [s, x](Tape& tp, std::size_t self) {
    if (!tp.needs(x.index)) return;
    accumulate(tp.grad_slot(x.index), spmv_transposed(*s, tp.grad_slot(self)));
  });
}

Var relu(Tape& t, Var x) {
  Matrix out = t.value(x);
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return t.record("relu", std::move(out), {x.index}, [x](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad_slot(self);
    const Matrix& in = tp.value_at(x.index);
    Matrix& gx = tp.grad_slot(x.index);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (in.values()[i] > 0.0) gx.values()[i] += g.values()[i];
    }
  });
}

Var row_normalize(Tape& t, Var x) {
  const Matrix& in = t.value(x);
  Matrix out(in.rows(), in.cols());
  std::vector<double> norms(in.rows());
  const auto& k = kernels::active();
  for (std::size_t i = 0; i < in.rows(); ++i) {
    const double norm = std::sqrt(k.dot(in.row(i).data(), in.row(i).data(), in.cols()));
    norms[i] = norm;
    if (norm > 0.0) {
      for (std::size_t j = 0; j < in.cols(); ++j) out(i, j) = in(i, j) / norm;
    }
  }
  return t.record("row_normalize", std::move(out), {x.index},
                  [x, norms = std::move(norms)](Tape& tp, std::size_t self) {
                    const Matrix& g = tp.grad_slot(self);
                    const Matrix& y = tp.value_at(self);
                    Matrix& gx = tp.grad_slot(x.index);
                    const auto& kk = kernels::active();
                    for (std::size_t i = 0; i < y.rows(); ++i) {
                      if (norms[i] == 0.0) continue;
                      const double proj = kk.dot(y.row(i).data(), g.row(i).data(), y.cols());
                      for (std::size_t j = 0; j < y.cols(); ++j) {
                        gx(i, j) += (g(i, j) - y(i, j) * proj) / norms[i];
                      }
                    }
                  });
}

Var add(Tape& t, Var a, Var b) {
  require_same_shape(t.value(a), t.value(b), "add");
  Matrix out = t.value(a);
  accumulate(out, t.value(b));
  return t.record("add", std::move(out), {a.index, b.index}, [a, b](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad_slot(self);
    if (tp.needs(a.index)) accumulate(tp.grad_slot(a.index), g);
    if (tp.needs(b.index)) accumulate(tp.grad_slot(b.index), g);
  });
}

Var scale(Tape& t, Var x, double factor) {
  Matrix out = t.value(x);
  for (double& v : out.values()) v *= factor;
  return t.record("scale", std::move(out), {x.index}, [x, factor](Tape& tp, std::size_t self) {
    accumulate(tp.grad_slot(x.index), tp.grad_slot(self), factor);
  });
}

Var dropout(Tape& t, Var x, double rate, SeededRng& rng) {
  if (rate <= 0.0) return x;
  const double keep = 1.0 - rate;
  Matrix mask(t.value(x).rows(), t.value(x).cols());
  for (double& m : mask.values()) m = rng.uniform() < keep ? 1.0 / keep : 0.0;
  Matrix out = t.value(x);
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] *= mask.values()[i];
  return t.record("dropout", std::move(out), {x.index},
                  [x, mask = std::move(mask)](Tape& tp, std::size_t self) {
                    const Matrix& g = tp.grad_slot(self);
                    Matrix& gx = tp.grad_slot(x.index);
                    for (std::size_t i = 0; i < g.size(); ++i) {
                      gx.values()[i] += g.values()[i] * mask.values()[i];
                    }
                  });
}

Var inner(Tape& t, Var x, const Matrix& weights) {
  require_same_shape(t.value(x), weights, "inner");
  const double v = kernels::active().dot(t.value(x).data(), weights.data(), weights.size());
  return t.record("inner", scalar_matrix(v), {x.index}, [x, weights](Tape& tp, std::size_t self) {
    accumulate(tp.grad_slot(x.index), weights, tp.grad_slot(self)(0, 0));
  });
}

Var frobenius_sq(Tape& t, Var x) {
  const Matrix& in = t.value(x);
  const double v = kernels::active().dot(in.data(), in.data(), in.size());
  return t.record("frobenius_sq", scalar_matrix(v), {x.index}, [x](Tape& tp, std::size_t self) {
    accumulate(tp.grad_slot(x.index), tp.value_at(x.index), 2.0 * tp.grad_slot(self)(0, 0));
  });
}

Var cross_entropy(Tape& t, Var logits, std::span<const int> labels,
                  std::span<const NodeId> nodes) {
  if (nodes.empty()) throw Error(ErrorCode::kEmptyTrainSet, "no labeled nodes for the loss");
  const Matrix& z = t.value(logits);
  if (labels.size() != z.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "labels do not match logits rows");
  }
  double total = 0.0;
  for (NodeId v : nodes) {
    const int y = labels[v];
    if (v >= z.rows() || y < 0 || static_cast<std::size_t>(y) >= z.cols()) {
      throw Error(ErrorCode::kIndexOutOfRange, "invalid labeled node " + std::to_string(v));
    }
    const auto row = z.row(v);
    const double mx = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double x : row) s += std::exp(x - mx);
    total += (mx + std::log(s)) - row[static_cast<std::size_t>(y)];
  }
  const double count = static_cast<double>(nodes.size());
  std::vector<NodeId> node_copy(nodes.begin(), nodes.end());
  std::vector<int> label_copy(labels.begin(), labels.end());
  return t.record(
      "cross_entropy", scalar_matrix(total / count), {logits.index},
      [logits, node_copy = std::move(node_copy), label_copy = std::move(label_copy), count](
          Tape& tp, std::size_t self) {
        const double g = tp.grad_slot(self)(0, 0) / count;
        const Matrix& zz = tp.value_at(logits.index);
        Matrix& gz = tp.grad_slot(logits.index);
        for (NodeId v : node_copy) {
          const auto row = zz.row(v);
          const double mx = *std::max_element(row.begin(), row.end());
          double s = 0.0;
          for (double x : row) s += std::exp(x - mx);
          for (std::size_t c = 0; c < row.size(); ++c) {
            gz(v, c) += g * std::exp(row[c] - mx) / s;
          }
          gz(v, static_cast<std::size_t>(label_copy[v])) -= g;
        }
      });
}

Var info_nce(Tape& t, Var anchors, Var candidates, double tau) {
  const Matrix& a = t.value(anchors);
  const Matrix& c = t.value(candidates);
  require_same_shape(a, c, "info_nce");
  if (!(tau > 0.0)) throw Error(ErrorCode::kInvalidConfig, "temperature must be positive");
  const std::size_t n = a.rows();
  const std::size_t dim = a.cols();
  const auto& k = kernels::active();
  const std::size_t block = similarity_block_rows(n);
  const double inv_tau = 1.0 / tau;

  // Unnormalized softmax rows exp(z - max) are kept for the backward pass
  // when they fit; otherwise backward recomputes them block by block.
  auto lse = std::make_shared<std::vector<double>>(n);
  auto row_sum = std::make_shared<std::vector<double>>(n);
  auto cache = std::make_shared<Matrix>();
  if (n * n <= kSoftmaxCacheEntries) *cache = Matrix(n, n);
  double total = 0.0;
  Matrix sims;
  for (std::size_t begin = 0; begin < n; begin += block) {
    const std::size_t end = std::min(n, begin + block);
    sims = Matrix(end - begin, n);
    k.gemm_nt(a.data() + begin * dim, c.data(), sims.data(), end - begin, dim, n, false);
    for (std::size_t i = begin; i < end; ++i) {
      const auto row = sims.row(i - begin);
      const double positive = row[i] * inv_tau;
      const double mx = *std::max_element(row.begin(), row.end()) * inv_tau;
      double* out = cache->empty() ? row.data() : cache->row(i).data();
      const double acc = k.exp_shift(row.data(), inv_tau, mx, out, n);
      (*row_sum)[i] = acc;
      (*lse)[i] = mx + std::log(acc);
      total += (*lse)[i] - positive;
    }
  }
  const double value = n == 0 ? 0.0 : total / static_cast<double>(n);

  return t.record(
      "info_nce", scalar_matrix(value), {anchors.index, candidates.index},
      [anchors, candidates, inv_tau, lse, row_sum, cache, block](Tape& tp, std::size_t self) {
        const Matrix& av = tp.value_at(anchors.index);
        const Matrix& cv = tp.value_at(candidates.index);
        const std::size_t nn = av.rows();
        const std::size_t d = av.cols();
        const double g = tp.grad_slot(self)(0, 0) * inv_tau / static_cast<double>(nn);
        const auto& kk = kernels::active();
        const bool need_a = tp.needs(anchors.index);
        const bool need_c = tp.needs(candidates.index);
        Matrix coeff;
        for (std::size_t begin = 0; begin < nn; begin += block) {
          const std::size_t end = std::min(nn, begin + block);
          coeff = Matrix(end - begin, nn);
          if (cache->empty()) {
            kk.gemm_nt(av.data() + begin * d, cv.data(), coeff.data(), end - begin, d, nn, false);
          }
          for (std::size_t i = begin; i < end; ++i) {
            auto row = coeff.row(i - begin);
            if (cache->empty()) {
              kk.exp_shift(row.data(), inv_tau, (*lse)[i], row.data(), nn);
              for (double& x : row) x *= g;
            } else {
              const double scale = g / (*row_sum)[i];
              const auto e = cache->row(i);
              for (std::size_t j = 0; j < nn; ++j) row[j] = e[j] * scale;
            }
            row[i] -= g;
          }
          if (need_a) {
            Matrix& ga = tp.grad_slot(anchors.index);
            kk.gemm_nn(coeff.data(), cv.data(), ga.data() + begin * d, end - begin, nn, d, true);
          }
          if (need_c) {
            Matrix& gc = tp.grad_slot(candidates.index);
            kk.gemm_tn(coeff.data(), av.data() + begin * d, gc.data(), end - begin, nn, d, true);
          }
        }
      });
}

Var gram_gap(Tape& t, Var a, Var b) {
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  require_same_shape(av, bv, "gram_gap");
  const Matrix ga = matmul_tn(av, av);
  const Matrix gb = matmul_tn(bv, bv);
  const Matrix cross = matmul_tn(av, bv);
  const auto& k = kernels::active();
  const double saa = k.dot(ga.data(), ga.data(), ga.size());
  const double sbb = k.dot(gb.data(), gb.data(), gb.size());
  const double sab = k.dot(cross.data(), cross.data(), cross.size());
  const double value = (saa + sbb) - 2.0 * sab;

  return t.record("gram_gap", scalar_matrix(value), {a.index, b.index},
                  [a, b, ga, gb, cross](Tape& tp, std::size_t self) {
                    const double g = 4.0 * tp.grad_slot(self)(0, 0);
                    const Matrix& x = tp.value_at(a.index);
                    const Matrix& y = tp.value_at(b.index);
                    if (tp.needs(a.index)) {
                      // d/dA = 4 (A Ga - B M^T), M = A^T B
                      Matrix d = spgcl::matmul(x, ga);
                      accumulate(d, matmul_nt(y, cross), -1.0);
                      accumulate(tp.grad_slot(a.index), d, g);
                    }
                    if (tp.needs(b.index)) {
                      // d/dB = 4 (B Gb - A M)
                      Matrix d = spgcl::matmul(y, gb);
                      accumulate(d, spgcl::matmul(x, cross), -1.0);
                      accumulate(tp.grad_slot(b.index), d, g);
                    }
                  });
}

}  // namespace spgcl::ad
