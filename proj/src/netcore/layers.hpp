// Copyright 2026 The Measex Authors.
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

#ifndef MEASEX_NETCORE_LAYERS_HPP_
#define MEASEX_NETCORE_LAYERS_HPP_

#include <cstddef>
#include <vector>

#include "netcore/tensor.hpp"

namespace measex {

// Layers keep parameters only; per-call activations live in caller-owned
// context structs, so a loaded model can serve threads concurrently and
// backward always sees exactly the forward it belongs to.

// ---------------------------------------------------------------------------
// Linear: y = W^T x + b, optionally ReLU-clamped. W is [d_in x d_out].

struct LinearParams {
  ParamTensor w;  // d_in x d_out
  ParamTensor b;  // d_out

  LinearParams() = default;
  LinearParams(const std::string& prefix, std::size_t d_in, std::size_t d_out);
  void init(Rng& rng);
  std::size_t d_in() const { return w.shape[0]; }
  std::size_t d_out() const { return w.shape[1]; }
  void collect(std::vector<ParamTensor*>& out) { out.push_back(&w); out.push_back(&b); }
};

struct LinearCtx {
  Matrix x;    // n x d_in
  Matrix pre;  // n x d_out, pre-activation (kept only when relu)
};

Matrix linear_forward(const LinearParams& p, const Matrix& x, bool relu,
                      LinearCtx* ctx);
// Accumulates dW, db; returns dx. ReLU subgradient at 0 is 0.
Matrix linear_backward(LinearParams& p, const LinearCtx& ctx, const Matrix& dy,
                       bool relu);

// ---------------------------------------------------------------------------
// Embedding lookup.

struct EmbeddingParams {
  ParamTensor table;  // vocab x dim

  EmbeddingParams() = default;
  EmbeddingParams(const std::string& name, std::size_t vocab, std::size_t dim);
  void init(Rng& rng);
  std::size_t dim() const { return table.shape[1]; }
  void collect(std::vector<ParamTensor*>& out) { out.push_back(&table); }
};

Matrix embedding_forward(const EmbeddingParams& p, const std::vector<int>& ids);
void embedding_backward(EmbeddingParams& p, const std::vector<int>& ids,
                        const Matrix& dy);

// ---------------------------------------------------------------------------
// LSTM. Gates share one fused weight matrix over [x; h], laid out [i f g o].
// Forget-gate bias starts at 1.0.

struct LstmParams {
  ParamTensor w;  // (input_dim + hidden) x 4*hidden
  ParamTensor b;  // 4*hidden

  LstmParams() = default;
  LstmParams(const std::string& prefix, std::size_t input_dim, std::size_t hidden);
  void init(Rng& rng);
  std::size_t input_dim() const { return w.shape[0] - hidden(); }
  std::size_t hidden() const { return w.shape[1] / 4; }
  void collect(std::vector<ParamTensor*>& out) { out.push_back(&w); out.push_back(&b); }
};

struct LstmCtx {
  Matrix z;      // n x (input+hidden), the concatenated cell inputs
  Matrix gates;  // n x 4H, post-activation i f g o
  Matrix c;      // n x H
  Matrix tanh_c; // n x H
};

// Runs the recurrence over the sequence; reverse=true scans right-to-left
// but outputs stay in input order. Throws EmptySequence on n == 0.
Matrix lstm_forward(const LstmParams& p, const Matrix& x, bool reverse,
                    LstmCtx* ctx);
Matrix lstm_backward(LstmParams& p, const Matrix& x, const LstmCtx& ctx,
                     const Matrix& dh_out, bool reverse);

// ---------------------------------------------------------------------------
// Stacked bidirectional LSTM. Output dim per layer is 2*hidden; layer k+1
// consumes layer k's concatenated output.

struct BiLstmParams {
  std::vector<LstmParams> fwd, bwd;

  BiLstmParams() = default;
  BiLstmParams(const std::string& prefix, std::size_t input_dim,
               std::size_t hidden, std::size_t layers);
  void init(Rng& rng);
  std::size_t layers() const { return fwd.size(); }
  std::size_t hidden() const { return fwd.empty() ? 0 : fwd[0].hidden(); }
  std::size_t out_dim() const { return 2 * hidden(); }
  void collect(std::vector<ParamTensor*>& out);
};

struct BiLstmCtx {
  std::vector<Matrix> inputs;  // per-layer input
  std::vector<LstmCtx> f, b;
};

Matrix bilstm_forward(const BiLstmParams& p, const Matrix& x, BiLstmCtx* ctx);
Matrix bilstm_backward(BiLstmParams& p, const BiLstmCtx& ctx, const Matrix& dy);

// ---------------------------------------------------------------------------
// Losses. Each returns the loss and writes d loss / d logits.

// -log softmax(logits)[target]
double softmax_xent(const double* logits, std::size_t n, std::size_t target,
                    double* dlogits);

// mean_i BCE(sigmoid(logits[i]), targets[i])
double sigmoid_bce(const double* logits, const double* targets, std::size_t n,
                   double* dlogits);

}  // namespace measex

#endif  // MEASEX_NETCORE_LAYERS_HPP_
