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

#include "netcore/layers.hpp"

#include <cmath>
#include <cstring>

#include "kernels/kernels.hpp"

namespace measex {

namespace {
const kernels::Kernels& K() { return kernels::active(); }
}  // namespace

// ---------------------------------------------------------------------------
// Linear

LinearParams::LinearParams(const std::string& prefix, std::size_t d_in,
                           std::size_t d_out)
    : w(prefix + "/W", {d_in, d_out}), b(prefix + "/b", {d_out}) {}

void LinearParams::init(Rng& rng) {
  w.init_uniform(rng, d_in());
  b.fill(0.0);
}

Matrix linear_forward(const LinearParams& p, const Matrix& x, bool relu,
                      LinearCtx* ctx) {
  if (x.cols != p.d_in()) {
    throw DimensionMismatch("linear_forward: input " + std::to_string(x.cols) +
                            " vs " + std::to_string(p.d_in()));
  }
  const std::size_t n = x.rows, din = p.d_in(), dout = p.d_out();
  Matrix y(n, dout);
  for (std::size_t r = 0; r < n; ++r) {
    double* yr = y.row(r);
    std::memcpy(yr, p.b.value.data(), dout * sizeof(double));
    const double* xr = x.row(r);
    for (std::size_t i = 0; i < din; ++i) {
      K().axpy(yr, xr[i], p.w.value.data() + i * dout, dout);
    }
  }
  if (ctx != nullptr) {
    ctx->x = x;
    if (relu) ctx->pre = y;
  }
  if (relu) {
    for (double& v : y.data) v = v > 0.0 ? v : 0.0;
  }
  return y;
}

Matrix linear_backward(LinearParams& p, const LinearCtx& ctx, const Matrix& dy,
                       bool relu) {
  const std::size_t n = dy.rows, din = p.d_in(), dout = p.d_out();
  Matrix dye = dy;  // effective upstream grad after the ReLU mask
  if (relu) {
    for (std::size_t r = 0; r < n; ++r) {
      double* g = dye.row(r);
      const double* pre = ctx.pre.row(r);
      for (std::size_t j = 0; j < dout; ++j) {
        if (pre[j] <= 0.0) g[j] = 0.0;
      }
    }
  }
  Matrix dx(n, din);
  for (std::size_t r = 0; r < n; ++r) {
    const double* g = dye.row(r);
    const double* xr = ctx.x.row(r);
    double* dxr = dx.row(r);
    for (std::size_t i = 0; i < din; ++i) {
      const double* wrow = p.w.value.data() + i * dout;
      dxr[i] = K().dot(wrow, g, dout);
      K().axpy(p.w.grad.data() + i * dout, xr[i], g, dout);
    }
    K().axpy(p.b.grad.data(), 1.0, g, dout);
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Embedding

EmbeddingParams::EmbeddingParams(const std::string& name, std::size_t vocab,
                                 std::size_t dim)
    : table(name, {vocab, dim}) {}

void EmbeddingParams::init(Rng& rng) { table.init_uniform(rng, dim()); }

Matrix embedding_forward(const EmbeddingParams& p, const std::vector<int>& ids) {
  const std::size_t d = p.dim();
  Matrix y(ids.size(), d);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    std::memcpy(y.row(r), p.table.value.data() + static_cast<std::size_t>(ids[r]) * d,
                d * sizeof(double));
  }
  return y;
}

void embedding_backward(EmbeddingParams& p, const std::vector<int>& ids,
                        const Matrix& dy) {
  const std::size_t d = p.dim();
  for (std::size_t r = 0; r < ids.size(); ++r) {
    K().axpy(p.table.grad.data() + static_cast<std::size_t>(ids[r]) * d, 1.0,
             dy.row(r), d);
  }
}

// ---------------------------------------------------------------------------
// LSTM

LstmParams::LstmParams(const std::string& prefix, std::size_t input_dim,
                       std::size_t hidden)
    : w(prefix + "/W", {input_dim + hidden, 4 * hidden}),
      b(prefix + "/b", {4 * hidden}) {}

void LstmParams::init(Rng& rng) {
  w.init_uniform(rng, input_dim() + hidden());
  b.fill(0.0);
  const std::size_t h = hidden();
  for (std::size_t j = h; j < 2 * h; ++j) b.value[j] = 1.0;  // forget gate
}

Matrix lstm_forward(const LstmParams& p, const Matrix& x, bool reverse,
                    LstmCtx* ctx) {
  if (x.rows == 0) throw EmptySequence();
  const std::size_t n = x.rows, in = p.input_dim(), h = p.hidden();
  if (x.cols != in) {
    throw DimensionMismatch("lstm_forward: input " + std::to_string(x.cols) +
                            " vs " + std::to_string(in));
  }
  Matrix hs(n, h);
  LstmCtx local;
  LstmCtx& c = ctx != nullptr ? *ctx : local;
  c.z = Matrix(n, in + h);
  c.gates = Matrix(n, 4 * h);
  c.c = Matrix(n, h);
  c.tanh_c = Matrix(n, h);

  std::vector<double> h_prev(h, 0.0), c_prev(h, 0.0);
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t t = reverse ? n - 1 - step : step;
    double* z = c.z.row(t);
    std::memcpy(z, x.row(t), in * sizeof(double));
    std::memcpy(z + in, h_prev.data(), h * sizeof(double));

    double* g = c.gates.row(t);
    std::memcpy(g, p.b.value.data(), 4 * h * sizeof(double));
    for (std::size_t i = 0; i < in + h; ++i) {
      K().axpy(g, z[i], p.w.value.data() + i * 4 * h, 4 * h);
    }
    double* ct = c.c.row(t);
    double* tct = c.tanh_c.row(t);
    double* ht = hs.row(t);
    for (std::size_t j = 0; j < h; ++j) {
      const double ig = sigmoid(g[j]);
      const double fg = sigmoid(g[h + j]);
      const double gg = std::tanh(g[2 * h + j]);
      const double og = sigmoid(g[3 * h + j]);
      g[j] = ig;
      g[h + j] = fg;
      g[2 * h + j] = gg;
      g[3 * h + j] = og;
      ct[j] = fg * c_prev[j] + ig * gg;
      tct[j] = std::tanh(ct[j]);
      ht[j] = og * tct[j];
    }
    std::memcpy(h_prev.data(), ht, h * sizeof(double));
    std::memcpy(c_prev.data(), ct, h * sizeof(double));
  }
  return hs;
}

Matrix lstm_backward(LstmParams& p, const Matrix& x, const LstmCtx& ctx,
                     const Matrix& dh_out, bool reverse) {
  const std::size_t n = x.rows, in = p.input_dim(), h = p.hidden();
  Matrix dx(n, in);
  std::vector<double> dh_next(h, 0.0), dc_next(h, 0.0);
  std::vector<double> dgates(4 * h);
  // Walk the recurrence backwards: last processed step first.
  for (std::size_t step = n; step-- > 0;) {
    const std::size_t t = reverse ? n - 1 - step : step;
    const double* g = ctx.gates.row(t);
    const double* ct = ctx.c.row(t);
    const double* tct = ctx.tanh_c.row(t);
    const double* c_prev =
        step == 0 ? nullptr : ctx.c.row(reverse ? t + 1 : t - 1);

    for (std::size_t j = 0; j < h; ++j) {
      const double ig = g[j], fg = g[h + j], gg = g[2 * h + j], og = g[3 * h + j];
      const double dh = dh_out.at(t, j) + dh_next[j];
      const double dc = dh * og * (1.0 - tct[j] * tct[j]) + dc_next[j];
      const double cp = c_prev != nullptr ? c_prev[j] : 0.0;
      dgates[j] = dc * gg * ig * (1.0 - ig);                      // input gate
      dgates[h + j] = dc * cp * fg * (1.0 - fg);                  // forget gate
      dgates[2 * h + j] = dc * ig * (1.0 - gg * gg);              // candidate
      dgates[3 * h + j] = dh * tct[j] * og * (1.0 - og);          // output gate
      dc_next[j] = dc * fg;
      (void)ct;
    }
    const double* z = ctx.z.row(t);
    double* dxr = dx.row(t);
    for (std::size_t i = 0; i < in + h; ++i) {
      const double* wrow = p.w.value.data() + i * 4 * h;
      const double dz = K().dot(wrow, dgates.data(), 4 * h);
      if (i < in) {
        dxr[i] = dz;
      } else {
        dh_next[i - in] = dz;
      }
      K().axpy(p.w.grad.data() + i * 4 * h, z[i], dgates.data(), 4 * h);
    }
    K().axpy(p.b.grad.data(), 1.0, dgates.data(), 4 * h);
  }
  return dx;
}

// ---------------------------------------------------------------------------
// BiLSTM stack

BiLstmParams::BiLstmParams(const std::string& prefix, std::size_t input_dim,
                           std::size_t hidden, std::size_t layers) {
  std::size_t in = input_dim;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::string ln = prefix + "/l" + std::to_string(l);
    fwd.emplace_back(ln + "/fwd", in, hidden);
    bwd.emplace_back(ln + "/bwd", in, hidden);
    in = 2 * hidden;
  }
}

void BiLstmParams::init(Rng& rng) {
  for (auto& l : fwd) l.init(rng);
  for (auto& l : bwd) l.init(rng);
}

void BiLstmParams::collect(std::vector<ParamTensor*>& out) {
  for (std::size_t l = 0; l < fwd.size(); ++l) {
    fwd[l].collect(out);
    bwd[l].collect(out);
  }
}

Matrix bilstm_forward(const BiLstmParams& p, const Matrix& x, BiLstmCtx* ctx) {
  const std::size_t h = p.hidden();
  Matrix cur = x;
  if (ctx != nullptr) {
    ctx->inputs.clear();
    ctx->f.assign(p.layers(), LstmCtx{});
    ctx->b.assign(p.layers(), LstmCtx{});
  }
  for (std::size_t l = 0; l < p.layers(); ++l) {
    if (ctx != nullptr) ctx->inputs.push_back(cur);
    Matrix hf = lstm_forward(p.fwd[l], cur, false, ctx ? &ctx->f[l] : nullptr);
    Matrix hb = lstm_forward(p.bwd[l], cur, true, ctx ? &ctx->b[l] : nullptr);
    Matrix out(cur.rows, 2 * h);
    for (std::size_t r = 0; r < cur.rows; ++r) {
      std::memcpy(out.row(r), hf.row(r), h * sizeof(double));
      std::memcpy(out.row(r) + h, hb.row(r), h * sizeof(double));
    }
    cur = std::move(out);
  }
  return cur;
}

Matrix bilstm_backward(BiLstmParams& p, const BiLstmCtx& ctx, const Matrix& dy) {
  const std::size_t h = p.hidden();
  Matrix dcur = dy;
  for (std::size_t l = p.layers(); l-- > 0;) {
    const Matrix& input = ctx.inputs[l];
    Matrix df(dcur.rows, h), db(dcur.rows, h);
    for (std::size_t r = 0; r < dcur.rows; ++r) {
      std::memcpy(df.row(r), dcur.row(r), h * sizeof(double));
      std::memcpy(db.row(r), dcur.row(r) + h, h * sizeof(double));
    }
    Matrix dxf = lstm_backward(p.fwd[l], input, ctx.f[l], df, false);
    Matrix dxb = lstm_backward(p.bwd[l], input, ctx.b[l], db, true);
    for (std::size_t i = 0; i < dxf.data.size(); ++i) dxf.data[i] += dxb.data[i];
    dcur = std::move(dxf);
  }
  return dcur;
}

// ---------------------------------------------------------------------------
// Losses

double softmax_xent(const double* logits, std::size_t n, std::size_t target,
                    double* dlogits) {
  const double lz = log_sum_exp(logits, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pi = std::exp(logits[i] - lz);
    dlogits[i] = pi - (i == target ? 1.0 : 0.0);
  }
  return lz - logits[target];
}

double sigmoid_bce(const double* logits, const double* targets, std::size_t n,
                   double* dlogits) {
  double loss = 0.0;
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = logits[i], t = targets[i];
    // log(1+exp(z)) - t*z, computed stably
    const double softplus = z > 0.0 ? z + std::log1p(std::exp(-z))
                                    : std::log1p(std::exp(z));
    loss += softplus - t * z;
    dlogits[i] = (sigmoid(z) - t) * inv;
  }
  return loss * inv;
}

}  // namespace measex
