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

#include "crf/crf.hpp"

#include <cmath>
#include <limits>

namespace measex {

namespace {
constexpr double kNegInf = -1e30;

void check_dims(const CrfParams& crf, const Matrix& logits) {
  if (logits.rows == 0) throw EmptySequence();
  if (logits.cols != crf.num_tags) {
    throw DimensionMismatch("crf: logits have " + std::to_string(logits.cols) +
                            " tags, params have " + std::to_string(crf.num_tags));
  }
}
}  // namespace

CrfParams::CrfParams(std::size_t k, const std::string& prefix)
    : num_tags(k),
      w_trans(prefix + "/W_trans", {k, k}),
      b_trans(prefix + "/b_trans", {k, k}),
      start(prefix + "/start", {k}),
      end(prefix + "/end", {k}) {}

void CrfParams::init(Rng& rng) {
  w_trans.init_uniform(rng, num_tags);
  b_trans.init_uniform(rng, num_tags);
  start.fill(0.0);
  end.fill(0.0);
}

void CrfParams::collect(std::vector<ParamTensor*>& out) {
  out.push_back(&w_trans);
  out.push_back(&b_trans);
  if (use_boundary) {
    out.push_back(&start);
    out.push_back(&end);
  }
}

double sequence_score(const CrfParams& crf, const Matrix& logits,
                      const std::vector<int>& tags) {
  check_dims(crf, logits);
  const std::size_t n = logits.rows;
  if (tags.size() != n) throw DimensionMismatch("crf: tag count != sequence length");
  for (int t : tags) {
    if (t < 0 || static_cast<std::size_t>(t) >= crf.num_tags) {
      throw DimensionMismatch("crf: tag out of range");
    }
  }
  double s = crf.start_score(tags[0]);
  for (std::size_t i = 1; i < n; ++i) {
    const auto prev = static_cast<std::size_t>(tags[i - 1]);
    const auto cur = static_cast<std::size_t>(tags[i]);
    s += crf.w(prev, cur) * logits.at(i, cur) + crf.b(prev, cur);
  }
  s += crf.end_score(tags[n - 1]);
  return s;
}

double log_partition(const CrfParams& crf, const Matrix& logits) {
  check_dims(crf, logits);
  const std::size_t n = logits.rows, k = crf.num_tags;
  std::vector<double> alpha(k), next(k), terms(k);
  for (std::size_t y = 0; y < k; ++y) alpha[y] = crf.start_score(y);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t y = 0; y < k; ++y) {
      for (std::size_t p = 0; p < k; ++p) {
        terms[p] = alpha[p] + crf.w(p, y) * logits.at(i, y) + crf.b(p, y);
      }
      next[y] = log_sum_exp(terms.data(), k);
    }
    alpha.swap(next);
  }
  for (std::size_t y = 0; y < k; ++y) alpha[y] += crf.end_score(y);
  return log_sum_exp(alpha.data(), k);
}

double crf_nll(CrfParams& crf, const Matrix& logits,
               const std::vector<int>& gold, Matrix* dlogits) {
  check_dims(crf, logits);
  const std::size_t n = logits.rows, k = crf.num_tags;

  // Forward/backward tables in log space.
  Matrix alpha(n, k), beta(n, k);
  for (std::size_t y = 0; y < k; ++y) alpha.at(0, y) = crf.start_score(y);
  std::vector<double> terms(k);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t y = 0; y < k; ++y) {
      for (std::size_t p = 0; p < k; ++p) {
        terms[p] = alpha.at(i - 1, p) + crf.w(p, y) * logits.at(i, y) + crf.b(p, y);
      }
      alpha.at(i, y) = log_sum_exp(terms.data(), k);
    }
  }
  for (std::size_t y = 0; y < k; ++y) beta.at(n - 1, y) = crf.end_score(y);
  for (std::size_t i = n - 1; i-- > 0;) {
    for (std::size_t p = 0; p < k; ++p) {
      for (std::size_t y = 0; y < k; ++y) {
        terms[y] = crf.w(p, y) * logits.at(i + 1, y) + crf.b(p, y) + beta.at(i + 1, y);
      }
      beta.at(i, p) = log_sum_exp(terms.data(), k);
    }
  }
  std::vector<double> final_terms(k);
  for (std::size_t y = 0; y < k; ++y) {
    final_terms[y] = alpha.at(n - 1, y) + crf.end_score(y);
  }
  const double log_z = log_sum_exp(final_terms.data(), k);
  const double gold_score = sequence_score(crf, logits, gold);
  const double loss = log_z - gold_score;

  if (dlogits != nullptr) {
    dlogits->rows = n;
    dlogits->cols = k;
    dlogits->data.assign(n * k, 0.0);
  }

  // Unary marginals at the boundaries.
  for (std::size_t y = 0; y < k; ++y) {
    const double p1 = std::exp(alpha.at(0, y) + beta.at(0, y) - log_z);
    const double pn = std::exp(alpha.at(n - 1, y) + crf.end_score(y) - log_z);
    if (crf.use_boundary) {
      crf.start.grad[y] += p1 - (static_cast<std::size_t>(gold[0]) == y ? 1.0 : 0.0);
      crf.end.grad[y] += pn - (static_cast<std::size_t>(gold[n - 1]) == y ? 1.0 : 0.0);
    }
  }

  // Pairwise marginals drive the transition and emission gradients.
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      for (std::size_t y = 0; y < k; ++y) {
        const double s = crf.w(p, y) * logits.at(i, y) + crf.b(p, y);
        const double prob = std::exp(alpha.at(i - 1, p) + s + beta.at(i, y) - log_z);
        const double gold_ind =
            (static_cast<std::size_t>(gold[i - 1]) == p &&
             static_cast<std::size_t>(gold[i]) == y)
                ? 1.0
                : 0.0;
        const double diff = prob - gold_ind;
        crf.w_trans.grad[p * k + y] += diff * logits.at(i, y);
        crf.b_trans.grad[p * k + y] += diff;
        if (dlogits != nullptr) dlogits->at(i, y) += diff * crf.w(p, y);
      }
    }
  }
  return loss;
}

std::vector<int> viterbi(const CrfParams& crf, const Matrix& logits) {
  check_dims(crf, logits);
  const std::size_t n = logits.rows, k = crf.num_tags;
  const bool constrain = crf.constrain_iob && k == kNumTags;
  const auto tag_i = static_cast<std::size_t>(Tag::I);
  const auto tag_o = static_cast<std::size_t>(Tag::O);

  Matrix score(n, k);
  Matrix back(n, k);
  for (std::size_t y = 0; y < k; ++y) {
    score.at(0, y) = crf.start_score(y);
    if (constrain && y == tag_i) score.at(0, y) = kNegInf;  // no leading I
  }
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t y = 0; y < k; ++y) {
      double best = -std::numeric_limits<double>::infinity();
      std::size_t best_p = 0;
      for (std::size_t p = 0; p < k; ++p) {
        double s = score.at(i - 1, p) + crf.w(p, y) * logits.at(i, y) + crf.b(p, y);
        if (constrain && p == tag_o && y == tag_i) s = kNegInf;  // no O -> I
        if (s > best) {  // strict: ties keep the lowest previous tag
          best = s;
          best_p = p;
        }
      }
      score.at(i, y) = best;
      back.at(i, y) = static_cast<double>(best_p);
    }
  }
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_y = 0;
  for (std::size_t y = 0; y < k; ++y) {
    const double s = score.at(n - 1, y) + crf.end_score(y);
    if (s > best) {
      best = s;
      best_y = y;
    }
  }
  std::vector<int> tags(n);
  tags[n - 1] = static_cast<int>(best_y);
  for (std::size_t i = n - 1; i-- > 0;) {
    best_y = static_cast<std::size_t>(back.at(i + 1, best_y));
    tags[i] = static_cast<int>(best_y);
  }
  return tags;
}

}  // namespace measex
