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

#ifndef MEASEX_CRF_CRF_HPP_
#define MEASEX_CRF_CRF_HPP_

#include <vector>

#include "corpus/types.hpp"
#include "netcore/tensor.hpp"

namespace measex {

// Linear-chain CRF over per-token emission logits. The pairwise score of
// moving from tag y' to tag y at position i is
//
//     score(i, y', y) = W[y', y] * l_i[y] + b[y', y]
//
// i.e. a per-pair scalar weight on the current tag's logit plus a per-pair
// bias. A sequence scores
//
//     start[y_1] + sum_{i=2..n} score(i, y_{i-1}, y_i) + end[y_n]
//
// where the boundary vectors stand in for the missing y_0 / y_{n+1} terms;
// zeroing them (use_boundary = false) drops the boundary contribution
// entirely. The normalizer Z is never materialized - log_partition runs the
// forward algorithm in log space.
struct CrfParams {
  std::size_t num_tags = 0;
  ParamTensor w_trans;  // num_tags x num_tags
  ParamTensor b_trans;  // num_tags x num_tags
  ParamTensor start;    // num_tags
  ParamTensor end;      // num_tags
  bool use_boundary = true;
  // When decoding, forbid O->I and a leading I so outputs are valid IOB.
  // Only meaningful for num_tags == 3 with the B/I/O tag order.
  bool constrain_iob = true;

  CrfParams() = default;
  explicit CrfParams(std::size_t k, const std::string& prefix = "crf");
  void init(Rng& rng);
  void collect(std::vector<ParamTensor*>& out);

  double w(std::size_t from, std::size_t to) const {
    return w_trans.value[from * num_tags + to];
  }
  double b(std::size_t from, std::size_t to) const {
    return b_trans.value[from * num_tags + to];
  }
  double start_score(std::size_t tag) const {
    return use_boundary ? start.value[tag] : 0.0;
  }
  double end_score(std::size_t tag) const {
    return use_boundary ? end.value[tag] : 0.0;
  }
};

// Unnormalized log-score of one tag sequence. n >= 1; tags in range.
double sequence_score(const CrfParams& crf, const Matrix& logits,
                      const std::vector<int>& tags);

// log Z via the forward algorithm.
double log_partition(const CrfParams& crf, const Matrix& logits);

// loss = log_partition - sequence_score(gold) >= 0. Accumulates exact
// gradients into the CRF parameters and writes d loss / d logits.
double crf_nll(CrfParams& crf, const Matrix& logits,
               const std::vector<int>& gold, Matrix* dlogits);

// Max-score sequence; ties broken toward the lowest tag index. Honors
// constrain_iob.
std::vector<int> viterbi(const CrfParams& crf, const Matrix& logits);

}  // namespace measex

#endif  // MEASEX_CRF_CRF_HPP_
