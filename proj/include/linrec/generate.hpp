// Copyright 2026 The linrec Authors
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


// Autoregressive decoding: a batched prefill builds the per-layer step
// states, then tokens are produced one step at a time from buffers that
// were sized up front.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "linrec/model.hpp"

namespace linrec {

/// Single-sequence decoding state over a shared, read-only model. Several
/// sessions may run concurrently on one model.
template <typename T>
class DecodeSession {
 public:
  explicit DecodeSession(const LMHeadModel<T>& model);

  /// Consumes a non-empty prompt with the batched forward; logits() then
  /// holds the prediction for the next position.
  void prefill(std::span<const Token> prompt, const RunOptions& opt = {});
  /// Feeds one token. Never allocates.
  void step(Token token);

  std::span<const T> logits() const noexcept { return logits_; }
  std::size_t position() const noexcept { return position_; }

 private:
  const LMHeadModel<T>* model_;
  std::vector<LayerState<T>> states_;
  std::vector<T> h_, n_, y_, gate_, up_, logits_;
  // Weights resolved once so that step() does no name lookups.
  const T* embedding_ = nullptr;
  const T* norm_f_ = nullptr;
  std::vector<const T*> norm_, mlp_norm_, w_gate_, w_up_, w_down_;
  std::size_t position_ = 0;
};

struct GenerateOptions {
  std::size_t max_new = 0;
  /// 0 selects greedy decoding (argmax, lowest index on ties).
  double temperature = 0;
  std::uint64_t seed = 0;
  RunOptions prefill;
};

struct GenerateResult {
  std::vector<Token> tokens;  // prompt followed by the generated tokens
  /// Heap allocations observed while producing each generated token.
  std::vector<std::size_t> allocs_per_step;
};

/// Index of the largest logit; the lowest index wins ties.
template <typename T>
Token argmax_token(std::span<const T> logits);
/// Draw from softmax(logits / temperature) with uniform variate u in (0,1).
template <typename T>
Token sample_token(std::span<const T> logits, double temperature, double u);

template <typename T>
GenerateResult generate(const LMHeadModel<T>& model, std::span<const Token> prompt, const GenerateOptions& opt);

/// Reference decoder: re-runs the full forward on the growing sequence for
/// every new token.
template <typename T>
std::vector<Token> generate_full_recompute(const LMHeadModel<T>& model, std::span<const Token> prompt,
                                           const GenerateOptions& opt);

}  // namespace linrec
