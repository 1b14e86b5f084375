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


// Language model built from the layer zoo: token embedding, pre-norm
// residual blocks (RMSNorm -> mixer -> add, then an optional gated MLP),
// final norm and a vocabulary head.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "linrec/layer.hpp"
#include "linrec/numerics.hpp"

namespace linrec {

using Token = std::int32_t;

/// Keyword overrides for one mixer kind. Built-in kinds understand
/// "discretization" and (S6) "d_rank"; values are kept as strings.
using MixerKwargs = std::map<std::string, std::string>;

inline constexpr double kNormEps = 1e-5;

struct ModelConfig {
  std::size_t d_model = 768;
  std::size_t d_state = 16;
  std::size_t n_layer = 12;
  std::size_t vocab_size = 50257;
  /// Width of the gated MLP; 0 gives mixer-only blocks.
  std::size_t d_intermediate = 0;
  /// One registry key per block. Empty means "s5" everywhere.
  std::vector<std::string> mixer_types;
  /// Keyed by mixer kind (matched like registry keys, so "S5" == "s5").
  std::map<std::string, MixerKwargs> mixer_kwargs;
  bool tie_embeddings = true;

  /// Throws ConfigError on inconsistent sizes and UnknownMixer/Unsupported
  /// for bad mixer keys.
  void validate() const;
  std::string mixer_type(std::size_t layer) const;
  const MixerKwargs* kwargs_for(std::string_view mixer) const;

  std::string to_json() const;
  static ModelConfig from_json(std::string_view text);

  bool operator==(const ModelConfig&) const = default;
};

// Mixer registry: an open string-keyed table. Keys are matched
// case-insensitively with '-' and '_' ignored.

template <typename T>
using MixerBuilder = std::function<std::unique_ptr<Layer<T>>(const LayerConfig&, const MixerKwargs&, Rng&)>;

struct MixerEntry {
  MixerBuilder<float> make_f32;
  MixerBuilder<double> make_f64;
  /// Non-empty marks a reserved key that fails with Unsupported.
  std::string unsupported;
};

std::string normalize_mixer_key(std::string_view name);
void register_mixer(std::string_view name, MixerEntry entry);
/// nullptr when the key is not registered.
const MixerEntry* find_mixer(std::string_view name);
std::vector<std::string> registered_mixers();

struct RunOptions {
  ExecMode mode = ExecMode::kSequential;
  std::size_t workers = 1;
};

template <typename T>
struct BlockTape {
  Tensor<T> h_in, n1, h_mid, n2, gate, up;
  Tape<T> mixer;
};

/// Activations of one taped forward. Valid for exactly one backward.
template <typename T>
struct ModelTape {
  Tensor<Token> tokens;
  std::vector<BlockTape<T>> blocks;
  Tensor<T> h_out, nf;
  bool consumed = false;
};

template <typename T>
class LMHeadModel {
 public:
  LMHeadModel(const ModelConfig& cfg, Rng& rng);
  LMHeadModel(const LMHeadModel&) = delete;
  LMHeadModel& operator=(const LMHeadModel&) = delete;

  const ModelConfig& config() const noexcept { return cfg_; }
  const Layer<T>& mixer(std::size_t i) const { return *mixers_.at(i); }
  Layer<T>& mixer(std::size_t i) { return *mixers_.at(i); }
  std::size_t n_layer() const noexcept { return mixers_.size(); }
  bool has_mlp() const noexcept { return cfg_.d_intermediate > 0; }

  /// Parameters not owned by a mixer, under their full paths.
  NamedTensors<T>& dense_params() noexcept { return dense_; }
  const NamedTensors<T>& dense_params() const noexcept { return dense_; }

  /// Every parameter in canonical order: embedding, then per block
  /// norm / mixer / mlp_norm / mlp, then norm_f and the untied head.
  std::vector<ParamRef<T>> param_refs();
  std::vector<std::pair<std::string, const Tensor<T>*>> param_list() const;
  std::size_t num_params() const;

  /// tokens [batch, length] -> logits [batch, length, vocab_size].
  /// `final_states`, when given, receives per-layer step states for batch
  /// row 0 positioned after the last token.
  Tensor<T> forward(const Tensor<Token>& tokens, const RunOptions& opt = {}, ModelTape<T>* tape = nullptr,
                    std::vector<LayerState<T>>* final_states = nullptr) const;

  /// Gradients of every parameter (full paths) for the forward that filled
  /// `tape`. Throws TapeConsumed on reuse.
  NamedTensors<T> backward(ModelTape<T>& tape, const Tensor<T>& grad_logits, const RunOptions& opt = {}) const;

  /// Logits of one row from the final hidden vector (after final norm).
  void head(const T* nf, T* logits) const;

 private:
  void check_tokens(std::span<const Token> tokens) const;

  ModelConfig cfg_;
  NamedTensors<T> dense_;
  std::vector<std::unique_ptr<Layer<T>>> mixers_;
};

template <typename T>
std::unique_ptr<LMHeadModel<T>> build_model(const ModelConfig& cfg, Rng& rng) {
  return std::make_unique<LMHeadModel<T>>(cfg, rng);
}

/// Shorthand for forward() without a tape.
template <typename T>
Tensor<T> lm_forward(const LMHeadModel<T>& model, const Tensor<Token>& tokens, const RunOptions& opt = {}) {
  return model.forward(tokens, opt);
}

/// Mean token cross-entropy of logits [batch, length, vocab] against
/// targets [batch, length]; fills `grad` (same shape as logits) if given.
template <typename T>
double cross_entropy(const Tensor<T>& logits, const Tensor<Token>& targets, Tensor<T>* grad = nullptr);

// Row-wise RMSNorm: y = x / sqrt(mean(x^2) + eps) * w.
template <typename T>
void rms_norm(const T* x, const T* w, std::size_t d, T* y);
/// Accumulates into gw and gx.
template <typename T>
void rms_norm_backward(const T* x, const T* w, std::size_t d, const T* gy, T* gx, T* gw);

}  // namespace linrec
