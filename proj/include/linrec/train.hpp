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


// Minimal training support: next-token loss with gradients, and Adam.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "linrec/model.hpp"

namespace linrec {

struct AdamOptions {
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam over a fixed list of parameters; moments are keyed by position.
template <typename T>
class Adam {
 public:
  Adam(std::vector<ParamRef<T>> params, AdamOptions opt = {});
  /// `grads` must hold one tensor per parameter, same paths and order.
  void step(const NamedTensors<T>& grads);
  std::size_t steps() const noexcept { return t_; }

 private:
  std::vector<ParamRef<T>> params_;
  AdamOptions opt_;
  std::vector<std::vector<double>> m_, v_;
  std::size_t t_ = 0;
};

/// Cross-entropy of predicting tokens[:, 1:] from tokens[:, :-1]. When
/// `grads` is given it receives the gradient of every parameter.
template <typename T>
double next_token_loss(const LMHeadModel<T>& model, const Tensor<Token>& tokens, NamedTensors<T>* grads = nullptr,
                       const RunOptions& opt = {});

struct TrainSmokeOptions {
  std::uint64_t seed = 0;
  std::size_t max_steps = 500;
  double target_loss = 0.1;
  std::size_t period = 32;   // length of the repeated pattern
  std::size_t repeats = 3;   // copies of the pattern in the training sequence
};

struct TrainSmokeResult {
  std::vector<double> losses;  // loss before each optimizer step
  std::size_t steps = 0;       // optimizer steps taken
  bool reached = false;
  double final_loss = 0;
  double seconds = 0;
};

/// The tiny model used by the training smoke run.
ModelConfig train_smoke_config();
/// The training sequence: a pattern of `period` random tokens, repeated.
std::vector<Token> repeating_pattern(std::uint64_t seed, std::size_t vocab, std::size_t period, std::size_t repeats);

/// Overfits the tiny model (f64) to a repeating pattern with Adam, stopping
/// as soon as the loss drops below the target.
TrainSmokeResult train_smoke(const TrainSmokeOptions& opt = {});

}  // namespace linrec
