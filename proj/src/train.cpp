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


#include "linrec/train.hpp"

#include <chrono>
#include <cmath>

namespace linrec {

template <typename T>
Adam<T>::Adam(std::vector<ParamRef<T>> params, AdamOptions opt) : params_(std::move(params)), opt_(opt) {
  for (const auto& p : params_) {
    m_.emplace_back(p.tensor->size(), 0.0);
    v_.emplace_back(p.tensor->size(), 0.0);
  }
}

template <typename T>
void Adam<T>::step(const NamedTensors<T>& grads) {
  require(grads.size() == params_.size(), ErrorCode::kShapeError, "Adam: gradient count differs from parameters");
  ++t_;
  const double c1 = 1 - std::pow(opt_.beta1, static_cast<double>(t_));
  const double c2 = 1 - std::pow(opt_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& [name, g] = grads[i];
    Tensor<T>& p = *params_[i].tensor;
    require(name == params_[i].path && g.size() == p.size(), ErrorCode::kShapeError,
            "Adam: gradient " + name + " does not match parameter " + params_[i].path);
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double gj = static_cast<double>(g[j]);
      m[j] = opt_.beta1 * m[j] + (1 - opt_.beta1) * gj;
      v[j] = opt_.beta2 * v[j] + (1 - opt_.beta2) * gj * gj;
      p[j] -= static_cast<T>(opt_.lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + opt_.eps));
    }
  }
}

template <typename T>
double next_token_loss(const LMHeadModel<T>& model, const Tensor<Token>& tokens, NamedTensors<T>* grads,
                       const RunOptions& opt) {
  require(tokens.rank() == 2 && tokens.extent(1) >= 2, ErrorCode::kShapeError,
          "next_token_loss needs [batch, length >= 2] tokens");
  const std::size_t batch = tokens.extent(0), length = tokens.extent(1) - 1;
  Tensor<Token> inputs(Shape{batch, length}), targets(Shape{batch, length});
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t k = 0; k < length; ++k) {
      inputs(b, k) = tokens(b, k);
      targets(b, k) = tokens(b, k + 1);
    }
  if (!grads) return cross_entropy(model.forward(inputs, opt), targets);
  ModelTape<T> tape;
  const Tensor<T> logits = model.forward(inputs, opt, &tape);
  Tensor<T> gl;
  const double loss = cross_entropy(logits, targets, &gl);
  *grads = model.backward(tape, gl, opt);
  return loss;
}

ModelConfig train_smoke_config() {
  ModelConfig c;
  c.d_model = 32;
  c.d_state = 16;
  c.n_layer = 2;
  c.vocab_size = 16;
  c.d_intermediate = 64;
  c.mixer_types = {"s5", "s6"};
  return c;
}

std::vector<Token> repeating_pattern(std::uint64_t seed, std::size_t vocab, std::size_t period, std::size_t repeats) {
  Rng rng(seed);
  std::vector<Token> pattern(period);
  for (auto& t : pattern) t = static_cast<Token>(rng.next_bits() % vocab);
  std::vector<Token> seq;
  for (std::size_t r = 0; r < repeats; ++r) seq.insert(seq.end(), pattern.begin(), pattern.end());
  return seq;
}

TrainSmokeResult train_smoke(const TrainSmokeOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  const ModelConfig cfg = train_smoke_config();
  Rng rng(opt.seed);
  auto model = build_model<double>(cfg, rng);
  const auto seq = repeating_pattern(opt.seed + 1, cfg.vocab_size, opt.period, opt.repeats);
  const Tensor<Token> tokens(Shape{1, seq.size()}, seq);
  Adam<double> adam(model->param_refs());

  TrainSmokeResult r;
  NamedTensors<double> grads;
  for (;;) {
    const double loss = next_token_loss(*model, tokens, &grads);
    r.final_loss = loss;
    if (loss < opt.target_loss) {
      r.reached = true;
      break;
    }
    if (r.steps >= opt.max_steps) break;
    r.losses.push_back(loss);
    adam.step(grads);
    ++r.steps;
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

template class Adam<float>;
template class Adam<double>;
template double next_token_loss<float>(const LMHeadModel<float>&, const Tensor<Token>&, NamedTensors<float>*,
                                       const RunOptions&);
template double next_token_loss<double>(const LMHeadModel<double>&, const Tensor<Token>&, NamedTensors<double>*,
                                        const RunOptions&);

}  // namespace linrec
