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


#include "linrec/generate.hpp"

#include <algorithm>
#include <cmath>

#include "dense.hpp"
#include "linrec/alloc_counter.hpp"

namespace linrec {

template <typename T>
DecodeSession<T>::DecodeSession(const LMHeadModel<T>& model) : model_(&model) {
  const auto& cfg = model.config();
  const std::size_t d = cfg.d_model, m = cfg.d_intermediate;
  h_.resize(d);
  n_.resize(d);
  y_.resize(d);
  gate_.resize(m);
  up_.resize(m);
  logits_.resize(cfg.vocab_size);
  const auto& p = model.dense_params();
  embedding_ = p.get("embedding").ptr();
  norm_f_ = p.get("norm_f.weight").ptr();
  for (std::size_t i = 0; i < model.n_layer(); ++i) {
    const std::string prefix = "blocks." + std::to_string(i) + ".";
    states_.push_back(model.mixer(i).make_state());
    norm_.push_back(p.get(prefix + "norm.weight").ptr());
    if (m == 0) continue;
    mlp_norm_.push_back(p.get(prefix + "mlp_norm.weight").ptr());
    w_gate_.push_back(p.get(prefix + "mlp.w_gate").ptr());
    w_up_.push_back(p.get(prefix + "mlp.w_up").ptr());
    w_down_.push_back(p.get(prefix + "mlp.w_down").ptr());
  }
}

template <typename T>
void DecodeSession<T>::prefill(std::span<const Token> prompt, const RunOptions& opt) {
  require(!prompt.empty(), ErrorCode::kConfigError, "prompt must contain at least one token");
  const std::size_t v = model_->config().vocab_size;
  Tensor<Token> tokens(Shape{1, prompt.size()}, std::vector<Token>(prompt.begin(), prompt.end()));
  const Tensor<T> logits = model_->forward(tokens, opt, nullptr, &states_);
  std::copy_n(logits.ptr() + (prompt.size() - 1) * v, v, logits_.begin());
  position_ = prompt.size();
}

template <typename T>
void DecodeSession<T>::step(Token token) {
  const auto& cfg = model_->config();
  const std::size_t d = cfg.d_model, m = cfg.d_intermediate;
  if (token < 0 || static_cast<std::size_t>(token) >= cfg.vocab_size)
    fail(ErrorCode::kTokenOutOfRange,
         "token " + std::to_string(token) + " outside vocabulary of " + std::to_string(cfg.vocab_size));
  std::copy_n(embedding_ + static_cast<std::size_t>(token) * d, d, h_.begin());
  for (std::size_t i = 0; i < states_.size(); ++i) {
    rms_norm(h_.data(), norm_[i], d, n_.data());
    model_->mixer(i).step(states_[i], n_, y_);
    for (std::size_t k = 0; k < d; ++k) h_[k] += y_[k];
    if (m == 0) continue;
    rms_norm(h_.data(), mlp_norm_[i], d, n_.data());
    detail::matvec(w_gate_[i], m, d, n_.data(), gate_.data());
    detail::matvec(w_up_[i], m, d, n_.data(), up_.data());
    for (std::size_t k = 0; k < m; ++k) gate_[k] = gate_[k] * sigmoid(gate_[k]) * up_[k];
    detail::matvec(w_down_[i], d, m, gate_.data(), y_.data());
    for (std::size_t k = 0; k < d; ++k) h_[k] += y_[k];
  }
  rms_norm(h_.data(), norm_f_, d, n_.data());
  model_->head(n_.data(), logits_.data());
  ++position_;
}

template <typename T>
Token argmax_token(std::span<const T> logits) {
  // max_element returns the first maximum, which is the lowest index.
  return static_cast<Token>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

template <typename T>
Token sample_token(std::span<const T> logits, double temperature, double u) {
  const double mx = static_cast<double>(*std::max_element(logits.begin(), logits.end()));
  double z = 0;
  for (T l : logits) z += std::exp((static_cast<double>(l) - mx) / temperature);
  double acc = 0;
  const double target = u * z;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    acc += std::exp((static_cast<double>(logits[i]) - mx) / temperature);
    if (target < acc) return static_cast<Token>(i);
  }
  return static_cast<Token>(logits.size() - 1);
}

namespace {

template <typename T>
Token pick(std::span<const T> logits, const GenerateOptions& opt, std::size_t k) {
  if (opt.temperature <= 0) return argmax_token(logits);
  return sample_token(logits, opt.temperature, Rng(opt.seed).uniform_at(k));
}

void check_prompt(std::span<const Token> prompt, std::size_t vocab) {
  require(!prompt.empty(), ErrorCode::kConfigError, "prompt must contain at least one token");
  for (Token t : prompt)
    if (t < 0 || static_cast<std::size_t>(t) >= vocab)
      fail(ErrorCode::kTokenOutOfRange, "token " + std::to_string(t) + " outside vocabulary of " + std::to_string(vocab));
}

}  // namespace

template <typename T>
GenerateResult generate(const LMHeadModel<T>& model, std::span<const Token> prompt, const GenerateOptions& opt) {
  check_prompt(prompt, model.config().vocab_size);
  GenerateResult r;
  r.tokens.reserve(prompt.size() + opt.max_new);
  r.allocs_per_step.reserve(opt.max_new);
  r.tokens.assign(prompt.begin(), prompt.end());
  if (opt.max_new == 0) return r;

  DecodeSession<T> session(model);
  session.prefill(prompt, opt.prefill);
  for (std::size_t k = 0; k < opt.max_new; ++k) {
    AllocationProbe probe;
    const Token t = pick(session.logits(), opt, k);
    r.tokens.push_back(t);
    if (k + 1 < opt.max_new) session.step(t);
    r.allocs_per_step.push_back(static_cast<std::size_t>(probe.count()));
  }
  return r;
}

template <typename T>
std::vector<Token> generate_full_recompute(const LMHeadModel<T>& model, std::span<const Token> prompt,
                                           const GenerateOptions& opt) {
  check_prompt(prompt, model.config().vocab_size);
  std::vector<Token> seq(prompt.begin(), prompt.end());
  const std::size_t v = model.config().vocab_size;
  for (std::size_t k = 0; k < opt.max_new; ++k) {
    const Tensor<Token> tokens(Shape{1, seq.size()}, seq);
    const Tensor<T> logits = model.forward(tokens, opt.prefill);
    seq.push_back(pick(std::span<const T>(logits.ptr() + (seq.size() - 1) * v, v), opt, k));
  }
  return seq;
}

#define LINREC_INSTANTIATE(T)                                                                             \
  template class DecodeSession<T>;                                                                        \
  template Token argmax_token<T>(std::span<const T>);                                                     \
  template Token sample_token<T>(std::span<const T>, double, double);                                     \
  template GenerateResult generate<T>(const LMHeadModel<T>&, std::span<const Token>, const GenerateOptions&); \
  template std::vector<Token> generate_full_recompute<T>(const LMHeadModel<T>&, std::span<const Token>,   \
                                                         const GenerateOptions&);
LINREC_INSTANTIATE(float)
LINREC_INSTANTIATE(double)
#undef LINREC_INSTANTIATE

}  // namespace linrec
