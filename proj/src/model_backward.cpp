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


#include <cmath>

#include "dense.hpp"
#include "linrec/model.hpp"

namespace linrec {

namespace {

std::string block_path(std::size_t i, std::string_view leaf) {
  return "blocks." + std::to_string(i) + "." + std::string(leaf);
}

}  // namespace

template <typename T>
NamedTensors<T> LMHeadModel<T>::backward(ModelTape<T>& tape, const Tensor<T>& grad_logits, const RunOptions&) const {
  require(!tape.consumed, ErrorCode::kTapeConsumed, "model tape already used by a backward pass");
  require(tape.blocks.size() == mixers_.size(), ErrorCode::kShapeError, "model tape was not filled by forward");
  tape.consumed = true;
  const std::size_t batch = tape.tokens.extent(0), length = tape.tokens.extent(1), rows = batch * length;
  const std::size_t d = cfg_.d_model, m = cfg_.d_intermediate, v = cfg_.vocab_size;
  require(grad_logits.shape() == Shape{batch, length, v}, ErrorCode::kShapeError,
          "grad_logits " + shape_string(grad_logits.shape()) + " does not match the taped forward");

  NamedTensors<T> dense_grads = dense_.zeros_like();
  Tensor<T> gh(Shape{batch, length, d});

  // Head and final norm.
  {
    std::vector<T> gnf(d);
    const T* wf = dense_.get("norm_f.weight").ptr();
    T* gwf = dense_grads.get("norm_f.weight").ptr();
    for (std::size_t r = 0; r < rows; ++r) {
      const T* gl = grad_logits.ptr() + r * v;
      const T* nf = tape.nf.ptr() + r * d;
      std::fill(gnf.begin(), gnf.end(), T(0));
      if (cfg_.tie_embeddings) {
        detail::outer_acc(dense_grads.get("embedding").ptr(), v, d, gl, nf);
        detail::matvec_t_acc(dense_.get("embedding").ptr(), v, d, gl, gnf.data());
      } else {
        const T* head = dense_.get("lm_head").ptr();
        detail::outer_acc(dense_grads.get("lm_head").ptr(), d, v, nf, gl);
        for (std::size_t k = 0; k < d; ++k) {
          T s = T(0);
          for (std::size_t j = 0; j < v; ++j) s += head[k * v + j] * gl[j];
          gnf[k] = s;
        }
      }
      rms_norm_backward(tape.h_out.ptr() + r * d, wf, d, gnf.data(), gh.ptr() + r * d, gwf);
    }
  }

  std::vector<GradBundle<T>> mixer_grads(mixers_.size());
  for (std::size_t i = mixers_.size(); i-- > 0;) {
    BlockTape<T>& bt = tape.blocks[i];
    if (m > 0) {
      const T* w2 = dense_.get(block_path(i, "mlp_norm.weight")).ptr();
      const T* wg = dense_.get(block_path(i, "mlp.w_gate")).ptr();
      const T* wu = dense_.get(block_path(i, "mlp.w_up")).ptr();
      const T* wd = dense_.get(block_path(i, "mlp.w_down")).ptr();
      T* gw2 = dense_grads.get(block_path(i, "mlp_norm.weight")).ptr();
      T* gwg = dense_grads.get(block_path(i, "mlp.w_gate")).ptr();
      T* gwu = dense_grads.get(block_path(i, "mlp.w_up")).ptr();
      T* gwd = dense_grads.get(block_path(i, "mlp.w_down")).ptr();
      std::vector<T> act(m), gact(m), ggate(m), gup(m), gn2(d);
      for (std::size_t r = 0; r < rows; ++r) {
        const T* gate = bt.gate.ptr() + r * m;
        const T* up = bt.up.ptr() + r * m;
        const T* n2 = bt.n2.ptr() + r * d;
        T* ghr = gh.ptr() + r * d;
        for (std::size_t k = 0; k < m; ++k) act[k] = gate[k] * sigmoid(gate[k]) * up[k];
        detail::outer_acc(gwd, d, m, ghr, act.data());
        std::fill(gact.begin(), gact.end(), T(0));
        detail::matvec_t_acc(wd, d, m, ghr, gact.data());
        for (std::size_t k = 0; k < m; ++k) {
          const T s = sigmoid(gate[k]);
          gup[k] = gact[k] * gate[k] * s;
          ggate[k] = gact[k] * up[k] * s * (T(1) + gate[k] * (T(1) - s));
        }
        detail::outer_acc(gwg, m, d, ggate.data(), n2);
        detail::outer_acc(gwu, m, d, gup.data(), n2);
        std::fill(gn2.begin(), gn2.end(), T(0));
        detail::matvec_t_acc(wg, m, d, ggate.data(), gn2.data());
        detail::matvec_t_acc(wu, m, d, gup.data(), gn2.data());
        rms_norm_backward(bt.h_mid.ptr() + r * d, w2, d, gn2.data(), ghr, gw2);
      }
    }
    LayerGrads<T> lg = mixers_[i]->backward(bt.mixer, gh);
    mixer_grads[i] = std::move(lg.params);
    const T* w1 = dense_.get(block_path(i, "norm.weight")).ptr();
    T* gw1 = dense_grads.get(block_path(i, "norm.weight")).ptr();
    for (std::size_t r = 0; r < rows; ++r)
      rms_norm_backward(bt.h_in.ptr() + r * d, w1, d, lg.u.ptr() + r * d, gh.ptr() + r * d, gw1);
  }

  T* gemb = dense_grads.get("embedding").ptr();
  for (std::size_t r = 0; r < rows; ++r) {
    const T* g = gh.ptr() + r * d;
    T* dst = gemb + static_cast<std::size_t>(tape.tokens[r]) * d;
    for (std::size_t k = 0; k < d; ++k) dst[k] += g[k];
  }

  // Assemble in canonical parameter order.
  NamedTensors<T> out;
  for (const auto& [path, t] : param_list()) {
    if (Tensor<T>* g = dense_grads.find(path)) {
      out.add(path, std::move(*g));
      continue;
    }
    // blocks.<i>.mixer.<name>
    const std::size_t i = std::stoul(path.substr(7));
    const std::string name = path.substr(path.find(".mixer.") + 7);
    out.add(path, std::move(mixer_grads[i].get(name)));
  }
  return out;
}

template NamedTensors<float> LMHeadModel<float>::backward(ModelTape<float>&, const Tensor<float>&,
                                                          const RunOptions&) const;
template NamedTensors<double> LMHeadModel<double>::backward(ModelTape<double>&, const Tensor<double>&,
                                                            const RunOptions&) const;

}  // namespace linrec
