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

// Layer zoo: S4D (SISO, LTI), S5 (MIMO, LTI), LRU (MIMO, LTI, discrete),
// S6 (SISO, selective LTV) and RG-LRU (gated LTV). Every layer runs the
// same recurrence driver, so sequential, parallel and step execution share
// one set of transition and readout formulas.

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "linrec/discretize.hpp"
#include "linrec/numerics.hpp"
#include "linrec/scan.hpp"

namespace linrec {

enum class LayerKind { kS4D, kS5, kLRU, kS6, kRGLRU };

inline constexpr LayerKind kAllLayerKinds[] = {LayerKind::kS4D, LayerKind::kS5, LayerKind::kLRU, LayerKind::kS6,
                                               LayerKind::kRGLRU};

std::string_view layer_kind_name(LayerKind kind);
/// Case-insensitive; "s4" is accepted for s4d. Throws UnknownLayer.
LayerKind parse_layer_kind(std::string_view name);
bool is_time_invariant(LayerKind kind);
/// Whether the layer is parameterized in continuous time (and therefore
/// honours the discretization setting).
bool uses_discretization(LayerKind kind);
/// Discretizations exercised for a kind: all three for continuous layers,
/// only the nominal one for discrete-native layers.
std::vector<Discretization> legal_discretizations(LayerKind kind);
bool supports_async(LayerKind kind);

enum class ExecMode { kSequential, kParallel };
std::string_view exec_mode_name(ExecMode m);

struct LayerConfig {
  std::size_t d_model = 1;
  std::size_t d_state = 16;
  /// Unset means zoh, or dirac for async layers. Setting it on LRU or RG-LRU only
  /// triggers a warning because those are parameterized in discrete time.
  std::optional<Discretization> discretization;
  /// Per-step intervals are supplied at call time (event-driven input).
  bool async = false;
  /// S6 delta projection rank; 0 selects ceil(d_model / 16).
  std::size_t d_rank = 0;

  Discretization scheme() const {
    return discretization.value_or(async ? Discretization::kDirac : Discretization::kZoh);
  }
};

/// Receives non-fatal configuration warnings. The default prints to stderr.
using WarningHandler = std::function<void(std::string_view)>;
void set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

template <typename T>
struct ForwardOptions {
  ExecMode mode = ExecMode::kSequential;
  std::size_t workers = 1;
  /// Event-driven intervals [length]; required iff the layer is async. The
  /// effective step is exp(log_delta) * deltas[k].
  std::span<const T> deltas;
};

/// Per-sequence inference state: the recurrence state plus preallocated
/// buffers, so that stepping never allocates.
template <typename T>
struct LayerState {
  StepState<T> scan;
  std::vector<std::vector<T>> consts;  // layer constants (e.g. discretized transitions)
  std::vector<T> a_re, a_im, b_re, b_im, scratch;
};

/// Saved activations for one backward pass. Valid exactly once.
template <typename T>
class Tape {
 public:
  bool consumed() const noexcept { return consumed_; }
  /// Marks the tape used; throws TapeConsumed on the second call.
  void consume();

  const void* owner = nullptr;
  Tensor<T> u;
  std::vector<T> deltas;
  std::size_t workers = 1;
  std::vector<CVec<T>> states;  // per batch element, [length, width]

 private:
  bool consumed_ = false;
};

template <typename T>
using GradBundle = NamedTensors<T>;

template <typename T>
struct LayerGrads {
  GradBundle<T> params;
  Tensor<T> u;
};

template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;
  Layer(const Layer&) = delete;
  Layer& operator=(const Layer&) = delete;

  LayerKind kind() const noexcept { return kind_; }
  const LayerConfig& config() const noexcept { return cfg_; }
  NamedTensors<T>& params() noexcept { return params_; }
  const NamedTensors<T>& params() const noexcept { return params_; }

  /// Width of the recurrence (number of scanned lanes per sequence).
  virtual std::size_t state_width() const = 0;
  virtual bool complex_state() const = 0;

  /// u: [batch, length, d_model] -> y: [batch, length, d_model]. With a tape
  /// the states are materialized for backward; without one the parallel
  /// path keeps only per-chunk buffers. `final_states`, when given, receives
  /// one ready-to-step state per batch element.
  Tensor<T> forward(const Tensor<T>& u, const ForwardOptions<T>& opt = {}, Tape<T>* tape = nullptr,
                    std::vector<LayerState<T>>* final_states = nullptr) const;

  /// Reverse pass for the forward that filled `tape`.
  LayerGrads<T> backward(Tape<T>& tape, const Tensor<T>& grad_y) const;

  /// Fresh zero state with all step buffers allocated.
  LayerState<T> make_state() const;

  /// One recurrence update; the same arithmetic as row k of forward().
  /// `delta` is the event interval for async layers and ignored otherwise.
  void step(LayerState<T>& state, std::span<const T> u_k, std::span<T> y_k, T delta = T(1)) const;

 protected:
  Layer(LayerKind kind, LayerConfig cfg) : kind_(kind), cfg_(std::move(cfg)) {}

  using Consts = std::vector<std::vector<T>>;

  /// Parameter-derived constants shared by all steps of a call.
  virtual Consts prepare() const = 0;
  /// Whether `a` is the same for every step, given the async setting.
  virtual bool invariant_a() const = 0;
  /// The time-invariant transition (only when invariant_a()).
  virtual void constant_a(const Consts& c, std::span<const T>& a_re, std::span<const T>& a_im) const = 0;
  virtual std::size_t scratch_size() const { return 0; }

  /// Transitions for n consecutive steps. u: [n, d_model]; dt: [n] or
  /// empty; a_*: [n, width] (untouched when invariant); b_*: [n, width].
  virtual void transitions(const Consts& c, const T* u, const T* dt, std::size_t n, T* a_re, T* a_im, T* b_re,
                           T* b_im, T* scratch) const = 0;
  /// y: [n, d_model] from states x: [n, width] and the inputs.
  virtual void readout(const Consts& c, const T* u, std::size_t n, const T* x_re, const T* x_im, T* y,
                       T* scratch) const = 0;

  /// Gradients for batch element `b` of a taped forward. grad_y and u are
  /// [length, d_model]; states [length, width]. Accumulates into grads/du.
  virtual void backward_sequence(const Consts& c, std::span<const T> u, std::span<const T> dt, const CVec<T>& states,
                                 std::span<const T> grad_y, GradBundle<T>& grads, std::span<T> du) const = 0;

  LayerKind kind_;
  LayerConfig cfg_;
  NamedTensors<T> params_;

 private:
  void check_input(const Tensor<T>& u, const ForwardOptions<T>& opt) const;
  void forward_taped(const Consts& c, const T* u, const T* dt, std::size_t length, const ForwardOptions<T>& opt,
                     CVec<T>& states, T* y) const;
  void forward_streaming(const Consts& c, const T* u, const T* dt, std::size_t length, const ForwardOptions<T>& opt,
                         CVec<T>& last, T* y) const;
};

/// Build a layer with freshly initialized parameters.
template <typename T>
std::unique_ptr<Layer<T>> make_layer(LayerKind kind, const LayerConfig& cfg, Rng& rng);

/// Default S6 delta rank.
inline std::size_t default_delta_rank(std::size_t d_model) { return (d_model + 15) / 16; }

namespace testing {
/// Negates the gradient of parameter `param` returned by backward() of
/// every layer of `kind`. Used to check that validation detects faults.
void inject_backward_fault(LayerKind kind, std::string param);
void clear_backward_fault();
}  // namespace testing

}  // namespace linrec
