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

// Continuous-to-discrete conversion of diagonal state-space parameters.
// Every scheme yields a_bar and an input gain g with b_bar = g * b, which
// lets layers contract B with the input before applying the scheme.

#pragma once

#include <complex>
#include <span>
#include <string_view>
#include <type_traits>
#include <vector>

#include "linrec/numerics.hpp"

namespace linrec {

enum class Discretization { kZoh, kBilinear, kDirac };

std::string_view discretization_name(Discretization d);
Discretization parse_discretization(std::string_view name);

namespace detail {
template <typename S>
struct real_of {
  using type = S;
};
template <typename T>
struct real_of<std::complex<T>> {
  using type = T;
};
}  // namespace detail

template <typename S>
using real_of_t = typename detail::real_of<S>::type;

/// |a| below this uses the Delta*b limit of the ZOH input gain.
template <typename R>
constexpr R zoh_pole_epsilon() {
  return sizeof(R) == 4 ? R(1e-4) : R(1e-8);
}

template <typename S>
inline S exp_of(S z) {
  if constexpr (std::is_floating_point_v<S>) {
    return std::exp(z);
  } else {
    return complex_exp(z);
  }
}

template <typename S>
struct Discrete {
  S a_bar;
  S b_bar;
};

/// Transition and input gain together with their partial derivatives with
/// respect to the continuous pole a (holomorphic derivative) and step delta.
template <typename S>
struct TransitionJet {
  S a_bar, gain;
  S da_bar_da, da_bar_ddelta;
  S dgain_da, dgain_ddelta;
};

template <typename S>
inline TransitionJet<S> zoh_jet(S a, real_of_t<S> delta) {
  using R = real_of_t<S>;
  TransitionJet<S> j;
  j.a_bar = exp_of<S>(a * delta);
  j.da_bar_da = j.a_bar * delta;
  j.da_bar_ddelta = j.a_bar * a;
  if (std::abs(a) < zoh_pole_epsilon<R>()) {
    j.gain = S(delta);
    j.dgain_da = S(R(0.5) * delta * delta);
  } else {
    j.gain = (j.a_bar - S(1)) / a;
    j.dgain_da = (j.a_bar * delta - j.gain) / a;
  }
  j.dgain_ddelta = j.a_bar;
  return j;
}

template <typename S>
inline TransitionJet<S> bilinear_jet(S a, real_of_t<S> delta) {
  using R = real_of_t<S>;
  const S half = a * (R(0.5) * delta);
  const S den = S(1) - half;
  require(std::abs(den) > R(1e-6) * (R(1) + std::abs(half)), ErrorCode::kSingularBilinear,
          "1 - delta*a/2 vanishes; delta too large for this pole");
  const S inv = S(1) / den;
  const S inv2 = inv * inv;
  TransitionJet<S> j;
  j.a_bar = (S(1) + half) * inv;
  j.gain = S(delta) * inv;
  j.da_bar_da = S(delta) * inv2;
  j.da_bar_ddelta = a * inv2;
  j.dgain_da = S(R(0.5) * delta * delta) * inv2;
  j.dgain_ddelta = inv2;
  return j;
}

template <typename S>
inline TransitionJet<S> dirac_jet(S a, real_of_t<S> delta) {
  TransitionJet<S> j;
  j.a_bar = exp_of<S>(a * delta);
  j.gain = S(1);
  j.da_bar_da = j.a_bar * delta;
  j.da_bar_ddelta = j.a_bar * a;
  j.dgain_da = S(0);
  j.dgain_ddelta = S(0);
  return j;
}

template <typename S>
inline TransitionJet<S> transition_jet(Discretization scheme, S a, real_of_t<S> delta) {
  switch (scheme) {
    case Discretization::kZoh: return zoh_jet(a, delta);
    case Discretization::kBilinear: return bilinear_jet(a, delta);
    case Discretization::kDirac: return dirac_jet(a, delta);
  }
  return zoh_jet(a, delta);
}

/// a_bar = exp(delta a), b_bar = ((a_bar - 1) / a) b, with b_bar = delta b
/// for vanishing poles.
template <typename S>
inline Discrete<S> discretize_zoh(S a, S b, real_of_t<S> delta) {
  const auto j = zoh_jet(a, delta);
  return {j.a_bar, j.gain * b};
}

/// Tustin transform. Throws SingularBilinear when 1 - delta a / 2 ~ 0.
template <typename S>
inline Discrete<S> discretize_bilinear(S a, S b, real_of_t<S> delta) {
  const auto j = bilinear_jet(a, delta);
  return {j.a_bar, j.gain * b};
}

/// Impulse input: the transition decays, the input map is untouched.
template <typename S>
inline Discrete<S> discretize_dirac(S a, S b, real_of_t<S> delta) {
  return {exp_of<S>(a * delta), b};
}

template <typename S>
inline Discrete<S> discretize(Discretization scheme, S a, S b, real_of_t<S> delta) {
  const auto j = transition_jet(scheme, a, delta);
  return {j.a_bar, j.gain * b};
}

/// Per-step intervals for event-driven input: out[0] = delta0 and
/// out[k] = t[k] - t[k-1]. Repeated timestamps give zero intervals, which
/// every scheme maps to the identity transition.
template <typename T>
std::vector<T> deltas_from_timestamps(std::span<const T> t, T delta0);

}  // namespace linrec
