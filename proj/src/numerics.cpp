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

#include "linrec/numerics.hpp"

#include <algorithm>
#include <numbers>
#include <thread>

namespace linrec {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kShapeError: return "ShapeError";
    case ErrorCode::kSingularBilinear: return "SingularBilinear";
    case ErrorCode::kNonMonotoneTimestamps: return "NonMonotoneTimestamps";
    case ErrorCode::kUnknownLayer: return "UnknownLayer";
    case ErrorCode::kTapeConsumed: return "TapeConsumed";
    case ErrorCode::kUnknownMixer: return "UnknownMixer";
    case ErrorCode::kUnsupported: return "Unsupported";
    case ErrorCode::kTokenOutOfRange: return "TokenOutOfRange";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kCorruptHeader: return "CorruptHeader";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Error";
}

std::string_view dtype_name(DType d) { return d == DType::kF32 ? "f32" : "f64"; }

DType parse_dtype(std::string_view name) {
  if (name == "f32" || name == "float32") return DType::kF32;
  if (name == "f64" || name == "float64") return DType::kF64;
  fail(ErrorCode::kConfigError, "unknown dtype '" + std::string(name) + "'");
}

std::size_t dtype_size(DType d) { return d == DType::kF32 ? 4 : 8; }

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

double Rng::normal_at(std::uint64_t i) const noexcept {
  // Normals draw from a salted sibling stream so they never share bits with
  // uniform draws at overlapping counters.
  const Rng sibling(mix(seed_ ^ 0x2545f4914f6cdd1dULL));
  const double u1 = sibling.uniform_at(2 * i);
  const double u2 = sibling.uniform_at(2 * i + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::normal() noexcept {
  const double v = normal_at(counter_);
  ++counter_;
  return v;
}

namespace {

template <typename Fn>
void parallel_ranges(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    fn(0, n);
    return;
  }
  const std::size_t chunk = (n + threads - 1) / threads;
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < threads; ++t) {
    const std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo < hi) pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  fn(0, std::min(n, chunk));
}

}  // namespace

template <typename T>
void Rng::fill_normal(std::span<T> out, double scale, std::size_t threads) {
  const std::uint64_t base = counter_;
  parallel_ranges(out.size(), threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t j = lo; j < hi; ++j) out[j] = static_cast<T>(scale * normal_at(base + j));
  });
  counter_ += out.size();
}

template <typename T>
void Rng::fill_uniform(std::span<T> out, double lo_v, double hi_v, std::size_t threads) {
  const std::uint64_t base = counter_;
  parallel_ranges(out.size(), threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t j = lo; j < hi; ++j) out[j] = static_cast<T>(lo_v + (hi_v - lo_v) * uniform_at(base + j));
  });
  counter_ += out.size();
}

template void Rng::fill_normal<float>(std::span<float>, double, std::size_t);
template void Rng::fill_normal<double>(std::span<double>, double, std::size_t);
template void Rng::fill_uniform<float>(std::span<float>, double, double, std::size_t);
template void Rng::fill_uniform<double>(std::span<double>, double, double, std::size_t);

template <typename T>
double max_abs_diff(std::span<const T> a, std::span<const T> b) {
  require(a.size() == b.size(), ErrorCode::kShapeError, "max_abs_diff: size mismatch");
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
    if (!(d <= m)) m = d;  // propagates NaN
  }
  return m;
}

template <typename T>
double max_rel_error(std::span<const T> a, std::span<const T> b, double floor) {
  double ref = 0;
  for (T v : b) ref = std::max(ref, std::abs(static_cast<double>(v)));
  return max_abs_diff(a, b) / std::max(ref, floor);
}

template double max_abs_diff<float>(std::span<const float>, std::span<const float>);
template double max_abs_diff<double>(std::span<const double>, std::span<const double>);
template double max_rel_error<float>(std::span<const float>, std::span<const float>, double);
template double max_rel_error<double>(std::span<const double>, std::span<const double>, double);

}  // namespace linrec
