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

// Dense row-major tensors, split-plane complex storage, activations and a
// counter-based RNG. Everything above this layer builds on these types only.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "linrec/error.hpp"

namespace linrec {

enum class DType { kF32, kF64 };

std::string_view dtype_name(DType d);
DType parse_dtype(std::string_view name);
std::size_t dtype_size(DType d);

template <typename T>
constexpr DType dtype_of();
template <>
constexpr DType dtype_of<float>() { return DType::kF32; }
template <>
constexpr DType dtype_of<double>() { return DType::kF64; }

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape);

/// Contiguous row-major tensor. The element count always equals the product
/// of the extents; there are no views or custom strides.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T{0}) : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {}
  Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    require(data_.size() == shape_numel(shape_), ErrorCode::kShapeError,
            "tensor of shape " + shape_string(shape_) + " given " + std::to_string(data_.size()) + " values");
  }

  static constexpr DType dtype() { return dtype_of<T>(); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  Shape strides() const {
    Shape s(shape_.size(), 1);
    for (std::size_t i = shape_.size(); i-- > 1;) s[i - 1] = s[i] * shape_[i];
    return s;
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  T* ptr() noexcept { return data_.data(); }
  const T* ptr() const noexcept { return data_.data(); }

  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  template <typename... I>
  T& operator()(I... idx) noexcept {
    return data_[offset(static_cast<std::size_t>(idx)...)];
  }
  template <typename... I>
  const T& operator()(I... idx) const noexcept {
    return data_[offset(static_cast<std::size_t>(idx)...)];
  }

  /// Row `i` of the leading axis as a flat span.
  std::span<T> row(std::size_t i) {
    const std::size_t n = data_.size() / shape_.at(0);
    return std::span<T>(data_).subspan(i * n, n);
  }
  std::span<const T> row(std::size_t i) const {
    const std::size_t n = data_.size() / shape_.at(0);
    return std::span<const T>(data_).subspan(i * n, n);
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  template <typename U>
  Tensor<U> cast() const {
    return Tensor<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
  }

  bool operator==(const Tensor&) const = default;

 private:
  template <typename... I>
  std::size_t offset(I... idx) const noexcept {
    std::size_t off = 0, axis = 0;
    ((off = off * shape_[axis++] + idx), ...);
    return off;
  }

  Shape shape_;
  std::vector<T> data_;
};

/// Complex tensor as two real planes of identical shape.
template <typename T>
struct CTensor {
  Tensor<T> re;
  Tensor<T> im;

  CTensor() = default;
  explicit CTensor(const Shape& shape) : re(shape), im(shape) {}
  CTensor(Tensor<T> r, Tensor<T> i) : re(std::move(r)), im(std::move(i)) {
    require(re.shape() == im.shape(), ErrorCode::kShapeError,
            "complex planes differ: " + shape_string(re.shape()) + " vs " + shape_string(im.shape()));
  }

  const Shape& shape() const noexcept { return re.shape(); }
  std::size_t size() const noexcept { return re.size(); }
  std::complex<T> at(std::size_t i) const { return {re[i], im[i]}; }
  void set(std::size_t i, std::complex<T> z) {
    re[i] = z.real();
    im[i] = z.imag();
  }
};

/// e^re * (cos im, sin im), evaluated directly rather than through std::exp
/// on std::complex so that the same expression is used in every kernel.
template <typename T>
inline std::complex<T> complex_exp(T re, T im) {
  const T m = std::exp(re);
  return {m * std::cos(im), m * std::sin(im)};
}
template <typename T>
inline std::complex<T> complex_exp(std::complex<T> z) {
  return complex_exp(z.real(), z.imag());
}

template <typename T>
constexpr T softplus_threshold() {
  return sizeof(T) == 4 ? T(30) : T(50);
}

template <typename T>
inline T softplus(T x) {
  if (x > softplus_threshold<T>()) return x;
  return std::log1p(std::exp(x));
}

template <typename T>
inline T sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

/// Counter-based generator: draw i of a stream is a pure function of
/// (seed, i), so parallel fills are reproducible under any thread count.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0, std::uint64_t counter = 0) : seed_(seed), counter_(counter) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

  static std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t bits_at(std::uint64_t i) const noexcept { return mix(seed_ + (i + 1) * 0x9e3779b97f4a7c15ULL); }
  /// Uniform in the open interval (0, 1).
  double uniform_at(std::uint64_t i) const noexcept {
    return (static_cast<double>(bits_at(i) >> 11) + 0.5) * 0x1.0p-53;
  }
  /// Standard normal for counter i (Box-Muller on a salted sibling stream).
  double normal_at(std::uint64_t i) const noexcept;

  std::uint64_t next_bits() noexcept { return bits_at(counter_++); }
  double uniform() noexcept { return uniform_at(counter_++); }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double normal() noexcept;

  /// Independent child stream; does not advance this generator.
  Rng split(std::uint64_t stream) const noexcept { return Rng(mix(seed_ ^ mix(stream + 0x632be59bd9b4e019ULL))); }

  /// Fill `out` with normals scaled by `scale`, consuming out.size() normal
  /// draws. Element j depends only on its index, so `threads` never changes
  /// the result.
  template <typename T>
  void fill_normal(std::span<T> out, double scale = 1.0, std::size_t threads = 1);
  template <typename T>
  void fill_uniform(std::span<T> out, double lo, double hi, std::size_t threads = 1);

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

/// Ordered list of named real tensors; the unit of parameter storage,
/// gradients, optimizer state and checkpoint payloads.
template <typename T>
class NamedTensors {
 public:
  using Entry = std::pair<std::string, Tensor<T>>;

  Tensor<T>& add(std::string name, Tensor<T> t) {
    require(find(name) == nullptr, ErrorCode::kConfigError, "duplicate tensor name " + name);
    entries_.emplace_back(std::move(name), std::move(t));
    return entries_.back().second;
  }
  Tensor<T>* find(std::string_view name) {
    for (auto& [n, t] : entries_)
      if (n == name) return &t;
    return nullptr;
  }
  const Tensor<T>* find(std::string_view name) const {
    for (const auto& [n, t] : entries_)
      if (n == name) return &t;
    return nullptr;
  }
  Tensor<T>& get(std::string_view name) {
    auto* t = find(name);
    if (t == nullptr) fail(ErrorCode::kConfigError, "no tensor named " + std::string(name));
    return *t;
  }
  const Tensor<T>& get(std::string_view name) const {
    const auto* t = find(name);
    if (t == nullptr) fail(ErrorCode::kConfigError, "no tensor named " + std::string(name));
    return *t;
  }

  /// Same names and shapes, zero-filled.
  NamedTensors zeros_like() const {
    NamedTensors out;
    for (const auto& [n, t] : entries_) out.add(n, Tensor<T>(t.shape()));
    return out;
  }

  std::size_t numel() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.second.size();
    return n;
  }

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  std::size_t size() const noexcept { return entries_.size(); }
  Entry& operator[](std::size_t i) { return entries_[i]; }
  const Entry& operator[](std::size_t i) const { return entries_[i]; }

 private:
  std::vector<Entry> entries_;
};

/// Non-owning handle to a parameter held elsewhere (e.g. inside a layer).
template <typename T>
struct ParamRef {
  std::string path;
  Tensor<T>* tensor = nullptr;
};

/// max |a - b| / max(max |b|, floor). Normwise relative error against the
/// reference `b`; elementwise relative error is meaningless near zeros.
template <typename T>
double max_rel_error(std::span<const T> a, std::span<const T> b, double floor = 1e-300);
template <typename T>
double max_abs_diff(std::span<const T> a, std::span<const T> b);

}  // namespace linrec
