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

#pragma once

#include <memory>

#include "linrec/layer.hpp"

namespace linrec::detail {

template <typename T>
std::unique_ptr<Layer<T>> make_s4d(const LayerConfig& cfg, Rng& rng);
template <typename T>
std::unique_ptr<Layer<T>> make_s5(const LayerConfig& cfg, Rng& rng);
template <typename T>
std::unique_ptr<Layer<T>> make_lru(const LayerConfig& cfg, Rng& rng);
template <typename T>
std::unique_ptr<Layer<T>> make_s6(const LayerConfig& cfg, Rng& rng);
template <typename T>
std::unique_ptr<Layer<T>> make_rglru(const LayerConfig& cfg, Rng& rng);

}  // namespace linrec::detail
