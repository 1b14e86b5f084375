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


// Checkpoint container: 8-byte magic "LRNNX001", little-endian u64 header
// length, a UTF-8 JSON header mapping parameter path to
// {dtype, shape, offset, length}, then the raw little-endian payload.
// The model config travels under the reserved "__metadata__" key.

#pragma once

#include <memory>
#include <string>

#include "linrec/model.hpp"

namespace linrec {

inline constexpr char kCheckpointMagic[] = "LRNNX001";

struct CheckpointInfo {
  ModelConfig config;
  DType dtype = DType::kF32;
};

template <typename T>
void save_checkpoint(const LMHeadModel<T>& model, const std::string& path);

/// Reads only the header. Throws BadMagic, CorruptHeader or IoError.
CheckpointInfo inspect_checkpoint(const std::string& path);

/// Builds a model from the stored config and fills it. f32 payloads load
/// exactly into f64 models; narrowing f64 -> f32 is refused.
template <typename T>
std::unique_ptr<LMHeadModel<T>> load_checkpoint(const std::string& path);

/// Fills an existing model; every stored extent must match the model
/// (ShapeMismatch otherwise).
template <typename T>
void load_checkpoint_into(LMHeadModel<T>& model, const std::string& path);

}  // namespace linrec
