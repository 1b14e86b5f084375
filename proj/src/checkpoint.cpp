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


#include "linrec/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "json.hpp"

namespace linrec {

using nlohmann::json;

namespace {

constexpr std::size_t kMagicSize = 8;
constexpr std::size_t kPreamble = kMagicSize + 8;

template <typename U>
U byteswap_if_big(U v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(U)];
    std::memcpy(b, &v, sizeof(U));
    std::reverse(b, b + sizeof(U));
    std::memcpy(&v, b, sizeof(U));
  }
  return v;
}

template <typename T>
void append_le(std::string& out, T v) {
  v = byteswap_if_big(v);
  const auto* p = reinterpret_cast<const char*>(&v);
  out.append(p, sizeof(T));
}

template <typename T>
T read_le(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return byteswap_if_big(v);
}

struct Entry {
  DType dtype = DType::kF32;
  Shape shape;
  std::uint64_t offset = 0, length = 0;
};

struct Header {
  json metadata;
  std::map<std::string, Entry> entries;
  std::uint64_t payload_start = 0;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

[[noreturn]] void corrupt(const std::string& path, const std::string& what) {
  fail(ErrorCode::kCorruptHeader, path + ": " + what);
}

// Parses and checks the header. `bytes` may hold only the preamble and
// header (inspection) or the whole file (loading, payload checked too).
Header parse_header(const std::string& path, const std::string& bytes, bool check_payload) {
  if (bytes.size() < kMagicSize || std::memcmp(bytes.data(), kCheckpointMagic, kMagicSize) != 0)
    fail(ErrorCode::kBadMagic, path + ": not a checkpoint (magic mismatch)");
  if (bytes.size() < kPreamble) corrupt(path, "file ends inside the header length");
  const auto hlen = read_le<std::uint64_t>(bytes.data() + kMagicSize);
  if (hlen > bytes.size() - kPreamble) corrupt(path, "header length " + std::to_string(hlen) + " exceeds file size");

  Header h;
  h.payload_start = kPreamble + hlen;
  json j;
  try {
    j = json::parse(bytes.begin() + kPreamble, bytes.begin() + static_cast<std::ptrdiff_t>(h.payload_start));
  } catch (const json::exception& e) {
    corrupt(path, std::string("header is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) corrupt(path, "header is not a JSON object");
  try {
    for (const auto& [name, e] : j.items()) {
      if (name == "__metadata__") {
        h.metadata = e;
        continue;
      }
      if (!e.is_object()) corrupt(path, "entry " + name + " is not an object");
      Entry en;
      en.dtype = parse_dtype(e.at("dtype").get<std::string>());
      en.shape = e.at("shape").get<Shape>();
      en.offset = e.at("offset").get<std::uint64_t>();
      en.length = e.at("length").get<std::uint64_t>();
      if (en.length != shape_numel(en.shape) * dtype_size(en.dtype))
        corrupt(path, "entry " + name + " length " + std::to_string(en.length) + " does not match " +
                          shape_string(en.shape) + " " + std::string(dtype_name(en.dtype)));
      h.entries.emplace(name, std::move(en));
    }
  } catch (const json::exception& e) {
    corrupt(path, std::string("malformed entry: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kCorruptHeader) throw;
    corrupt(path, e.what());
  }

  std::vector<std::pair<std::uint64_t, std::uint64_t>> spans;
  std::uint64_t total = 0;
  for (const auto& [name, e] : h.entries) {
    spans.emplace_back(e.offset, e.length);
    total += e.length;
  }
  std::sort(spans.begin(), spans.end());
  for (std::size_t i = 1; i < spans.size(); ++i)
    if (spans[i - 1].first + spans[i - 1].second > spans[i].first) corrupt(path, "overlapping payload entries");
  if (check_payload) {
    const std::uint64_t payload = bytes.size() - h.payload_start;
    if (payload != total)
      corrupt(path, "payload holds " + std::to_string(payload) + " bytes, entries describe " + std::to_string(total));
    if (!spans.empty() && spans.back().first + spans.back().second > payload)
      corrupt(path, "entry extends past the payload");
  }
  return h;
}

ModelConfig config_of(const std::string& path, const Header& h) {
  if (!h.metadata.is_object() || !h.metadata.contains("config")) corrupt(path, "missing __metadata__.config");
  try {
    return ModelConfig::from_json(h.metadata.at("config").dump());
  } catch (const Error& e) {
    corrupt(path, std::string("bad model config: ") + e.what());
  }
}

template <typename S, typename T>
void decode(const char* src, std::size_t n, T* dst) {
  for (std::size_t i = 0; i < n; ++i) {
    const S v = read_le<S>(src + i * sizeof(S));
    dst[i] = static_cast<T>(v);
  }
}

}  // namespace

template <typename T>
void save_checkpoint(const LMHeadModel<T>& model, const std::string& path) {
  const auto params = model.param_list();
  json header;
  header["__metadata__"] = {{"config", json::parse(model.config().to_json())}, {"format", "linrec"}};
  std::uint64_t offset = 0;
  for (const auto& [name, t] : params) {
    const std::uint64_t len = t->size() * sizeof(T);
    header[name] = {{"dtype", std::string(dtype_name(dtype_of<T>()))},
                    {"shape", t->shape()},
                    {"offset", offset},
                    {"length", len}};
    offset += len;
  }
  const std::string text = header.dump();
  std::string out(kCheckpointMagic, kMagicSize);
  append_le<std::uint64_t>(out, text.size());
  out += text;
  out.reserve(out.size() + offset);
  for (const auto& [name, t] : params)
    for (T v : t->data()) append_le<T>(out, v);

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::kIoError, "cannot write " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) fail(ErrorCode::kIoError, "write failed for " + path);
}

CheckpointInfo inspect_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path);
  std::string bytes(kPreamble, '\0');
  in.read(bytes.data(), kPreamble);
  bytes.resize(static_cast<std::size_t>(in.gcount()));
  if (bytes.size() == kPreamble) {
    const auto hlen = read_le<std::uint64_t>(bytes.data() + kMagicSize);
    std::string rest(static_cast<std::size_t>(std::min<std::uint64_t>(hlen, 1ull << 32)), '\0');
    in.read(rest.data(), static_cast<std::streamsize>(rest.size()));
    rest.resize(static_cast<std::size_t>(in.gcount()));
    bytes += rest;
  }
  const Header h = parse_header(path, bytes, false);
  CheckpointInfo info;
  info.config = config_of(path, h);
  if (!h.entries.empty()) info.dtype = h.entries.begin()->second.dtype;
  return info;
}

template <typename T>
void load_checkpoint_into(LMHeadModel<T>& model, const std::string& path) {
  const std::string bytes = read_file(path);
  const Header h = parse_header(path, bytes, true);
  const char* payload = bytes.data() + h.payload_start;
  const auto refs = model.param_refs();
  for (const auto& ref : refs) {
    auto it = h.entries.find(ref.path);
    require(it != h.entries.end(), ErrorCode::kShapeMismatch, path + ": missing parameter " + ref.path);
    const Entry& e = it->second;
    require(e.shape == ref.tensor->shape(), ErrorCode::kShapeMismatch,
            path + ": " + ref.path + " stored as " + shape_string(e.shape) + ", model expects " +
                shape_string(ref.tensor->shape()));
    if (e.dtype == DType::kF64 && sizeof(T) == 4)
      fail(ErrorCode::kUnsupported, path + ": refusing to narrow f64 parameter " + ref.path + " to f32");
  }
  require(h.entries.size() == refs.size(), ErrorCode::kShapeMismatch,
          path + ": checkpoint has " + std::to_string(h.entries.size()) + " tensors, model has " +
              std::to_string(refs.size()));
  for (const auto& ref : refs) {
    const Entry& e = h.entries.at(ref.path);
    const std::size_t n = ref.tensor->size();
    if (e.dtype == DType::kF32)
      decode<float>(payload + e.offset, n, ref.tensor->ptr());
    else
      decode<double>(payload + e.offset, n, ref.tensor->ptr());
  }
}

template <typename T>
std::unique_ptr<LMHeadModel<T>> load_checkpoint(const std::string& path) {
  const CheckpointInfo info = inspect_checkpoint(path);
  Rng rng(0);
  auto model = build_model<T>(info.config, rng);
  load_checkpoint_into(*model, path);
  return model;
}

template void save_checkpoint<float>(const LMHeadModel<float>&, const std::string&);
template void save_checkpoint<double>(const LMHeadModel<double>&, const std::string&);
template void load_checkpoint_into<float>(LMHeadModel<float>&, const std::string&);
template void load_checkpoint_into<double>(LMHeadModel<double>&, const std::string&);
template std::unique_ptr<LMHeadModel<float>> load_checkpoint<float>(const std::string&);
template std::unique_ptr<LMHeadModel<double>> load_checkpoint<double>(const std::string&);

}  // namespace linrec
