// Copyright 2026 The binet Authors
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

#include "binet/binio.hpp"

#include <bit>
#include <fstream>

#include <zlib.h>

#include "binet/error.hpp"

namespace binet::binio {

void Writer::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
void Writer::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void Writer::str(std::string_view s) {
  u32(static_cast<std::uint32_t>(s.size()));
  buf_.insert(buf_.end(), s.begin(), s.end());
}

void Writer::f32s(std::span<const float> v) {
  u64(v.size());
  for (float x : v) f32(x);
}

void Writer::u64s(std::span<const std::uint64_t> v) {
  u64(v.size());
  for (std::uint64_t x : v) u64(x);
}

void Writer::tensor(const Tensor& t) {
  u32(static_cast<std::uint32_t>(t.rank()));
  for (std::size_t d : t.shape()) u64(d);
  for (float x : t.data()) f32(x);
}

void Reader::need(std::size_t n) const {
  if (n > remaining()) {
    throw TruncatedError("unexpected end of data: need " + std::to_string(n) + " bytes, have " +
                         std::to_string(remaining()));
  }
}

float Reader::f32() { return std::bit_cast<float>(u32()); }
double Reader::f64() { return std::bit_cast<double>(u64()); }

std::string Reader::str() {
  const std::uint32_t n = u32();
  const auto b = bytes(n);
  return {b.begin(), b.end()};
}

std::span<const std::uint8_t> Reader::bytes(std::size_t n) {
  need(n);
  auto out = bytes_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::vector<float> Reader::f32s() {
  const std::uint64_t n = u64();
  need(n * 4);
  std::vector<float> v(n);
  for (auto& x : v) x = f32();
  return v;
}

std::vector<std::uint64_t> Reader::u64s() {
  const std::uint64_t n = u64();
  need(n * 8);
  std::vector<std::uint64_t> v(n);
  for (auto& x : v) x = u64();
  return v;
}

Tensor Reader::tensor() {
  const std::uint32_t rank = u32();
  if (rank > 8) throw FormatError("tensor rank " + std::to_string(rank) + " out of range");
  Shape shape(rank);
  for (auto& d : shape) d = u64();
  const std::size_t n = shape_numel(shape);
  need(n * 4);
  Tensor t(shape);
  for (std::size_t i = 0; i < n; ++i) t[i] = f32();
  return t;
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) noexcept {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  std::size_t off = 0;
  while (off < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
    crc = ::crc32(crc, bytes.data() + off, chunk);
    off += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

namespace {
constexpr std::size_t kHeaderBytes = 4 + 2 + 8;

std::string magic_str(std::array<char, 4> m) { return {m.begin(), m.end()}; }
}  // namespace

std::vector<std::uint8_t> encode_container(std::array<char, 4> magic, std::uint16_t version,
                                           std::span<const Record> records) {
  Writer payload;
  for (const Record& r : records) {
    payload.u16(r.tag);
    payload.u32(static_cast<std::uint32_t>(r.value.size()));
    payload.bytes(r.value);
  }
  Writer out;
  for (char c : magic) out.u8(static_cast<std::uint8_t>(c));
  out.u16(version);
  out.u64(payload.data().size());
  out.bytes(payload.data());
  out.u32(crc32(out.data()));
  return out.take();
}

std::vector<Record> decode_container(std::span<const std::uint8_t> bytes,
                                     std::array<char, 4> magic, std::uint16_t version) {
  if (bytes.size() < 4) throw TruncatedError("file shorter than its magic number");
  if (!std::equal(magic.begin(), magic.end(), bytes.begin())) {
    throw FormatError("bad magic: expected '" + magic_str(magic) + "'");
  }
  Reader head(bytes);
  head.bytes(4);
  const std::uint16_t found = head.u16();
  if (found != version) {
    throw VersionError("unsupported " + magic_str(magic) + " version " + std::to_string(found) +
                       " (this build reads version " + std::to_string(version) + ")");
  }
  const std::uint64_t payload_len = head.u64();
  if (payload_len > bytes.size() || bytes.size() - kHeaderBytes < payload_len + 4) {
    throw TruncatedError("file holds " + std::to_string(bytes.size()) + " bytes, header declares " +
                         std::to_string(kHeaderBytes + payload_len + 4));
  }
  const std::size_t body = kHeaderBytes + payload_len;
  Reader tail(bytes.subspan(body, 4));
  const std::uint32_t stored = tail.u32();
  if (stored != crc32(bytes.first(body))) throw ChecksumError("CRC32 mismatch");
  if (bytes.size() != body + 4) throw FormatError("trailing bytes after checksum");

  std::vector<Record> records;
  Reader r(bytes.subspan(kHeaderBytes, payload_len));
  while (!r.done()) {
    Record rec;
    rec.tag = r.u16();
    const std::uint32_t len = r.u32();
    const auto v = r.bytes(len);
    rec.value.assign(v.begin(), v.end());
    records.push_back(std::move(rec));
  }
  return records;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out.flush()) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename onto " + path.string());
  }
}

void write_text_atomic(const std::filesystem::path& path, std::string_view text) {
  write_file_atomic(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

}  // namespace binet::binio
