// Copyright 2026 The boxdeform Authors
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

// PNG (8-bit RGB) and PBM codecs.

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "boxdeform/error.hpp"
#include "boxdeform/renderer.hpp"

namespace boxdeform {

namespace {

constexpr unsigned char kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>((v >> 24) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>(v & 0xff));
}

std::uint32_t get_u32(const std::string& in, std::size_t pos) {
  auto b = [&](std::size_t i) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i]));
  };
  return (b(0) << 24) | (b(1) << 16) | (b(2) << 8) | b(3);
}

void put_chunk(std::string& out, const char type[4], const std::string& data) {
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  std::string body(type, 4);
  body += data;
  out += body;
  put_u32(out, static_cast<std::uint32_t>(
                   crc32(0L, reinterpret_cast<const Bytef*>(body.data()),
                         static_cast<uInt>(body.size()))));
}

int paeth(int a, int b, int c) {
  int p = a + b - c;
  int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string encode_png(const Image& image) {
  const std::size_t stride = 3 * static_cast<std::size_t>(image.width);
  std::string raw;
  raw.reserve((stride + 1) * image.height);
  for (int y = 0; y < image.height; ++y) {
    raw.push_back('\0');  // filter: none
    raw.append(reinterpret_cast<const char*>(image.rgb.data()) + y * stride,
               stride);
  }
  uLongf cap = compressBound(static_cast<uLong>(raw.size()));
  std::string packed(cap, '\0');
  if (compress2(reinterpret_cast<Bytef*>(packed.data()), &cap,
                reinterpret_cast<const Bytef*>(raw.data()),
                static_cast<uLong>(raw.size()), 6) != Z_OK)
    throw Error(ErrorCode::kInternal, "zlib compression failed");
  packed.resize(cap);

  std::string out(reinterpret_cast<const char*>(kPngSignature), 8);
  std::string ihdr;
  put_u32(ihdr, static_cast<std::uint32_t>(image.width));
  put_u32(ihdr, static_cast<std::uint32_t>(image.height));
  ihdr += std::string("\x08\x02\x00\x00\x00", 5);  // 8-bit RGB
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", packed);
  put_chunk(out, "IEND", "");
  return out;
}

Image decode_png(const std::string& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kPngSignature, 8) != 0)
    throw ParseError(0, "not a PNG stream");
  std::size_t pos = 8;
  int width = 0, height = 0;
  std::string idat;
  while (pos + 12 <= bytes.size()) {
    std::uint32_t len = get_u32(bytes, pos);
    std::string type = bytes.substr(pos + 4, 4);
    if (pos + 12 + len > bytes.size()) throw ParseError(0, "truncated PNG chunk");
    std::uint32_t crc = get_u32(bytes, pos + 8 + len);
    std::uint32_t want = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(bytes.data() + pos + 4), len + 4));
    if (crc != want) throw ParseError(0, "PNG chunk " + type + " has bad CRC");
    if (type == "IHDR") {
      width = static_cast<int>(get_u32(bytes, pos + 8));
      height = static_cast<int>(get_u32(bytes, pos + 12));
      if (bytes[pos + 16] != 8 || bytes[pos + 17] != 2 || bytes[pos + 20] != 0)
        throw ParseError(0, "only 8-bit RGB non-interlaced PNG supported");
    } else if (type == "IDAT") {
      idat.append(bytes, pos + 8, len);
    } else if (type == "IEND") {
      break;
    }
    pos += 12 + len;
  }
  if (width <= 0 || height <= 0) throw ParseError(0, "PNG missing IHDR");

  const std::size_t stride = 3 * static_cast<std::size_t>(width);
  std::string raw((stride + 1) * height, '\0');
  uLongf raw_len = static_cast<uLongf>(raw.size());
  if (uncompress(reinterpret_cast<Bytef*>(raw.data()), &raw_len,
                 reinterpret_cast<const Bytef*>(idat.data()),
                 static_cast<uLong>(idat.size())) != Z_OK ||
      raw_len != raw.size())
    throw ParseError(0, "corrupt PNG image data");

  Image img;
  img.width = width;
  img.height = height;
  img.rgb.resize(stride * height);
  for (int y = 0; y < height; ++y) {
    const auto filter = static_cast<unsigned char>(raw[y * (stride + 1)]);
    const auto* src = reinterpret_cast<const unsigned char*>(raw.data()) +
                      y * (stride + 1) + 1;
    std::uint8_t* dst = img.rgb.data() + y * stride;
    const std::uint8_t* prev = y > 0 ? dst - stride : nullptr;
    for (std::size_t i = 0; i < stride; ++i) {
      int a = i >= 3 ? dst[i - 3] : 0;
      int b = prev ? prev[i] : 0;
      int c = prev && i >= 3 ? prev[i - 3] : 0;
      int pred = 0;
      switch (filter) {
        case 0: pred = 0; break;
        case 1: pred = a; break;
        case 2: pred = b; break;
        case 3: pred = (a + b) / 2; break;
        case 4: pred = paeth(a, b, c); break;
        default: throw ParseError(0, "unknown PNG filter");
      }
      dst[i] = static_cast<std::uint8_t>((src[i] + pred) & 0xff);
    }
  }
  return img;
}

void write_png(const Image& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << encode_png(image);
}

Mask read_pbm(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  std::size_t pos = 0;
  auto next_token = [&]() {
    while (pos < data.size()) {
      if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(data[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    std::size_t start = pos;
    while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos])) &&
           data[pos] != '#')
      ++pos;
    return data.substr(start, pos - start);
  };
  std::string magic = next_token();
  if (magic != "P1" && magic != "P4")
    throw ParseError(1, path.string() + " is not a PBM file");
  Mask m;
  try {
    m.width = std::stoi(next_token());
    m.height = std::stoi(next_token());
  } catch (const std::exception&) {
    throw ParseError(1, path.string() + ": bad PBM header");
  }
  if (m.width <= 0 || m.height <= 0) throw ParseError(1, "bad PBM size");
  m.bits.assign(static_cast<std::size_t>(m.width) * m.height, 0);
  if (magic == "P1") {
    std::size_t i = 0;
    while (i < m.bits.size() && pos < data.size()) {
      char c = data[pos++];
      if (c == '0' || c == '1') m.bits[i++] = static_cast<std::uint8_t>(c - '0');
    }
    if (i != m.bits.size()) throw ParseError(1, "PBM pixel data truncated");
  } else {
    ++pos;  // single whitespace after the header
    const std::size_t row_bytes = (static_cast<std::size_t>(m.width) + 7) / 8;
    if (pos + row_bytes * m.height > data.size())
      throw ParseError(1, "PBM pixel data truncated");
    for (int y = 0; y < m.height; ++y)
      for (int x = 0; x < m.width; ++x) {
        auto byte = static_cast<unsigned char>(data[pos + y * row_bytes + x / 8]);
        m.bits[static_cast<std::size_t>(y) * m.width + x] = (byte >> (7 - x % 8)) & 1;
      }
  }
  return m;
}

void write_pbm(const Mask& mask, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P4\n" << mask.width << ' ' << mask.height << '\n';
  const std::size_t row_bytes = (static_cast<std::size_t>(mask.width) + 7) / 8;
  std::string row(row_bytes, '\0');
  for (int y = 0; y < mask.height; ++y) {
    std::fill(row.begin(), row.end(), '\0');
    for (int x = 0; x < mask.width; ++x)
      if (mask.bits[static_cast<std::size_t>(y) * mask.width + x])
        row[x / 8] = static_cast<char>(row[x / 8] | (0x80 >> (x % 8)));
    out << row;
  }
}

}  // namespace boxdeform
