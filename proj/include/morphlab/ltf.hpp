#pragma once

// Latent Tensor Format (LTF), little-endian throughout:
//
//   "LTF1" | version u16 = 1 | dtype u8 = 1 (float32) | rank u8 = 2 |
//   shape rank x u32 | row-major float32 payload, prod(shape) * 4 bytes
//
// Nothing may follow the payload.

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "morphlab/error.hpp"
#include "morphlab/latent.hpp"

namespace morphlab::ltf {

inline constexpr char kMagic[4] = {'L', 'T', 'F', '1'};
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::uint8_t kDtypeFloat32 = 1;
inline constexpr std::uint8_t kRank = 2;
inline constexpr std::size_t kHeaderSize = 4 + 2 + 1 + 1 + 4 * kRank;

static_assert(std::numeric_limits<float>::is_iec559);

namespace detail {

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | static_cast<std::uint32_t>(b[at + 1]) << 8 |
         static_cast<std::uint32_t>(b[at + 2]) << 16 |
         static_cast<std::uint32_t>(b[at + 3]) << 24;
}

}  // namespace detail

/// Serializes `m` to LTF bytes. Every component must survive narrowing to a
/// finite float32.
inline std::vector<std::uint8_t> encode(const Matrix& m) {
  if (m.rows() > std::numeric_limits<std::uint32_t>::max() ||
      m.cols() > std::numeric_limits<std::uint32_t>::max()) {
    throw InputError("tensor shape " + m.shape_string() + " exceeds u32 dimensions");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + m.size() * 4);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  detail::put_u16(out, kVersion);
  out.push_back(kDtypeFloat32);
  out.push_back(kRank);
  detail::put_u32(out, static_cast<std::uint32_t>(m.rows()));
  detail::put_u32(out, static_cast<std::uint32_t>(m.cols()));
  for (double x : m.values()) {
    const auto f = static_cast<float>(x);
    if (!std::isfinite(f)) {
      throw InputError("tensor component " + std::to_string(x) +
                       " is not representable as a finite float32");
    }
    detail::put_u32(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

inline Matrix decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw InputError("bad LTF magic");
  }
  if (bytes.size() < kHeaderSize) throw InputError("truncated LTF header");
  const auto version = static_cast<std::uint16_t>(bytes[4] | bytes[5] << 8);
  if (version != kVersion) {
    throw InputError("unsupported LTF version " + std::to_string(version));
  }
  if (bytes[6] != kDtypeFloat32) {
    throw InputError("unsupported LTF dtype code " + std::to_string(bytes[6]));
  }
  if (bytes[7] != kRank) throw InputError("unsupported LTF rank " + std::to_string(bytes[7]));

  const std::uint64_t rows = detail::get_u32(bytes, 8);
  const std::uint64_t cols = detail::get_u32(bytes, 12);
  const std::uint64_t payload = rows * cols * 4;
  const std::uint64_t available = bytes.size() - kHeaderSize;
  if (available < payload) {
    throw InputError("truncated LTF payload: shape " + std::to_string(rows) + "x" +
                     std::to_string(cols) + " needs " + std::to_string(payload) +
                     " bytes, found " + std::to_string(available));
  }
  if (available > payload) {
    throw InputError("trailing bytes after LTF payload (" +
                     std::to_string(available - payload) + ")");
  }

  std::vector<double> data(rows * cols);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const float f = std::bit_cast<float>(detail::get_u32(bytes, kHeaderSize + 4 * i));
    if (!std::isfinite(f)) {
      throw InputError("non-finite LTF component at flat index " + std::to_string(i));
    }
    data[i] = f;
  }
  return Matrix(rows, cols, std::move(data));
}

/// Writes through a sibling temp file and renames it into place.
inline void save(const Matrix& m, const std::filesystem::path& path) {
  const auto bytes = encode(m);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw InputError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw InputError("cannot move LTF into place at " + path.string());
  }
}

inline Matrix load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode(bytes);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

inline void save_latent(const LatentCode& w, const std::filesystem::path& path) {
  save(w.matrix(), path);
}

inline LatentCode load_latent(const std::filesystem::path& path) {
  return LatentCode(load(path));
}

}  // namespace morphlab::ltf
