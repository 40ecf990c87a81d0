#pragma once

// Byte-level DCD construction that does not go through the library writer.

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace dcd_bytes {

struct Builder {
  std::vector<std::uint8_t> bytes;
  bool big = false;

  void u32(std::uint32_t v) {
    for (int k = 0; k < 4; ++k) bytes.push_back(static_cast<std::uint8_t>(big ? v >> (24 - 8 * k) : v >> (8 * k)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int k = 0; k < 8; ++k)
      bytes.push_back(static_cast<std::uint8_t>(big ? bits >> (56 - 8 * k) : bits >> (8 * k)));
  }
  void raw(const std::string& s) { bytes.insert(bytes.end(), s.begin(), s.end()); }
};

struct Spec {
  std::int32_t n_frames = 0, first_step = 0, interval = 1, n_atoms = 1, version = 24;
  float timestep = 0.0f;
  bool unit_cell = false;
  std::vector<std::string> titles;  // padded to 80 bytes
};

/// Header (84-byte record), title record and atom-count record.
inline void header(Builder& b, const Spec& s) {
  b.u32(84);
  b.raw("CORD");
  std::int32_t icntrl[20] = {};
  icntrl[0] = s.n_frames;
  icntrl[1] = s.first_step;
  icntrl[2] = s.interval;
  icntrl[3] = s.interval * s.n_frames;
  icntrl[10] = s.unit_cell ? 1 : 0;
  icntrl[19] = s.version;
  for (int k = 0; k < 20; ++k) {
    if (k == 9)
      b.f32(s.timestep);
    else
      b.i32(icntrl[k]);
  }
  b.u32(84);
  const auto title_len = static_cast<std::uint32_t>(4 + 80 * s.titles.size());
  b.u32(title_len);
  b.i32(static_cast<std::int32_t>(s.titles.size()));
  for (auto t : s.titles) {
    t.resize(80, ' ');
    b.raw(t);
  }
  b.u32(title_len);
  b.u32(4);
  b.i32(s.n_atoms);
  b.u32(4);
}

inline void cell(Builder& b, const double (&six)[6]) {
  b.u32(48);
  for (double v : six) b.f64(v);
  b.u32(48);
}

inline void axis(Builder& b, const std::vector<float>& values) {
  const auto len = static_cast<std::uint32_t>(4 * values.size());
  b.u32(len);
  for (float v : values) b.f32(v);
  b.u32(len);
}

/// Reverses the byte order of every 4-byte word except the "CORD" signature,
/// which is character data. Only valid for files without title text.
inline std::vector<std::uint8_t> swap_words(std::vector<std::uint8_t> bytes) {
  for (std::size_t i = 0; i + 3 < bytes.size(); i += 4) {
    if (i == 4) continue;
    std::swap(bytes[i], bytes[i + 3]);
    std::swap(bytes[i + 1], bytes[i + 2]);
  }
  return bytes;
}

}  // namespace dcd_bytes
