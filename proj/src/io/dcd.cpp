#include "namdkit/io/dcd.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>

#include "namdkit/error.hpp"

namespace namdkit {
namespace {

constexpr std::uint32_t kHeaderSize = 84;
constexpr std::size_t kTitleLength = 80;
constexpr std::size_t kCellRecordSize = 48;

std::uint32_t bswap32(std::uint32_t v) {
  return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
}

std::uint64_t bswap64(std::uint64_t v) {
  return (static_cast<std::uint64_t>(bswap32(static_cast<std::uint32_t>(v))) << 32) |
         bswap32(static_cast<std::uint32_t>(v >> 32));
}

constexpr bool kHostLittle = std::endian::native == std::endian::little;

// All values are converted between host order and file order in place.
void swap_words32(void* data, std::size_t count) {
  auto* p = static_cast<std::uint32_t*>(data);
  for (std::size_t i = 0; i < count; ++i) p[i] = bswap32(p[i]);
}

void swap_words64(void* data, std::size_t count) {
  auto* p = static_cast<std::uint64_t*>(data);
  for (std::size_t i = 0; i < count; ++i) p[i] = bswap64(p[i]);
}

double angle_from_slot(double v, bool cosines) {
  if (!cosines) return v;
  // 90 - asin keeps a stored 0 at exactly 90 degrees
  return 90.0 - std::asin(v) * 180.0 / std::numbers::pi;
}

}  // namespace

bool UnitCell::is_orthorhombic(double tol) const {
  return std::abs(alpha - 90.0) <= tol && std::abs(beta - 90.0) <= tol && std::abs(gamma - 90.0) <= tol;
}

std::optional<double> ns_per_frame(const DcdHeader& h) {
  if (h.step_interval <= 0 || !(h.timestep > 0)) return std::nullopt;
  return h.step_interval * h.timestep * kAkmaFemtoseconds * 1e-6;
}

DcdReader::DcdReader(std::istream& in) : in_(&in) { read_header(); }

DcdReader::DcdReader(const std::string& path)
    : owned_(std::make_unique<std::ifstream>(path, std::ios::binary)), in_(owned_.get()) {
  if (!*owned_) throw IoError("cannot open " + path);
  read_header();
}

bool DcdReader::read_exact(void* dst, std::size_t n) {
  in_->read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  const auto got = static_cast<std::size_t>(in_->gcount());
  offset_ += got;
  return got == n;
}

// Reads one Fortran record whose payload must be `expected` bytes. Returns 0
// on a clean EOF before the leading marker when allow_eof is set.
std::size_t DcdReader::read_record_payload(void* dst, std::size_t expected, bool allow_eof) {
  const std::uint64_t start = offset_;
  std::uint32_t marker = 0;
  if (!read_exact(&marker, 4)) {
    if (allow_eof && offset_ == start) return 0;
    throw PartialTrajectoryError(frames_read_, start);
  }
  if (swap_) marker = bswap32(marker);
  if (marker != expected)
    throw CorruptRecordError("record length marker " + std::to_string(marker) + ", expected " +
                                 std::to_string(expected),
                             start);
  if (!read_exact(dst, expected)) throw PartialTrajectoryError(frames_read_, start);
  std::uint32_t trailer = 0;
  const std::uint64_t trailer_at = offset_;
  if (!read_exact(&trailer, 4)) throw PartialTrajectoryError(frames_read_, start);
  if (swap_) trailer = bswap32(trailer);
  if (trailer != marker)
    throw CorruptRecordError("trailing marker " + std::to_string(trailer) + " does not match leading marker " +
                                 std::to_string(marker),
                             trailer_at);
  return expected;
}

void DcdReader::read_header() {
  std::uint32_t first = 0;
  if (!read_exact(&first, 4)) throw CorruptRecordError("stream too short for a DCD header", 0);
  const std::uint32_t as_little = kHostLittle ? first : bswap32(first);
  const std::uint32_t as_big = kHostLittle ? bswap32(first) : first;
  if (as_little == kHeaderSize)
    header_.endianness = Endianness::little;
  else if (as_big == kHeaderSize)
    header_.endianness = Endianness::big;
  else
    throw CorruptRecordError("leading marker is not 84 in either byte order", 0);
  swap_ = (header_.endianness == Endianness::little) != kHostLittle;

  std::array<std::uint8_t, kHeaderSize> raw{};
  if (!read_exact(raw.data(), raw.size())) throw CorruptRecordError("truncated header record", 4);
  if (std::memcmp(raw.data(), "CORD", 4) != 0) throw CorruptRecordError("missing CORD signature", 4);
  std::uint32_t trailer = 0;
  if (!read_exact(&trailer, 4)) throw CorruptRecordError("truncated header record", 88);
  if (swap_) trailer = bswap32(trailer);
  if (trailer != kHeaderSize) throw CorruptRecordError("header trailing marker mismatch", 88);

  std::array<std::int32_t, 20> icntrl{};
  std::memcpy(icntrl.data(), raw.data() + 4, 80);
  std::array<std::uint8_t, 80> slots{};
  std::memcpy(slots.data(), raw.data() + 4, 80);
  if (swap_) swap_words32(icntrl.data(), icntrl.size());

  header_.n_frames = icntrl[0];
  header_.first_step = icntrl[1];
  header_.step_interval = icntrl[2];
  header_.charmm_version = icntrl[19];
  if (icntrl[8] != 0) throw CorruptRecordError("fixed-atom DCD files are not supported", 4 + 4 + 8 * 4);
  if (header_.charmm_version != 0) {
    float dt = 0;
    std::memcpy(&dt, &icntrl[9], 4);
    header_.timestep = dt;
    header_.has_unit_cell = icntrl[10] != 0;
  } else {
    std::uint64_t bits = 0;
    std::memcpy(&bits, slots.data() + 36, 8);
    if (swap_) bits = bswap64(bits);
    header_.timestep = std::bit_cast<double>(bits);
    header_.has_unit_cell = false;
  }

  // title record: count followed by 80-byte lines
  const std::uint64_t title_at = offset_;
  std::uint32_t marker = 0;
  if (!read_exact(&marker, 4)) throw CorruptRecordError("missing title record", title_at);
  if (swap_) marker = bswap32(marker);
  if (marker < 4 || (marker - 4) % kTitleLength != 0)
    throw CorruptRecordError("title record length " + std::to_string(marker) + " is not 4 + 80*n", title_at);
  std::vector<char> titles(marker);
  if (!read_exact(titles.data(), marker)) throw CorruptRecordError("truncated title record", title_at);
  std::uint32_t title_trailer = 0;
  if (!read_exact(&title_trailer, 4)) throw CorruptRecordError("truncated title record", title_at);
  if (swap_) title_trailer = bswap32(title_trailer);
  if (title_trailer != marker) throw CorruptRecordError("title record trailing marker mismatch", offset_ - 4);
  std::int32_t n_titles = 0;
  std::memcpy(&n_titles, titles.data(), 4);
  if (swap_) n_titles = static_cast<std::int32_t>(bswap32(static_cast<std::uint32_t>(n_titles)));
  if (n_titles < 0 || static_cast<std::uint32_t>(n_titles) * kTitleLength + 4 != marker)
    throw CorruptRecordError("title count does not match record length", title_at);
  for (std::int32_t k = 0; k < n_titles; ++k) {
    std::string line(titles.data() + 4 + k * kTitleLength, kTitleLength);
    const auto last = line.find_last_not_of(std::string(" \0", 2));
    line.erase(last == std::string::npos ? 0 : last + 1);
    header_.titles.push_back(std::move(line));
  }

  std::int32_t n_atoms = 0;
  const std::uint64_t natom_at = offset_;
  try {
    read_record_payload(&n_atoms, 4, false);
  } catch (const PartialTrajectoryError&) {
    throw CorruptRecordError("truncated atom-count record", natom_at);
  }
  if (swap_) n_atoms = static_cast<std::int32_t>(bswap32(static_cast<std::uint32_t>(n_atoms)));
  if (n_atoms <= 0) throw CorruptRecordError("atom count must be positive", natom_at);
  header_.n_atoms = n_atoms;
  buffer_.resize(static_cast<std::size_t>(n_atoms));
}

std::optional<Frame> DcdReader::next() {
  const std::size_t n = static_cast<std::size_t>(header_.n_atoms);
  const std::uint64_t frame_start = offset_;
  Frame frame;
  frame.index = static_cast<std::int64_t>(frames_read_);
  bool first_record = true;

  if (header_.has_unit_cell) {
    std::array<double, 6> cell{};
    if (read_record_payload(cell.data(), kCellRecordSize, true) == 0) return std::nullopt;
    first_record = false;
    if (swap_) swap_words64(cell.data(), cell.size());
    const std::array angle_slots{cell[1], cell[3], cell[4]};
    const bool cosines = std::all_of(angle_slots.begin(), angle_slots.end(),
                                     [](double v) { return v >= -1.0 && v <= 1.0; });
    UnitCell uc;
    uc.a = cell[0];
    uc.gamma = angle_from_slot(cell[1], cosines);
    uc.b = cell[2];
    uc.beta = angle_from_slot(cell[3], cosines);
    uc.alpha = angle_from_slot(cell[4], cosines);
    uc.c = cell[5];
    frame.unit_cell = uc;
  }

  frame.coords.resize(n);
  for (int axis = 0; axis < 3; ++axis) {
    try {
      if (read_record_payload(buffer_.data(), 4 * n, first_record) == 0) return std::nullopt;
    } catch (const PartialTrajectoryError&) {
      throw PartialTrajectoryError(frames_read_, frame_start);
    }
    first_record = false;
    if (swap_) swap_words32(buffer_.data(), n);
    for (std::size_t i = 0; i < n; ++i) frame.coords[i][axis] = buffer_[i];
  }
  ++frames_read_;
  return frame;
}

DcdTrajectory read_dcd(std::istream& in) {
  DcdReader reader(in);
  DcdTrajectory out;
  out.header = reader.header();
  if (out.header.n_frames > 0) out.frames.reserve(static_cast<std::size_t>(out.header.n_frames));
  while (auto frame = reader.next()) out.frames.push_back(std::move(*frame));
  return out;
}

DcdTrajectory read_dcd(std::span<const std::uint8_t> bytes) {
  std::istringstream in(std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size()), std::ios::binary);
  return read_dcd(in);
}

DcdTrajectory read_dcd_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_dcd(in);
}

namespace {

class RecordWriter {
 public:
  RecordWriter(std::ostream& out, bool swap) : out_(out), swap_(swap) {}

  void marker(std::uint32_t v) {
    if (swap_) v = bswap32(v);
    out_.write(reinterpret_cast<const char*>(&v), 4);
  }
  void raw(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }

  template <typename T>
  void words(std::vector<T> v) {
    if (swap_) {
      if constexpr (sizeof(T) == 4) swap_words32(v.data(), v.size());
      if constexpr (sizeof(T) == 8) swap_words64(v.data(), v.size());
    }
    raw(v.data(), v.size() * sizeof(T));
  }

  template <typename T>
  void record(const std::vector<T>& v) {
    const auto bytes = static_cast<std::uint32_t>(v.size() * sizeof(T));
    marker(bytes);
    words(v);
    marker(bytes);
  }

 private:
  std::ostream& out_;
  bool swap_;
};

void check_frames(const DcdHeader& header, FramesView frames) {
  if (header.n_atoms <= 0) throw DomainError("DCD header must declare at least one atom");
  for (std::size_t f = 0; f < frames.size(); ++f) {
    if (frames[f].coords.size() != static_cast<std::size_t>(header.n_atoms))
      throw DomainError("frame " + std::to_string(f) + " has " + std::to_string(frames[f].coords.size()) +
                        " atoms, header declares " + std::to_string(header.n_atoms));
    if (frames[f].unit_cell.has_value() != header.has_unit_cell)
      throw DomainError("frame " + std::to_string(f) + " unit cell presence disagrees with header flag");
  }
  if (header.has_unit_cell && header.charmm_version == 0)
    throw DomainError("X-PLOR format DCD files cannot carry unit cells");
}

}  // namespace

void write_dcd(std::ostream& out, const DcdHeader& header, FramesView frames) {
  check_frames(header, frames);
  const bool swap = (header.endianness == Endianness::little) != kHostLittle;
  RecordWriter w(out, swap);

  std::vector<std::int32_t> icntrl(20, 0);
  icntrl[0] = static_cast<std::int32_t>(frames.size());
  icntrl[1] = header.first_step;
  icntrl[2] = header.step_interval;
  icntrl[3] = header.step_interval * static_cast<std::int32_t>(frames.size());
  icntrl[19] = header.charmm_version;
  std::uint64_t xplor_dt = 0;
  if (header.charmm_version != 0) {
    const float dt = static_cast<float>(header.timestep);
    std::memcpy(&icntrl[9], &dt, 4);
    icntrl[10] = header.has_unit_cell ? 1 : 0;
  } else {
    xplor_dt = std::bit_cast<std::uint64_t>(header.timestep);
  }
  w.marker(kHeaderSize);
  w.raw("CORD", 4);
  if (header.charmm_version != 0) {
    w.words(icntrl);
  } else {
    w.words(std::vector<std::int32_t>(icntrl.begin(), icntrl.begin() + 9));
    w.words(std::vector<std::uint64_t>{xplor_dt});
    w.words(std::vector<std::int32_t>(icntrl.begin() + 11, icntrl.end()));
  }
  w.marker(kHeaderSize);

  const auto title_bytes = static_cast<std::uint32_t>(4 + kTitleLength * header.titles.size());
  w.marker(title_bytes);
  w.words(std::vector<std::int32_t>{static_cast<std::int32_t>(header.titles.size())});
  for (const auto& title : header.titles) {
    std::string line = title.substr(0, kTitleLength);
    line.resize(kTitleLength, ' ');
    w.raw(line.data(), kTitleLength);
  }
  w.marker(title_bytes);

  w.record(std::vector<std::int32_t>{header.n_atoms});

  const std::size_t n = static_cast<std::size_t>(header.n_atoms);
  std::vector<float> axis_values(n);
  for (const auto& frame : frames) {
    if (header.has_unit_cell) {
      const auto& c = *frame.unit_cell;
      w.record(std::vector<double>{c.a, c.gamma, c.b, c.beta, c.alpha, c.c});
    }
    for (int axis = 0; axis < 3; ++axis) {
      for (std::size_t i = 0; i < n; ++i) axis_values[i] = static_cast<float>(frame.coords[i][axis]);
      w.record(axis_values);
    }
  }
  if (!out) throw IoError("failed writing DCD stream");
}

std::vector<std::uint8_t> write_dcd(const DcdHeader& header, FramesView frames) {
  std::ostringstream out(std::ios::binary);
  write_dcd(out, header, frames);
  const auto s = out.str();
  return {s.begin(), s.end()};
}

void write_dcd_file(const std::string& path, const DcdHeader& header, FramesView frames) {
  check_frames(header, frames);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_dcd(out, header, frames);
}

}  // namespace namdkit
