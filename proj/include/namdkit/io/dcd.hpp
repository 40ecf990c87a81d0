#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "namdkit/types.hpp"

namespace namdkit {

enum class Endianness { little, big };

struct DcdHeader {
  std::int32_t n_frames = 0;
  std::int32_t first_step = 0;
  std::int32_t step_interval = 1;
  /// Integration step in engine (AKMA) units; stored as a 32-bit real for
  /// CHARMM-style files and as a 64-bit real for X-PLOR files (version 0).
  double timestep = 0.0;
  bool has_unit_cell = false;
  std::int32_t charmm_version = 24;
  std::vector<std::string> titles;
  std::int32_t n_atoms = 0;
  Endianness endianness = Endianness::little;

  bool operator==(const DcdHeader&) const = default;
};

/// One AKMA time unit in femtoseconds.
inline constexpr double kAkmaFemtoseconds = 48.88821;

/// Nanoseconds between stored frames, or nullopt when the header carries no timing.
std::optional<double> ns_per_frame(const DcdHeader& header);

/// Streaming DCD reader. The header is parsed on construction; frames are
/// decoded one at a time by next().
class DcdReader {
 public:
  explicit DcdReader(std::istream& in);
  explicit DcdReader(const std::string& path);

  const DcdHeader& header() const { return header_; }
  /// Next frame, nullopt at a clean end of stream. Throws
  /// PartialTrajectoryError if the stream stops inside a frame.
  std::optional<Frame> next();
  std::size_t frames_read() const { return frames_read_; }

 private:
  void read_header();
  std::size_t read_record_payload(void* dst, std::size_t expected, bool allow_eof);
  bool read_exact(void* dst, std::size_t n);

  std::unique_ptr<std::ifstream> owned_;
  std::istream* in_;
  DcdHeader header_;
  std::uint64_t offset_ = 0;
  std::size_t frames_read_ = 0;
  bool swap_ = false;
  std::vector<float> buffer_;
};

struct DcdTrajectory {
  DcdHeader header;
  std::vector<Frame> frames;
};

DcdTrajectory read_dcd(std::istream& in);
DcdTrajectory read_dcd(std::span<const std::uint8_t> bytes);
DcdTrajectory read_dcd_file(const std::string& path);

/// Serialises header and frames. header.n_frames is replaced by the frame
/// count and header.has_unit_cell must match the frames. Throws DomainError
/// before emitting anything if a frame has the wrong atom count.
std::vector<std::uint8_t> write_dcd(const DcdHeader& header, FramesView frames);
void write_dcd(std::ostream& out, const DcdHeader& header, FramesView frames);
void write_dcd_file(const std::string& path, const DcdHeader& header, FramesView frames);

}  // namespace namdkit
