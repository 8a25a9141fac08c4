#pragma once

// File formats.
//
//   events     text, one event per line: "t x y p" (t in seconds, p = +1/-1),
//              whitespace separated, sorted by t. Blank lines and '#' comments skipped.
//   .pgm       8-bit binary PGM (P5); written as round(clamp(L, 0, 1) * 255).
//   .f32       16-byte header (magic "ECIRF32\0", uint32 width, uint32 height,
//              little endian) followed by one or more planes of width*height
//              little-endian float32 values, row-major.
//   polys      header "ECIRPOLY", uint32 width, height, n, 0, float64 t_start,
//              t_end, then float64 keypoints (n per pixel), derivatives (n per
//              pixel), constants (1 per pixel); all little endian.
//   sequence   directory of frames plus timestamps.txt ("t filename" per line).

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecir/core_repr.hpp"
#include "ecir/event_sim.hpp"
#include "ecir/types.hpp"

namespace ecir::io {

namespace fs = std::filesystem;

EventStream parse_events(std::istream& in, const ExposureInterval& interval, const std::string& source = "<events>");
EventStream read_events(const fs::path& path, const ExposureInterval& interval);
void write_events(const fs::path& path, const EventStream& events);
void write_events(std::ostream& out, const EventStream& events);

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

Frame read_pgm(const fs::path& path);
void write_pgm(const fs::path& path, const Frame& frame);
std::vector<unsigned char> encode_pgm(const Frame& frame);
Frame decode_pgm(std::span<const unsigned char> bytes);

std::vector<Frame> read_f32(const fs::path& path);
void write_f32(const fs::path& path, std::span<const Frame> planes);
std::vector<unsigned char> encode_f32(std::span<const Frame> planes);
std::vector<Frame> decode_f32(std::span<const unsigned char> bytes);

/// Single frame by extension: ".pgm" or ".f32" (first plane).
Frame read_frame(const fs::path& path);
void write_frame(const fs::path& path, const Frame& frame);

PolyField read_polys(const fs::path& path);
void write_polys(const fs::path& path, const PolyField& polys);

/// Histogram as an .f32 file with m planes.
void write_histogram(const fs::path& path, const EventHistogram& histogram);

struct FrameSequence {
    std::vector<double> timestamps;
    std::vector<Frame> frames;
};

enum class FrameFormat { f32, pgm, both };

/// Reads a sequence directory. Without timestamps.txt, frames (*.f32 / *.pgm,
/// name order) are spread uniformly over `fallback`; with neither, FormatError.
FrameSequence read_sequence(const fs::path& dir, const std::optional<ExposureInterval>& fallback = std::nullopt);
void write_sequence(const fs::path& dir, const FrameSequence& sequence, FrameFormat format = FrameFormat::f32);

/// Sequence directory as a SharpVideo. The interval comes from the sequence
/// timestamps when timestamps.txt exists, otherwise from `fallback`.
SharpVideo read_video(const fs::path& dir, const ExposureInterval& fallback);

/// key=value text file; relative paths resolve against the manifest's directory.
class Manifest {
  public:
    Manifest() = default;
    static Manifest load(const fs::path& path);
    void save(const fs::path& path) const;

    void set(const std::string& key, const std::string& value) { entries_[key] = value; }
    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    std::optional<std::string> get(const std::string& key) const;
    std::optional<double> get_double(const std::string& key) const;
    std::optional<long long> get_int(const std::string& key) const;

    /// Resolved path; throws ValidationError if the key is set but the file is missing.
    std::optional<fs::path> get_path(const std::string& key) const;

    /// Interval from t_start/t_end when both are present.
    std::optional<ExposureInterval> interval() const;

    const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

  private:
    std::map<std::string, std::string> entries_;
    fs::path base_dir_;
};

/// Command-line flag beats manifest entry beats built-in default.
template <class T>
T resolve(const std::optional<T>& flag, const std::optional<T>& manifest_value, const T& fallback)
{
    if (flag) return *flag;
    if (manifest_value) return *manifest_value;
    return fallback;
}

}  // namespace ecir::io
