#include "ecir/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace ecir::io {

namespace {

constexpr std::array<unsigned char, 8> kF32Magic = {'E', 'C', 'I', 'R', 'F', '3', '2', '\0'};
constexpr std::array<unsigned char, 8> kPolyMagic = {'E', 'C', 'I', 'R', 'P', 'O', 'L', 'Y'};
constexpr std::size_t kF32HeaderSize = 16;
constexpr const char* kTimestampsFile = "timestamps.txt";

std::vector<unsigned char> read_bytes(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& path, std::span<const unsigned char> bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("write failed for " + path.string());
}

template <class U>
void put_le(std::vector<unsigned char>& out, U value)
{
    for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<unsigned char>(value >> (8 * i)));
}

template <class U>
U get_le(std::span<const unsigned char> bytes, std::size_t offset)
{
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[offset + i]) << (8 * i);
    return value;
}

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s)
{
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
        if (i > start) tokens.push_back(s.substr(start, i - start));
    }
    return tokens;
}

template <class T>
std::optional<T> parse_number(std::string_view token)
{
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    T value{};
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) return std::nullopt;
    return value;
}

std::string_view strip_comment(std::string_view line)
{
    return line.substr(0, line.find('#'));
}

}  // namespace

std::string format_double(double value)
{
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return {buf.data(), ptr};
}

EventStream parse_events(std::istream& in, const ExposureInterval& interval, const std::string& source)
{
    EventStream stream{{}, interval};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto body = trim(strip_comment(line));
        if (body.empty()) continue;
        const auto tokens = split_ws(body);
        if (tokens.size() != 4) throw ParseError(source, lineno, "expected 't x y p', got " + std::to_string(tokens.size()) + " fields");
        const auto t = parse_number<double>(tokens[0]);
        const auto x = parse_number<std::int32_t>(tokens[1]);
        const auto y = parse_number<std::int32_t>(tokens[2]);
        const auto p = parse_number<int>(tokens[3]);
        if (!t || !std::isfinite(*t)) throw ParseError(source, lineno, "bad timestamp '" + std::string(tokens[0]) + "'");
        if (!x || !y) throw ParseError(source, lineno, "bad pixel coordinates");
        if (!p || (*p != 1 && *p != -1)) throw ParseError(source, lineno, "polarity must be 1 or -1");
        if (!stream.events.empty() && *t < stream.events.back().t) {
            throw ValidationError(source + ":" + std::to_string(lineno) + ": events not sorted by time");
        }
        if (!interval.contains(*t)) {
            throw ValidationError(source + ":" + std::to_string(lineno) + ": timestamp outside exposure interval");
        }
        stream.events.push_back({*x, *y, *t, static_cast<std::int8_t>(*p)});
    }
    return stream;
}

EventStream read_events(const fs::path& path, const ExposureInterval& interval)
{
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open event file " + path.string());
    return parse_events(in, interval, path.string());
}

void write_events(std::ostream& out, const EventStream& events)
{
    for (const Event& e : events.events) {
        out << format_double(e.t) << ' ' << e.x << ' ' << e.y << ' ' << static_cast<int>(e.p) << '\n';
    }
}

void write_events(const fs::path& path, const EventStream& events)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot write " + path.string());
    write_events(out, events);
}

std::vector<unsigned char> encode_pgm(const Frame& frame)
{
    const std::string header = "P5\n" + std::to_string(frame.width()) + " " + std::to_string(frame.height()) + "\n255\n";
    std::vector<unsigned char> out(header.begin(), header.end());
    out.reserve(header.size() + frame.size());
    for (double v : frame.values()) out.push_back(static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
    return out;
}

Frame decode_pgm(std::span<const unsigned char> bytes)
{
    std::size_t pos = 0;
    const auto skip_space = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    const auto read_uint = [&]() -> std::size_t {
        skip_space();
        std::size_t value = 0;
        const std::size_t start = pos;
        while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') value = value * 10 + (bytes[pos++] - '0');
        if (pos == start || pos - start > 9) throw FormatError("pgm: malformed header");
        return value;
    };
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw FormatError("pgm: bad magic (expected P5)");
    pos = 2;
    const std::size_t width = read_uint();
    const std::size_t height = read_uint();
    const std::size_t maxval = read_uint();
    if (width == 0 || height == 0) throw FormatError("pgm: zero dimension");
    if (maxval == 0 || maxval > 255) throw FormatError("pgm: only 8-bit maxval is supported");
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw FormatError("pgm: malformed header");
    ++pos;
    if (bytes.size() - pos < width * height) throw FormatError("pgm: truncated pixel data");
    Frame frame(width, height);
    for (std::size_t i = 0; i < frame.size(); ++i) frame[i] = static_cast<double>(bytes[pos + i]) / static_cast<double>(maxval);
    return frame;
}

Frame read_pgm(const fs::path& path) { return decode_pgm(read_bytes(path)); }
void write_pgm(const fs::path& path, const Frame& frame) { write_bytes(path, encode_pgm(frame)); }

std::vector<unsigned char> encode_f32(std::span<const Frame> planes)
{
    if (planes.empty()) throw InvalidArgument("f32: no planes to write");
    const Frame& first = planes.front();
    std::vector<unsigned char> out(kF32Magic.begin(), kF32Magic.end());
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(first.width()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(first.height()));
    out.reserve(kF32HeaderSize + planes.size() * first.size() * 4);
    for (const Frame& plane : planes) {
        if (!plane.same_shape(first)) throw InvalidArgument("f32: planes differ in size");
        for (double v : plane.values()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
    return out;
}

std::vector<Frame> decode_f32(std::span<const unsigned char> bytes)
{
    if (bytes.size() < kF32HeaderSize || !std::equal(kF32Magic.begin(), kF32Magic.end(), bytes.begin())) {
        throw FormatError("f32: bad magic (expected ECIRF32)");
    }
    const std::size_t width = get_le<std::uint32_t>(bytes, 8);
    const std::size_t height = get_le<std::uint32_t>(bytes, 12);
    const std::size_t plane_bytes = width * height * 4;
    const std::size_t payload = bytes.size() - kF32HeaderSize;
    if (plane_bytes == 0 || payload == 0 || payload % plane_bytes != 0) {
        throw FormatError("f32: payload of " + std::to_string(payload) + " bytes does not match " + std::to_string(width) +
                          "x" + std::to_string(height) + " planes");
    }
    std::vector<Frame> planes(payload / plane_bytes, Frame(width, height));
    std::size_t offset = kF32HeaderSize;
    for (Frame& plane : planes) {
        for (std::size_t i = 0; i < plane.size(); ++i, offset += 4) {
            plane[i] = std::bit_cast<float>(get_le<std::uint32_t>(bytes, offset));
        }
    }
    return planes;
}

std::vector<Frame> read_f32(const fs::path& path) { return decode_f32(read_bytes(path)); }
void write_f32(const fs::path& path, std::span<const Frame> planes) { write_bytes(path, encode_f32(planes)); }

Frame read_frame(const fs::path& path)
{
    const auto ext = path.extension();
    if (ext == ".pgm") return read_pgm(path);
    if (ext == ".f32") return std::move(read_f32(path).front());
    throw FormatError("unsupported frame format '" + ext.string() + "' (use .pgm or .f32)");
}

void write_frame(const fs::path& path, const Frame& frame)
{
    const auto ext = path.extension();
    if (ext == ".pgm") return write_pgm(path, frame);
    if (ext == ".f32") return write_f32(path, std::span<const Frame>(&frame, 1));
    throw FormatError("unsupported frame format '" + ext.string() + "' (use .pgm or .f32)");
}

void write_polys(const fs::path& path, const PolyField& polys)
{
    std::vector<unsigned char> out(kPolyMagic.begin(), kPolyMagic.end());
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(polys.width()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(polys.height()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(polys.n()));
    put_le<std::uint32_t>(out, 0);
    const auto put_f64 = [&](double v) { put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v)); };
    put_f64(polys.interval().t_start());
    put_f64(polys.interval().t_end());
    for (double v : polys.keypoints.times) put_f64(v);
    for (double v : polys.derivatives) put_f64(v);
    for (double v : polys.constants) put_f64(v);
    write_bytes(path, out);
}

PolyField read_polys(const fs::path& path)
{
    const auto bytes = read_bytes(path);
    constexpr std::size_t header = 8 + 16 + 16;
    if (bytes.size() < header || !std::equal(kPolyMagic.begin(), kPolyMagic.end(), bytes.begin())) {
        throw FormatError(path.string() + ": bad magic (expected ECIRPOLY)");
    }
    const std::size_t width = get_le<std::uint32_t>(bytes, 8);
    const std::size_t height = get_le<std::uint32_t>(bytes, 12);
    const std::size_t n = get_le<std::uint32_t>(bytes, 16);
    if (width == 0 || height == 0 || n < 1 || n > kMaxKeypoints) throw FormatError(path.string() + ": bad dimensions");
    const std::size_t pixels = width * height;
    if (bytes.size() != header + 8 * (2 * pixels * n + pixels)) throw FormatError(path.string() + ": size does not match header");

    std::size_t offset = 24;
    const auto get_f64 = [&] {
        const double v = std::bit_cast<double>(get_le<std::uint64_t>(bytes, offset));
        offset += 8;
        return v;
    };
    const double t_start = get_f64();
    const double t_end = get_f64();
    KeypointField kps{width, height, n, ExposureInterval(t_start, t_end), std::vector<double>(pixels * n)};
    for (double& v : kps.times) v = get_f64();
    PolyField polys(std::move(kps));
    for (double& v : polys.derivatives) v = get_f64();
    for (double& v : polys.constants) v = get_f64();
    return polys;
}

void write_histogram(const fs::path& path, const EventHistogram& histogram)
{
    std::vector<Frame> planes;
    planes.reserve(histogram.m);
    for (std::size_t b = 0; b < histogram.m; ++b) planes.push_back(histogram.plane(b));
    write_f32(path, planes);
}

FrameSequence read_sequence(const fs::path& dir, const std::optional<ExposureInterval>& fallback)
{
    if (!fs::is_directory(dir)) throw FormatError("not a directory: " + dir.string());
    FrameSequence seq;
    const fs::path stamps = dir / kTimestampsFile;
    if (fs::exists(stamps)) {
        std::ifstream in(stamps);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto body = trim(strip_comment(line));
            if (body.empty()) continue;
            const auto tokens = split_ws(body);
            const auto t = tokens.size() == 2 ? parse_number<double>(tokens[0]) : std::nullopt;
            if (!t) throw ParseError(stamps.string(), lineno, "expected 't filename'");
            seq.timestamps.push_back(*t);
            seq.frames.push_back(read_frame(dir / std::string(tokens[1])));
        }
    } else {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir)) {
            const auto ext = entry.path().extension();
            if (entry.is_regular_file() && (ext == ".pgm" || ext == ".f32")) files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        if (!fallback) throw FormatError(dir.string() + ": no timestamps.txt and no exposure interval to assume");
        if (!files.empty()) {
            seq.timestamps = uniform_schedule(*fallback, files.size());
            for (const auto& f : files) seq.frames.push_back(read_frame(f));
        }
    }
    if (seq.frames.empty()) throw FormatError(dir.string() + ": no frames found");
    for (std::size_t k = 1; k < seq.frames.size(); ++k) {
        if (!seq.frames[k].same_shape(seq.frames[0])) throw FormatError(dir.string() + ": frames differ in size");
    }
    return seq;
}

void write_sequence(const fs::path& dir, const FrameSequence& sequence, FrameFormat format)
{
    fs::create_directories(dir);
    std::ofstream stamps(dir / kTimestampsFile, std::ios::trunc);
    if (!stamps) throw FormatError("cannot write " + (dir / kTimestampsFile).string());
    for (std::size_t k = 0; k < sequence.frames.size(); ++k) {
        char stem[32];
        std::snprintf(stem, sizeof stem, "frame_%04zu", k);
        const std::string f32_name = std::string(stem) + ".f32";
        const std::string pgm_name = std::string(stem) + ".pgm";
        if (format != FrameFormat::pgm) write_frame(dir / f32_name, sequence.frames[k]);
        if (format != FrameFormat::f32) write_frame(dir / pgm_name, sequence.frames[k]);
        stamps << format_double(sequence.timestamps[k]) << ' ' << (format == FrameFormat::pgm ? pgm_name : f32_name) << '\n';
    }
}

SharpVideo read_video(const fs::path& dir, const ExposureInterval& fallback)
{
    FrameSequence seq = read_sequence(dir, fallback);
    if (seq.frames.size() < 2) throw FormatError(dir.string() + ": a video needs at least 2 frames");
    const ExposureInterval interval = fs::exists(dir / kTimestampsFile)
                                          ? ExposureInterval(seq.timestamps.front(), seq.timestamps.back())
                                          : fallback;
    return SharpVideo(std::move(seq.timestamps), std::move(seq.frames), interval);
}

Manifest Manifest::load(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open manifest " + path.string());
    Manifest m;
    m.base_dir_ = path.parent_path();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto body = trim(strip_comment(line));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) throw ParseError(path.string(), lineno, "expected key=value");
        const auto key = trim(body.substr(0, eq));
        if (key.empty()) throw ParseError(path.string(), lineno, "empty key");
        m.entries_[std::string(key)] = std::string(trim(body.substr(eq + 1)));
    }
    return m;
}

void Manifest::save(const fs::path& path) const
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot write manifest " + path.string());
    for (const auto& [key, value] : entries_) out << key << '=' << value << '\n';
}

std::optional<std::string> Manifest::get(const std::string& key) const
{
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::optional<double> Manifest::get_double(const std::string& key) const
{
    const auto raw = get(key);
    if (!raw) return std::nullopt;
    const auto v = parse_number<double>(*raw);
    if (!v) throw ValidationError("manifest: '" + key + "' is not a number: " + *raw);
    return v;
}

std::optional<long long> Manifest::get_int(const std::string& key) const
{
    const auto raw = get(key);
    if (!raw) return std::nullopt;
    const auto v = parse_number<long long>(*raw);
    if (!v) throw ValidationError("manifest: '" + key + "' is not an integer: " + *raw);
    return v;
}

std::optional<fs::path> Manifest::get_path(const std::string& key) const
{
    const auto raw = get(key);
    if (!raw) return std::nullopt;
    fs::path p(*raw);
    if (p.is_relative()) p = base_dir_ / p;
    if (!fs::exists(p)) throw ValidationError("manifest: '" + key + "' refers to missing path " + p.string());
    return p;
}

std::optional<ExposureInterval> Manifest::interval() const
{
    const auto t0 = get_double("t_start");
    const auto t1 = get_double("t_end");
    if (!t0 || !t1) return std::nullopt;
    return ExposureInterval(*t0, *t1);
}

}  // namespace ecir::io
