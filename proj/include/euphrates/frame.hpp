#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "euphrates/error.hpp"

namespace euphrates {

/// Single-channel 8-bit luminance image, row-major.
class Frame {
public:
    Frame() = default;

    Frame(int width, int height, std::vector<std::uint8_t> data)
        : width_(width), height_(height), data_(std::move(data)) {
        if (width <= 0 || height <= 0)
            fail(ErrorKind::Dimension, "frame dimensions must be positive, got " +
                                           std::to_string(width) + "x" + std::to_string(height));
        if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
            fail(ErrorKind::Dimension, "frame payload has " + std::to_string(data_.size()) +
                                           " samples, expected " +
                                           std::to_string(static_cast<std::size_t>(width) * height));
    }

    Frame(int width, int height, std::uint8_t fill)
        : Frame(width, height,
                std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(width, 0)) *
                                              static_cast<std::size_t>(std::max(height, 0)),
                                          fill)) {}

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::span<const std::uint8_t> data() const noexcept { return data_; }
    std::span<std::uint8_t> data() noexcept { return data_; }

    std::uint8_t at(int x, int y) const noexcept {
        return data_[static_cast<std::size_t>(y) * width_ + x];
    }
    std::uint8_t& at(int x, int y) noexcept { return data_[static_cast<std::size_t>(y) * width_ + x]; }

    /// Sample with coordinates clamped into the frame (edge replication).
    std::uint8_t clamped(int x, int y) const noexcept {
        return at(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1));
    }

    bool same_dims(const Frame& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

    friend bool operator==(const Frame&, const Frame&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

enum class FrameFormat { Pgm, RawY8 };

struct RawDims {
    int width = 0;
    int height = 0;
};

namespace detail {

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorKind::Io, "short write to " + path.string());
}

// Cursor over a PGM header: whitespace and '#' comments separate tokens.
class PgmHeaderReader {
public:
    PgmHeaderReader(std::span<const std::uint8_t> bytes, const std::string& name)
        : bytes_(bytes), name_(name) {}

    long number(const char* field) {
        skip_separators();
        std::size_t start = pos_;
        long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > 1'000'000'000) fail(ErrorKind::Format, name_ + ": PGM " + field + " too large");
            ++pos_;
        }
        if (pos_ == start) fail(ErrorKind::Format, name_ + ": malformed PGM header field '" + field + "'");
        return value;
    }

    // Exactly one whitespace byte separates maxval from the raster.
    std::size_t raster_offset() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
            fail(ErrorKind::Format, name_ + ": missing separator after PGM maxval");
        return pos_ + 1;
    }

private:
    void skip_separators() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::string name_;
    std::size_t pos_ = 2;
};

}  // namespace detail

/// Parses a binary P5 PGM with maxval 255.
inline Frame decode_pgm(std::span<const std::uint8_t> bytes, const std::string& name = "<pgm>") {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
        fail(ErrorKind::Format, name + ": bad PGM magic (expected P5)");
    detail::PgmHeaderReader header(bytes, name);
    const long width = header.number("width");
    const long height = header.number("height");
    const long maxval = header.number("maxval");
    if (width <= 0 || height <= 0)
        fail(ErrorKind::Format, name + ": PGM width/height must be positive");
    if (maxval != 255)
        fail(ErrorKind::Format, name + ": unsupported PGM maxval " + std::to_string(maxval) + " (need 255)");
    const std::size_t offset = header.raster_offset();
    const std::size_t expected = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (bytes.size() - std::min(offset, bytes.size()) != expected)
        fail(ErrorKind::Dimension, name + ": PGM payload size " +
                                       std::to_string(bytes.size() - std::min(offset, bytes.size())) +
                                       " does not match " + std::to_string(width) + "x" +
                                       std::to_string(height));
    return Frame(static_cast<int>(width), static_cast<int>(height),
                 std::vector<std::uint8_t>(bytes.begin() + static_cast<std::ptrdiff_t>(offset), bytes.end()));
}

inline std::vector<std::uint8_t> encode_pgm(const Frame& frame) {
    const std::string header =
        "P5\n" + std::to_string(frame.width()) + " " + std::to_string(frame.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), frame.data().begin(), frame.data().end());
    return out;
}

inline Frame decode_raw(std::span<const std::uint8_t> bytes, RawDims dims, const std::string& name = "<raw>") {
    if (dims.width <= 0 || dims.height <= 0)
        fail(ErrorKind::Format, name + ": raw-y8 requires positive declared dims");
    const std::size_t expected = static_cast<std::size_t>(dims.width) * static_cast<std::size_t>(dims.height);
    if (bytes.size() != expected)
        fail(ErrorKind::Dimension, name + ": raw-y8 payload size " + std::to_string(bytes.size()) +
                                       " does not match declared " + std::to_string(dims.width) + "x" +
                                       std::to_string(dims.height));
    return Frame(dims.width, dims.height, std::vector<std::uint8_t>(bytes.begin(), bytes.end()));
}

inline Frame load_frame(const std::filesystem::path& path, FrameFormat format,
                        std::optional<RawDims> raw_dims = std::nullopt) {
    const auto bytes = detail::read_file_bytes(path);
    if (format == FrameFormat::Pgm) return decode_pgm(bytes, path.string());
    if (!raw_dims) fail(ErrorKind::Format, path.string() + ": raw-y8 requires declared dims");
    return decode_raw(bytes, *raw_dims, path.string());
}

inline void save_frame(const std::filesystem::path& path, const Frame& frame, FrameFormat format) {
    if (format == FrameFormat::Pgm)
        detail::write_file_bytes(path, encode_pgm(frame));
    else
        detail::write_file_bytes(path, frame.data());
}

/// Format inferred from extension: .pgm, or .y8/.raw for headerless input.
inline std::optional<FrameFormat> format_from_extension(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".pgm") return FrameFormat::Pgm;
    if (ext == ".y8" || ext == ".raw") return FrameFormat::RawY8;
    return std::nullopt;
}

namespace detail {

inline std::optional<unsigned long long> numeric_stem(const std::filesystem::path& path) {
    const auto stem = path.stem().string();
    std::string digits;
    for (char c : stem)
        if (std::isdigit(static_cast<unsigned char>(c))) digits.push_back(c);
    if (digits.empty()) return std::nullopt;
    return std::stoull(digits);
}

}  // namespace detail

/// Frame files of a directory sorted by the number embedded in their names.
inline std::vector<std::filesystem::path> list_frame_files(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) fail(ErrorKind::Io, dir.string() + ": not a directory");
    std::vector<std::pair<unsigned long long, std::filesystem::path>> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || !format_from_extension(entry.path())) continue;
        auto index = detail::numeric_stem(entry.path());
        if (!index) fail(ErrorKind::Format, entry.path().string() + ": frame file name has no index");
        files.emplace_back(*index, entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<std::filesystem::path> out;
    out.reserve(files.size());
    for (auto& [_, p] : files) out.push_back(std::move(p));
    return out;
}

/// Loads a whole directory; every frame must share the first frame's dims.
inline std::vector<Frame> load_frame_sequence(const std::filesystem::path& dir,
                                              std::optional<RawDims> raw_dims = std::nullopt) {
    std::vector<Frame> frames;
    for (const auto& path : list_frame_files(dir)) {
        Frame f = load_frame(path, *format_from_extension(path), raw_dims);
        if (!frames.empty() && !frames.front().same_dims(f))
            fail(ErrorKind::Dimension, path.string() + ": dims " + std::to_string(f.width()) + "x" +
                                           std::to_string(f.height()) + " differ from sequence dims " +
                                           std::to_string(frames.front().width()) + "x" +
                                           std::to_string(frames.front().height()));
        frames.push_back(std::move(f));
    }
    return frames;
}

}  // namespace euphrates
