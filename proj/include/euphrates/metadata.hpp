#pragma once

#include <algorithm>
#include <array>
#include <cstdlib>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "euphrates/error.hpp"
#include "euphrates/frame.hpp"
#include "euphrates/motion.hpp"

namespace euphrates {

// Motion metadata stream, little-endian:
//
//   offset  size  field
//   0       4     magic "EUMV"
//   4       1     version (1)
//   5       1     search algorithm (0 = ES, 1 = TSS)
//   6       4     frame width
//   10      4     frame height
//   14      2     macroblock size L
//   16      2     search range d
//   18      ...   one record per MB, row-major:
//                   d <= 7 : 1 byte MV (u high nibble, v low nibble, two's complement)
//                   d >  7 : 2 bytes MV (u, v as int8)
//                   then 4 bytes sad (uint32)
namespace metadata {

inline constexpr std::array<std::uint8_t, 4> kMagic{'E', 'U', 'M', 'V'};
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 18;
inline constexpr int kMaxNibbleRange = 7;
inline constexpr int kMaxWideRange = 127;

inline bool packed_form(int search_range) { return search_range <= kMaxNibbleRange; }

inline std::size_t mv_bytes(int search_range) { return packed_form(search_range) ? 1 : 2; }

inline std::size_t record_size(int search_range) { return mv_bytes(search_range) + 4; }

inline std::size_t encoded_size(const MotionField& field) {
    return kHeaderSize + field.size() * record_size(field.params().search_range);
}

/// Bytes spent on motion vectors alone (excludes header and SADs).
inline std::size_t mv_payload_size(const MotionField& field) {
    return field.size() * mv_bytes(field.params().search_range);
}

inline std::uint8_t pack_nibbles(MotionVector mv) {
    if (mv.u < -8 || mv.u > 7 || mv.v < -8 || mv.v > 7)
        fail(ErrorKind::Range, "motion vector (" + std::to_string(mv.u) + "," + std::to_string(mv.v) +
                                   ") does not fit signed 4-bit fields");
    return static_cast<std::uint8_t>(((mv.u & 0xF) << 4) | (mv.v & 0xF));
}

inline MotionVector unpack_nibbles(std::uint8_t byte) {
    auto sign_extend = [](int nibble) { return nibble >= 8 ? nibble - 16 : nibble; };
    return {sign_extend(byte >> 4), sign_extend(byte & 0xF)};
}

namespace wire {

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

inline std::uint16_t get_u16(std::span<const std::uint8_t> in, std::size_t at) {
    return static_cast<std::uint16_t>(in[at] | (in[at + 1] << 8));
}

inline std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
    return static_cast<std::uint32_t>(in[at]) | (static_cast<std::uint32_t>(in[at + 1]) << 8) |
           (static_cast<std::uint32_t>(in[at + 2]) << 16) | (static_cast<std::uint32_t>(in[at + 3]) << 24);
}

}  // namespace wire

}  // namespace metadata

inline std::vector<std::uint8_t> encode_metadata(const MotionField& field) {
    using namespace metadata;
    const MotionParams& p = field.params();
    if (p.search_range > kMaxWideRange)
        fail(ErrorKind::Range, "search range " + std::to_string(p.search_range) + " exceeds the int8 MV form");
    std::vector<std::uint8_t> out;
    out.reserve(encoded_size(field));
    for (std::uint8_t b : kMagic) out.push_back(b);
    out.push_back(kVersion);
    out.push_back(static_cast<std::uint8_t>(p.algorithm));
    wire::put_u32(out, static_cast<std::uint32_t>(field.frame_width()));
    wire::put_u32(out, static_cast<std::uint32_t>(field.frame_height()));
    wire::put_u16(out, static_cast<std::uint16_t>(p.mb_size));
    wire::put_u16(out, static_cast<std::uint16_t>(p.search_range));
    const bool packed = packed_form(p.search_range);
    for (const BlockMatch& b : field.blocks()) {
        if (std::abs(b.mv.u) > p.search_range || std::abs(b.mv.v) > p.search_range)
            fail(ErrorKind::Range, "motion vector exceeds the field's search range");
        if (packed) {
            out.push_back(pack_nibbles(b.mv));
        } else {
            out.push_back(static_cast<std::uint8_t>(static_cast<std::int8_t>(b.mv.u)));
            out.push_back(static_cast<std::uint8_t>(static_cast<std::int8_t>(b.mv.v)));
        }
        wire::put_u32(out, b.sad);
    }
    return out;
}

inline MotionField decode_metadata(std::span<const std::uint8_t> bytes) {
    using namespace metadata;
    if (bytes.size() < kHeaderSize)
        fail(ErrorKind::Format, "motion metadata truncated: " + std::to_string(bytes.size()) + " header bytes");
    if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
        fail(ErrorKind::Format, "motion metadata: bad magic");
    if (bytes[4] != kVersion)
        fail(ErrorKind::Format, "motion metadata: unsupported version " + std::to_string(bytes[4]));
    if (bytes[5] > 1) fail(ErrorKind::Format, "motion metadata: unknown algorithm " + std::to_string(bytes[5]));

    MotionParams params;
    params.algorithm = static_cast<SearchAlgorithm>(bytes[5]);
    const std::uint32_t width = wire::get_u32(bytes, 6);
    const std::uint32_t height = wire::get_u32(bytes, 10);
    params.mb_size = wire::get_u16(bytes, 14);
    params.search_range = wire::get_u16(bytes, 16);
    if (width == 0 || height == 0 || width > (1u << 20) || height > (1u << 20))
        fail(ErrorKind::Format, "motion metadata: implausible frame dims");
    try {
        params.validate();
    } catch (const Error& e) {
        fail(ErrorKind::Format, std::string("motion metadata: ") + e.what());
    }
    if (params.search_range > kMaxWideRange) fail(ErrorKind::Format, "motion metadata: search range too large");

    MotionField field(static_cast<int>(width), static_cast<int>(height), params);
    const std::size_t rec = record_size(params.search_range);
    const std::size_t expected = kHeaderSize + field.size() * rec;
    if (bytes.size() < expected)
        fail(ErrorKind::Format, "motion metadata truncated: " + std::to_string(bytes.size()) + " of " +
                                    std::to_string(expected) + " bytes");
    if (bytes.size() > expected)
        fail(ErrorKind::Format, "motion metadata has " + std::to_string(bytes.size() - expected) +
                                    " trailing bytes");

    const bool packed = packed_form(params.search_range);
    const std::uint32_t worst = max_sad(params.mb_size);
    std::size_t at = kHeaderSize;
    for (BlockMatch& b : field.blocks()) {
        if (packed) {
            b.mv = unpack_nibbles(bytes[at]);
        } else {
            b.mv = {static_cast<std::int8_t>(bytes[at]), static_cast<std::int8_t>(bytes[at + 1])};
        }
        b.sad = wire::get_u32(bytes, at + mv_bytes(params.search_range));
        if (std::abs(b.mv.u) > params.search_range || std::abs(b.mv.v) > params.search_range)
            fail(ErrorKind::Format, "motion metadata: MV outside declared search range");
        if (b.sad > worst) fail(ErrorKind::Format, "motion metadata: sad exceeds 255*L^2");
        at += rec;
    }
    return field;
}

inline void save_metadata(const std::filesystem::path& path, const MotionField& field) {
    euphrates::detail::write_file_bytes(path, encode_metadata(field));
}

inline MotionField load_metadata(const std::filesystem::path& path) {
    const auto bytes = euphrates::detail::read_file_bytes(path);
    try {
        return decode_metadata(bytes);
    } catch (const Error& e) {
        fail(e.kind(), path.string() + ": " + e.what());
    }
}

}  // namespace euphrates
