#pragma once

// Device -> host telemetry datagram.
//
// Layout (20 bytes, little-endian):
//   [0..2)   magic 'L' 'S'
//   [2]      version (1)
//   [3]      flags (bit 0: absolute encoder valid)
//   [4..8)   seq, u32
//   [8..12)  device_time_ms, u32
//   [12..14) handlebar_raw, u16 (14-bit)
//   [14..16) treadmill_delta, i16
//   [16..20) CRC-32 (IEEE) of bytes [0..16), u32

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>

namespace loco {

inline constexpr std::size_t kPacketSize = 20;
inline constexpr std::uint8_t kMagic0 = 0x4C;  // 'L'
inline constexpr std::uint8_t kMagic1 = 0x53;  // 'S'
inline constexpr std::uint8_t kProtocolVersion = 1;
inline constexpr std::uint16_t kHandlebarMax = 16383;
inline constexpr std::uint16_t kDefaultUdpPort = 47801;

inline constexpr std::uint8_t kFlagAbsoluteValid = 0x01;

struct EncoderFrame {
  std::uint32_t seq = 0;
  std::uint32_t device_time_ms = 0;
  std::uint16_t handlebar_raw = 0;
  std::int16_t treadmill_delta = 0;
  std::uint8_t flags = 0;

  bool absolute_valid() const noexcept { return (flags & kFlagAbsoluteValid) != 0; }

  friend bool operator==(const EncoderFrame&, const EncoderFrame&) = default;
};

using WirePacket = std::array<std::uint8_t, kPacketSize>;

enum class DecodeError {
  WrongLength,
  BadMagic,
  BadVersion,
  BadCrc,
  FieldOutOfRange,
};

std::string_view to_string(DecodeError err) noexcept;

/// CRC-32 with the IEEE 802.3 polynomial (reflected 0xEDB88320, init and
/// final xor 0xFFFFFFFF).
std::uint32_t crc32(std::span<const std::uint8_t> bytes) noexcept;

/// Throws Error(InvalidField) when handlebar_raw exceeds 14 bits.
WirePacket encode_frame(const EncoderFrame& frame);

/// Accepts arbitrary bytes. Checks run in order length, magic, version,
/// crc, field range; the first failure is reported.
std::variant<EncoderFrame, DecodeError> decode_frame(std::span<const std::uint8_t> bytes) noexcept;

/// Serial-number comparison for the 32-bit sequence counter, so a session
/// that wraps past 2^32 keeps ordering.
constexpr bool seq_newer(std::uint32_t candidate, std::uint32_t reference) noexcept {
  return candidate != reference &&
         static_cast<std::uint32_t>(candidate - reference) < 0x80000000u;
}

}  // namespace loco
