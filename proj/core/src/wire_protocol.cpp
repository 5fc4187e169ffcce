#include "loco/wire_protocol.hpp"

#include <boost/crc.hpp>

#include "loco/error.hpp"

namespace loco {
namespace {

void put_u16(std::uint8_t* out, std::uint16_t v) {
  out[0] = static_cast<std::uint8_t>(v & 0xFF);
  out[1] = static_cast<std::uint8_t>(v >> 8);
}

void put_u32(std::uint8_t* out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out[i] = static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF);
}

std::uint16_t get_u16(const std::uint8_t* in) {
  return static_cast<std::uint16_t>(in[0] | (in[1] << 8));
}

std::uint32_t get_u32(const std::uint8_t* in) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | in[i];
  return v;
}

}  // namespace

std::string_view to_string(DecodeError err) noexcept {
  switch (err) {
    case DecodeError::WrongLength: return "wrong-length";
    case DecodeError::BadMagic: return "bad-magic";
    case DecodeError::BadVersion: return "bad-version";
    case DecodeError::BadCrc: return "bad-crc";
    case DecodeError::FieldOutOfRange: return "field-out-of-range";
  }
  return "unknown";
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) noexcept {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

WirePacket encode_frame(const EncoderFrame& frame) {
  if (frame.handlebar_raw > kHandlebarMax) {
    throw Error(ErrorKind::InvalidField,
                "handlebar_raw " + std::to_string(frame.handlebar_raw) + " exceeds 14 bits");
  }
  WirePacket p{};
  p[0] = kMagic0;
  p[1] = kMagic1;
  p[2] = kProtocolVersion;
  p[3] = frame.flags;
  put_u32(&p[4], frame.seq);
  put_u32(&p[8], frame.device_time_ms);
  put_u16(&p[12], frame.handlebar_raw);
  put_u16(&p[14], static_cast<std::uint16_t>(frame.treadmill_delta));
  put_u32(&p[16], crc32(std::span<const std::uint8_t>(p.data(), 16)));
  return p;
}

std::variant<EncoderFrame, DecodeError> decode_frame(std::span<const std::uint8_t> bytes) noexcept {
  if (bytes.size() != kPacketSize) return DecodeError::WrongLength;
  const std::uint8_t* p = bytes.data();
  if (p[0] != kMagic0 || p[1] != kMagic1) return DecodeError::BadMagic;
  if (p[2] != kProtocolVersion) return DecodeError::BadVersion;
  if (get_u32(p + 16) != crc32(bytes.first(16))) return DecodeError::BadCrc;

  EncoderFrame f;
  f.flags = p[3];
  f.seq = get_u32(p + 4);
  f.device_time_ms = get_u32(p + 8);
  f.handlebar_raw = get_u16(p + 12);
  f.treadmill_delta = static_cast<std::int16_t>(get_u16(p + 14));
  if (f.handlebar_raw > kHandlebarMax) return DecodeError::FieldOutOfRange;
  return f;
}

}  // namespace loco
