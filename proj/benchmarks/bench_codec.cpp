#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "loco/wire_protocol.hpp"

namespace {

std::vector<loco::EncoderFrame> random_frames(std::size_t n) {
  std::mt19937_64 rng(1);
  std::vector<loco::EncoderFrame> out(n);
  for (auto& f : out) {
    f.seq = static_cast<std::uint32_t>(rng());
    f.device_time_ms = static_cast<std::uint32_t>(rng());
    f.handlebar_raw = static_cast<std::uint16_t>(rng() % (loco::kHandlebarMax + 1));
    f.treadmill_delta = static_cast<std::int16_t>(rng());
    f.flags = loco::kFlagAbsoluteValid;
  }
  return out;
}

void BM_Encode(benchmark::State& state) {
  const auto frames = random_frames(1024);
  std::size_t i = 0;
  for (auto _ : state) {
    auto pkt = loco::encode_frame(frames[i++ & 1023]);
    benchmark::DoNotOptimize(pkt);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Encode);

void BM_Decode(benchmark::State& state) {
  std::vector<loco::WirePacket> packets;
  for (const auto& f : random_frames(1024)) packets.push_back(loco::encode_frame(f));
  std::size_t i = 0;
  for (auto _ : state) {
    auto r = loco::decode_frame(packets[i++ & 1023]);
    benchmark::DoNotOptimize(r);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Decode);

void BM_DecodeGarbage(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::vector<std::uint8_t> bytes(loco::kPacketSize);
  for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
  bytes[0] = loco::kMagic0;
  bytes[1] = loco::kMagic1;
  bytes[2] = loco::kProtocolVersion;
  for (auto _ : state) {
    auto r = loco::decode_frame(bytes);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_DecodeGarbage);

}  // namespace
