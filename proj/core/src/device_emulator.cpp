#include "loco/device_emulator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "loco/error.hpp"
#include "text_util.hpp"

namespace loco {

void DeviceCalibration::validate() const {
  if (!(counts_per_meter > 0.0) || !std::isfinite(counts_per_meter))
    throw Error(ErrorKind::InvalidField, "counts_per_meter must be > 0");
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz))
    throw Error(ErrorKind::InvalidField, "sample_rate_hz must be > 0");
  if (center_raw > kHandlebarMax)
    throw Error(ErrorKind::InvalidField, "center_raw must be within [0, 16383]");
}

std::uint16_t quantize_handlebar(double angle_deg, const DeviceCalibration& calib) {
  const double turns = std::fmod(angle_deg, 360.0);
  const long long counts = std::llround(turns * kEncoderCountsPerTurn / 360.0);
  long long raw = (static_cast<long long>(calib.center_raw) + counts) % kEncoderCountsPerTurn;
  if (raw < 0) raw += kEncoderCountsPerTurn;
  return static_cast<std::uint16_t>(raw);
}

namespace {

CountStep accumulate_counts(double flow, double accumulator) {
  double acc = accumulator + flow;
  double whole = std::trunc(acc);
  whole = std::clamp(whole, static_cast<double>(std::numeric_limits<std::int16_t>::min()),
                     static_cast<double>(std::numeric_limits<std::int16_t>::max()));
  acc -= whole;
  return {static_cast<std::int16_t>(whole), acc};
}

}  // namespace

CountStep belt_to_counts(double belt_speed_mps, double dt, double accumulator,
                         const DeviceCalibration& calib) {
  return accumulate_counts(belt_speed_mps * dt * calib.counts_per_meter, accumulator);
}

// ---------------------------------------------------------------------------
// InputTrace

InputTrace::InputTrace(std::vector<TraceKey> keys, Interpolation mode)
    : keys_(std::move(keys)), mode_(mode) {}

void InputTrace::append(const TraceKey& key) {
  if (!keys_.empty() && !(key.time_s > keys_.back().time_s))
    throw Error(ErrorKind::InvalidTrace, "trace keyframe times must strictly increase");
  keys_.push_back(key);
}

void InputTrace::validate() const {
  if (keys_.empty()) throw Error(ErrorKind::InvalidTrace, "trace is empty");
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    const auto& k = keys_[i];
    if (!std::isfinite(k.time_s) || !std::isfinite(k.handlebar_deg) ||
        !std::isfinite(k.belt_speed_mps))
      throw Error(ErrorKind::InvalidTrace, "non-finite value at keyframe " + std::to_string(i));
    if (i > 0 && !(k.time_s > keys_[i - 1].time_s))
      throw Error(ErrorKind::InvalidTrace,
                  "keyframe times not strictly increasing at index " + std::to_string(i));
  }
}

namespace {

// Index of the last keyframe with time <= t, or -1 when t precedes the trace.
std::ptrdiff_t key_at_or_before(const std::vector<TraceKey>& keys, double t) {
  auto it = std::upper_bound(keys.begin(), keys.end(), t,
                             [](double v, const TraceKey& k) { return v < k.time_s; });
  return std::distance(keys.begin(), it) - 1;
}

template <typename Field>
double sample(const std::vector<TraceKey>& keys, Interpolation mode, double t, Field field) {
  if (keys.empty()) return 0.0;
  const auto i = key_at_or_before(keys, t);
  if (i < 0) return field(keys.front());
  const auto& a = keys[static_cast<std::size_t>(i)];
  if (mode == Interpolation::Step || static_cast<std::size_t>(i) + 1 == keys.size())
    return field(a);
  const auto& b = keys[static_cast<std::size_t>(i) + 1];
  const double u = (t - a.time_s) / (b.time_s - a.time_s);
  return field(a) + u * (field(b) - field(a));
}

}  // namespace

double InputTrace::handlebar_at(double t) const {
  return sample(keys_, mode_, t, [](const TraceKey& k) { return k.handlebar_deg; });
}

double InputTrace::belt_speed_at(double t) const {
  return sample(keys_, mode_, t, [](const TraceKey& k) { return k.belt_speed_mps; });
}

double InputTrace::belt_travel(double t0, double t1) const {
  if (keys_.empty() || !(t1 > t0)) return 0.0;
  double total = 0.0;
  // Leading constant region before the first keyframe.
  if (t0 < keys_.front().time_s) {
    const double hi = std::min(t1, keys_.front().time_s);
    total += keys_.front().belt_speed_mps * (hi - t0);
  }
  const auto first = std::max<std::ptrdiff_t>(0, key_at_or_before(keys_, t0));
  for (auto i = static_cast<std::size_t>(first); i < keys_.size(); ++i) {
    const auto& a = keys_[i];
    if (a.time_s >= t1) break;
    const bool last = i + 1 == keys_.size();
    const double seg_end = last ? t1 : keys_[i + 1].time_s;
    const double lo = std::max(t0, a.time_s);
    const double hi = std::min(t1, seg_end);
    if (!(hi > lo)) continue;
    if (mode_ == Interpolation::Step || last) {
      total += a.belt_speed_mps * (hi - lo);
    } else {
      const auto& b = keys_[i + 1];
      const double slope = (b.belt_speed_mps - a.belt_speed_mps) / (b.time_s - a.time_s);
      const double v_lo = a.belt_speed_mps + slope * (lo - a.time_s);
      const double v_hi = a.belt_speed_mps + slope * (hi - a.time_s);
      total += 0.5 * (v_lo + v_hi) * (hi - lo);
    }
  }
  return total;
}

InputTrace parse_trace(std::string_view text) {
  std::vector<TraceKey> keys;
  Interpolation mode = Interpolation::Linear;
  std::size_t line_no = 0;
  for (auto raw_line : detail::split_lines(text)) {
    ++line_no;
    auto line = detail::trim(detail::strip_comment(raw_line));
    if (line.empty()) continue;
    if (line.starts_with("mode:")) {
      auto value = detail::trim(line.substr(5));
      if (value == "step") mode = Interpolation::Step;
      else if (value == "linear") mode = Interpolation::Linear;
      else throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": unknown mode '" +
                                             std::string(value) + "'");
      continue;
    }
    auto fields = detail::split_ws(line);
    if (fields.size() != 3)
      throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) +
                                        ": expected 'time_s handlebar_deg belt_speed_mps'");
    TraceKey k;
    if (!detail::parse_double(fields[0], k.time_s) ||
        !detail::parse_double(fields[1], k.handlebar_deg) ||
        !detail::parse_double(fields[2], k.belt_speed_mps))
      throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": bad number");
    keys.push_back(k);
  }
  InputTrace trace(std::move(keys), mode);
  trace.validate();
  return trace;
}

InputTrace load_trace(const std::filesystem::path& path) {
  return parse_trace(detail::read_file(path));
}

std::string format_trace(const InputTrace& trace) {
  std::string out = "# time_s handlebar_deg belt_speed_mps\nmode: ";
  out += trace.mode() == Interpolation::Step ? "step\n" : "linear\n";
  for (const auto& k : trace.keys()) {
    out += detail::format_double(k.time_s);
    out += ' ';
    out += detail::format_double(k.handlebar_deg);
    out += ' ';
    out += detail::format_double(k.belt_speed_mps);
    out += '\n';
  }
  return out;
}

void save_trace(const InputTrace& trace, const std::filesystem::path& path) {
  detail::write_file(path, format_trace(trace));
}

// ---------------------------------------------------------------------------
// DeviceEmulator

DeviceEmulator::DeviceEmulator(DeviceCalibration calib) : calib_(calib) { calib_.validate(); }

EncoderFrame DeviceEmulator::emit(double handlebar_deg, double belt_travel_m) {
  const auto step = accumulate_counts(belt_travel_m * calib_.counts_per_meter, accumulator_);
  accumulator_ = step.accumulator;

  EncoderFrame f;
  f.seq = static_cast<std::uint32_t>(emitted_);
  f.device_time_ms =
      static_cast<std::uint32_t>(std::llround(frame_time(emitted_) * 1000.0) & 0xFFFFFFFFll);
  f.handlebar_raw = quantize_handlebar(handlebar_deg, calib_);
  f.treadmill_delta = step.delta;
  f.flags = kFlagAbsoluteValid;
  ++emitted_;
  return f;
}

EncoderFrame DeviceEmulator::emit_from(const InputTrace& trace) {
  const double t0 = frame_time(emitted_);
  const double t1 = frame_time(emitted_ + 1);
  return emit(trace.handlebar_at(t0), trace.belt_travel(t0, t1));
}

std::vector<EncoderFrame> run_trace(const InputTrace& trace, const DeviceCalibration& calib) {
  trace.validate();
  DeviceEmulator emu(calib);
  std::vector<EncoderFrame> frames;
  while (emu.next_frame_time() < trace.end_time()) frames.push_back(emu.emit_from(trace));
  return frames;
}

// ---------------------------------------------------------------------------
// FrameEmitter

FrameEmitter::FrameEmitter(DeviceCalibration calib, Source source, MessageQueue<EncoderFrame>& out)
    : calib_(calib), source_(std::move(source)), out_(out) {
  calib_.validate();
  thread_ = std::jthread([this] { run(); });
}

FrameEmitter::~FrameEmitter() { stop(); }

void FrameEmitter::stop() {
  running_.store(false);
  if (thread_.joinable() && thread_.get_id() != std::this_thread::get_id()) thread_.join();
}

void FrameEmitter::run() {
  using clock = std::chrono::steady_clock;
  DeviceEmulator emu(calib_);
  const auto period = std::chrono::duration_cast<clock::duration>(
      std::chrono::duration<double>(calib_.frame_period_s()));
  auto next = clock::now();
  while (running_.load()) {
    Command cmd;
    const double t = emu.next_frame_time();
    if (!source_(t, cmd)) break;
    out_.push(emu.emit(cmd.handlebar_deg, cmd.belt_speed_mps * calib_.frame_period_s()));
    next += period;
    std::this_thread::sleep_until(next);
  }
  running_.store(false);
}

}  // namespace loco
