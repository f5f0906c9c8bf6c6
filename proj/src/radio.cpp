#include "edgesim/radio.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace edgesim::radio {

namespace {

struct PrbEntry {
  double bandwidth_mhz;
  double scs_khz;
  int prb;
};

// TS 38.101-1 maximum transmission bandwidth configuration.
constexpr PrbEntry kPrbTable[] = {
    {20.0, 30.0, 51},
    {100.0, 30.0, 273},
};

}  // namespace

int prb_count(double bandwidth_mhz, double scs_khz) {
  for (const auto& entry : kPrbTable) {
    if (entry.bandwidth_mhz == bandwidth_mhz && entry.scs_khz == scs_khz) return entry.prb;
  }
  throw UnsupportedBandwidth(
      fmt::format("no PRB entry for {} MHz at {} kHz SCS", bandwidth_mhz, scs_khz));
}

double peak_slot_bits(const RadioConfig& radio, Direction direction) {
  const bool dl = direction == Direction::DL;
  const double layers = dl ? radio.dl_layers : radio.ul_layers;
  const double efficiency = dl ? radio.efficiency_dl : radio.efficiency_ul;
  const double prb = prb_count(radio.bandwidth_mhz, radio.scs_khz);
  return layers * radio.modulation_bits * radio.code_rate * prb * kSubcarriersPerPrb *
         kSymbolsPerSlot * efficiency;
}

double per_slot_rate_bps(const RadioConfig& radio, Direction direction, double slot_ms) {
  return peak_slot_bits(radio, direction) / (kSlotsPerFrame * slot_ms / 1000.0);
}

LinkCapacity tdd_capacity(const RadioConfig& radio, const TddPattern& pattern) {
  if (radio.unlimited_capacity) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {inf, inf, inf, inf};
  }
  LinkCapacity cap;
  cap.per_slot_dl_bps = per_slot_rate_bps(radio, Direction::DL, pattern.slot_ms);
  cap.per_slot_ul_bps = per_slot_rate_bps(radio, Direction::UL, pattern.slot_ms);
  cap.dl_bps = cap.per_slot_dl_bps * pattern.dl_slots;
  cap.ul_bps = cap.per_slot_ul_bps * pattern.ul_slots;
  return cap;
}

double fit_per_slot_rate(std::span<const ThroughputPoint> points) {
  double num = 0.0;
  double den = 0.0;
  for (const auto& p : points) {
    num += p.slots * p.rate_bps;
    den += static_cast<double>(p.slots) * p.slots;
  }
  if (den == 0.0) throw std::invalid_argument("calibration needs a point with slots > 0");
  return num / den;
}

double fit_efficiency(RadioConfig radio, Direction direction, double slot_ms,
                      std::span<const ThroughputPoint> points) {
  (direction == Direction::DL ? radio.efficiency_dl : radio.efficiency_ul) = 1.0;
  return fit_per_slot_rate(points) / per_slot_rate_bps(radio, direction, slot_ms);
}

double scheduling_delay(double arrival_ms, const SchedulingModel& sched) {
  const double period = sched.period_ms;
  double until_grant = std::fmod(sched.phase_ms - arrival_ms, period);
  if (until_grant < 0) until_grant += period;
  // fmod of a negative can land exactly on period after the correction.
  if (until_grant >= period) until_grant = 0.0;
  return sched.min_delay_ms + until_grant * (sched.max_delay_ms - sched.min_delay_ms) / period;
}

PacketizedFrame packetize(std::int64_t payload_bytes, const RadioConfig& radio) {
  const std::int64_t mss = radio.mtu_bytes - radio.header_bytes;
  PacketizedFrame frame;
  frame.payload_bytes = payload_bytes;
  frame.packet_count = (payload_bytes + mss - 1) / mss;
  frame.wire_bytes = payload_bytes + frame.packet_count * radio.header_bytes;
  return frame;
}

std::int64_t packet_wire_bytes(const PacketizedFrame& frame, std::int64_t index,
                               const RadioConfig& radio) {
  const std::int64_t mss = radio.mtu_bytes - radio.header_bytes;
  if (index + 1 < frame.packet_count) return radio.mtu_bytes;
  return frame.payload_bytes - (frame.packet_count - 1) * mss + radio.header_bytes;
}

double transfer_duration_ms(std::int64_t wire_bytes, double capacity_bps) {
  if (wire_bytes == 0) return 0.0;
  if (capacity_bps <= 0.0) {
    throw ZeroCapacity(fmt::format("cannot send {} bytes over a zero-capacity link", wire_bytes));
  }
  if (std::isinf(capacity_bps)) return 0.0;
  return static_cast<double>(wire_bytes) * 8.0 / capacity_bps * 1000.0;
}

double transfer_duration_ms(const PacketizedFrame& frame, double capacity_bps) {
  return transfer_duration_ms(frame.wire_bytes, capacity_bps);
}

double frame_delivery_prob(double p_packet, std::int64_t packet_count, int max_retx) {
  if (packet_count == 0) return 1.0;
  const double residual = std::pow(p_packet, max_retx + 1);
  if (residual >= 1.0) return 0.0;
  // log1p keeps precision when residual is tiny and packet_count is large.
  return std::exp(static_cast<double>(packet_count) * std::log1p(-residual));
}

}  // namespace edgesim::radio
