#pragma once

// NR TDD link model: per-direction capacity from the slot split, the
// periodic uplink grant delay, packetization and the retransmission
// reliability model.

#include <cstdint>
#include <span>
#include <stdexcept>

#include "edgesim/model.hpp"

namespace edgesim::radio {

class UnsupportedBandwidth : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ZeroCapacity : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LinkCapacity {
  double dl_bps = 0.0;
  double ul_bps = 0.0;
  double per_slot_dl_bps = 0.0;
  double per_slot_ul_bps = 0.0;
};

struct PacketizedFrame {
  std::int64_t payload_bytes = 0;
  std::int64_t packet_count = 0;
  std::int64_t wire_bytes = 0;

  bool operator==(const PacketizedFrame&) const = default;
};

inline constexpr int kSubcarriersPerPrb = 12;
inline constexpr int kSymbolsPerSlot = 14;

/// PRB count for a (bandwidth, SCS) pair. Only 20 MHz and 100 MHz at 30 kHz
/// are tabulated; anything else throws UnsupportedBandwidth.
int prb_count(double bandwidth_mhz, double scs_khz);

/// Bits carried by one slot occurrence in the given direction, after the
/// calibration efficiency.
double peak_slot_bits(const RadioConfig& radio, Direction direction);

/// Average rate contributed by each slot of the given direction in the
/// 10-slot frame.
double per_slot_rate_bps(const RadioConfig& radio, Direction direction, double slot_ms);

LinkCapacity tdd_capacity(const RadioConfig& radio, const TddPattern& pattern);

/// A measured (slot count, throughput) point used for calibration.
struct ThroughputPoint {
  int slots = 0;
  double rate_bps = 0.0;
};

/// Least-squares per-slot rate through the origin: sum(k*r) / sum(k*k).
double fit_per_slot_rate(std::span<const ThroughputPoint> points);

/// Efficiency factor that makes the direction's per-slot rate equal the
/// least-squares fit of the given points.
double fit_efficiency(RadioConfig radio, Direction direction, double slot_ms,
                      std::span<const ThroughputPoint> points);

/// Uplink grant wait for data arriving at arrival_ms.
///
/// Grants recur every period_ms starting at phase_ms. Data arriving exactly
/// on a grant epoch waits min_delay_ms; data arriving just after one waits
/// close to max_delay_ms. Between epochs the delay falls linearly:
///
///   delay = min + ((phase - arrival) mod period) * (max - min) / period
double scheduling_delay(double arrival_ms, const SchedulingModel& sched);

PacketizedFrame packetize(std::int64_t payload_bytes, const RadioConfig& radio);

/// Wire size of packet `index` (0-based) in a packetized payload. Every
/// packet but the last carries a full MTU.
std::int64_t packet_wire_bytes(const PacketizedFrame& frame, std::int64_t index,
                               const RadioConfig& radio);

/// Pure serialization time. Infinite capacity gives zero.
double transfer_duration_ms(std::int64_t wire_bytes, double capacity_bps);
double transfer_duration_ms(const PacketizedFrame& frame, double capacity_bps);

/// Probability that every packet of a frame eventually gets through, with
/// independent attempts and up to max_retx retransmissions per packet.
double frame_delivery_prob(double p_packet, std::int64_t packet_count, int max_retx);

}  // namespace edgesim::radio
