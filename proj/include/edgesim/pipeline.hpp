#pragma once

// Robot-side data path: acquisition cadence, the encoding layer, uplink
// demand, edge processing time and downlink messages.

#include <cstdint>
#include <stdexcept>

#include "edgesim/model.hpp"

namespace edgesim::pipeline {

class EmptyTraffic : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EncodedFrame {
  std::int64_t seq = 0;
  double created_ms = 0.0;
  std::int64_t payload_bytes = 0;
  EncodingKind mode = EncodingKind::Raw;
  double encode_done_ms = 0.0;
};

enum class MessageKind { PoseTrajectory, EmergencyStop };

struct DownlinkMessage {
  std::int64_t seq = 0;
  std::int64_t payload_bytes = 0;
  MessageKind kind = MessageKind::PoseTrajectory;
};

/// Frame period the sensor sustains. A non-pipelined structured-light
/// capture occupies the sensor, so acquisition time caps the rate.
double effective_frame_period(const SensorProfile& sensor);

EncodedFrame encode_frame(std::int64_t raw_bytes, const EncodingMode& mode, double created_ms,
                          std::int64_t seq);

/// Encoded payload size: round(raw_bytes / ratio).
std::int64_t encoded_bytes(std::int64_t raw_bytes, double ratio);

double uplink_demand(std::int64_t payload_bytes, double period_ms);

/// `draw` is a uniform variate in [0, 1) supplied by the caller.
double edge_latency(const EdgeProfile& edge, double draw);

/// Uplink share of total volume. Throws EmptyTraffic if both are zero.
double traffic_asymmetry(double ul_volume_bytes, double dl_volume_bytes);

DownlinkMessage pose_message(const EdgeProfile& edge, std::int64_t seq);
DownlinkMessage emergency_message(const EdgeProfile& edge, std::int64_t seq);

}  // namespace edgesim::pipeline
