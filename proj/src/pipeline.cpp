#include "edgesim/pipeline.hpp"

#include <algorithm>
#include <cmath>

namespace edgesim::pipeline {

double effective_frame_period(const SensorProfile& sensor) {
  const double nominal = 1000.0 / sensor.target_fps;
  return sensor.pipelined_acquisition ? nominal : std::max(nominal, sensor.acquisition_ms);
}

std::int64_t encoded_bytes(std::int64_t raw_bytes, double ratio) {
  return std::llround(static_cast<double>(raw_bytes) / ratio);
}

EncodedFrame encode_frame(std::int64_t raw_bytes, const EncodingMode& mode, double created_ms,
                          std::int64_t seq) {
  EncodedFrame frame;
  frame.seq = seq;
  frame.created_ms = created_ms;
  frame.payload_bytes = encoded_bytes(raw_bytes, mode.ratio);
  frame.mode = mode.kind;
  frame.encode_done_ms = created_ms + mode.encode_latency_ms;
  return frame;
}

double uplink_demand(std::int64_t payload_bytes, double period_ms) {
  return static_cast<double>(payload_bytes) * 8.0 * 1000.0 / period_ms;
}

double edge_latency(const EdgeProfile& edge, double draw) {
  if (edge.sampling == EdgeSampling::Midpoint) {
    return (edge.processing_min_ms + edge.processing_max_ms) / 2.0;
  }
  return edge.processing_min_ms + draw * (edge.processing_max_ms - edge.processing_min_ms);
}

double traffic_asymmetry(double ul_volume_bytes, double dl_volume_bytes) {
  const double total = ul_volume_bytes + dl_volume_bytes;
  if (total <= 0.0) throw EmptyTraffic("no traffic in either direction");
  return ul_volume_bytes / total;
}

DownlinkMessage pose_message(const EdgeProfile& edge, std::int64_t seq) {
  return {seq, edge.downlink_message_bytes, MessageKind::PoseTrajectory};
}

DownlinkMessage emergency_message(const EdgeProfile& edge, std::int64_t seq) {
  return {seq, edge.emergency_message_bytes, MessageKind::EmergencyStop};
}

}  // namespace edgesim::pipeline
