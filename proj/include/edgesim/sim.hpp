#pragma once

// Discrete-event engine for the capture -> encode -> uplink -> edge ->
// downlink loop, and a time-stepped oracle that re-derives the same traces
// without an event queue.
//
// Stage semantics shared by both implementations:
//  * frame k starts capture at k * period and is part of the run iff its
//    capture completes by duration_ms;
//  * encoding starts when capture completes and is not queued;
//  * the encoded frame waits for its uplink grant (scheduling_delay), then
//    joins a single FIFO uplink. Each packet is lost with probability PER;
//    a loss costs one grant wait plus a resend of that packet. A packet that
//    fails max_retx + 1 times drops the frame on the spot;
//  * edge processing is not queued;
//  * downlink messages wait dl_delay_ms for a grant, then share one
//    downlink served packet by packet. Emergency stops jump ahead of pose
//    messages at the next packet boundary.
// All timestamps run to completion; nothing is cut off at duration_ms.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "edgesim/model.hpp"

namespace edgesim::sim {

enum class EventKind : int {
  EmergencyIssued = 0,
  EmergencyGrant,
  CaptureDone,
  EncodeDone,
  UplinkGrant,
  UplinkDone,
  EdgeDone,
  DownlinkGrant,
  DownlinkPacketDone,
};

struct Event {
  double time_ms = 0.0;
  std::uint64_t seq_tiebreak = 0;
  EventKind kind = EventKind::CaptureDone;
  std::int64_t subject = 0;  // frame seq or emergency index
};

/// Min-queue ordered by (time, kind priority, insertion counter).
class EventQueue {
 public:
  void push(double time_ms, EventKind kind, std::int64_t subject);
  Event pop();
  bool empty() const noexcept { return heap_.empty(); }
  std::size_t size() const noexcept { return heap_.size(); }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const noexcept;
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t counter_ = 0;
};

struct FrameTrace {
  std::int64_t seq = 0;
  double t_capture_start = 0.0;
  double t_capture_done = 0.0;
  double t_encode_done = 0.0;
  double t_ul_grant = 0.0;
  double t_ul_start = 0.0;
  double t_ul_done = 0.0;
  std::optional<double> t_edge_done;
  std::optional<double> t_dl_done;
  std::int64_t payload_bytes = 0;
  std::int64_t wire_bytes = 0;
  std::int64_t retx_count = 0;
  std::int64_t retx_wire_bytes = 0;
  bool dropped = false;

  /// t_dl_done - t_encode_done for delivered frames.
  std::optional<double> comm_edge_latency_ms() const;
};

struct EmergencyTrace {
  std::int64_t index = 0;
  double issued_ms = 0.0;
  double delivered_ms = 0.0;

  double latency_ms() const { return delivered_ms - issued_ms; }
};

struct RunMetrics {
  std::uint64_t scenario_id = 0;
  double duration_ms = 0.0;
  std::vector<FrameTrace> frame_traces;
  std::vector<EmergencyTrace> emergencies;
  std::int64_t ul_bytes_delivered = 0;
  std::int64_t ul_retx_bytes = 0;
  std::int64_t dl_bytes_delivered = 0;
  std::int64_t frames_dropped = 0;
  std::vector<double> emergency_latencies_ms;
  double p50_comm_edge_latency_ms = 0.0;
  double p95_comm_edge_latency_ms = 0.0;
  double max_comm_edge_latency_ms = 0.0;
  double achieved_fps = 0.0;

  std::int64_t frames_delivered() const {
    return static_cast<std::int64_t>(frame_traces.size()) - frames_dropped;
  }
};

class OracleTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

RunMetrics simulate(const ValidatedScenario& scenario);

inline constexpr std::int64_t kOracleMaxFrames = 100;
inline constexpr double kOracleMaxStepMs = 0.01;

RunMetrics oracle_simulate(const ValidatedScenario& scenario, double step_ms = kOracleMaxStepMs);

/// Number of frames whose capture completes within the run.
std::int64_t frame_count(const ScenarioConfig& config);

/// Independent stream per (seed, frame, purpose) so that draws do not depend
/// on processing order.
enum class Stream : std::uint32_t { PacketLoss = 0, EdgeLatency = 1 };
std::mt19937_64 make_stream(std::uint64_t seed, std::int64_t seq, Stream purpose);

/// Uniform variate in [0, 1) from the top 53 bits of one generator output.
double unit_draw(std::mt19937_64& rng);

/// Nearest-rank percentile, q in (0, 1]. Empty input gives 0.
double percentile(std::vector<double> values, double q);

/// Fills the aggregate fields of `metrics` from its traces.
void summarize(RunMetrics& metrics, const ScenarioConfig& config);

struct WindowStat {
  double start_ms = 0.0;
  std::size_t frames = 0;
  double value_ms = 0.0;
};

/// Percentile of comm+edge latency over consecutive windows of capture start
/// time. Windows with no delivered frame are skipped.
std::vector<WindowStat> windowed_latency(const RunMetrics& metrics, double window_ms, double q);

inline constexpr const char* kFrameCsvHeader =
    "seq,t_capture_start_ms,t_capture_done_ms,t_encode_done_ms,t_ul_grant_ms,t_ul_start_ms,"
    "t_ul_done_ms,t_edge_done_ms,t_dl_done_ms,comm_edge_latency_ms,payload_bytes,wire_bytes,"
    "retx_count,retx_wire_bytes,dropped";

inline constexpr const char* kEmergencyCsvHeader = "index,issued_ms,delivered_ms,latency_ms";

void write_frame_csv(std::ostream& out, const RunMetrics& metrics);
void write_emergency_csv(std::ostream& out, const RunMetrics& metrics);

nlohmann::json summary_json(const RunMetrics& metrics);

}  // namespace edgesim::sim
