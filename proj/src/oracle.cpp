#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "edgesim/pipeline.hpp"
#include "edgesim/radio.hpp"
#include "edgesim/sim.hpp"

// Time-stepped re-derivation of the engine's traces. The clock advances in
// fixed ticks; on each tick every resource is polled and any transition due
// at or before the tick is applied with its exact due time. There is no
// event queue: ordering comes from the polling structure and from comparing
// due times directly.

namespace edgesim::sim {

namespace {

constexpr double kNever = std::numeric_limits<double>::infinity();

struct OracleFrame {
  FrameTrace trace;
  enum class Stage { Waiting, OnUplink, AtEdge, Done } stage = Stage::Waiting;
  double edge_due = kNever;
};

struct OracleMessage {
  bool emergency = false;
  std::int64_t subject = 0;
  double grant_ms = 0.0;
  std::int64_t packets = 0;
  std::int64_t payload = 0;
  std::int64_t sent = 0;
};

class Stepper {
 public:
  Stepper(const ScenarioConfig& cfg, double step_ms) : cfg_(cfg), step_ms_(step_ms) {
    const auto cap = radio::tdd_capacity(cfg.radio, cfg.pattern);
    ul_bps_ = cap.ul_bps;
    dl_bps_ = cap.dl_bps;
  }

  RunMetrics run() {
    const double period = 1000.0 / cfg_.sensor.target_fps;
    const double cadence = cfg_.sensor.pipelined_acquisition
                               ? period
                               : std::max(period, cfg_.sensor.acquisition_ms);
    const std::int64_t frames = frame_count(cfg_);
    const auto payload = std::llround(static_cast<double>(cfg_.sensor.frame_bytes) / cfg_.encoding.ratio);
    const std::int64_t mss = cfg_.radio.mtu_bytes - cfg_.radio.header_bytes;
    const std::int64_t packets = (payload + mss - 1) / mss;
    if (frames > 0 && payload > 0 && ul_bps_ <= 0.0) {
      throw radio::ZeroCapacity("uplink has no slots but the scenario sends frames");
    }
    frame_payload_ = payload;
    frame_packets_ = packets;

    for (std::int64_t k = 0; k < frames; ++k) {
      OracleFrame f;
      f.trace.seq = k;
      f.trace.t_capture_start = static_cast<double>(k) * cadence;
      f.trace.t_capture_done = f.trace.t_capture_start + cfg_.sensor.acquisition_ms;
      f.trace.t_encode_done = f.trace.t_capture_done + cfg_.encoding.encode_latency_ms;
      f.trace.t_ul_grant =
          f.trace.t_encode_done + radio::scheduling_delay(f.trace.t_encode_done, cfg_.scheduling);
      f.trace.payload_bytes = payload;
      f.trace.wire_bytes = payload + packets * cfg_.radio.header_bytes;
      frames_.push_back(f);
    }
    frames_left_ = frames;
    for (std::size_t i = 0; i < cfg_.emergency_times_ms.size(); ++i) {
      const auto bytes = cfg_.edge.emergency_message_bytes;
      messages_.push_back({true, static_cast<std::int64_t>(i),
                           cfg_.emergency_times_ms[i] + cfg_.scheduling.dl_delay_ms,
                           (bytes + mss - 1) / mss, bytes, 0});
      pending_.push_back(messages_.size() - 1);
      EmergencyTrace e;
      e.index = static_cast<std::int64_t>(i);
      e.issued_ms = cfg_.emergency_times_ms[i];
      emergencies_.push_back(e);
    }

    for (std::int64_t tick = 0; !finished(); ++tick) {
      const double now = static_cast<double>(tick) * step_ms_;
      bool moved = true;
      while (moved) {
        while (poll_uplink(now) || poll_edge(now)) {
        }
        moved = poll_downlink(now);
      }
    }

    RunMetrics m;
    for (auto& f : frames_) m.frame_traces.push_back(f.trace);
    m.emergencies = emergencies_;
    m.dl_bytes_delivered = dl_bytes_;
    summarize(m, cfg_);
    return m;
  }

 private:
  bool finished() const { return frames_left_ == 0 && pending_.empty() && !dl_on_air_; }

  double airtime(std::int64_t wire_bytes, double bps) const {
    if (wire_bytes == 0 || std::isinf(bps)) return 0.0;
    return static_cast<double>(wire_bytes) * 8000.0 / bps;
  }

  std::int64_t wire_of_packet(std::int64_t payload, std::int64_t packets, std::int64_t i) const {
    const std::int64_t mss = cfg_.radio.mtu_bytes - cfg_.radio.header_bytes;
    const std::int64_t body = i + 1 < packets ? mss : payload - (packets - 1) * mss;
    return body + cfg_.radio.header_bytes;
  }

  bool poll_uplink(double now) {
    if (ul_frame_ >= 0) {
      auto& f = frames_[static_cast<std::size_t>(ul_frame_)];
      if (f.trace.t_ul_done > now) return false;
      ul_free_ms_ = f.trace.t_ul_done;
      if (f.trace.dropped) {
        f.stage = OracleFrame::Stage::Done;
        --frames_left_;
      } else {
        auto rng = make_stream(cfg_.seed, f.trace.seq, Stream::EdgeLatency);
        const double draw = unit_draw(rng);
        const auto& e = cfg_.edge;
        const double processing = e.sampling == EdgeSampling::Midpoint
                                      ? 0.5 * (e.processing_min_ms + e.processing_max_ms)
                                      : e.processing_min_ms + draw * (e.processing_max_ms - e.processing_min_ms);
        f.edge_due = f.trace.t_ul_done + processing;
        f.stage = OracleFrame::Stage::AtEdge;
        at_edge_.push_back(static_cast<std::size_t>(ul_frame_));
      }
      ul_frame_ = -1;
      return true;
    }
    if (next_ul_ >= static_cast<std::int64_t>(frames_.size())) return false;
    auto& f = frames_[static_cast<std::size_t>(next_ul_)];
    if (f.trace.t_ul_grant > now) return false;
    f.trace.t_ul_start = std::max(f.trace.t_ul_grant, ul_free_ms_);
    f.trace.t_ul_done = transmit(f.trace);
    f.stage = OracleFrame::Stage::OnUplink;
    ul_frame_ = next_ul_++;
    return true;
  }

  double transmit(FrameTrace& f) {
    const double per = cfg_.radio.packet_error_rate;
    if (per == 0.0) return f.t_ul_start + airtime(f.wire_bytes, ul_bps_);
    auto rng = make_stream(cfg_.seed, f.seq, Stream::PacketLoss);
    double t = f.t_ul_start;
    for (std::int64_t i = 0; i < frame_packets_; ++i) {
      const auto bytes = wire_of_packet(frame_payload_, frame_packets_, i);
      int failures = 0;
      while (true) {
        t += airtime(bytes, ul_bps_);
        if (unit_draw(rng) >= per) break;
        if (++failures > cfg_.radio.max_retransmissions) {
          f.dropped = true;
          return t;
        }
        f.retx_count += 1;
        f.retx_wire_bytes += bytes;
        t += radio::scheduling_delay(t, cfg_.scheduling);
      }
    }
    return t;
  }

  bool poll_edge(double now) {
    bool moved = false;
    for (auto it = at_edge_.begin(); it != at_edge_.end();) {
      auto& f = frames_[*it];
      if (f.edge_due > now) {
        ++it;
        continue;
      }
      f.trace.t_edge_done = f.edge_due;
      f.stage = OracleFrame::Stage::Done;  // delivery is tracked by its message
      --frames_left_;
      const auto bytes = cfg_.edge.downlink_message_bytes;
      const std::int64_t mss = cfg_.radio.mtu_bytes - cfg_.radio.header_bytes;
      messages_.push_back({false, f.trace.seq, f.edge_due + cfg_.scheduling.dl_delay_ms,
                           (bytes + mss - 1) / mss, bytes, 0});
      pending_.push_back(messages_.size() - 1);
      it = at_edge_.erase(it);
      moved = true;
    }
    return moved;
  }

  bool poll_downlink(double now) {
    if (dl_on_air_) {
      if (dl_packet_end_ > now) return false;
      auto& msg = messages_[dl_message_];
      dl_bytes_ += wire_of_packet(msg.payload, msg.packets, msg.sent);
      if (++msg.sent == msg.packets) {
        std::erase(pending_, dl_message_);
        if (msg.emergency) {
          emergencies_[static_cast<std::size_t>(msg.subject)].delivered_ms = dl_packet_end_;
        } else {
          frames_[static_cast<std::size_t>(msg.subject)].trace.t_dl_done = dl_packet_end_;
        }
      }
      dl_free_ms_ = dl_packet_end_;
      dl_on_air_ = false;
      return true;
    }

    // Earliest moment the link could pick something up.
    double earliest = kNever;
    for (std::size_t i : pending_) earliest = std::min(earliest, messages_[i].grant_ms);
    if (earliest == kNever) return false;
    const double decide = std::max(earliest, dl_free_ms_);
    if (decide > now) return false;

    // Emergencies first, then pose messages; each class in grant order.
    std::size_t best = messages_.size();
    for (std::size_t i : pending_) {
      const auto& m = messages_[i];
      if (m.grant_ms > decide) continue;
      if (best == messages_.size()) {
        best = i;
        continue;
      }
      const auto& b = messages_[best];
      if (m.emergency != b.emergency) {
        if (m.emergency) best = i;
      } else if (m.grant_ms < b.grant_ms ||
                 (m.grant_ms == b.grant_ms && m.subject < b.subject)) {
        best = i;
      }
    }
    auto& msg = messages_[best];
    if (dl_bps_ <= 0.0) throw radio::ZeroCapacity("downlink has no slots but a message is queued");
    dl_message_ = best;
    dl_on_air_ = true;
    dl_packet_end_ = decide + airtime(wire_of_packet(msg.payload, msg.packets, msg.sent), dl_bps_);
    return true;
  }

  const ScenarioConfig& cfg_;
  double step_ms_;
  double ul_bps_ = 0.0;
  double dl_bps_ = 0.0;
  std::int64_t frame_payload_ = 0;
  std::int64_t frame_packets_ = 0;

  std::vector<OracleFrame> frames_;
  std::vector<EmergencyTrace> emergencies_;
  std::vector<OracleMessage> messages_;
  std::vector<std::size_t> pending_;  // messages with packets left
  std::vector<std::size_t> at_edge_;
  std::int64_t frames_left_ = 0;

  std::int64_t ul_frame_ = -1;
  std::int64_t next_ul_ = 0;
  double ul_free_ms_ = 0.0;

  bool dl_on_air_ = false;
  std::size_t dl_message_ = 0;
  double dl_packet_end_ = 0.0;
  double dl_free_ms_ = 0.0;
  std::int64_t dl_bytes_ = 0;
};

}  // namespace

RunMetrics oracle_simulate(const ValidatedScenario& scenario, double step_ms) {
  if (!(step_ms > 0.0 && step_ms <= kOracleMaxStepMs)) {
    throw std::invalid_argument(fmt::format("oracle step must be in (0, {}] ms", kOracleMaxStepMs));
  }
  const auto frames = frame_count(scenario.config());
  if (frames > kOracleMaxFrames) {
    throw OracleTooLarge(
        fmt::format("oracle handles at most {} frames, scenario has {}", kOracleMaxFrames, frames));
  }
  RunMetrics m = Stepper(scenario.config(), step_ms).run();
  m.scenario_id = scenario.fingerprint();
  return m;
}

}  // namespace edgesim::sim
