#include "edgesim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>

#include <fmt/format.h>

#include "edgesim/pipeline.hpp"
#include "edgesim/radio.hpp"

namespace edgesim::sim {

bool EventQueue::Later::operator()(const Event& a, const Event& b) const noexcept {
  if (a.time_ms != b.time_ms) return a.time_ms > b.time_ms;
  if (a.kind != b.kind) return static_cast<int>(a.kind) > static_cast<int>(b.kind);
  return a.seq_tiebreak > b.seq_tiebreak;
}

void EventQueue::push(double time_ms, EventKind kind, std::int64_t subject) {
  heap_.push(Event{time_ms, counter_++, kind, subject});
}

Event EventQueue::pop() {
  Event top = heap_.top();
  heap_.pop();
  return top;
}

std::optional<double> FrameTrace::comm_edge_latency_ms() const {
  if (dropped || !t_dl_done) return std::nullopt;
  return *t_dl_done - t_encode_done;
}

std::int64_t frame_count(const ScenarioConfig& config) {
  const double period = pipeline::effective_frame_period(config.sensor);
  const double slack = config.duration_ms - config.sensor.acquisition_ms;
  if (slack < 0) return 0;
  return static_cast<std::int64_t>(std::floor(slack / period)) + 1;
}

std::mt19937_64 make_stream(std::uint64_t seed, std::int64_t seq, Stream purpose) {
  const auto useq = static_cast<std::uint64_t>(seq);
  std::seed_seq sseq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(useq), static_cast<std::uint32_t>(useq >> 32),
                     static_cast<std::uint32_t>(purpose)};
  return std::mt19937_64(sseq);
}

double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

void summarize(RunMetrics& m, const ScenarioConfig& config) {
  m.duration_ms = config.duration_ms;
  m.ul_bytes_delivered = 0;
  m.ul_retx_bytes = 0;
  m.frames_dropped = 0;
  std::vector<double> latencies;
  for (const auto& f : m.frame_traces) {
    m.ul_retx_bytes += f.retx_wire_bytes;
    if (f.dropped) {
      ++m.frames_dropped;
      continue;
    }
    m.ul_bytes_delivered += f.wire_bytes;
    if (auto l = f.comm_edge_latency_ms()) latencies.push_back(*l);
  }
  m.emergency_latencies_ms.clear();
  for (const auto& e : m.emergencies) m.emergency_latencies_ms.push_back(e.latency_ms());

  m.p50_comm_edge_latency_ms = percentile(latencies, 0.50);
  m.p95_comm_edge_latency_ms = percentile(latencies, 0.95);
  m.max_comm_edge_latency_ms =
      latencies.empty() ? 0.0 : *std::max_element(latencies.begin(), latencies.end());

  const auto total = static_cast<double>(m.frame_traces.size());
  m.achieved_fps = total == 0 ? 0.0
                              : 1000.0 / pipeline::effective_frame_period(config.sensor) *
                                    static_cast<double>(m.frames_delivered()) / total;
}

namespace {

class Engine {
 public:
  explicit Engine(const ScenarioConfig& config)
      : cfg_(config),
        radio_(config.radio),
        capacity_(radio::tdd_capacity(config.radio, config.pattern)),
        period_ms_(pipeline::effective_frame_period(config.sensor)) {}

  RunMetrics run() {
    const std::int64_t frames = frame_count(cfg_);
    const std::int64_t payload = pipeline::encoded_bytes(cfg_.sensor.frame_bytes, cfg_.encoding.ratio);
    const auto packets = radio::packetize(payload, radio_);
    if (frames > 0 && packets.wire_bytes > 0 && capacity_.ul_bps <= 0.0) {
      throw radio::ZeroCapacity("uplink has no slots but the scenario sends frames");
    }

    traces_.resize(static_cast<std::size_t>(frames));
    for (std::int64_t k = 0; k < frames; ++k) {
      auto& f = traces_[static_cast<std::size_t>(k)];
      f.seq = k;
      f.t_capture_start = static_cast<double>(k) * period_ms_;
      f.payload_bytes = packets.payload_bytes;
      f.wire_bytes = packets.wire_bytes;
      queue_.push(f.t_capture_start + cfg_.sensor.acquisition_ms, EventKind::CaptureDone, k);
    }
    frame_packets_ = packets;

    emergencies_.resize(cfg_.emergency_times_ms.size());
    for (std::size_t i = 0; i < cfg_.emergency_times_ms.size(); ++i) {
      emergencies_[i].index = static_cast<std::int64_t>(i);
      emergencies_[i].issued_ms = cfg_.emergency_times_ms[i];
      queue_.push(cfg_.emergency_times_ms[i], EventKind::EmergencyIssued, static_cast<std::int64_t>(i));
    }

    while (!queue_.empty()) dispatch(queue_.pop());

    RunMetrics m;
    m.frame_traces = std::move(traces_);
    m.emergencies = std::move(emergencies_);
    m.dl_bytes_delivered = dl_bytes_;
    summarize(m, cfg_);
    return m;
  }

 private:
  struct DlMessage {
    std::int64_t subject = 0;
    bool emergency = false;
    radio::PacketizedFrame packets;
    std::int64_t next_packet = 0;
  };

  FrameTrace& frame(std::int64_t seq) { return traces_[static_cast<std::size_t>(seq)]; }

  void dispatch(const Event& ev) {
    const double now = ev.time_ms;
    switch (ev.kind) {
      case EventKind::CaptureDone: {
        auto& f = frame(ev.subject);
        f.t_capture_done = now;
        queue_.push(now + cfg_.encoding.encode_latency_ms, EventKind::EncodeDone, ev.subject);
        break;
      }
      case EventKind::EncodeDone: {
        auto& f = frame(ev.subject);
        f.t_encode_done = now;
        queue_.push(now + radio::scheduling_delay(now, cfg_.scheduling), EventKind::UplinkGrant,
                    ev.subject);
        break;
      }
      case EventKind::UplinkGrant:
        frame(ev.subject).t_ul_grant = now;
        ul_waiting_.push_back(ev.subject);
        start_uplink(now);
        break;
      case EventKind::UplinkDone: {
        ul_busy_ = false;
        auto& f = frame(ev.subject);
        if (!f.dropped) {
          auto rng = make_stream(cfg_.seed, f.seq, Stream::EdgeLatency);
          queue_.push(now + pipeline::edge_latency(cfg_.edge, unit_draw(rng)), EventKind::EdgeDone,
                      ev.subject);
        }
        start_uplink(now);
        break;
      }
      case EventKind::EdgeDone:
        frame(ev.subject).t_edge_done = now;
        queue_.push(now + cfg_.scheduling.dl_delay_ms, EventKind::DownlinkGrant, ev.subject);
        break;
      case EventKind::DownlinkGrant:
        pose_queue_.push_back(
            {ev.subject, false, radio::packetize(cfg_.edge.downlink_message_bytes, radio_), 0});
        start_downlink(now);
        break;
      case EventKind::EmergencyIssued:
        queue_.push(now + cfg_.scheduling.dl_delay_ms, EventKind::EmergencyGrant, ev.subject);
        break;
      case EventKind::EmergencyGrant:
        emergency_queue_.push_back(
            {ev.subject, true, radio::packetize(cfg_.edge.emergency_message_bytes, radio_), 0});
        start_downlink(now);
        break;
      case EventKind::DownlinkPacketDone:
        finish_downlink_packet(now);
        start_downlink(now);
        break;
    }
  }

  void start_uplink(double now) {
    if (ul_busy_ || ul_waiting_.empty()) return;
    const std::int64_t seq = ul_waiting_.front();
    ul_waiting_.pop_front();
    auto& f = frame(seq);
    f.t_ul_start = now;
    f.t_ul_done = serve_uplink(f, now);
    ul_busy_ = true;
    queue_.push(f.t_ul_done, EventKind::UplinkDone, seq);
  }

  // Returns the time the uplink is released by this frame.
  double serve_uplink(FrameTrace& f, double start) {
    const double per = radio_.packet_error_rate;
    if (per == 0.0) return start + radio::transfer_duration_ms(frame_packets_, capacity_.ul_bps);

    auto rng = make_stream(cfg_.seed, f.seq, Stream::PacketLoss);
    double t = start;
    for (std::int64_t i = 0; i < frame_packets_.packet_count; ++i) {
      const auto bytes = radio::packet_wire_bytes(frame_packets_, i, radio_);
      const double airtime = radio::transfer_duration_ms(bytes, capacity_.ul_bps);
      for (int attempt = 0;; ++attempt) {
        t += airtime;
        if (unit_draw(rng) >= per) break;
        if (attempt == radio_.max_retransmissions) {
          f.dropped = true;
          return t;
        }
        ++f.retx_count;
        f.retx_wire_bytes += bytes;
        t += radio::scheduling_delay(t, cfg_.scheduling);
      }
    }
    return t;
  }

  DlMessage* next_downlink() {
    if (!emergency_queue_.empty()) return &emergency_queue_.front();
    if (!pose_queue_.empty()) return &pose_queue_.front();
    return nullptr;
  }

  void start_downlink(double now) {
    if (dl_busy_) return;
    DlMessage* msg = next_downlink();
    if (msg == nullptr) return;
    dl_current_ = msg->emergency;
    dl_busy_ = true;
    const auto bytes = radio::packet_wire_bytes(msg->packets, msg->next_packet, radio_);
    queue_.push(now + radio::transfer_duration_ms(bytes, capacity_.dl_bps),
                EventKind::DownlinkPacketDone, msg->subject);
  }

  void finish_downlink_packet(double now) {
    dl_busy_ = false;
    auto& q = dl_current_ ? emergency_queue_ : pose_queue_;
    DlMessage& msg = q.front();
    dl_bytes_ += radio::packet_wire_bytes(msg.packets, msg.next_packet, radio_);
    if (++msg.next_packet < msg.packets.packet_count) return;
    if (msg.emergency) {
      emergencies_[static_cast<std::size_t>(msg.subject)].delivered_ms = now;
    } else {
      frame(msg.subject).t_dl_done = now;
    }
    q.pop_front();
  }

  const ScenarioConfig& cfg_;
  const RadioConfig& radio_;
  radio::LinkCapacity capacity_;
  double period_ms_;
  radio::PacketizedFrame frame_packets_;

  EventQueue queue_;
  std::vector<FrameTrace> traces_;
  std::vector<EmergencyTrace> emergencies_;

  std::deque<std::int64_t> ul_waiting_;
  bool ul_busy_ = false;

  std::deque<DlMessage> emergency_queue_;
  std::deque<DlMessage> pose_queue_;
  bool dl_busy_ = false;
  bool dl_current_ = false;  // true while an emergency packet is on air
  std::int64_t dl_bytes_ = 0;
};

std::string cell(const std::optional<double>& v) {
  return v ? fmt::format("{:.6f}", *v) : std::string();
}

}  // namespace

RunMetrics simulate(const ValidatedScenario& scenario) {
  RunMetrics m = Engine(scenario.config()).run();
  m.scenario_id = scenario.fingerprint();
  return m;
}

std::vector<WindowStat> windowed_latency(const RunMetrics& metrics, double window_ms, double q) {
  std::vector<WindowStat> out;
  std::vector<double> bucket;
  double bucket_start = 0.0;
  auto flush = [&] {
    if (!bucket.empty()) out.push_back({bucket_start, bucket.size(), percentile(bucket, q)});
    bucket.clear();
  };
  for (const auto& f : metrics.frame_traces) {
    const auto latency = f.comm_edge_latency_ms();
    if (!latency) continue;
    const double start = std::floor(f.t_capture_start / window_ms) * window_ms;
    if (start != bucket_start) {
      flush();
      bucket_start = start;
    }
    bucket.push_back(*latency);
  }
  flush();
  return out;
}

void write_frame_csv(std::ostream& out, const RunMetrics& metrics) {
  out << kFrameCsvHeader << '\n';
  for (const auto& f : metrics.frame_traces) {
    out << fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{},{},{},{},{},{},{},{}\n",
                       f.seq, f.t_capture_start, f.t_capture_done, f.t_encode_done, f.t_ul_grant,
                       f.t_ul_start, f.t_ul_done, cell(f.t_edge_done), cell(f.t_dl_done),
                       cell(f.comm_edge_latency_ms()), f.payload_bytes, f.wire_bytes, f.retx_count,
                       f.retx_wire_bytes, f.dropped ? 1 : 0);
  }
}

void write_emergency_csv(std::ostream& out, const RunMetrics& metrics) {
  out << kEmergencyCsvHeader << '\n';
  for (const auto& e : metrics.emergencies) {
    out << fmt::format("{},{:.6f},{:.6f},{:.6f}\n", e.index, e.issued_ms, e.delivered_ms,
                       e.latency_ms());
  }
}

nlohmann::json summary_json(const RunMetrics& m) {
  return {
      {"scenario_id", fmt::format("{:016x}", m.scenario_id)},
      {"duration_ms", m.duration_ms},
      {"frames", m.frame_traces.size()},
      {"frames_delivered", m.frames_delivered()},
      {"frames_dropped", m.frames_dropped},
      {"ul_bytes_delivered", m.ul_bytes_delivered},
      {"ul_retx_bytes", m.ul_retx_bytes},
      {"dl_bytes_delivered", m.dl_bytes_delivered},
      {"p50_comm_edge_latency_ms", m.p50_comm_edge_latency_ms},
      {"p95_comm_edge_latency_ms", m.p95_comm_edge_latency_ms},
      {"max_comm_edge_latency_ms", m.max_comm_edge_latency_ms},
      {"emergency_latencies_ms", m.emergency_latencies_ms},
      {"achieved_fps", m.achieved_fps},
  };
}

}  // namespace edgesim::sim
