#include "edgesim/model.hpp"

#include <cmath>
#include <sstream>

#include "edgesim/config_io.hpp"

namespace edgesim {

std::string to_string(EncodingKind kind) {
  switch (kind) {
    case EncodingKind::Raw: return "raw";
    case EncodingKind::Compressed: return "compressed";
    case EncodingKind::Semantic: return "semantic";
  }
  return "unknown";
}

std::string to_string(EdgeSampling sampling) {
  switch (sampling) {
    case EdgeSampling::UniformRandom: return "uniform";
    case EdgeSampling::Midpoint: return "midpoint";
  }
  return "unknown";
}

std::string to_string(Direction direction) {
  return direction == Direction::DL ? "DL" : "UL";
}

namespace {

std::string describe(const std::vector<ConfigIssue>& issues) {
  std::ostringstream out;
  out << "invalid config:";
  for (const auto& issue : issues) out << "\n  " << issue.field << ": " << issue.problem;
  return out.str();
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

class IssueList {
 public:
  void require(bool ok, std::string field, std::string problem) {
    if (!ok) issues_.push_back({std::move(field), std::move(problem)});
  }
  std::vector<ConfigIssue> take() { return std::move(issues_); }

 private:
  std::vector<ConfigIssue> issues_;
};

bool finite(double v) { return std::isfinite(v); }

}  // namespace

InvalidConfig::InvalidConfig(std::vector<ConfigIssue> issues)
    : std::runtime_error(describe(issues)), issues_(std::move(issues)) {}

std::vector<ConfigIssue> check_scenario(const ScenarioConfig& c) {
  IssueList v;

  const auto& s = c.sensor;
  v.require(s.frame_bytes > 0, "sensor.frame_bytes", "must be > 0");
  v.require(finite(s.target_fps) && s.target_fps > 0, "sensor.target_fps", "must be > 0");
  v.require(finite(s.acquisition_ms) && s.acquisition_ms > 0, "sensor.acquisition_ms",
            "must be > 0");

  const auto& e = c.encoding;
  v.require(finite(e.ratio) && e.ratio >= 1.0, "encoding.ratio", "must be >= 1");
  v.require(finite(e.encode_latency_ms) && e.encode_latency_ms >= 0,
            "encoding.encode_latency_ms", "must be >= 0");
  if (e.kind == EncodingKind::Raw) {
    v.require(e.ratio == 1.0, "encoding.ratio", "raw mode requires ratio = 1");
    v.require(e.encode_latency_ms == 0.0, "encoding.encode_latency_ms",
              "raw mode requires encode latency = 0");
  }

  const auto& r = c.radio;
  v.require(finite(r.bandwidth_mhz) && r.bandwidth_mhz > 0, "radio.bandwidth_mhz", "must be > 0");
  v.require(finite(r.scs_khz) && r.scs_khz > 0, "radio.scs_khz", "must be > 0");
  v.require(r.dl_layers >= 1, "radio.dl_layers", "must be >= 1");
  v.require(r.ul_layers >= 1, "radio.ul_layers", "must be >= 1");
  v.require(r.modulation_bits >= 1, "radio.modulation_bits", "must be >= 1");
  v.require(r.code_rate > 0 && r.code_rate <= 1, "radio.code_rate", "must be in (0, 1]");
  v.require(r.efficiency_dl > 0 && r.efficiency_dl <= 1, "radio.efficiency_dl",
            "must be in (0, 1]");
  v.require(r.efficiency_ul > 0 && r.efficiency_ul <= 1, "radio.efficiency_ul",
            "must be in (0, 1]");
  v.require(r.header_bytes >= 0, "radio.header_bytes", "must be >= 0");
  v.require(r.mtu_bytes > r.header_bytes, "radio.mtu_bytes", "must exceed radio.header_bytes");
  v.require(r.packet_error_rate >= 0 && r.packet_error_rate <= 1, "radio.packet_error_rate",
            "must be in [0, 1]");
  v.require(r.max_retransmissions >= 0, "radio.max_retransmissions", "must be >= 0");

  const auto& p = c.pattern;
  v.require(p.slots_per_frame == kSlotsPerFrame, "pattern.slots_per_frame", "must be 10");
  v.require(p.dl_slots >= 0, "pattern.dl_slots", "must be >= 0");
  v.require(p.ul_slots >= 0, "pattern.ul_slots", "must be >= 0");
  v.require(p.unassigned_slots >= 0, "pattern.unassigned_slots", "must be >= 0");
  v.require(p.dl_slots + p.ul_slots + p.unassigned_slots == p.slots_per_frame, "pattern",
            "dl_slots + ul_slots + unassigned_slots must equal slots_per_frame (" +
                std::to_string(p.dl_slots + p.ul_slots + p.unassigned_slots) + " != " +
                std::to_string(p.slots_per_frame) + ")");
  v.require(finite(p.slot_ms) && p.slot_ms > 0, "pattern.slot_ms", "must be > 0");
  if (r.scs_khz > 0 && p.slot_ms > 0) {
    v.require(std::abs(p.slot_ms - 15.0 / r.scs_khz) < 1e-9, "pattern.slot_ms",
              "must equal 15 / radio.scs_khz ms");
  }

  const auto& q = c.scheduling;
  v.require(q.min_delay_ms >= 0, "scheduling.min_delay_ms", "must be >= 0");
  v.require(q.min_delay_ms <= q.max_delay_ms, "scheduling.max_delay_ms",
            "must be >= scheduling.min_delay_ms");
  v.require(finite(q.period_ms) && q.period_ms > 0, "scheduling.period_ms", "must be > 0");
  v.require(finite(q.phase_ms), "scheduling.phase_ms", "must be finite");
  v.require(finite(q.dl_delay_ms) && q.dl_delay_ms >= 0, "scheduling.dl_delay_ms",
            "must be >= 0");

  const auto& g = c.edge;
  v.require(g.processing_min_ms >= 0, "edge.processing_min_ms", "must be >= 0");
  v.require(g.processing_min_ms <= g.processing_max_ms, "edge.processing_max_ms",
            "must be >= edge.processing_min_ms");
  v.require(g.downlink_message_bytes > 0, "edge.downlink_message_bytes", "must be > 0");
  v.require(g.emergency_message_bytes > 0, "edge.emergency_message_bytes", "must be > 0");

  v.require(finite(c.duration_ms) && c.duration_ms > 0, "duration_ms", "must be > 0");
  for (std::size_t i = 0; i < c.emergency_times_ms.size(); ++i) {
    const double t = c.emergency_times_ms[i];
    v.require(t >= 0 && t < c.duration_ms, "emergency_times_ms[" + std::to_string(i) + "]",
              "must lie in [0, duration_ms)");
  }
  return v.take();
}

ValidatedScenario validate_scenario(const ScenarioConfig& config) {
  auto issues = check_scenario(config);
  if (!issues.empty()) throw InvalidConfig(std::move(issues));
  return ValidatedScenario(config, fnv1a(canonical_dump(config)));
}

ValidatedScenario validate_scenario(const ValidatedScenario& scenario) {
  return validate_scenario(scenario.config());
}

RequirementSet default_requirements() { return RequirementSet{}; }

ScenarioConfig default_compressed_scenario() {
  ScenarioConfig config;
  config.encoding.kind = EncodingKind::Compressed;
  config.encoding.ratio = 10.0;
  config.encoding.encode_latency_ms = 15.0;
  return config;
}

}  // namespace edgesim
