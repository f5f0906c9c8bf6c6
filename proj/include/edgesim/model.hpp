#pragma once

// Domain types for the welding-cell perception loop.
//
// Units are fixed across the project: bytes and bits are decimal
// (1 MB = 1e6 bytes, 1 Gbps = 1e9 bit/s), rates are bit/s and times are
// milliseconds. Field names carry the unit suffix.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace edgesim {

enum class EncodingKind { Raw, Compressed, Semantic };
enum class EdgeSampling { UniformRandom, Midpoint };
enum class Direction { DL, UL };

std::string to_string(EncodingKind kind);
std::string to_string(EdgeSampling sampling);
std::string to_string(Direction direction);

struct SensorProfile {
  std::int64_t frame_bytes = 30'000'000;
  double target_fps = 5.0;
  double acquisition_ms = 200.0;
  bool pipelined_acquisition = false;

  bool operator==(const SensorProfile&) const = default;
};

struct EncodingMode {
  EncodingKind kind = EncodingKind::Raw;
  double ratio = 1.0;
  double encode_latency_ms = 0.0;

  bool operator==(const EncodingMode&) const = default;
};

// Efficiencies default to the least-squares fit of the per-slot rate against
// the testbed's reported 20 MHz throughput envelope (43-116 Mbps DL over
// 3..8 slots, 13-40 Mbps UL over 2..6 slots). See radio::fit_efficiency.
inline constexpr double kCalibratedEfficiencyDl = 0.5709274947792273;
inline constexpr double kCalibratedEfficiencyUl = 0.5244214803038332;

struct RadioConfig {
  double bandwidth_mhz = 20.0;
  double scs_khz = 30.0;
  int dl_layers = 2;
  int ul_layers = 1;
  int modulation_bits = 8;
  double code_rate = 0.925;
  double efficiency_dl = kCalibratedEfficiencyDl;
  double efficiency_ul = kCalibratedEfficiencyUl;
  int mtu_bytes = 1500;
  int header_bytes = 40;
  double packet_error_rate = 0.0;
  int max_retransmissions = 3;
  // Replaces the TDD capacity with an unbounded link (zero serialization).
  bool unlimited_capacity = false;

  bool operator==(const RadioConfig&) const = default;
};

inline constexpr int kSlotsPerFrame = 10;

struct TddPattern {
  int dl_slots = 3;
  int ul_slots = 6;
  int unassigned_slots = 1;
  int slots_per_frame = kSlotsPerFrame;
  double slot_ms = 0.5;

  bool operator==(const TddPattern&) const = default;
};

struct SchedulingModel {
  double min_delay_ms = 16.0;
  double max_delay_ms = 32.0;
  double period_ms = 16.0;
  // Grant epochs sit at phase_ms + k * period_ms.
  double phase_ms = 0.0;
  // Fixed wait between a downlink message becoming ready and its grant.
  double dl_delay_ms = 2.0;

  bool operator==(const SchedulingModel&) const = default;
};

struct EdgeProfile {
  double processing_min_ms = 30.0;
  double processing_max_ms = 80.0;
  std::int64_t downlink_message_bytes = 64'000;
  std::int64_t emergency_message_bytes = 64;
  EdgeSampling sampling = EdgeSampling::UniformRandom;

  bool operator==(const EdgeProfile&) const = default;
};

struct RequirementSet {
  double comm_edge_latency_ms = 100.0;
  double emergency_latency_ms = 10.0;
  double reliability_min = 0.99999;
  double asymmetry_min = 0.95;
  double asymmetry_max = 0.99;
  double dl_rate_max_bps = 5'000'000.0;
  double raw_ul_5fps_bps = 1.2e9;
  double raw_ul_10fps_bps = 2.4e9;
  double compressed_ul_min_bps = 120e6;
  double compressed_ul_max_bps = 240e6;

  bool operator==(const RequirementSet&) const = default;
};

struct ScenarioConfig {
  SensorProfile sensor;
  EncodingMode encoding;
  RadioConfig radio;
  TddPattern pattern;
  SchedulingModel scheduling;
  EdgeProfile edge;
  double duration_ms = 10'000.0;
  std::uint64_t seed = 1;
  std::vector<double> emergency_times_ms;

  bool operator==(const ScenarioConfig&) const = default;
};

/// A scenario whose invariants have been checked. Only validate_scenario
/// constructs one, so holding a ValidatedScenario is proof of validity.
class ValidatedScenario {
 public:
  const ScenarioConfig& config() const noexcept { return config_; }
  const ScenarioConfig* operator->() const noexcept { return &config_; }

  /// Stable 64-bit fingerprint of the canonical config document.
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }

  bool operator==(const ValidatedScenario& other) const {
    return config_ == other.config_;
  }

 private:
  friend ValidatedScenario validate_scenario(const ScenarioConfig& config);
  ValidatedScenario(ScenarioConfig config, std::uint64_t fingerprint)
      : config_(std::move(config)), fingerprint_(fingerprint) {}

  ScenarioConfig config_;
  std::uint64_t fingerprint_ = 0;
};

struct ConfigIssue {
  std::string field;
  std::string problem;
};

class InvalidConfig : public std::runtime_error {
 public:
  explicit InvalidConfig(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

/// Checks every type invariant and reports all violations at once.
ValidatedScenario validate_scenario(const ScenarioConfig& config);
ValidatedScenario validate_scenario(const ValidatedScenario& scenario);

/// Collects invariant violations without throwing.
std::vector<ConfigIssue> check_scenario(const ScenarioConfig& config);

RequirementSet default_requirements();

/// The nominal compressed operating point: 30 MB frames at 5 FPS, 10:1
/// geometric compression.
ScenarioConfig default_compressed_scenario();

}  // namespace edgesim
