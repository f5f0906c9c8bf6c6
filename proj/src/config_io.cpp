#include "edgesim/config_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace edgesim {

using nlohmann::json;

namespace {

class Reader {
 public:
  Reader(const json& node, std::string path, std::vector<ConfigIssue>& issues)
      : node_(node), path_(std::move(path)), issues_(issues) {
    if (!node_.is_object()) issue(path_.empty() ? "<root>" : path_, "must be an object");
  }

  ~Reader() {
    if (!node_.is_object()) return;
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.contains(key)) issue(join(key), "unknown key");
    }
  }

  Reader(const Reader&) = delete;
  Reader& operator=(const Reader&) = delete;

  bool has(const std::string& key) const { return node_.is_object() && node_.contains(key); }

  template <typename T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    if (!has(key)) return;
    const json& value = node_.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!value.is_boolean()) return issue(join(key), "expected a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!value.is_number_integer()) return issue(join(key), "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (value.is_number_integer() && !value.is_number_unsigned())
          return issue(join(key), "expected a non-negative integer");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!value.is_number()) return issue(join(key), "expected a number");
    }
    out = value.get<T>();
  }

  template <typename Enum>
  void read_enum(const std::string& key, Enum& out,
                 std::initializer_list<std::pair<const char*, Enum>> names) {
    seen_.insert(key);
    if (!has(key)) return;
    const json& value = node_.at(key);
    if (value.is_string()) {
      for (const auto& [name, e] : names) {
        if (value.get<std::string>() == name) {
          out = e;
          return;
        }
      }
    }
    std::string allowed;
    for (const auto& [name, e] : names) allowed += (allowed.empty() ? "" : "|") + std::string(name);
    issue(join(key), "expected one of " + allowed);
  }

  void read_times(const std::string& key, std::vector<double>& out) {
    seen_.insert(key);
    if (!has(key)) return;
    const json& value = node_.at(key);
    if (!value.is_array()) return issue(join(key), "expected an array of numbers");
    out.clear();
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (!value[i].is_number()) {
        issue(join(key) + "[" + std::to_string(i) + "]", "expected a number");
        continue;
      }
      out.push_back(value[i].get<double>());
    }
  }

  /// Returns nullptr when the section is absent.
  const json* section(const std::string& key) {
    seen_.insert(key);
    return has(key) ? &node_.at(key) : nullptr;
  }

  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  void issue(std::string field, std::string problem) {
    issues_.push_back({std::move(field), std::move(problem)});
  }

  const json& node_;
  std::string path_;
  std::vector<ConfigIssue>& issues_;
  std::set<std::string> seen_;
};

constexpr std::initializer_list<std::pair<const char*, EncodingKind>> kKinds = {
    {"raw", EncodingKind::Raw},
    {"compressed", EncodingKind::Compressed},
    {"semantic", EncodingKind::Semantic}};

constexpr std::initializer_list<std::pair<const char*, EdgeSampling>> kSamplings = {
    {"uniform", EdgeSampling::UniformRandom}, {"midpoint", EdgeSampling::Midpoint}};

}  // namespace

json to_json(const ScenarioConfig& c) {
  json doc;
  doc["sensor"] = {{"frame_bytes", c.sensor.frame_bytes},
                   {"target_fps", c.sensor.target_fps},
                   {"acquisition_ms", c.sensor.acquisition_ms},
                   {"pipelined_acquisition", c.sensor.pipelined_acquisition}};
  doc["encoding"] = {{"kind", to_string(c.encoding.kind)},
                     {"ratio", c.encoding.ratio},
                     {"encode_latency_ms", c.encoding.encode_latency_ms}};
  doc["radio"] = {{"bandwidth_mhz", c.radio.bandwidth_mhz},
                  {"scs_khz", c.radio.scs_khz},
                  {"dl_layers", c.radio.dl_layers},
                  {"ul_layers", c.radio.ul_layers},
                  {"modulation_bits", c.radio.modulation_bits},
                  {"code_rate", c.radio.code_rate},
                  {"efficiency_dl", c.radio.efficiency_dl},
                  {"efficiency_ul", c.radio.efficiency_ul},
                  {"mtu_bytes", c.radio.mtu_bytes},
                  {"header_bytes", c.radio.header_bytes},
                  {"packet_error_rate", c.radio.packet_error_rate},
                  {"max_retransmissions", c.radio.max_retransmissions},
                  {"unlimited_capacity", c.radio.unlimited_capacity}};
  doc["pattern"] = {{"dl_slots", c.pattern.dl_slots},
                    {"ul_slots", c.pattern.ul_slots},
                    {"unassigned_slots", c.pattern.unassigned_slots},
                    {"slots_per_frame", c.pattern.slots_per_frame},
                    {"slot_ms", c.pattern.slot_ms}};
  doc["scheduling"] = {{"min_delay_ms", c.scheduling.min_delay_ms},
                       {"max_delay_ms", c.scheduling.max_delay_ms},
                       {"period_ms", c.scheduling.period_ms},
                       {"phase_ms", c.scheduling.phase_ms},
                       {"dl_delay_ms", c.scheduling.dl_delay_ms}};
  doc["edge"] = {{"processing_min_ms", c.edge.processing_min_ms},
                 {"processing_max_ms", c.edge.processing_max_ms},
                 {"downlink_message_bytes", c.edge.downlink_message_bytes},
                 {"emergency_message_bytes", c.edge.emergency_message_bytes},
                 {"sampling", to_string(c.edge.sampling)}};
  doc["duration_ms"] = c.duration_ms;
  doc["seed"] = c.seed;
  doc["emergency_times_ms"] = c.emergency_times_ms;
  return doc;
}

ScenarioConfig scenario_from_json(const json& doc) {
  ScenarioConfig c;
  std::vector<ConfigIssue> issues;
  {
    Reader root(doc, "", issues);
    if (const json* node = root.section("sensor")) {
      Reader r(*node, "sensor", issues);
      r.read("frame_bytes", c.sensor.frame_bytes);
      r.read("target_fps", c.sensor.target_fps);
      r.read("acquisition_ms", c.sensor.acquisition_ms);
      r.read("pipelined_acquisition", c.sensor.pipelined_acquisition);
    }
    if (const json* node = root.section("encoding")) {
      Reader r(*node, "encoding", issues);
      r.read_enum("kind", c.encoding.kind, kKinds);
      r.read("ratio", c.encoding.ratio);
      r.read("encode_latency_ms", c.encoding.encode_latency_ms);
    }
    if (const json* node = root.section("radio")) {
      Reader r(*node, "radio", issues);
      r.read("bandwidth_mhz", c.radio.bandwidth_mhz);
      r.read("scs_khz", c.radio.scs_khz);
      r.read("dl_layers", c.radio.dl_layers);
      r.read("ul_layers", c.radio.ul_layers);
      r.read("modulation_bits", c.radio.modulation_bits);
      r.read("code_rate", c.radio.code_rate);
      r.read("efficiency_dl", c.radio.efficiency_dl);
      r.read("efficiency_ul", c.radio.efficiency_ul);
      r.read("mtu_bytes", c.radio.mtu_bytes);
      r.read("header_bytes", c.radio.header_bytes);
      r.read("packet_error_rate", c.radio.packet_error_rate);
      r.read("max_retransmissions", c.radio.max_retransmissions);
      r.read("unlimited_capacity", c.radio.unlimited_capacity);
    }
    if (const json* node = root.section("pattern")) {
      Reader r(*node, "pattern", issues);
      r.read("dl_slots", c.pattern.dl_slots);
      r.read("ul_slots", c.pattern.ul_slots);
      r.read("unassigned_slots", c.pattern.unassigned_slots);
      r.read("slots_per_frame", c.pattern.slots_per_frame);
      r.read("slot_ms", c.pattern.slot_ms);
    }
    if (const json* node = root.section("scheduling")) {
      Reader r(*node, "scheduling", issues);
      r.read("min_delay_ms", c.scheduling.min_delay_ms);
      r.read("max_delay_ms", c.scheduling.max_delay_ms);
      if (r.has("period_ms")) {
        r.read("period_ms", c.scheduling.period_ms);
      } else {
        // Unspecified period follows the envelope width.
        const double width = c.scheduling.max_delay_ms - c.scheduling.min_delay_ms;
        if (width > 0) c.scheduling.period_ms = width;
        r.read("period_ms", c.scheduling.period_ms);
      }
      r.read("phase_ms", c.scheduling.phase_ms);
      r.read("dl_delay_ms", c.scheduling.dl_delay_ms);
    }
    if (const json* node = root.section("edge")) {
      Reader r(*node, "edge", issues);
      r.read("processing_min_ms", c.edge.processing_min_ms);
      r.read("processing_max_ms", c.edge.processing_max_ms);
      r.read("downlink_message_bytes", c.edge.downlink_message_bytes);
      r.read("emergency_message_bytes", c.edge.emergency_message_bytes);
      r.read_enum("sampling", c.edge.sampling, kSamplings);
    }
    root.read("duration_ms", c.duration_ms);
    root.read("seed", c.seed);
    root.read_times("emergency_times_ms", c.emergency_times_ms);
  }
  if (!issues.empty()) throw InvalidConfig(std::move(issues));
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig({{path.string(), "cannot open config file"}});
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidConfig({{path.string(), std::string("parse error: ") + e.what()}});
  }
  return scenario_from_json(doc);
}

std::string canonical_dump(const ScenarioConfig& config) { return to_json(config).dump(); }

}  // namespace edgesim
