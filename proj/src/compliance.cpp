#include "edgesim/compliance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "edgesim/pipeline.hpp"
#include "edgesim/radio.hpp"

namespace edgesim::compliance {

std::string to_string(Comparison comparison) {
  switch (comparison) {
    case Comparison::Less: return "<";
    case Comparison::AtLeast: return ">=";
    case Comparison::AtMost: return "<=";
    case Comparison::Within: return "in";
    case Comparison::Approx: return "~=";
  }
  return "?";
}

const ReportEntry* ComplianceReport::find(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

double offered_ul_bps(const ScenarioConfig& c) {
  const auto payload = pipeline::encoded_bytes(c.sensor.frame_bytes, c.encoding.ratio);
  const auto wire = radio::packetize(payload, c.radio).wire_bytes;
  return pipeline::uplink_demand(wire, pipeline::effective_frame_period(c.sensor));
}

double offered_dl_bps(const ScenarioConfig& c) {
  const auto wire = radio::packetize(c.edge.downlink_message_bytes, c.radio).wire_bytes;
  return pipeline::uplink_demand(wire, pipeline::effective_frame_period(c.sensor));
}

namespace {

constexpr const char* kNoTraffic = "no traffic";

bool evaluate(Comparison cmp, double measured, double required, std::optional<double> hi) {
  switch (cmp) {
    case Comparison::Less: return measured < required;
    case Comparison::AtLeast: return measured >= required;
    case Comparison::AtMost: return measured <= required;
    case Comparison::Within: return measured >= required && measured <= *hi;
    case Comparison::Approx: return std::abs(measured - required) <= kApproxTolerance * required;
  }
  return false;
}

ReportEntry entry(std::string name, Comparison cmp, double required, std::optional<double> hi,
                  std::optional<double> measured, std::string unit, std::string note) {
  ReportEntry e{std::move(name), cmp, required, hi, measured, std::move(unit), false, std::move(note)};
  e.pass = measured.has_value() && evaluate(cmp, *measured, required, hi);
  return e;
}

// Rows that depend only on the sensor and encoder arithmetic.
void add_demand_rows(std::vector<ReportEntry>& out, const ScenarioConfig& c,
                     const RequirementSet& reqs) {
  const auto raw = c.sensor.frame_bytes;
  out.push_back(entry("raw_ul_5fps", Comparison::Approx, reqs.raw_ul_5fps_bps, std::nullopt,
                      pipeline::uplink_demand(raw, 1000.0 / 5.0), "bit/s",
                      "raw frame at 5 FPS"));
  out.push_back(entry("raw_ul_10fps", Comparison::Approx, reqs.raw_ul_10fps_bps, std::nullopt,
                      pipeline::uplink_demand(raw, 1000.0 / 10.0), "bit/s",
                      "raw frame at 10 FPS"));
  if (c.encoding.kind == EncodingKind::Compressed) {
    const auto payload = pipeline::encoded_bytes(raw, c.encoding.ratio);
    out.push_back(entry("compressed_ul_5fps", Comparison::Within, reqs.compressed_ul_min_bps,
                        reqs.compressed_ul_max_bps, pipeline::uplink_demand(payload, 200.0),
                        "bit/s", fmt::format("ratio {}:1 at 5 FPS", c.encoding.ratio)));
  } else {
    auto e = entry("compressed_ul_5fps", Comparison::Within, reqs.compressed_ul_min_bps,
                   reqs.compressed_ul_max_bps, std::nullopt, "bit/s",
                   "not applicable: encoding mode is " + to_string(c.encoding.kind));
    e.pass = true;
    out.push_back(std::move(e));
  }
  out.push_back(entry("dl_rate", Comparison::Less, reqs.dl_rate_max_bps, std::nullopt,
                      offered_dl_bps(c), "bit/s", "offered pose/trajectory rate on the wire"));
}

ReportEntry stability_row(const ScenarioConfig& c) {
  const auto cap = radio::tdd_capacity(c.radio, c.pattern);
  return entry("ul_stability", Comparison::AtMost, cap.ul_bps, std::nullopt, offered_ul_bps(c),
               "bit/s",
               fmt::format("offered uplink vs {} DL/{} UL slot capacity", c.pattern.dl_slots,
                           c.pattern.ul_slots));
}

ReportEntry reliability_row(const ScenarioConfig& c, const RequirementSet& reqs,
                            std::string extra) {
  const auto payload = pipeline::encoded_bytes(c.sensor.frame_bytes, c.encoding.ratio);
  const auto packets = radio::packetize(payload, c.radio).packet_count;
  const double p =
      radio::frame_delivery_prob(c.radio.packet_error_rate, packets, c.radio.max_retransmissions);
  std::string note = fmt::format(
      "analytic, independent retransmissions (no HARQ combining): PER {}, {} packets, {} retx",
      c.radio.packet_error_rate, packets, c.radio.max_retransmissions);
  if (!extra.empty()) note += "; " + extra;
  return entry("reliability", Comparison::AtLeast, reqs.reliability_min, std::nullopt, p, "",
               std::move(note));
}

constexpr const char* kLatencyNote =
    "p95 over delivered frames, encode done to downlink done (allocation, not worst case)";
constexpr const char* kEmergencyNote = "one-way command delivery, edge to robot";

ComplianceReport finish(std::vector<ReportEntry> entries) {
  ComplianceReport r;
  r.entries = std::move(entries);
  r.overall_pass = std::all_of(r.entries.begin(), r.entries.end(),
                               [](const ReportEntry& e) { return e.pass; });
  return r;
}

}  // namespace

ComplianceReport check(const sim::RunMetrics& metrics, const ValidatedScenario& scenario,
                       const RequirementSet& reqs) {
  if (metrics.scenario_id != scenario.fingerprint()) {
    throw MismatchedScenario(fmt::format("metrics belong to scenario {:016x}, not {:016x}",
                                         metrics.scenario_id, scenario.fingerprint()));
  }
  const auto& c = scenario.config();
  const bool any_delivered = metrics.frames_delivered() > 0;
  std::vector<ReportEntry> out;

  out.push_back(entry("comm_edge_latency", Comparison::Less, reqs.comm_edge_latency_ms,
                      std::nullopt,
                      any_delivered ? std::optional(metrics.p95_comm_edge_latency_ms) : std::nullopt,
                      "ms", any_delivered ? kLatencyNote : kNoTraffic));

  if (metrics.emergency_latencies_ms.empty()) {
    auto e = entry("emergency_latency", Comparison::Less, reqs.emergency_latency_ms, std::nullopt,
                   std::nullopt, "ms", std::string(kEmergencyNote) + "; no emergency commands issued");
    e.pass = true;
    out.push_back(std::move(e));
  } else {
    const double worst = *std::max_element(metrics.emergency_latencies_ms.begin(),
                                           metrics.emergency_latencies_ms.end());
    out.push_back(entry("emergency_latency", Comparison::Less, reqs.emergency_latency_ms,
                        std::nullopt, worst, "ms", std::string(kEmergencyNote) + "; max over run"));
  }

  if (metrics.frame_traces.empty()) {
    out.push_back(entry("reliability", Comparison::AtLeast, reqs.reliability_min, std::nullopt,
                        std::nullopt, "", kNoTraffic));
  } else {
    out.push_back(reliability_row(
        c, reqs,
        fmt::format("empirical {}/{} frames dropped", metrics.frames_dropped,
                    metrics.frame_traces.size())));
  }

  const double ul = static_cast<double>(metrics.ul_bytes_delivered);
  const double dl = static_cast<double>(metrics.dl_bytes_delivered);
  out.push_back(entry("traffic_asymmetry", Comparison::Within, reqs.asymmetry_min,
                      reqs.asymmetry_max,
                      ul + dl > 0 ? std::optional(pipeline::traffic_asymmetry(ul, dl)) : std::nullopt,
                      "", ul + dl > 0 ? "delivered wire volume, uplink share" : kNoTraffic));

  add_demand_rows(out, c, reqs);
  out.push_back(stability_row(c));
  return finish(std::move(out));
}

ComplianceReport check_static(const ValidatedScenario& scenario, const RequirementSet& reqs) {
  const auto& c = scenario.config();
  const auto cap = radio::tdd_capacity(c.radio, c.pattern);
  std::vector<ReportEntry> out;

  // Best-case stage sum: shortest grant wait, fastest edge, no queueing.
  const auto payload = pipeline::encoded_bytes(c.sensor.frame_bytes, c.encoding.ratio);
  const auto ul_frame = radio::packetize(payload, c.radio);
  const auto dl_frame = radio::packetize(c.edge.downlink_message_bytes, c.radio);
  const bool links_up = (cap.ul_bps > 0 || ul_frame.wire_bytes == 0) && cap.dl_bps > 0;
  if (links_up) {
    const double floor_ms = c.scheduling.min_delay_ms +
                            radio::transfer_duration_ms(ul_frame, cap.ul_bps) +
                            c.edge.processing_min_ms + c.scheduling.dl_delay_ms +
                            radio::transfer_duration_ms(dl_frame, cap.dl_bps);
    out.push_back(entry("comm_edge_latency", Comparison::Less, reqs.comm_edge_latency_ms,
                        std::nullopt, floor_ms, "ms",
                        "static lower bound: min grant wait + serialization + min edge + downlink"));
  } else {
    out.push_back(entry("comm_edge_latency", Comparison::Less, reqs.comm_edge_latency_ms,
                        std::nullopt, std::nullopt, "ms", "a direction has no slots"));
  }

  if (cap.dl_bps > 0) {
    const auto stop = radio::packetize(c.edge.emergency_message_bytes, c.radio);
    // Worst case waits out one full-MTU pose packet already on air.
    const double bound = c.scheduling.dl_delay_ms +
                         radio::transfer_duration_ms(c.radio.mtu_bytes, cap.dl_bps) +
                         radio::transfer_duration_ms(stop, cap.dl_bps);
    out.push_back(entry("emergency_latency", Comparison::Less, reqs.emergency_latency_ms,
                        std::nullopt, bound, "ms",
                        std::string(kEmergencyNote) + "; static worst case behind one packet"));
  } else {
    out.push_back(entry("emergency_latency", Comparison::Less, reqs.emergency_latency_ms,
                        std::nullopt, std::nullopt, "ms", "downlink has no slots"));
  }

  out.push_back(reliability_row(c, reqs, ""));

  out.push_back(entry("traffic_asymmetry", Comparison::Within, reqs.asymmetry_min,
                      reqs.asymmetry_max,
                      pipeline::traffic_asymmetry(static_cast<double>(ul_frame.wire_bytes),
                                                  static_cast<double>(dl_frame.wire_bytes)),
                      "", "per-frame wire volume, uplink share"));

  add_demand_rows(out, c, reqs);
  out.push_back(stability_row(c));
  return finish(std::move(out));
}

namespace {

std::string format_value(double v, const std::string& unit) {
  if (std::isinf(v)) return "inf";
  if (unit == "bit/s") {
    if (std::abs(v) >= 1e9) return fmt::format("{:.3f} Gbps", v / 1e9);
    if (std::abs(v) >= 1e6) return fmt::format("{:.3f} Mbps", v / 1e6);
    return fmt::format("{:.3f} kbps", v / 1e3);
  }
  if (unit == "ms") return fmt::format("{:.3f} ms", v);
  return fmt::format("{:.6f}", v);
}

std::string format_required(const ReportEntry& e) {
  if (e.comparison == Comparison::Within) {
    return fmt::format("[{}, {}]", format_value(e.required, e.unit),
                       format_value(*e.required_hi, e.unit));
  }
  return to_string(e.comparison) + " " + format_value(e.required, e.unit);
}

}  // namespace

std::string render_text(const ComplianceReport& report) {
  std::string out = fmt::format("{:<20} {:<28} {:<18} {:<5} {}\n", "requirement", "required",
                                "measured", "pass", "note");
  for (const auto& e : report.entries) {
    out += fmt::format("{:<20} {:<28} {:<18} {:<5} {}\n", e.name, format_required(e),
                       e.measured ? format_value(*e.measured, e.unit) : "-",
                       e.pass ? "yes" : "NO", e.note);
  }
  out += fmt::format("overall: {}\n", report.overall_pass ? "PASS" : "FAIL");
  return out;
}

nlohmann::json report_json(const ComplianceReport& report) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : report.entries) {
    nlohmann::json j = {{"name", e.name},
                        {"comparison", to_string(e.comparison)},
                        {"required", e.required},
                        {"unit", e.unit},
                        {"pass", e.pass},
                        {"note", e.note}};
    j["required_hi"] = e.required_hi ? nlohmann::json(*e.required_hi) : nlohmann::json(nullptr);
    if (e.measured && std::isinf(*e.measured)) {
      j["measured"] = "inf";
    } else {
      j["measured"] = e.measured ? nlohmann::json(*e.measured) : nlohmann::json(nullptr);
    }
    entries.push_back(std::move(j));
  }
  return {{"entries", entries}, {"overall_pass", report.overall_pass}};
}

double slot_ms_for(const RadioConfig& radio) { return 15.0 / radio.scs_khz; }

std::vector<SweepRow> sweep_tdd(const RadioConfig& radio, int unassigned) {
  if (unassigned < 0 || unassigned >= kSlotsPerFrame) {
    throw std::invalid_argument("unassigned slots must be in [0, 10)");
  }
  const int usable = kSlotsPerFrame - unassigned;
  std::vector<SweepRow> rows;
  for (int dl = 0; dl <= usable; ++dl) {
    TddPattern p{dl, usable - dl, unassigned, kSlotsPerFrame, slot_ms_for(radio)};
    const auto cap = radio::tdd_capacity(radio, p);
    rows.push_back({dl, usable - dl, cap.dl_bps, cap.ul_bps});
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, int unassigned) {
  out << kSweepCsvHeader << '\n';
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{:.3f},{:.3f},{:.6f},{:.6f}\n", r.dl_slots, r.ul_slots, unassigned,
                       r.dl_bps, r.ul_bps, r.dl_bps / 1e6, r.ul_bps / 1e6);
  }
}

std::optional<TddPattern> optimize_tdd(const RadioConfig& radio, double ul_demand_bps,
                                       double dl_demand_bps, int unassigned) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  auto margin = [](double capacity, double demand) { return demand > 0 ? capacity / demand : inf; };

  std::optional<TddPattern> best;
  double best_score = -inf;
  for (const auto& row : sweep_tdd(radio, unassigned)) {
    if (row.ul_bps < ul_demand_bps || row.dl_bps < dl_demand_bps) continue;
    const double score = std::min(margin(row.ul_bps, ul_demand_bps), margin(row.dl_bps, dl_demand_bps));
    if (!best || score > best_score || (score == best_score && row.ul_slots > best->ul_slots)) {
      best = TddPattern{row.dl_slots, row.ul_slots, unassigned, kSlotsPerFrame, slot_ms_for(radio)};
      best_score = score;
    }
  }
  return best;
}

}  // namespace edgesim::compliance
