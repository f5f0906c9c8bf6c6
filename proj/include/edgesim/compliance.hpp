#pragma once

// Requirement checks against the welding use-case table, the TDD split sweep
// and the offline slot-allocation optimizer.

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "edgesim/model.hpp"
#include "edgesim/sim.hpp"

namespace edgesim::compliance {

class MismatchedScenario : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Comparison { Less, AtLeast, AtMost, Within, Approx };

std::string to_string(Comparison comparison);

struct ReportEntry {
  std::string name;
  Comparison comparison = Comparison::Less;
  double required = 0.0;
  std::optional<double> required_hi;  // upper bound for Within
  std::optional<double> measured;     // empty when nothing could be measured
  std::string unit;
  bool pass = false;
  std::string note;
};

struct ComplianceReport {
  std::vector<ReportEntry> entries;
  bool overall_pass = false;

  const ReportEntry* find(const std::string& name) const;
};

/// Relative tolerance for the table's "approximately" rows.
inline constexpr double kApproxTolerance = 0.05;

/// Evaluates a finished run. Throws MismatchedScenario if the metrics were
/// produced from a different scenario.
ComplianceReport check(const sim::RunMetrics& metrics, const ValidatedScenario& scenario,
                       const RequirementSet& reqs);

/// Static arithmetic only: demands, asymmetry per frame, analytic
/// reliability and a worst-case emergency bound. No simulation.
ComplianceReport check_static(const ValidatedScenario& scenario, const RequirementSet& reqs);

std::string render_text(const ComplianceReport& report);
nlohmann::json report_json(const ComplianceReport& report);

struct SweepRow {
  int dl_slots = 0;
  int ul_slots = 0;
  double dl_bps = 0.0;
  double ul_bps = 0.0;
};

/// Slot duration implied by the radio numerology (15 kHz -> 1 ms).
double slot_ms_for(const RadioConfig& radio);

/// Every split of the 10 - unassigned usable slots, ordered by dl_slots.
std::vector<SweepRow> sweep_tdd(const RadioConfig& radio, int unassigned);

inline constexpr const char* kSweepCsvHeader =
    "dl_slots,ul_slots,unassigned_slots,dl_bps,ul_bps,dl_mbps,ul_mbps";

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, int unassigned);

/// Picks the split that meets both demands with the largest worst-direction
/// margin (capacity / demand). Ties go to more uplink slots. Returns nullopt
/// when no split meets both demands.
std::optional<TddPattern> optimize_tdd(const RadioConfig& radio, double ul_demand_bps,
                                       double dl_demand_bps, int unassigned);

/// Offered uplink rate on the wire (payload plus packet headers).
double offered_ul_bps(const ScenarioConfig& config);
/// Offered downlink rate on the wire for pose messages.
double offered_dl_bps(const ScenarioConfig& config);

}  // namespace edgesim::compliance
