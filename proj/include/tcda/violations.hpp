#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tcda/scm.hpp"

namespace tcda {

// Which level schedules to use where the appendix text and the parameter
// table disagree (SNR, confounding, nl_trend points, nl_rbf / nl_comp).
enum class ScheduleVariant { table, appendix };

ScheduleVariant parse_schedule_variant(const std::string& name);
const char* schedule_variant_name(ScheduleVariant v);

// Mechanism slot a violation occupies; two violations in one slot clash.
enum class Slot {
  none, obs, inno, conf_inst, conf_lag, faith, nl, stationarity, length, missing, empty, scale,
};

struct ViolationInfo {
  std::string id;
  Slot slot;
  bool needs_inst;  // only regimes with p_inst > 0
  std::string description;
};

// The 33 violations in canonical order.
const std::vector<ViolationInfo>& violation_catalog();
const ViolationInfo& violation_info(const std::string& id);
bool is_known_violation(const std::string& id);

// Identifier of the unviolated baseline. Not part of the catalog.
inline const std::string kNoViolation = "none";

struct ViolationConfig {
  std::string id = kNoViolation;
  int level = 0;
  ScheduleVariant variant = ScheduleVariant::table;
  std::map<std::string, std::vector<double>> resolved;

  double param(const std::string& name) const;
  const std::vector<double>& params(const std::string& name) const;
  bool has(const std::string& name) const { return resolved.count(name) != 0; }
};

ViolationConfig resolve(const std::string& id, int level,
                        ScheduleVariant variant = ScheduleVariant::table);
ViolationConfig unviolated();

std::vector<Regime> compatible_regimes(const ViolationConfig& config,
                                       const std::vector<Regime>& base = default_regimes());

// Ordered application plan for several simultaneous violations.
struct CompositeConfig {
  std::vector<ViolationConfig> parts;

  const ViolationConfig* find(Slot slot) const;
  const ViolationConfig* find(const std::string& id) const;
  std::string id() const;  // parts joined by '+'
  int level() const;       // shared level, 0 for the baseline
};

// Orders generation-time violations before post-hoc transforms; throws on
// two violations in one slot or on mixed levels.
CompositeConfig compose(std::vector<ViolationConfig> configs);
CompositeConfig single(const ViolationConfig& config);

std::vector<Regime> compatible_regimes(const CompositeConfig& config,
                                       const std::vector<Regime>& base = default_regimes());

// Change points where the lagged matrix is fully resampled.
std::vector<int> stat_change_points(int num_changes, int length);
// Change points where nonzero lagged coefficients are perturbed.
std::vector<int> coef_change_points(int length);
// Half-open [start, end) periods with empty parent sets.
std::vector<std::pair<int, int>> empty_intervals(int level, int length);

struct ScheduleRow {
  std::string id;
  int level;
  std::string name;
  std::vector<double> values;
};
std::vector<ScheduleRow> schedule_table(ScheduleVariant variant = ScheduleVariant::table);

}  // namespace tcda
