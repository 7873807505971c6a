#include "tcda/violations.hpp"

#include <algorithm>
#include <array>

#include "tcda/error.hpp"
#include "tcda/functions.hpp"
#include "tcda/noise.hpp"

namespace tcda {
namespace {

using Levels = std::array<double, 5>;

constexpr Levels kSnrTable{1.1, 0.8375, 0.575, 0.3125, 0.05};
constexpr Levels kSnrAppendix{10.0, 5.0, 1.0, 0.5, 0.1};
constexpr Levels kConfTable{0.135, 0.27625, 0.4175, 0.55875, 0.7};
constexpr Levels kConfInstAppendix{0.2, 0.4, 0.6, 0.8, 1.0};
constexpr Levels kConfLagAppendix{0.1, 0.2, 0.5, 0.7, 0.9};
constexpr Levels kDistortion{0.2, 0.15, 0.1, 0.05, 0.0};
constexpr Levels kFaithZeroLo{0.12, 0.0975, 0.075, 0.0525, 0.03};
constexpr Levels kFaithZeroHi{0.24, 0.1925, 0.145, 0.0975, 0.05};
constexpr Levels kRbfTable{0.425, 0.56875, 0.7125, 0.85625, 1.0};
constexpr Levels kCompTable{0.05, 0.2875, 0.525, 0.7625, 1.0};
constexpr Levels kNonlinearAppendix{0.2, 0.4, 0.6, 0.8, 1.0};
constexpr Levels kInnoMul{0.91, 0.93, 0.95, 0.97, 0.99};
constexpr Levels kInnoTime{0.8, 0.85, 0.9, 0.95, 1.0};
constexpr Levels kInnoAuto{0.35, 0.5, 0.65, 0.8, 0.95};
constexpr Levels kInnoCom{0.475, 0.60625, 0.7375, 0.86875, 1.0};
constexpr Levels kInnoShock{0.8, 0.85, 0.9, 0.95, 1.0};
constexpr Levels kInnoReal{0.8, 0.85, 0.9, 0.95, 1.0};
constexpr Levels kInnoUni{0.05, 0.25, 0.5, 0.75, 1.0};
constexpr Levels kInnoWeib{0.2, 0.4, 0.6, 0.8, 1.0};
constexpr Levels kCoefDelta{0.275, 0.33125, 0.3875, 0.44375, 0.5};
constexpr Levels kStatResamples{1, 2, 3, 4, 5};
constexpr Levels kLength{76, 58, 41, 23, 6};
constexpr Levels kMissingRate{0.2, 0.3375, 0.475, 0.6125, 0.75};
constexpr Levels kEmptyFraction{0.52, 0.6, 0.7005, 0.824, 0.928};
constexpr Levels kScaleAlpha{0.2, 0.4, 0.6, 0.8, 1.0};

constexpr double kMissingBeta = 3.5;

std::vector<ViolationInfo> build_catalog() {
  return {
      {"obs_add", Slot::obs, false, "Additive observational noise"},
      {"obs_mul", Slot::obs, false, "Signal-dependent observational noise"},
      {"obs_time", Slot::obs, false, "Time-dependent observational noise"},
      {"obs_auto", Slot::obs, false, "Autoregressive observational noise"},
      {"obs_com", Slot::obs, false, "Common-source observational noise"},
      {"obs_shock", Slot::obs, false, "Spike observational noise"},
      {"obs_real", Slot::obs, false, "Observational noise from a real series"},
      {"conf_inst", Slot::conf_inst, true, "Instantaneous hidden confounders"},
      {"conf_lag", Slot::conf_lag, false, "Lagged hidden confounder"},
      {"faith_inst", Slot::faith, true, "Instantaneous effects cancel out"},
      {"faith_lag", Slot::faith, false, "Lagged effects cancel out"},
      {"faith_zero", Slot::faith, false, "Effects become extremely small"},
      {"nl_mono", Slot::nl, false, "Monotonic nonlinear links"},
      {"nl_trend", Slot::nl, false, "Spline links with a linear trend"},
      {"nl_rbf", Slot::nl, false, "Gaussian-process links"},
      {"nl_comp", Slot::nl, false, "Composite-function links"},
      {"inno_mul", Slot::inno, false, "Signal-dependent innovation noise"},
      {"inno_time", Slot::inno, false, "Time-dependent innovation noise"},
      {"inno_auto", Slot::inno, false, "Autoregressive innovation noise"},
      {"inno_com", Slot::inno, false, "Common-source innovation noise"},
      {"inno_shock", Slot::inno, false, "Spike innovation noise"},
      {"inno_real", Slot::inno, false, "Innovation noise from a real series"},
      {"inno_uni", Slot::inno, false, "Uniform innovation noise"},
      {"inno_weib", Slot::inno, false, "Weibull innovation noise"},
      {"inno_var", Slot::inno, false, "Unequal innovation variances"},
      {"coef", Slot::stationarity, false, "Coefficients drift over time"},
      {"stat", Slot::stationarity, false, "Lagged matrix resampled over time"},
      {"length", Slot::length, false, "Short series"},
      {"mcar", Slot::missing, false, "Missing completely at random"},
      {"mar", Slot::missing, false, "Missing at random"},
      {"mnar", Slot::missing, false, "Missing not at random"},
      {"empty", Slot::empty, false, "Temporary loss of causal signal"},
      {"scale", Slot::scale, false, "Partial standardization"},
  };
}

double pick(const Levels& v, int level) { return v[level - 1]; }

}  // namespace

ScheduleVariant parse_schedule_variant(const std::string& name) {
  if (name == "table") return ScheduleVariant::table;
  if (name == "appendix") return ScheduleVariant::appendix;
  throw Error(ErrorCode::config, "unknown schedule variant: " + name);
}

const char* schedule_variant_name(ScheduleVariant v) {
  return v == ScheduleVariant::table ? "table" : "appendix";
}

const std::vector<ViolationInfo>& violation_catalog() {
  static const std::vector<ViolationInfo> catalog = build_catalog();
  return catalog;
}

bool is_known_violation(const std::string& id) {
  const auto& c = violation_catalog();
  return std::any_of(c.begin(), c.end(), [&](const ViolationInfo& v) { return v.id == id; });
}

const ViolationInfo& violation_info(const std::string& id) {
  for (const auto& v : violation_catalog()) {
    if (v.id == id) return v;
  }
  throw Error(ErrorCode::config, "unknown violation id: " + id);
}

double ViolationConfig::param(const std::string& name) const {
  const auto& v = params(name);
  if (v.size() != 1) throw Error(ErrorCode::config, "parameter " + name + " is not scalar");
  return v.front();
}

const std::vector<double>& ViolationConfig::params(const std::string& name) const {
  auto it = resolved.find(name);
  if (it == resolved.end()) {
    throw Error(ErrorCode::config, "violation " + id + " has no parameter " + name);
  }
  return it->second;
}

ViolationConfig unviolated() { return ViolationConfig{}; }

ViolationConfig resolve(const std::string& id, int level, ScheduleVariant variant) {
  if (id == kNoViolation) return unviolated();
  const ViolationInfo& info = violation_info(id);
  if (level < 1 || level > 5) throw Error(ErrorCode::config, "violation level must be in 1..5");
  const bool appendix = variant == ScheduleVariant::appendix;

  ViolationConfig c;
  c.id = id;
  c.level = level;
  c.variant = variant;
  auto& r = c.resolved;

  switch (info.slot) {
    case Slot::obs:
      r["snr"] = {pick(appendix ? kSnrAppendix : kSnrTable, level)};
      break;
    case Slot::conf_inst:
      r["link_prob"] = {pick(appendix ? kConfInstAppendix : kConfTable, level)};
      r["num_latent"] = {2};
      break;
    case Slot::conf_lag:
      r["link_prob"] = {pick(appendix ? kConfLagAppendix : kConfTable, level)};
      break;
    case Slot::faith:
      if (id == "faith_zero") {
        r["coef_interval"] = {pick(kFaithZeroLo, level), pick(kFaithZeroHi, level)};
      } else {
        r["distortion"] = {pick(kDistortion, level)};
      }
      break;
    case Slot::nl:
      if (id == "nl_mono") {
        const BetaIntervals b = monotonic_beta_intervals(level);
        r["beta_intervals"] = {b.lower_lo, b.lower_hi, b.upper_lo, b.upper_hi};
      } else if (id == "nl_trend") {
        r["points"] = {static_cast<double>(
            (appendix ? kSplinePointsAppendix : kSplinePointsTable)[level - 1])};
      } else if (id == "nl_rbf") {
        r["link_prob"] = {pick(appendix ? kNonlinearAppendix : kRbfTable, level)};
      } else {
        r["link_prob"] = {pick(appendix ? kNonlinearAppendix : kCompTable, level)};
      }
      break;
    case Slot::inno:
      if (id == "inno_var") {
        const VarianceIntervals v = unequal_variance_intervals(level);
        r["var_intervals"] = {v.lower_lo, v.lower_hi, v.upper_lo, v.upper_hi};
      } else {
        static const std::map<std::string, Levels> alphas = {
            {"inno_mul", kInnoMul},     {"inno_time", kInnoTime}, {"inno_auto", kInnoAuto},
            {"inno_com", kInnoCom},     {"inno_shock", kInnoShock}, {"inno_real", kInnoReal},
            {"inno_uni", kInnoUni},     {"inno_weib", kInnoWeib},
        };
        r["alpha"] = {pick(alphas.at(id), level)};
      }
      break;
    case Slot::stationarity:
      if (id == "coef") {
        r["delta"] = {pick(kCoefDelta, level)};
      } else {
        r["resamples"] = {pick(kStatResamples, level)};
      }
      break;
    case Slot::length:
      r["length"] = {pick(kLength, level)};
      break;
    case Slot::missing:
      r["rate"] = {pick(kMissingRate, level)};
      if (id != "mcar") r["beta"] = {kMissingBeta};
      break;
    case Slot::empty:
      r["fraction"] = {pick(kEmptyFraction, level)};
      break;
    case Slot::scale:
      r["alpha"] = {pick(kScaleAlpha, level)};
      break;
    case Slot::none:
      break;
  }
  return c;
}

std::vector<Regime> compatible_regimes(const ViolationConfig& config, const std::vector<Regime>& base) {
  return compatible_regimes(single(config), base);
}

std::vector<Regime> compatible_regimes(const CompositeConfig& config, const std::vector<Regime>& base) {
  bool needs_inst = false;
  const ViolationConfig* length = nullptr;
  for (const auto& p : config.parts) {
    if (p.id == kNoViolation) continue;
    needs_inst = needs_inst || violation_info(p.id).needs_inst;
    if (p.id == "length") length = &p;
  }
  std::vector<Regime> out;
  for (Regime r : base) {
    if (needs_inst && !(r.p_inst > 0.0)) continue;
    if (length != nullptr) {
      // The series length becomes the violation axis; keep one copy per
      // (D, L, p_lag, p_inst).
      const bool first_length = std::none_of(out.begin(), out.end(), [&](const Regime& o) {
        return o.num_vars == r.num_vars && o.max_lag == r.max_lag && o.p_lag == r.p_lag &&
               o.p_inst == r.p_inst;
      });
      if (!first_length) continue;
      r.length = static_cast<int>(length->param("length"));
    }
    out.push_back(r);
  }
  return out;
}

const ViolationConfig* CompositeConfig::find(Slot slot) const {
  for (const auto& p : parts) {
    if (p.id != kNoViolation && violation_info(p.id).slot == slot) return &p;
  }
  return nullptr;
}

const ViolationConfig* CompositeConfig::find(const std::string& id) const {
  for (const auto& p : parts) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

std::string CompositeConfig::id() const {
  if (parts.empty()) return kNoViolation;
  std::string s;
  for (const auto& p : parts) {
    if (!s.empty()) s += '+';
    s += p.id;
  }
  return s;
}

int CompositeConfig::level() const { return parts.empty() ? 0 : parts.front().level; }

CompositeConfig compose(std::vector<ViolationConfig> configs) {
  configs.erase(std::remove_if(configs.begin(), configs.end(),
                               [](const ViolationConfig& c) { return c.id == kNoViolation; }),
                configs.end());
  for (std::size_t a = 0; a < configs.size(); ++a) {
    for (std::size_t b = a + 1; b < configs.size(); ++b) {
      if (violation_info(configs[a].id).slot == violation_info(configs[b].id).slot) {
        throw Error(ErrorCode::config,
                    "conflicting violations " + configs[a].id + " and " + configs[b].id);
      }
      if (configs[a].level != configs[b].level) {
        throw Error(ErrorCode::config, "combined violations must share one level");
      }
    }
  }
  // Generation-time slots first, then post-hoc transforms, in catalog order.
  const auto& cat = violation_catalog();
  auto rank = [&](const ViolationConfig& c) {
    return std::find_if(cat.begin(), cat.end(), [&](const ViolationInfo& v) { return v.id == c.id; }) -
           cat.begin();
  };
  auto post_hoc = [](const ViolationConfig& c) {
    const Slot s = violation_info(c.id).slot;
    return s == Slot::obs || s == Slot::missing || s == Slot::scale;
  };
  std::stable_sort(configs.begin(), configs.end(), [&](const auto& x, const auto& y) {
    if (post_hoc(x) != post_hoc(y)) return !post_hoc(x);
    return rank(x) < rank(y);
  });
  return CompositeConfig{std::move(configs)};
}

CompositeConfig single(const ViolationConfig& config) {
  if (config.id == kNoViolation) return CompositeConfig{};
  return CompositeConfig{{config}};
}

std::vector<int> stat_change_points(int num_changes, int length) {
  if (num_changes < 0) throw Error(ErrorCode::invalid_argument, "negative change count");
  static const std::vector<std::vector<int>> t250 = {
      {125}, {83, 166}, {63, 126, 187}, {50, 100, 150, 200}, {41, 82, 122, 163, 205}};
  static const std::vector<std::vector<int>> t1000 = {{500},
                                                      {333, 666},
                                                      {250, 500, 750},
                                                      {200, 400, 600, 800},
                                                      {166, 333, 500, 666, 833}};
  if (num_changes == 0) return {};
  if (num_changes <= 5 && length == 250) return t250[num_changes - 1];
  if (num_changes <= 5 && length == 1000) return t1000[num_changes - 1];
  std::vector<int> out;
  for (int k = 1; k <= num_changes; ++k) {
    out.push_back(static_cast<int>(static_cast<long long>(k) * length / (num_changes + 1)));
  }
  return out;
}

std::vector<int> coef_change_points(int length) {
  if (length == 250) return {50, 100, 150, 200};
  if (length == 1000) return {200, 400, 600, 800};
  return {length / 5, 2 * length / 5, 3 * length / 5, 4 * length / 5};
}

std::vector<std::pair<int, int>> empty_intervals(int level, int length) {
  if (level < 1 || level > 5) throw Error(ErrorCode::invalid_argument, "violation level must be in 1..5");
  static const std::pair<int, int> t250[5][2] = {{{40, 100}, {150, 210}},
                                                 {{31, 106}, {144, 219}},
                                                 {{23, 111}, {139, 227}},
                                                 {{14, 117}, {133, 236}},
                                                 {{6, 122}, {128, 244}}};
  static const std::pair<int, int> t1000[5][2] = {{{160, 400}, {600, 840}},
                                                  {{124, 424}, {576, 876}},
                                                  {{92, 444}, {556, 908}},
                                                  {{56, 468}, {532, 944}},
                                                  {{24, 488}, {512, 976}}};
  if (length == 250) return {t250[level - 1][0], t250[level - 1][1]};
  const auto& row = t1000[level - 1];
  if (length == 1000) return {row[0], row[1]};
  auto scale = [&](int s) { return static_cast<int>(static_cast<long long>(s) * length / 1000); };
  return {{scale(row[0].first), scale(row[0].second)}, {scale(row[1].first), scale(row[1].second)}};
}

std::vector<ScheduleRow> schedule_table(ScheduleVariant variant) {
  std::vector<ScheduleRow> rows;
  for (const auto& info : violation_catalog()) {
    for (int level = 1; level <= 5; ++level) {
      const ViolationConfig c = resolve(info.id, level, variant);
      for (const auto& [name, values] : c.resolved) rows.push_back({info.id, level, name, values});
    }
  }
  return rows;
}

}  // namespace tcda
