#include "tcda/generator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

#include "tcda/error.hpp"
#include "tcda/functions.hpp"
#include "tcda/parallel.hpp"

namespace tcda {
namespace {

double signed_coefficient(Rng& rng, double lo, double hi) {
  const double mag = uniform(rng, lo, hi);
  return bernoulli(rng, 0.5) ? mag : -mag;
}

enum class EntryKind { normal, confounder };

struct LaggedEntry {
  int i, d, l;
  EntryKind kind;
};

struct Support {
  std::vector<LaggedEntry> lagged;
  Eigen::MatrixXi inst;
};

// Bernoulli support over the observed block; the confounder (index d_obs,
// when present) gets one to/from link per variable with probability p.
Support draw_support(int d_obs, int d_total, int lags, double p_lag, double conf_prob, Rng& rng) {
  Support s;
  for (int i = 0; i < d_obs; ++i) {
    for (int d = 0; d < d_obs; ++d) {
      for (int l = 0; l < lags; ++l) {
        if (bernoulli(rng, p_lag)) s.lagged.push_back({i, d, l, EntryKind::normal});
      }
    }
  }
  if (d_total > d_obs) {
    const int c = d_obs;
    for (int i = 0; i < d_obs; ++i) {
      if (bernoulli(rng, conf_prob)) {
        s.lagged.push_back({i, c, uniform_int(rng, 0, lags - 1), EntryKind::confounder});
      }
      if (bernoulli(rng, conf_prob)) {
        s.lagged.push_back({c, i, uniform_int(rng, 0, lags - 1), EntryKind::normal});
      }
    }
  }
  s.inst = Eigen::MatrixXi::Zero(d_total, d_total);
  return s;
}

Eigen::MatrixXi draw_inst_support(int d_obs, int d_total, double p_inst, Rng& rng) {
  Eigen::MatrixXi m = Eigen::MatrixXi::Zero(d_total, d_total);
  for (int i = 0; i < d_obs; ++i) {
    for (int d = 0; d < d_obs; ++d) {
      // Drawn for every slot so the link rate matches D^2 p_inst; the
      // diagonal is dropped afterwards.
      const bool on = bernoulli(rng, p_inst);
      if (on && i != d) m(i, d) = 1;
    }
  }
  return m;
}

bool support_acyclic(const Eigen::MatrixXi& m) { return check_acyclic(m.cast<double>()); }

struct FaithPlan {
  bool lagged = false;
  double distortion = 0.0;
  FaithTriple triple;
  double v = 0.0;
};

void clear_parents(Support& s, int node) {
  s.lagged.erase(std::remove_if(s.lagged.begin(), s.lagged.end(),
                                [&](const LaggedEntry& e) { return e.i == node; }),
                 s.lagged.end());
  s.inst.row(node).setZero();
}

Tensor3 fill_lagged(const Support& s, int d_total, int lags, double lo, double hi,
                    const GeneratorOptions& o, Rng& rng) {
  Tensor3 a(d_total, d_total, lags);
  for (const auto& e : s.lagged) {
    a(e.i, e.d, e.l) = e.kind == EntryKind::confounder
                           ? uniform(rng, o.confounder_lo, o.confounder_hi)
                           : signed_coefficient(rng, lo, hi);
  }
  return a;
}

Eigen::MatrixXd fill_inst(const Eigen::MatrixXi& support, double lo, double hi, Rng& rng) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(support.rows(), support.cols());
  for (Eigen::Index i = 0; i < support.rows(); ++i) {
    for (Eigen::Index d = 0; d < support.cols(); ++d) {
      if (support(i, d)) b(i, d) = signed_coefficient(rng, lo, hi);
    }
  }
  return b;
}

void apply_faith(const FaithPlan& f, Tensor3& a, Eigen::MatrixXd& b) {
  const auto [j, k, i] = f.triple;
  const double direct = -f.v + f.distortion;
  if (f.lagged) {
    a(k, j, 0) = 2.0 * f.v;
    a(i, j, 1) = direct;
    a(i, k, 0) = 0.5;
  } else {
    b(k, j) = 2.0 * f.v;
    b(i, j) = direct;
    b(i, k) = 0.5;
  }
}

// A fresh stable observed block, used for stationarity change points.
Tensor3 resample_stable_block(const Tensor3& base, int d_obs, double p_lag, double lo, double hi,
                              const GeneratorOptions& o, Rng& rng, RetryBudget& budget) {
  const int lags = static_cast<int>(base.dim(2));
  for (;;) {
    const Support s = draw_support(d_obs, d_obs, lags, p_lag, 0.0, rng);
    for (int attempt = 0; attempt < o.coefficient_retries; ++attempt) {
      Tensor3 a = base;
      for (int i = 0; i < d_obs; ++i) {
        for (int d = 0; d < d_obs; ++d) {
          for (int l = 0; l < lags; ++l) a(i, d, l) = 0.0;
        }
      }
      for (const auto& e : s.lagged) a(e.i, e.d, e.l) = signed_coefficient(rng, lo, hi);
      if (check_var_stable(a)) return a;
      budget.spend("unstable lagged matrix at change point");
    }
  }
}

FunctionDescriptor draw_function(const ViolationConfig& nl, Rng& rng) {
  if (nl.id == "nl_mono") return sample_monotonic(nl.level, rng);
  if (nl.id == "nl_trend") return sample_spline_trend(static_cast<int>(nl.param("points")), rng);
  const double p = nl.param("link_prob");
  if (!bernoulli(rng, p)) return FunctionDescriptor{};
  return nl.id == "nl_rbf" ? sample_gp_rbf(rng) : sample_composite(rng);
}

void assign_functions(ScmSpec& scm, const ViolationConfig& nl, Rng& rng) {
  const Tensor3 lw = project_lwcg(scm);
  for (int i = 0; i < scm.num_vars; ++i) {
    for (int d = 0; d < scm.num_vars; ++d) {
      if (scm.inst(i, d) != 0.0) scm.function(i, d, 0) = draw_function(nl, rng);
      for (int l = 0; l < scm.max_lag; ++l) {
        if (lw(i, d, l) != 0.0) scm.function(i, d, l + 1) = draw_function(nl, rng);
      }
    }
  }
}

InnovationConfig innovation_for(const ViolationConfig* v, int d_total, Rng& rng) {
  InnovationConfig c;
  if (v == nullptr) return c;
  static const std::map<std::string, InnovationKind> kinds = {
      {"inno_mul", InnovationKind::mul},       {"inno_time", InnovationKind::time},
      {"inno_auto", InnovationKind::autoreg},  {"inno_com", InnovationKind::common},
      {"inno_shock", InnovationKind::shock},   {"inno_real", InnovationKind::real},
      {"inno_uni", InnovationKind::uniform},   {"inno_weib", InnovationKind::weibull},
      {"inno_var", InnovationKind::unequal_var},
  };
  c.kind = kinds.at(v->id);
  if (c.kind == InnovationKind::unequal_var) {
    c.variances = sample_unequal_variances(v->level, d_total, rng);
  } else {
    c.alpha = v->param("alpha");
  }
  return c;
}

NoiseKind kernel_kind(InnovationKind k) {
  switch (k) {
    case InnovationKind::mul: return NoiseKind::mul;
    case InnovationKind::time: return NoiseKind::time;
    case InnovationKind::autoreg: return NoiseKind::autoreg;
    case InnovationKind::common: return NoiseKind::common;
    case InnovationKind::shock: return NoiseKind::shock;
    case InnovationKind::real: return NoiseKind::real;
    case InnovationKind::uniform: return NoiseKind::uniform;
    case InnovationKind::weibull: return NoiseKind::weibull;
    case InnovationKind::unequal_var: return NoiseKind::unequal_var;
    case InnovationKind::gaussian: break;
  }
  return NoiseKind::add;
}

NoiseKind obs_kind(const std::string& id) {
  static const std::map<std::string, NoiseKind> kinds = {
      {"obs_add", NoiseKind::add},       {"obs_mul", NoiseKind::mul},
      {"obs_time", NoiseKind::time},     {"obs_auto", NoiseKind::autoreg},
      {"obs_com", NoiseKind::common},    {"obs_shock", NoiseKind::shock},
      {"obs_real", NoiseKind::real},
  };
  return kinds.at(id);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

void RetryBudget::spend(const char* what) {
  if (++used_ >= limit_) {
    throw Error(ErrorCode::retry_exhausted,
                std::string("retry budget exhausted (last failure: ") + what + ")");
  }
}

ScmSpec sample_scm(const Regime& regime, const CompositeConfig& violation, Rng& rng,
                   const GeneratorOptions& o, RetryBudget& budget, FaithTriple* faith_out) {
  const int d_obs = regime.num_vars;
  const int lags = regime.max_lag;
  if (d_obs < 1 || lags < 1) throw Error(ErrorCode::invalid_argument, "regime needs D >= 1 and L >= 1");

  const ViolationConfig* conf_lag = violation.find(Slot::conf_lag);
  const ViolationConfig* conf_inst = violation.find(Slot::conf_inst);
  const ViolationConfig* faith = violation.find(Slot::faith);
  const ViolationConfig* nl = violation.find(Slot::nl);
  const ViolationConfig* stationarity = violation.find(Slot::stationarity);
  const int d_total = d_obs + (conf_lag ? 1 : 0);
  const double conf_prob = conf_lag ? conf_lag->param("link_prob") : 0.0;

  double lo = o.coef_lo;
  double hi = o.coef_hi;
  if (faith && faith->id == "faith_zero") {
    lo = faith->params("coef_interval")[0];
    hi = faith->params("coef_interval")[1];
  }
  const bool cancel = faith && faith->id != "faith_zero";
  if (cancel && d_obs < 3) throw Error(ErrorCode::invalid_argument, "path cancellation needs D >= 3");
  if (cancel && faith->id == "faith_lag" && lags < 2) {
    throw Error(ErrorCode::invalid_argument, "lagged path cancellation needs L >= 2");
  }

  Tensor3 a;
  Eigen::MatrixXd b;
  FaithPlan plan;
  for (bool done = false; !done;) {
    Support s = draw_support(d_obs, d_total, lags, regime.p_lag, conf_prob, rng);
    for (;;) {
      s.inst = draw_inst_support(d_obs, d_total, regime.p_inst, rng);
      if (support_acyclic(s.inst)) break;
      budget.spend("cyclic instantaneous graph");
    }
    if (cancel) {
      plan.lagged = faith->id == "faith_lag";
      plan.distortion = faith->param("distortion");
      std::vector<int> nodes(d_obs);
      for (int n = 0; n < d_obs; ++n) nodes[n] = n;
      for (int n = 0; n < 3; ++n) std::swap(nodes[n], nodes[uniform_int(rng, n, d_obs - 1)]);
      plan.triple = {nodes[0], nodes[1], nodes[2]};
      plan.v = uniform(rng, 0.3, 0.5);
      clear_parents(s, plan.triple.k);
      clear_parents(s, plan.triple.i);
      if (!plan.lagged) {
        s.inst(plan.triple.j, plan.triple.k) = 0;
        s.inst(plan.triple.j, plan.triple.i) = 0;
        Eigen::MatrixXi with = s.inst;
        with(plan.triple.k, plan.triple.j) = with(plan.triple.i, plan.triple.j) = 1;
        with(plan.triple.i, plan.triple.k) = 1;
        if (!support_acyclic(with)) {
          budget.spend("cyclic instantaneous graph after cancellation structure");
          continue;
        }
      }
    }
    for (int attempt = 0; attempt < o.coefficient_retries; ++attempt) {
      a = fill_lagged(s, d_total, lags, lo, hi, o, rng);
      b = fill_inst(s.inst, lo, hi, rng);
      if (cancel) apply_faith(plan, a, b);
      if (check_var_stable(a)) {
        done = true;
        break;
      }
      budget.spend("unstable lagged matrix");
    }
  }

  ScmSpec scm = make_linear_scm(std::move(a), std::move(b));
  if (conf_lag) scm.hidden = d_obs;

  if (stationarity && stationarity->id == "stat") {
    const int changes = static_cast<int>(stationarity->param("resamples"));
    for (int start : stat_change_points(changes, regime.length)) {
      Tensor3 next = resample_stable_block(scm.base_lagged(), d_obs, regime.p_lag, lo, hi, o, rng, budget);
      scm.lagged.push_back({start, std::move(next)});
    }
  } else if (stationarity && stationarity->id == "coef") {
    const double delta = stationarity->param("delta");
    for (int start : coef_change_points(regime.length)) {
      Tensor3 next = scm.lagged.back().coefficients;
      for (double& v : next.values()) {
        if (v != 0.0) v += uniform(rng, -delta, delta);
      }
      scm.lagged.push_back({start, std::move(next)});
    }
  }

  if (conf_inst) {
    const int n = static_cast<int>(conf_inst->param("num_latent"));
    const double p = conf_inst->param("link_prob");
    InstConfounding c{Eigen::MatrixXd::Zero(d_total, n)};
    for (int i = 0; i < d_obs; ++i) {
      for (int z = 0; z < n; ++z) {
        if (bernoulli(rng, p)) c.links(i, z) = uniform(rng, o.confounder_lo, o.confounder_hi);
      }
    }
    if (cancel) {
      c.links.row(plan.triple.i).setZero();
      c.links.row(plan.triple.k).setZero();
    }
    scm.inst_confounding = std::move(c);
  }

  if (nl) assign_functions(scm, *nl, rng);
  scm.innovation = innovation_for(violation.find(Slot::inno), d_total, rng);
  if (faith_out) *faith_out = cancel ? plan.triple : FaithTriple{};
  return scm;
}

SupportDraw draw_support_counts(const Regime& regime, Rng& rng) {
  const Support s = draw_support(regime.num_vars, regime.num_vars, regime.max_lag, regime.p_lag, 0.0, rng);
  SupportDraw out;
  out.lagged = static_cast<int>(s.lagged.size());
  for (int k = 0; k < regime.num_vars * regime.num_vars; ++k) out.inst += bernoulli(rng, regime.p_inst) ? 1 : 0;
  return out;
}

bool guard_tripped(const Eigen::MatrixXd& x, int t, const GeneratorOptions& o) {
  const int w = o.guard_window;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double v = x(i, t);
    if (!std::isfinite(v) || std::abs(v) > o.guard_bound) return true;
    if (t - w - 1 < 0) continue;
    bool rising = true;
    for (int k = 0; k <= w && rising; ++k) {
      rising = std::abs(x(i, t - k - 1)) < std::abs(x(i, t - k));
    }
    if (rising) return true;
  }
  return false;
}

Eigen::MatrixXd simulate(const ScmSpec& scm, int length, const CompositeConfig& violation, Rng& rng,
                         const GeneratorOptions& o) {
  const int d = scm.num_vars;
  const int lags = scm.max_lag;
  if (length < 1) throw Error(ErrorCode::invalid_argument, "series length must be positive");
  const int warm = std::min(std::max(lags, 1), length);
  const std::vector<int> order = topological_order(scm.inst);

  const InnovationConfig& inno = scm.innovation;
  const bool kernel_driven = inno.kind != InnovationKind::gaussian &&
                             inno.kind != InnovationKind::mul &&
                             inno.kind != InnovationKind::uniform &&
                             inno.kind != InnovationKind::weibull;
  std::optional<NoiseKernel> kernel;
  if (kernel_driven) {
    kernel.emplace(kernel_kind(inno.kind), d, o.noise, o.pool, inno.variances);
    kernel->bind_horizon(length, rng);
  }

  // The raw time envelope grows to about 11 by t = 1000, which no series can
  // absorb under the divergence bound; it is rescaled to unit RMS over the
  // simulated steps so only its shape acts as the violation.
  double kernel_scale = 1.0;
  if (inno.kind == InnovationKind::time) {
    const double rms = time_envelope_rms(o.noise, warm, length);
    if (rms > 0.0) kernel_scale = 1.0 / rms;
  }

  std::vector<std::pair<int, int>> empty;
  if (const auto* e = violation.find(Slot::empty)) empty = empty_intervals(e->level, length);

  const int latent = scm.inst_confounding ? static_cast<int>(scm.inst_confounding->links.cols()) : 0;
  Eigen::VectorXd z(latent);
  Eigen::VectorXd e(d);
  Eigen::VectorXd eta(d);
  const Eigen::VectorXd no_signal = Eigen::VectorXd::Ones(d);

  Eigen::MatrixXd x(d, length);
  for (int t = 0; t < warm; ++t) {
    for (int i = 0; i < d; ++i) x(i, t) = standard_normal(rng);
    if (guard_tripped(x, t, o)) throw DivergenceError("guard tripped during initialization");
  }

  std::size_t segment = 0;
  for (int t = warm; t < length; ++t) {
    while (segment + 1 < scm.lagged.size() && scm.lagged[segment + 1].start <= t) ++segment;
    const Tensor3& a = scm.lagged[segment].coefficients;
    const bool silent = std::any_of(empty.begin(), empty.end(), [&](const std::pair<int, int>& p) {
      return t >= p.first && t < p.second;
    });

    for (int n = 0; n < latent; ++n) z(n) = standard_normal(rng);
    switch (inno.kind) {
      case InnovationKind::gaussian:
      case InnovationKind::mul:
        for (int i = 0; i < d; ++i) eta(i) = standard_normal(rng);
        break;
      case InnovationKind::uniform:
      case InnovationKind::weibull: {
        const NonGaussian g =
            inno.kind == InnovationKind::uniform ? NonGaussian::uniform : NonGaussian::weibull;
        for (int i = 0; i < d; ++i) e(i) = blend_non_gaussian(g, inno.alpha, rng, o.noise);
        break;
      }
      case InnovationKind::unequal_var:
        e = kernel->step(t, no_signal, rng);
        break;
      default: {
        const Eigen::VectorXd k = kernel->step(t, no_signal, rng) * kernel_scale;
        for (int i = 0; i < d; ++i) e(i) = inno.alpha * k(i) + (1.0 - inno.alpha) * standard_normal(rng);
        break;
      }
    }
    if (inno.kind == InnovationKind::mul) {
      // The multiplicative part scales with the structural value, which is
      // only known once the parents at t are available.
      for (int i = 0; i < d; ++i) e(i) = standard_normal(rng);
    }

    for (int i : order) {
      double s = 0.0;
      if (!silent) {
        for (int src = 0; src < d; ++src) {
          for (int l = 1; l <= lags && l <= t; ++l) {
            const double c = a(i, src, l - 1);
            if (c != 0.0) s += c * scm.function(i, src, l)(x(src, t - l));
          }
          const double c0 = scm.inst(i, src);
          if (c0 != 0.0) s += c0 * scm.function(i, src, 0)(x(src, t));
        }
        for (int n = 0; n < latent; ++n) s += scm.inst_confounding->links(i, n) * z(n);
      }
      double noise;
      switch (inno.kind) {
        case InnovationKind::gaussian: noise = eta(i); break;
        case InnovationKind::mul: noise = inno.alpha * s * eta(i) + (1.0 - inno.alpha) * e(i); break;
        default: noise = e(i); break;
      }
      x(i, t) = s + noise;
    }
    if (guard_tripped(x, t, o)) throw DivergenceError("divergence guard tripped");
  }
  return x;
}

double solve_missing_intercept(const Eigen::MatrixXd& z, double beta, double rate) {
  if (!(rate > 0.0 && rate < 1.0)) throw Error(ErrorCode::invalid_argument, "missing rate must be in (0, 1)");
  if (z.size() == 0 || !z.allFinite()) throw Error(ErrorCode::numeric, "degenerate missingness driver");
  auto mean_prob = [&](double alpha) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < z.size(); ++k) acc += sigmoid(alpha + beta * z.data()[k]);
    return acc / static_cast<double>(z.size());
  };
  const double span = std::abs(beta) * z.cwiseAbs().maxCoeff() + 50.0;
  double lo = -span;
  double hi = span;
  if (mean_prob(lo) > rate || mean_prob(hi) < rate) {
    throw Error(ErrorCode::numeric, "missingness intercept not bracketed");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_prob(mid) < rate ? lo : hi) = mid;
  }
  const double alpha = 0.5 * (lo + hi);
  if (std::abs(mean_prob(alpha) - rate) > 1e-6) {
    throw Error(ErrorCode::numeric, "missingness intercept did not converge");
  }
  return alpha;
}

Eigen::MatrixXi missing_mask(MissingKind kind, double rate, const Eigen::MatrixXd& z, double beta,
                             Rng& rng) {
  if (!(rate > 0.0 && rate < 1.0)) throw Error(ErrorCode::invalid_argument, "missing rate must be in (0, 1)");
  Eigen::MatrixXi mask(z.rows(), z.cols());
  if (kind == MissingKind::mcar) {
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
      for (Eigen::Index r = 0; r < z.rows(); ++r) mask(r, c) = bernoulli(rng, rate) ? 1 : 0;
    }
    return mask;
  }
  const double alpha = solve_missing_intercept(z, beta, rate);
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
      mask(r, c) = bernoulli(rng, sigmoid(alpha + beta * z(r, c))) ? 1 : 0;
    }
  }
  return mask;
}

Eigen::MatrixXd linear_interpolate(const Eigen::MatrixXd& x, const Eigen::MatrixXi& mask) {
  if (x.rows() != mask.rows() || x.cols() != mask.cols()) {
    throw Error(ErrorCode::shape, "mask shape differs from series");
  }
  Eigen::MatrixXd out = x;
  const Eigen::Index n = x.cols();
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    Eigen::Index prev = -1;
    for (Eigen::Index t = 0; t <= n; ++t) {
      if (t < n && mask(r, t)) continue;
      if (t == n && prev < 0) throw Error(ErrorCode::invalid_argument, "variable is fully masked");
      // Fill the gap (prev, t).
      for (Eigen::Index g = prev + 1; g < t; ++g) {
        if (prev < 0) {
          out(r, g) = x(r, t);
        } else if (t == n) {
          out(r, g) = x(r, prev);
        } else {
          const double w = static_cast<double>(g - prev) / static_cast<double>(t - prev);
          out(r, g) = (1.0 - w) * x(r, prev) + w * x(r, t);
        }
      }
      prev = t;
    }
  }
  return out;
}

Eigen::MatrixXd apply_scale_blend(const Eigen::MatrixXd& x, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw Error(ErrorCode::invalid_argument, "alpha must be in [0, 1]");
  if (alpha == 0.0) return x;
  Eigen::MatrixXd out(x.rows(), x.cols());
  const double n = static_cast<double>(x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().sum() / n;
    if (!(var > 0.0)) throw Error(ErrorCode::numeric, "cannot standardize a constant variable");
    const double sd = std::sqrt(var);
    for (Eigen::Index t = 0; t < x.cols(); ++t) {
      out(r, t) = alpha * (x(r, t) - mean) / sd + (1.0 - alpha) * x(r, t);
    }
  }
  return out;
}

Eigen::MatrixXd apply_post_transforms(Eigen::MatrixXd x, const ScmSpec& scm,
                                      const CompositeConfig& violation, Rng& rng,
                                      const GeneratorOptions& o) {
  if (scm.hidden) {
    const Eigen::Index h = *scm.hidden;
    Eigen::MatrixXd kept(x.rows() - 1, x.cols());
    for (Eigen::Index r = 0, k = 0; r < x.rows(); ++r) {
      if (r != h) kept.row(k++) = x.row(r);
    }
    x = std::move(kept);
  }

  if (const auto* obs = violation.find(Slot::obs)) {
    const NoiseKind kind = obs_kind(obs->id);
    Eigen::MatrixXd base;
    for (int attempt = 0;; ++attempt) {
      base = sample_noise(kind, x, rng, o.noise, o.pool);
      if (mean_power(base) > 0.0) break;
      // Spike noise on very short series can come out all zero.
      if (attempt + 1 >= o.retry_budget) throw Error(ErrorCode::retry_exhausted, "observational noise has zero power");
    }
    x += scale_to_snr(x, base, obs->param("snr"));
  }

  if (const auto* miss = violation.find(Slot::missing)) {
    const double rate = miss->param("rate");
    MissingKind kind = MissingKind::mcar;
    Eigen::MatrixXd z = x;
    double beta = 0.0;
    if (miss->id != "mcar") {
      beta = miss->param("beta");
      if (miss->id == "mar") {
        if (o.pool == nullptr) throw Error(ErrorCode::config, "mar needs an exogenous pool");
        kind = MissingKind::mar;
        z = o.pool->draw(static_cast<int>(x.rows()), static_cast<int>(x.cols()), rng);
      } else {
        kind = MissingKind::mnar;
      }
    }
    for (int attempt = 0;; ++attempt) {
      const Eigen::MatrixXi mask = missing_mask(kind, rate, z, beta, rng);
      const bool any_empty = (mask.rowwise().sum().array() == mask.cols()).any();
      if (!any_empty) {
        x = linear_interpolate(x, mask);
        break;
      }
      if (attempt + 1 >= o.retry_budget) throw Error(ErrorCode::retry_exhausted, "mask removes a whole variable");
    }
  }

  if (const auto* sc = violation.find(Slot::scale)) x = apply_scale_blend(x, sc->param("alpha"));
  return x;
}

SampleRecord generate_sample(const Regime& regime_in, const CompositeConfig& violation,
                             std::uint64_t seed, const GeneratorOptions& o) {
  Regime regime = regime_in;
  if (const auto* len = violation.find(Slot::length)) regime.length = static_cast<int>(len->param("length"));
  Rng rng(seed);
  RetryBudget budget(o.retry_budget);
  for (;;) {
    ScmSpec scm = sample_scm(regime, violation, rng, o, budget);
    Eigen::MatrixXd x;
    try {
      x = simulate(scm, regime.length, violation, rng, o);
    } catch (const DivergenceError&) {
      budget.spend("divergence guard");
      continue;
    }
    SampleRecord rec;
    rec.truth = project_truth(scm);
    if (scm.hidden) rec.truth = remove_variable(rec.truth, *scm.hidden);
    rec.x = apply_post_transforms(std::move(x), scm, violation, rng, o);
    rec.regime = regime;
    rec.violation = violation;
    rec.seed = seed;
    rec.scm = std::move(scm);
    rec.attempts = budget.used() + 1;
    return rec;
  }
}

std::uint64_t sample_seed(std::uint64_t master, const CompositeConfig& violation, const Regime& regime,
                          int index) {
  const std::string key = violation.id() + "@" + std::to_string(violation.level());
  return derive_seed(master, key, regime.id(), static_cast<std::uint64_t>(index));
}

std::vector<SampleRecord> generate_batch(const std::vector<PlanItem>& plan, std::uint64_t master_seed,
                                         const GeneratorOptions& o, int jobs) {
  std::vector<std::pair<std::size_t, int>> work;
  for (std::size_t p = 0; p < plan.size(); ++p) {
    for (int k = 0; k < plan[p].count; ++k) work.emplace_back(p, k);
  }
  std::vector<SampleRecord> out(work.size());
  parallel_for(work.size(), jobs, [&](std::size_t w) {
    const auto& item = plan[work[w].first];
    const int index = work[w].second;
    out[w] = generate_sample(item.regime, item.violation,
                             sample_seed(master_seed, item.violation, item.regime, index), o);
    out[w].index = index;
  });
  return out;
}

}  // namespace tcda
