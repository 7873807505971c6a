#include "tcda/scm.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "tcda/error.hpp"

namespace tcda {

std::string Regime::id() const {
  char buf[96];
  std::snprintf(buf, sizeof buf, "D%dL%d-T%d-P%g-I%g", num_vars, max_lag, length, p_lag, p_inst);
  return buf;
}

std::vector<Regime> default_regimes() {
  std::vector<Regime> out;
  for (auto [d, l] : {std::pair{5, 3}, std::pair{7, 4}}) {
    for (int t : {250, 1000}) {
      for (double pl : {0.075, 0.15}) {
        for (double pi : {0.0, 0.1}) out.push_back(Regime{d, l, t, pl, pi});
      }
    }
  }
  return out;
}

double expected_link_count(const Regime& r) {
  const double d2 = static_cast<double>(r.num_vars) * r.num_vars;
  return d2 * r.max_lag * r.p_lag + d2 * r.p_inst;
}

ScmSpec make_linear_scm(Tensor3 lagged, Eigen::MatrixXd inst) {
  ScmSpec scm;
  scm.num_vars = static_cast<int>(lagged.dim(0));
  scm.max_lag = static_cast<int>(lagged.dim(2));
  if (lagged.dim(1) != lagged.dim(0) || inst.rows() != scm.num_vars ||
      inst.cols() != scm.num_vars) {
    throw Error(ErrorCode::shape, "SCM coefficient shapes disagree");
  }
  scm.lagged.push_back({0, std::move(lagged)});
  scm.inst = std::move(inst);
  scm.functions.assign(static_cast<std::size_t>(scm.num_vars) * scm.num_vars * (scm.max_lag + 1),
                       FunctionDescriptor{});
  return scm;
}

Tensor3 project_lwcg(const ScmSpec& scm) {
  Tensor3 out(scm.num_vars, scm.num_vars, scm.max_lag);
  for (const auto& seg : scm.lagged) {
    const auto src = seg.coefficients.values();
    auto dst = out.values();
    for (std::size_t k = 0; k < src.size(); ++k) {
      if (src[k] != 0.0) dst[k] = 1.0;
    }
  }
  return out;
}

Eigen::MatrixXd project_lsg(const Tensor3& lwcg) {
  const auto d = static_cast<Eigen::Index>(lwcg.dim(0));
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      for (std::size_t l = 0; l < lwcg.dim(2); ++l) {
        if (lwcg(i, j, l) != 0.0) {
          out(i, j) = 1.0;
          break;
        }
      }
    }
  }
  return out;
}

Eigen::MatrixXd project_inst(const ScmSpec& scm) {
  return (scm.inst.array() != 0.0).cast<double>().matrix();
}

GroundTruth project_truth(const ScmSpec& scm) {
  GroundTruth g;
  g.lwcg = project_lwcg(scm);
  g.inst = project_inst(scm);
  g.lsg = project_lsg(g.lwcg);
  return g;
}

GroundTruth remove_variable(const GroundTruth& truth, int index) {
  const int d = static_cast<int>(truth.lwcg.dim(0));
  const int lags = static_cast<int>(truth.lwcg.dim(2));
  std::vector<int> keep;
  for (int i = 0; i < d; ++i) {
    if (i != index) keep.push_back(i);
  }
  const int n = static_cast<int>(keep.size());
  GroundTruth out;
  out.lwcg = Tensor3(n, n, lags);
  out.inst = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int l = 0; l < lags; ++l) out.lwcg(a, b, l) = truth.lwcg(keep[a], keep[b], l);
      out.inst(a, b) = truth.inst(keep[a], keep[b]);
    }
  }
  out.lsg = project_lsg(out.lwcg);
  return out;
}

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& m) {
  const auto n = m.rows();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / 0.5))));
  const Eigen::MatrixXd a = m / std::ldexp(1.0, squarings);

  // Pade (6, 6) coefficients c_k = (12 - k)! 6! / (12! k! (6 - k)!).
  static constexpr double c[7] = {1.0,
                                  1.0 / 2.0,
                                  5.0 / 44.0,
                                  1.0 / 66.0,
                                  1.0 / 792.0,
                                  1.0 / 15840.0,
                                  1.0 / 665280.0};
  Eigen::MatrixXd power = eye;
  Eigen::MatrixXd num = c[0] * eye;
  Eigen::MatrixXd den = c[0] * eye;
  for (int k = 1; k <= 6; ++k) {
    power = power * a;
    num += c[k] * power;
    den += ((k % 2) ? -c[k] : c[k]) * power;
  }
  Eigen::MatrixXd r = den.partialPivLu().solve(num);
  for (int s = 0; s < squarings; ++s) r = r * r;
  return r;
}

bool check_acyclic(const Eigen::MatrixXd& inst) {
  if (inst.rows() != inst.cols()) throw Error(ErrorCode::shape, "B must be square");
  const Eigen::MatrixXd sq = inst.cwiseProduct(inst);
  const double trace = matrix_exponential(sq).trace();
  return std::abs(trace - static_cast<double>(inst.rows())) <= kAcyclicTolerance;
}

Eigen::MatrixXd companion_matrix(const Tensor3& lagged) {
  const auto d = static_cast<Eigen::Index>(lagged.dim(0));
  const auto l = static_cast<Eigen::Index>(lagged.dim(2));
  if (lagged.dim(1) != lagged.dim(0)) throw Error(ErrorCode::shape, "lagged tensor must be D x D x L");
  if (l == 0) throw Error(ErrorCode::shape, "lagged tensor needs L >= 1");
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(d * l, d * l);
  for (Eigen::Index k = 0; k < l; ++k) {
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) f(i, k * d + j) = lagged(i, j, k);
    }
  }
  if (l > 1) f.bottomLeftCorner(d * (l - 1), d * (l - 1)).setIdentity();
  return f;
}

double spectral_radius(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::numeric, "eigenvalue iteration failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool check_var_stable(const Tensor3& lagged) {
  return spectral_radius(companion_matrix(lagged)) < 1.0 - kStabilityMargin;
}

std::vector<int> topological_order(const Eigen::MatrixXd& inst) {
  const int d = static_cast<int>(inst.rows());
  std::vector<int> indegree(d, 0);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (inst(i, j) != 0.0) ++indegree[i];
    }
  }
  std::vector<int> order;
  std::vector<int> ready;
  for (int i = d - 1; i >= 0; --i) {
    if (indegree[i] == 0) ready.push_back(i);
  }
  while (!ready.empty()) {
    const int j = ready.back();
    ready.pop_back();
    order.push_back(j);
    for (int i = d - 1; i >= 0; --i) {
      if (inst(i, j) != 0.0 && --indegree[i] == 0) ready.push_back(i);
    }
  }
  if (static_cast<int>(order.size()) != d) {
    throw Error(ErrorCode::numeric, "instantaneous graph is cyclic");
  }
  return order;
}

}  // namespace tcda
