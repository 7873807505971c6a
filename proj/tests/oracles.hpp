#pragma once

// Independent reference implementations used only by the tests.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

// Directed cycle in the support of m (m(i, j) != 0 is an edge j -> i)?
inline bool has_cycle(const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  std::vector<int> state(n, 0);
  std::function<bool(int)> visit = [&](int u) {
    state[u] = 1;
    for (int v = 0; v < n; ++v) {
      if (m(v, u) == 0.0) continue;
      if (state[v] == 1) return true;
      if (state[v] == 0 && visit(v)) return true;
    }
    state[u] = 2;
    return false;
  };
  for (int u = 0; u < n; ++u) {
    if (state[u] == 0 && visit(u)) return true;
  }
  return false;
}

// ||F^k||_inf by repeated squaring-free multiplication.
inline double power_norm(const Eigen::MatrixXd& f, int k) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(f.rows(), f.cols());
  for (int i = 0; i < k; ++i) {
    p = p * f;
    const double n = p.cwiseAbs().rowwise().sum().maxCoeff();
    if (!std::isfinite(n) || n > 1e12) return n;
  }
  return p.cwiseAbs().rowwise().sum().maxCoeff();
}

struct Counts {
  double tp = 0, fp = 0, fn = 0, tn = 0;
};

inline Counts confusion(const std::vector<double>& s, const std::vector<double>& t, double tau) {
  Counts c;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const bool pred = s[k] > tau;
    const bool edge = t[k] != 0.0;
    if (pred && edge) c.tp += 1;
    if (pred && !edge) c.fp += 1;
    if (!pred && edge) c.fn += 1;
    if (!pred && !edge) c.tn += 1;
  }
  return c;
}

inline std::vector<double> thresholds(const std::vector<double>& s) {
  std::vector<double> taus = s;
  taus.push_back(INFINITY);
  return taus;
}

inline double shd(const std::vector<double>& s, const std::vector<double>& t) {
  double pos = 0;
  for (double v : t) pos += v != 0.0;
  double best = INFINITY;
  for (double tau : thresholds(s)) {
    const Counts c = confusion(s, t, tau);
    best = std::min(best, c.fp + c.fn);
  }
  return best / pos;
}

inline double f1(const std::vector<double>& s, const std::vector<double>& t) {
  double best = 0;
  for (double tau : thresholds(s)) {
    const Counts c = confusion(s, t, tau);
    const double d = 2 * c.tp + c.fp + c.fn;
    if (d > 0) best = std::max(best, 2 * c.tp / d);
  }
  return best;
}

inline double acc(const std::vector<double>& s, const std::vector<double>& t) {
  double best = 0;
  for (double tau : thresholds(s)) {
    const Counts c = confusion(s, t, tau);
    best = std::max(best, (c.tp + c.tn) / static_cast<double>(s.size()));
  }
  return best;
}

// Pair counting over all (edge, non-edge) pairs.
inline double auroc(const std::vector<double>& s, const std::vector<double>& t) {
  double num = 0, pairs = 0;
  for (std::size_t a = 0; a < s.size(); ++a) {
    if (t[a] == 0.0) continue;
    for (std::size_t b = 0; b < s.size(); ++b) {
      if (t[b] != 0.0) continue;
      pairs += 1;
      num += s[a] > s[b] ? 1.0 : (s[a] == s[b] ? 0.5 : 0.0);
    }
  }
  return num / pairs;
}

}  // namespace oracle
