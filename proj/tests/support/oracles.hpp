#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include "gen.hpp"

// Closed-form and exhaustive recomputations that read the raw world tables
// (host per VM, generated edge list) instead of library structures.
namespace oracle {

inline bool linked(const gen::World& w, int a, int b) {
  for (auto [x, y] : w.la_edges) {
    if ((x == a && y == b) || (x == b && y == a)) return true;
  }
  return false;
}

inline bool above(double v, double thr, bool inclusive) {
  return inclusive ? v >= thr : v > thr;
}

inline double H(const gen::World& w, int s) {
  double worst = 0.0;
  for (std::size_t v = 0; v < w.vms.size(); ++v) {
    if (w.host[v] == s) worst = std::max(worst, w.l_of[v]);
  }
  return w.servers[s].hyp_score / 10.0 * (1.0 + worst);
}

inline std::vector<double> all_H(const gen::World& w) {
  std::vector<double> out;
  for (std::size_t s = 0; s < w.servers.size(); ++s) {
    out.push_back(H(w, static_cast<int>(s)));
  }
  return out;
}

inline double C(const gen::World& w, int vm, bool coresidents_only = false) {
  double keep = 1.0;
  for (std::size_t j = 0; j < w.vms.size(); ++j) {
    if (w.host[j] != w.host[vm]) continue;
    if (coresidents_only && static_cast<int>(j) == vm) continue;
    keep *= 1.0 - w.l_of[j];
  }
  return 1.0 - keep;
}

inline double N(const gen::World& w, int vm) {
  double keep = 1.0;
  for (std::size_t j = 0; j < w.vms.size(); ++j) {
    if (static_cast<int>(j) == vm || w.host[j] == w.host[vm]) continue;
    if (linked(w, vm, static_cast<int>(j))) keep *= 1.0 - w.l_of[j];
  }
  return 1.0 - keep;
}

inline bool malicious_coresident(const gen::World& w, int vm,
                                 const std::vector<bool>& mask) {
  if (w.host[vm] < 0) return false;
  for (std::size_t j = 0; j < w.vms.size(); ++j) {
    if (static_cast<int>(j) != vm && w.host[j] == w.host[vm] && mask[j]) return true;
  }
  return false;
}

inline int config_indicator(const gen::World& w, int vm,
                            const std::vector<double>& h,
                            const std::vector<bool>& mask, double l_thr,
                            double h_thr, bool inclusive = false) {
  if (!malicious_coresident(w, vm, mask)) return 0;
  return above(w.l_of[vm], l_thr, inclusive) ||
                 above(h[w.host[vm]], h_thr, inclusive)
             ? 1
             : 0;
}

// Every simple LA path victim - k1 - ... - kz (z <= max_chain) through benign
// assigned intermediaries; a path counts when kz shares a host with some other
// malicious VM and the product of intermediary L values clears l_thr.
inline int alloc_indicator(const gen::World& w, int vm,
                           const std::vector<double>& h,
                           const std::vector<bool>& mask, double l_thr,
                           double h_thr, int max_chain, bool inclusive = false) {
  if (config_indicator(w, vm, h, mask, l_thr, h_thr, inclusive)) return 1;
  const int n = static_cast<int>(w.vms.size());
  std::vector<int> path;
  bool hit = false;
  std::function<void(int)> walk = [&](int tail) {
    if (hit || static_cast<int>(path.size()) >= max_chain) return;
    for (int k = 0; k < n; ++k) {
      if (k == vm || mask[k] || w.host[k] < 0 || !linked(w, tail, k)) continue;
      if (std::find(path.begin(), path.end(), k) != path.end()) continue;
      path.push_back(k);
      double product = 1.0;
      for (int p : path) product *= w.l_of[p];
      if (above(product, l_thr, inclusive) && malicious_coresident(w, k, mask)) {
        hit = true;
      }
      walk(k);
      path.pop_back();
    }
  };
  walk(vm);
  return hit ? 1 : 0;
}

}  // namespace oracle
