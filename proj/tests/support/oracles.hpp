// Independent reference implementations used by the unit and acceptance
// tests. Deliberately naive: brute force wherever the input is small.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

struct Sweep {
  double tdr = 0.0;
  double threshold = 0.0;
  double fdr = 0.0;
};

// Tries every distinct observed score plus +inf; keeps the best TDR with
// FDR <= target, the smallest threshold among equals.
inline Sweep tdr_sweep(std::span<const double> bona, std::span<const double> pa, double target) {
  std::set<double> candidates(bona.begin(), bona.end());
  candidates.insert(pa.begin(), pa.end());
  candidates.insert(std::numeric_limits<double>::infinity());
  Sweep best{-1.0, 0.0, 0.0};
  for (double t : candidates) {
    std::size_t fp = 0, tp = 0;
    for (double s : bona) fp += s >= t;
    for (double s : pa) tp += s >= t;
    const double fdr = static_cast<double>(fp) / static_cast<double>(bona.size());
    const double tdr = static_cast<double>(tp) / static_cast<double>(pa.size());
    if (fdr > target) continue;
    if (tdr > best.tdr || (tdr == best.tdr && t < best.threshold)) best = {tdr, t, fdr};
  }
  return best;
}

struct TwoMeans {
  std::vector<int> labels;  // canonical: the first point is in group 0
  double wcss = 0.0;
};

inline double wcss_of(std::span<const double> xs, std::span<const double> ys, const std::vector<int>& labels, int k) {
  std::vector<double> sx(k, 0.0), sy(k, 0.0), c(k, 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx[labels[i]] += xs[i];
    sy[labels[i]] += ys[i];
    c[labels[i]] += 1.0;
  }
  double w = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const int l = labels[i];
    const double dx = xs[i] - sx[l] / c[l], dy = ys[i] - sy[l] / c[l];
    w += dx * dx + dy * dy;
  }
  return w;
}

// Optimal 2-partition by enumerating all 2^(n-1) - 1 non-trivial splits.
inline TwoMeans best_two_partition(std::span<const double> xs, std::span<const double> ys) {
  const std::size_t n = xs.size();
  TwoMeans best;
  best.wcss = std::numeric_limits<double>::infinity();
  std::vector<int> labels(n);
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << (n - 1)); ++mask) {
    labels[0] = 0;
    for (std::size_t i = 1; i < n; ++i) labels[i] = static_cast<int>((mask >> (i - 1)) & 1);
    const double w = wcss_of(xs, ys, labels, 2);
    if (w < best.wcss) {
      best.wcss = w;
      best.labels = labels;
    }
  }
  return best;
}

// Relabels so that cluster ids appear in order of first occurrence.
inline std::vector<int> canonical(const std::vector<int>& labels) {
  std::map<int, int> seen;
  std::vector<int> out;
  for (int l : labels) {
    auto it = seen.emplace(l, static_cast<int>(seen.size())).first;
    out.push_back(it->second);
  }
  return out;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// Complete-link by exhaustive search over every merge order. A merge order
// is valid when each step joins a pair at the smallest maximum-distance
// among the clusters alive at that step; among valid orders the one with
// the lexicographically smallest sequence of (name, name) keys wins.
// Distances are recomputed from the leaf matrix every time.
struct OracleMerge {
  std::vector<int> left, right;  // sorted leaf ids
  double height = 0.0;
};

class CompleteLinkSearch {
 public:
  CompleteLinkSearch(std::vector<std::string> names, std::vector<double> dist)
      : names_(std::move(names)), dist_(std::move(dist)), n_(names_.size()) {}

  std::vector<OracleMerge> run() {
    std::vector<std::vector<int>> clusters;
    for (std::size_t i = 0; i < n_; ++i) clusters.push_back({static_cast<int>(i)});
    std::vector<OracleMerge> path;
    std::vector<std::pair<std::string, std::string>> keys;
    search(clusters, path, keys);
    return best_;
  }

  std::size_t orders_visited() const { return visited_; }

 private:
  double linkage(const std::vector<int>& a, const std::vector<int>& b) const {
    double m = -std::numeric_limits<double>::infinity();
    for (int i : a) {
      for (int j : b) m = std::max(m, dist_[static_cast<std::size_t>(i) * n_ + j]);
    }
    return m;
  }

  std::string name(const std::vector<int>& c) const {
    std::string s = names_[static_cast<std::size_t>(c[0])];
    for (int i : c) s = std::min(s, names_[static_cast<std::size_t>(i)]);
    return s;
  }

  void search(const std::vector<std::vector<int>>& clusters, std::vector<OracleMerge>& path,
              std::vector<std::pair<std::string, std::string>>& keys) {
    if (clusters.size() == 1) {
      ++visited_;
      if (!found_ || keys < best_keys_) {
        found_ = true;
        best_ = path;
        best_keys_ = keys;
      }
      return;
    }
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      for (std::size_t j = i + 1; j < clusters.size(); ++j) lo = std::min(lo, linkage(clusters[i], clusters[j]));
    }
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        const double h = linkage(clusters[i], clusters[j]);
        if (h != lo) {
          ++visited_;  // this order is invalid from here on
          continue;
        }
        auto a = clusters[i], b = clusters[j];
        if (name(b) < name(a)) std::swap(a, b);
        std::vector<std::vector<int>> next;
        for (std::size_t k = 0; k < clusters.size(); ++k) {
          if (k != i && k != j) next.push_back(clusters[k]);
        }
        auto merged = a;
        merged.insert(merged.end(), b.begin(), b.end());
        std::sort(merged.begin(), merged.end());
        next.push_back(merged);
        auto sa = a, sb = b;
        std::sort(sa.begin(), sa.end());
        std::sort(sb.begin(), sb.end());
        path.push_back({sa, sb, h});
        keys.emplace_back(name(a), name(b));
        search(next, path, keys);
        path.pop_back();
        keys.pop_back();
      }
    }
  }

  std::vector<std::string> names_;
  std::vector<double> dist_;
  std::size_t n_;
  bool found_ = false;
  std::vector<OracleMerge> best_;
  std::vector<std::pair<std::string, std::string>> best_keys_;
  std::size_t visited_ = 0;
};

// Mean silhouette of labelled points in `dims` dimensions.
inline double silhouette(std::span<const double> pts, std::span<const int> labels, int dims) {
  const std::size_t n = labels.size();
  auto dist = [&](std::size_t i, std::size_t j) {
    double s = 0;
    for (int k = 0; k < dims; ++k) {
      const double d = pts[i * dims + k] - pts[j * dims + k];
      s += d * d;
    }
    return std::sqrt(s);
  };
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::map<int, std::pair<double, int>> acc;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      auto& a = acc[labels[j]];
      a.first += dist(i, j);
      a.second += 1;
    }
    const auto own = acc[labels[i]];
    if (own.second == 0) continue;
    const double a = own.first / own.second;
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [l, v] : acc) {
      if (l != labels[i] && v.second > 0) b = std::min(b, v.first / v.second);
    }
    total += (b - a) / std::max(a, b);
  }
  return total / static_cast<double>(n);
}

}  // namespace oracle
