#include "spoofbench/patches.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "spoofbench/common.hpp"
#include "spoofbench/csv.hpp"

namespace spoofbench::patches {

Patch extract_patch(const GrayImage& img, double center_x, double center_y, double theta) {
  if (img.empty()) throw InvalidArgument("extract_patch: empty image");
  if (!img.contains(center_x, center_y)) throw InvalidArgument("extract_patch: centre outside image");
  const int w = img.width(), h = img.height();
  const auto fill = static_cast<std::uint8_t>(std::lround(img.mean()));
  const double c = std::cos(theta), s = std::sin(theta);
  constexpr int kHalf = kPatchSize / 2;

  Patch patch;
  patch.pixels = GrayImage(kPatchSize, kPatchSize, fill);
  patch.center_x = center_x;
  patch.center_y = center_y;
  patch.theta = theta;
  for (int v = 0; v < kPatchSize; ++v) {
    const double dv = v - kHalf;
    for (int u = 0; u < kPatchSize; ++u) {
      const double du = u - kHalf;
      const double sx = center_x + du * c - dv * s;
      const double sy = center_y + du * s + dv * c;
      if (sx < 0.0 || sy < 0.0 || sx > w - 1.0 || sy > h - 1.0) continue;
      const int x0 = static_cast<int>(sx), y0 = static_cast<int>(sy);
      const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
      const double fx = sx - x0, fy = sy - y0;
      const double value = (img.at(x0, y0) * (1 - fx) + img.at(x1, y0) * fx) * (1 - fy) +
                           (img.at(x0, y1) * (1 - fx) + img.at(x1, y1) * fx) * fy;
      patch.pixels.at(u, v) = static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
    }
  }
  return patch;
}

namespace {

double dist2(const Point2& a, const Point2& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

std::vector<Point2> seed_centroids(std::span<const Point2> points, int k, Rng& rng) {
  const std::size_t n = points.size();
  std::vector<Point2> centroids;
  centroids.reserve(static_cast<std::size_t>(k));
  centroids.push_back(points[rng.below(n)]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = dist2(points[i], centroids[0]);
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (double d : d2) total += d;
    std::size_t pick = 0;
    if (total <= 0.0) {
      pick = rng.below(n);
    } else {
      const double target = rng.uniform() * total;
      double running = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        running += d2[i];
        if (running > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    }
    centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], dist2(points[i], centroids.back()));
  }
  return centroids;
}

ClusterAssignment lloyd(std::span<const Point2> points, std::vector<Point2> centroids) {
  constexpr int kMaxIterations = 100;
  const std::size_t n = points.size();
  const int k = static_cast<int>(centroids.size());
  ClusterAssignment a;
  a.k = k;
  a.labels.assign(n, -1);
  a.sizes.assign(static_cast<std::size_t>(k), 0);

  for (int iter = 0; iter < kMaxIterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = dist2(points[i], centroids[0]);
      for (int c = 1; c < k; ++c) {
        const double d = dist2(points[i], centroids[static_cast<std::size_t>(c)]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (a.labels[i] != best) {
        a.labels[i] = best;
        changed = true;
      }
    }
    if (!changed) break;

    std::fill(a.sizes.begin(), a.sizes.end(), 0);
    for (int label : a.labels) ++a.sizes[static_cast<std::size_t>(label)];

    // Empty cluster: take the point of the largest cluster farthest from
    // that cluster's centroid.
    for (int c = 0; c < k; ++c) {
      if (a.sizes[static_cast<std::size_t>(c)] > 0) continue;
      const int largest = static_cast<int>(std::max_element(a.sizes.begin(), a.sizes.end()) - a.sizes.begin());
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (a.labels[i] != largest) continue;
        const double d = dist2(points[i], centroids[static_cast<std::size_t>(largest)]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      a.labels[far] = c;
      --a.sizes[static_cast<std::size_t>(largest)];
      ++a.sizes[static_cast<std::size_t>(c)];
      centroids[static_cast<std::size_t>(c)] = points[far];
    }

    std::vector<Point2> sums(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < n; ++i) {
      auto& s = sums[static_cast<std::size_t>(a.labels[i])];
      s.x += points[i].x;
      s.y += points[i].y;
    }
    for (int c = 0; c < k; ++c) {
      const auto size = static_cast<double>(a.sizes[static_cast<std::size_t>(c)]);
      centroids[static_cast<std::size_t>(c)] = {sums[static_cast<std::size_t>(c)].x / size,
                                                sums[static_cast<std::size_t>(c)].y / size};
    }
    double wcss = 0.0;
    for (std::size_t i = 0; i < n; ++i) wcss += dist2(points[i], centroids[static_cast<std::size_t>(a.labels[i])]);
    a.wcss_trace.push_back(wcss);
  }
  a.centroids = std::move(centroids);
  a.wcss = a.wcss_trace.empty() ? 0.0 : a.wcss_trace.back();
  return a;
}

}  // namespace

ClusterAssignment kmeans_points(std::span<const Point2> points, int k, std::uint64_t seed, int restarts) {
  if (points.empty()) throw InvalidArgument("kmeans: no points");
  if (k < 1) throw InvalidArgument("kmeans: k must be >= 1");
  const std::size_t n = points.size();
  const int kk = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(k), n));

  if (static_cast<std::size_t>(kk) == n) {
    ClusterAssignment a;
    a.k = kk;
    a.centroids.assign(points.begin(), points.end());
    a.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) a.labels[i] = static_cast<int>(i);
    a.sizes.assign(n, 1);
    a.wcss = 0.0;
    a.wcss_trace = {0.0};
    return a;
  }

  ClusterAssignment best;
  double best_wcss = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, restarts); ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    auto run = lloyd(points, seed_centroids(points, kk, rng));
    if (run.wcss < best_wcss) {
      best_wcss = run.wcss;
      best = std::move(run);
    }
  }
  return best;
}

ClusterAssignment kmeans_minutiae(const MinutiaSet& minutiae, int k, std::uint64_t seed, int restarts) {
  if (minutiae.empty()) throw InvalidArgument("kmeans_minutiae: empty minutia set");
  std::vector<Point2> points;
  points.reserve(minutiae.size());
  for (const auto& m : minutiae) points.push_back({m.x, m.y});
  return kmeans_points(points, k, seed, restarts);
}

PatchSet cluster_patches(const GrayImage& img, const ClusterAssignment& assignment,
                         const minutiae::OrientationField& field) {
  PatchSet out;
  out.reserve(assignment.centroids.size());
  for (std::size_t c = 0; c < assignment.centroids.size(); ++c) {
    double x = assignment.centroids[c].x, y = assignment.centroids[c].y;
    bool clamped = false;
    if (!img.contains(x, y)) {
      x = std::clamp(x, 0.0, img.width() - 1.0);
      y = std::clamp(y, 0.0, img.height() - 1.0);
      clamped = true;
    }
    Patch p = extract_patch(img, x, y, field.angle_at(x, y));
    p.weight = static_cast<double>(assignment.sizes[c]);
    p.clamped = clamped;
    out.push_back(std::move(p));
  }
  return out;
}

PatchSet minutia_patches(const GrayImage& img, const MinutiaSet& minutiae) {
  PatchSet out;
  out.reserve(minutiae.size());
  for (const auto& m : minutiae) out.push_back(extract_patch(img, m.x, m.y, m.theta));
  return out;
}

double fuse_scores(std::span<const double> scores, std::span<const double> weights) {
  if (scores.empty()) throw InvalidArgument("fuse_scores: empty score list");
  if (scores.size() != weights.size()) throw InvalidArgument("fuse_scores: scores and weights differ in length");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) throw InvalidArgument("fuse_scores: weights must be positive");
    num += weights[i] * scores[i];
    den += weights[i];
  }
  return num / den;
}

void export_patch_set(const std::filesystem::path& dir, const PatchSet& patches) {
  std::filesystem::create_directories(dir);
  std::ofstream index(dir / "index.csv");
  if (!index) throw DataError("cannot write " + (dir / "index.csv").string());
  index << "center_x,center_y,theta,weight\n";
  for (std::size_t i = 0; i < patches.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "patch_%04zu.pgm", i);
    write_pgm(dir / name, patches[i].pixels);
    index << csv::fixed(patches[i].center_x, 6) << ',' << csv::fixed(patches[i].center_y, 6) << ','
          << csv::fixed(patches[i].theta, 6) << ',' << csv::fixed(patches[i].weight, 6) << '\n';
  }
}

}  // namespace spoofbench::patches
