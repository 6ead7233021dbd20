#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "spoofbench/gray_image.hpp"
#include "spoofbench/minutia.hpp"
#include "spoofbench/minutiae.hpp"

namespace spoofbench::patches {

inline constexpr int kPatchSize = 96;

/// Aligned 96x96 window. weight is 1 for a per-minutia patch and the
/// cluster size for a centroid patch.
struct Patch {
  GrayImage pixels;
  double center_x = 0.0;
  double center_y = 0.0;
  double theta = 0.0;
  double weight = 1.0;
  bool clamped = false;  // centre was moved inside the image
};

using PatchSet = std::vector<Patch>;

/// Samples the window rotated by -theta about the centre so that direction
/// theta maps to +x. Patch pixel (u, v) reads the source at centre +
/// R(theta) (u - 48, v - 48) with bilinear interpolation; samples outside
/// the image take the image's (rounded) mean intensity.
Patch extract_patch(const GrayImage& img, double center_x, double center_y, double theta);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

struct ClusterAssignment {
  int k = 0;
  std::vector<Point2> centroids;
  std::vector<int> labels;   // per minutia
  std::vector<int> sizes;    // per cluster, all >= 1
  double wcss = 0.0;
  std::vector<double> wcss_trace;  // objective after each Lloyd step of the winning restart
};

/// Lloyd's algorithm on minutia positions with distance-squared seeding,
/// best of `restarts` runs by within-cluster sum of squares. k is clamped
/// to the number of minutiae; k' == n yields singleton clusters in input
/// order. Deterministic for a fixed (seed, restarts).
ClusterAssignment kmeans_minutiae(const MinutiaSet& minutiae, int k, std::uint64_t seed, int restarts = 5);

/// Same algorithm on bare points (used by the minutiae overload).
ClusterAssignment kmeans_points(std::span<const Point2> points, int k, std::uint64_t seed, int restarts = 5);

/// One patch per cluster at its centroid, aligned to the field angle there,
/// weighted by cluster size. Centroids outside the image are clamped to
/// the nearest pixel and flagged.
PatchSet cluster_patches(const GrayImage& img, const ClusterAssignment& assignment,
                         const minutiae::OrientationField& field);

/// One unit-weight patch per minutia, aligned to the minutia direction.
PatchSet minutia_patches(const GrayImage& img, const MinutiaSet& minutiae);

/// sum(w_i s_i) / sum(w_i), accumulated in index order.
double fuse_scores(std::span<const double> scores, std::span<const double> weights);

/// Writes patch_NNNN.pgm files plus index.csv (`center_x,center_y,theta,weight`,
/// one row per patch in file order).
void export_patch_set(const std::filesystem::path& dir, const PatchSet& patches);

}  // namespace spoofbench::patches
