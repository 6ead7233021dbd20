#pragma once

#include <vector>

#include "spoofbench/gray_image.hpp"
#include "spoofbench/minutia.hpp"

namespace spoofbench::minutiae {

/// Block-wise ridge-flow direction in [0, pi) and coherence in [0, 1].
struct OrientationField {
  int block_size = 16;
  int cols = 0;
  int rows = 0;
  std::vector<double> angles;
  std::vector<double> coherence;

  double angle(int col, int row) const { return angles[static_cast<std::size_t>(row) * cols + col]; }
  double coherence_of(int col, int row) const { return coherence[static_cast<std::size_t>(row) * cols + col]; }

  /// Angle of the block containing (x, y); coordinates are clamped to the grid.
  double angle_at(double x, double y) const;
  double coherence_at(double x, double y) const;
};

/// Averaged squared Sobel gradients per block. A flat block gets angle 0
/// and coherence 0. block_size must be in [8, 32].
OrientationField estimate_orientation(const GrayImage& img, int block_size = 16);

struct BinarizeParams {
  int smoothing_length = 7;  // taps of the along-ridge average (1 disables)
  int mean_window = 15;      // side of the local-mean window
};

/// Along-ridge smoothing and local-mean binarisation: dark ridges become
/// foreground (255). Blocks with zero coherence stay background.
GrayImage binarize(const GrayImage& img, const OrientationField& field, const BinarizeParams& params = {});

/// binarize() followed by thinning to 1-pixel 8-connected curves. Output is
/// 255 on skeleton pixels, 0 elsewhere.
GrayImage binarize_and_thin(const GrayImage& img, const OrientationField& field, const BinarizeParams& params = {});

/// Zhang-Suen thinning of a binary image (non-zero = foreground), iterated
/// until no pixel changes. Idempotent.
GrayImage thin(const GrayImage& binary);

/// Crossing number of a skeleton pixel: half the number of 0/1 transitions
/// around its 8-neighbourhood. Out-of-image neighbours count as 0.
int crossing_number(const GrayImage& skeleton, int x, int y);

inline constexpr int kDefaultBorderMargin = 16;
inline constexpr double kMergeRadius = 8.0;
inline constexpr int kEndingReach = 16;

/// CN = 1 -> ending, CN = 3 -> bifurcation. Drops detections inside the
/// border margin and merges detections closer than 8 px (higher quality
/// wins, earlier raster position on ties).
///
/// Thinning eats into ridge ends, and not by the same amount in every
/// direction. With a ridge mask, an ending is moved outwards along its
/// axis to the last ridge pixel (at most kEndingReach px), which puts it
/// back on the true ridge end.
MinutiaSet extract_minutiae(const GrayImage& skeleton, const OrientationField& field,
                            int border_margin = kDefaultBorderMargin, const GrayImage* ridge_mask = nullptr);

struct ExtractorParams {
  int block_size = 16;
  BinarizeParams binarize;
  int border_margin = kDefaultBorderMargin;
};

struct Extraction {
  OrientationField field;
  GrayImage skeleton;
  MinutiaSet minutiae;
};

/// Full chain: orientation -> binarise/thin -> crossing number.
Extraction detect(const GrayImage& img, const ExtractorParams& params = {});

}  // namespace spoofbench::minutiae
