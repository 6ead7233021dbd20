#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spoofbench/common.hpp"
#include "spoofbench/gray_image.hpp"
#include "spoofbench/minutia.hpp"

namespace spoofbench::imaging {

/// Knobs of a synthetic presentation-attack material. The two mechanical
/// classes stand in for the material's moisture content (image contrast)
/// and elasticity (ridge distortion).
struct SynthMaterialSpec {
  std::string name;
  Level moisture = Level::Medium;
  Level elasticity = Level::Medium;
  double noise_amplitude = 0.0;
  std::uint64_t seed = 0;
};

/// Resolved numeric effect parameters. Exposed so that callers (and the
/// identity test) can bypass the class lookup.
struct MaterialEffect {
  double contrast_gain = 1.0;      // about mid-gray
  double displacement_peak = 0.0;  // pixels
  double noise_amplitude = 0.0;    // uniform in [-a, a]
};

/// Class lookup: gain {0.55, 0.8, 1.1} by moisture, peak displacement
/// {0.5, 2, 4} px by elasticity. These are stand-in constants; only the
/// ordering of the classes is meaningful.
MaterialEffect effect_for(const SynthMaterialSpec& spec);

/// Ridge-valley pattern from iterative oriented filtering of seeded noise
/// over a smooth orientation field with one core. Pure in its arguments.
/// Requires width, height >= 128 and 4 <= ridge_period <= 20.
GrayImage synth_fingerprint(std::uint64_t seed, int width, int height, double ridge_period);

struct PlantedMinutia {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // must be ridge_angle or ridge_angle + pi
  MinutiaKind kind = MinutiaKind::Ending;
};

struct PlantedPattern {
  int width = 256;
  int height = 256;
  double ridge_period = 10.0;
  double ridge_angle = 0.0;  // direction of the parallel ridges
  std::vector<PlantedMinutia> plants;
};

/// Parallel ridges with phase singularities placed exactly at the planted
/// coordinates: an ending where a ridge terminates, a Y-junction where a
/// valley terminates. Plants must sit >= 16 px inside the borders and
/// >= 2 ridge periods apart.
std::pair<GrayImage, MinutiaSet> synth_planted_pattern(const PlantedPattern& pattern);

/// Contrast scaling, smooth displacement, additive noise, clamp, in that order.
GrayImage apply_material(const GrayImage& img, const SynthMaterialSpec& spec);
GrayImage apply_effect(const GrayImage& img, const MaterialEffect& effect, std::uint64_t seed);

/// Population standard deviation of the intensities (RMS contrast).
double rms_contrast(const GrayImage& img);

}  // namespace spoofbench::imaging
