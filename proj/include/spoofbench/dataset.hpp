#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "spoofbench/imaging.hpp"
#include "spoofbench/protocol.hpp"

namespace spoofbench::dataset {

struct SynthDatasetConfig {
  std::vector<imaging::SynthMaterialSpec> materials;
  int per_material = 100;
  int bonafide = 600;
  int width = 256;
  int height = 256;
  double ridge_period = 9.0;
  // Live captures still get a little distortion and sensor noise.
  imaging::MaterialEffect bonafide_effect{1.0, 1.0, 3.0};
  // Per-image capture variation: gain and noise amplitude are scaled by a
  // factor drawn uniformly from [1 - jitter, 1 + jitter].
  double gain_jitter = 0.06;
  double noise_jitter = 0.25;
  std::uint64_t seed = 0;
};

struct SyntheticDataset {
  protocol::DatasetManifest manifest;
  std::vector<GrayImage> images;  // parallel to manifest.entries

  /// Serves the in-memory images by manifest path.
  protocol::ImageLoader loader() const;
};

/// Bonafide images first, then each material in spec order. Every image
/// has its own finger seed and capture jitter; material specs get a
/// per-image sub-seed.
SyntheticDataset generate(const SynthDatasetConfig& config, unsigned threads = 0);

/// Writes the images (PGM) and manifest.csv under dir.
void write(const SyntheticDataset& data, const std::filesystem::path& dir);

/// CSV `name,moisture,elasticity,noise_amplitude`; names must be unique.
std::vector<imaging::SynthMaterialSpec> read_material_specs(const std::filesystem::path& path);

/// Lowercase, non-alphanumerics replaced by '_'.
std::string slug(std::string_view name);

}  // namespace spoofbench::dataset
