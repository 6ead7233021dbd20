#include "spoofbench/dataset.hpp"

#include <cctype>
#include <cstdio>
#include <memory>
#include <set>
#include <unordered_map>

#include "spoofbench/common.hpp"
#include "spoofbench/csv.hpp"

namespace spoofbench::dataset {

std::string slug(std::string_view name) {
  std::string out;
  for (unsigned char c : name) out += std::isalnum(c) ? static_cast<char>(std::tolower(c)) : '_';
  return out;
}

protocol::ImageLoader SyntheticDataset::loader() const {
  auto index = std::make_shared<std::unordered_map<std::string, std::size_t>>();
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) (*index)[manifest.entries[i].path] = i;
  return [this, index](const protocol::ManifestEntry& e) {
    const auto it = index->find(e.path);
    if (it == index->end()) throw DataError("no synthetic image for " + e.path);
    return images[it->second];
  };
}

SyntheticDataset generate(const SynthDatasetConfig& config, unsigned threads) {
  if (config.per_material < 0 || config.bonafide < 0) throw InvalidArgument("image counts must be >= 0");
  if (!(config.gain_jitter >= 0 && config.gain_jitter < 1 && config.noise_jitter >= 0 && config.noise_jitter < 1)) {
    throw InvalidArgument("jitter must be in [0, 1)");
  }
  std::set<std::string> names;
  for (const auto& m : config.materials) {
    if (m.name.empty() || m.name == "-") throw InvalidArgument("material name must be non-empty");
    if (!names.insert(m.name).second) throw InvalidArgument("duplicate material name '" + m.name + "'");
  }
  SyntheticDataset data;
  char buf[64];
  for (int i = 0; i < config.bonafide; ++i) {
    std::snprintf(buf, sizeof buf, "bonafide/%05d.pgm", i);
    data.manifest.entries.push_back({buf, protocol::Label::Bonafide, "-", {}});
  }
  for (const auto& m : config.materials) {
    for (int i = 0; i < config.per_material; ++i) {
      std::snprintf(buf, sizeof buf, "/%05d.pgm", i);
      data.manifest.entries.push_back({"pa/" + slug(m.name) + buf, protocol::Label::PA, m.name, {}});
    }
  }
  const std::size_t n = data.manifest.entries.size();
  data.images.resize(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const auto finger = imaging::synth_fingerprint(derive_seed(config.seed, 2 * i), config.width, config.height,
                                                   config.ridge_period);
    const auto effect_seed = derive_seed(config.seed, 2 * i + 1);
    auto effect = config.bonafide_effect;
    if (i >= static_cast<std::size_t>(config.bonafide)) {
      const auto& spec = config.materials[(i - static_cast<std::size_t>(config.bonafide)) /
                                          static_cast<std::size_t>(config.per_material)];
      effect = imaging::effect_for(spec);
    }
    Rng jitter(derive_seed(effect_seed, 0x6a6974ULL));
    effect.contrast_gain *= jitter.uniform(1.0 - config.gain_jitter, 1.0 + config.gain_jitter);
    effect.noise_amplitude *= jitter.uniform(1.0 - config.noise_jitter, 1.0 + config.noise_jitter);
    data.images[i] = imaging::apply_effect(finger, effect, effect_seed);
  });
  return data;
}

void write(const SyntheticDataset& data, const std::filesystem::path& dir) {
  for (std::size_t i = 0; i < data.images.size(); ++i) {
    const auto path = dir / data.manifest.entries[i].path;
    std::filesystem::create_directories(path.parent_path());
    write_pgm(path, data.images[i]);
  }
  protocol::write_manifest(dir / "manifest.csv", data.manifest);
}

std::vector<imaging::SynthMaterialSpec> read_material_specs(const std::filesystem::path& path) {
  const auto table = csv::read_file(path.string());
  const auto c_name = table.column("name");
  const auto c_moist = table.column("moisture");
  const auto c_elastic = table.column("elasticity");
  const auto c_noise = table.column("noise_amplitude");
  std::vector<imaging::SynthMaterialSpec> specs;
  std::set<std::string> names;
  for (const auto& row : table.rows) {
    imaging::SynthMaterialSpec s;
    s.name = row.at(c_name);
    if (!names.insert(s.name).second) throw InvalidArgument("duplicate material name '" + s.name + "' in specs");
    try {
      s.moisture = parse_level(row.at(c_moist));
      s.elasticity = parse_level(row.at(c_elastic));
    } catch (const InvalidArgument& e) {
      throw DataError(path.string() + ": " + e.what());
    }
    s.noise_amplitude = csv::to_double(row.at(c_noise), "noise_amplitude");
    if (s.noise_amplitude < 0) throw DataError(path.string() + ": noise_amplitude must be >= 0");
    specs.push_back(std::move(s));
  }
  if (specs.empty()) throw DataError(path.string() + ": no materials");
  return specs;
}

}  // namespace spoofbench::dataset
