#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "spoofbench/common.hpp"

namespace spoofbench::materials {

/// Pearson correlation with a zero-variance input.
class UndefinedCorrelation : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Sampled curve; abscissae strictly increasing, at least 8 samples.
struct Curve {
  std::vector<double> x;
  std::vector<double> y;

  void validate(const std::string& what) const;
  /// Linear interpolation; x must lie inside [front, back].
  double at(double x) const;
};

struct MaterialProfile {
  std::string name;
  Curve uvvis;  // wavelength (nm) -> absorbance
  Curve ftir;   // wavenumber (1/cm) -> transmittance
  Level elasticity = Level::Medium;
  Level moisture = Level::Medium;
};

struct CorrelationMatrix {
  std::vector<std::string> labels;
  std::vector<double> values;  // row-major n x n

  std::size_t size() const { return labels.size(); }
  double at(std::size_t i, std::size_t j) const { return values[i * size() + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * size() + j]; }
  /// Square, symmetric, finite, unit diagonal.
  void validate() const;
};

double pearson(std::span<const double> x, std::span<const double> y);

enum class Spectrum { UvVis, Ftir };
enum class Category { Elasticity, Moisture };

inline constexpr int kGridPoints = 256;

/// Curves resampled onto kGridPoints uniform points of the common domain.
std::vector<std::vector<double>> common_grid(std::span<const MaterialProfile> profiles, Spectrum which);
CorrelationMatrix continuous_corr(std::span<const MaterialProfile> profiles, Spectrum which);
CorrelationMatrix categorical_corr(std::span<const MaterialProfile> profiles, Category which);
/// Elementwise mean of the four matrices.
CorrelationMatrix material_corr(const CorrelationMatrix& uvvis, const CorrelationMatrix& ftir,
                                const CorrelationMatrix& elastic, const CorrelationMatrix& moisture);

/// Node ids follow the usual linkage convention: leaves are 0..n-1 and
/// merge i creates node n+i.
struct Merge {
  int left = 0;
  int right = 0;
  double height = 0.0;
  int size = 0;
};

struct Dendrogram {
  std::vector<std::string> labels;
  std::vector<Merge> merges;
};

/// Agglomerative clustering on d = 1 - corr with maximum-distance linkage.
/// Equal distances are resolved by the pair of cluster names (a cluster
/// is named by its alphabetically first member), smallest first; the
/// left child is the cluster with the smaller name.
Dendrogram complete_link(const CorrelationMatrix& corr);

/// Leaf ids of every cluster after applying the first n - n_clusters merges.
std::vector<std::vector<int>> cut(const Dendrogram& dendrogram, int n_clusters);

/// One medoid per cluster of the n_reps cut (highest sum of correlation to
/// the other members, ties by name), sorted by name.
std::vector<std::string> representative_set(const Dendrogram& dendrogram, const CorrelationMatrix& corr, int n_reps);

std::string to_newick(const Dendrogram& dendrogram);
std::string to_json(const Dendrogram& dendrogram);

/// Header row "material,<labels...>", one row per label.
std::string matrix_csv(const CorrelationMatrix& matrix);
CorrelationMatrix read_matrix_csv(const std::filesystem::path& path);

/// classes CSV `name,elasticity,moisture`; spectra as `abscissa,value`
/// files named <slug>.csv under spectra_dir/uvvis and spectra_dir/ftir.
std::vector<MaterialProfile> load_profiles(const std::filesystem::path& spectra_dir,
                                           const std::filesystem::path& classes_csv);
Curve read_curve(const std::filesystem::path& path);

}  // namespace spoofbench::materials
