#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spoofbench/gray_image.hpp"
#include "spoofbench/minutiae.hpp"
#include "spoofbench/scorer.hpp"

namespace spoofbench::protocol {

enum class Label : std::uint8_t { Bonafide = 0, PA = 1 };

std::string_view to_string(Label label);
Label parse_label(std::string_view text);

struct ManifestEntry {
  std::string path;
  Label label = Label::Bonafide;
  std::string material;   // "-" for bonafide
  std::string split_tag;  // optional, free-form
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  /// Distinct PA materials, sorted by name.
  std::vector<std::string> materials() const;
  std::size_t count(Label label) const;
  /// Bonafide entries carry "-", PA entries a non-empty name; paths unique.
  void validate() const;
  /// FNV-1a of the canonical CSV text.
  std::string hash() const;
};

/// CSV `path,label,material[,split_tag]`; label is "bonafide" or "pa".
DatasetManifest read_manifest(const std::filesystem::path& path);
DatasetManifest parse_manifest(std::istream& in, std::string_view source_name);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
std::string manifest_csv(const DatasetManifest& manifest);

/// Indices into DatasetManifest::entries.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Test = every image of the held-out material plus n_bonafide_test
/// bonafide drawn with the seed; train = everything else.
Split split_leave_one_out(const DatasetManifest& manifest, const std::string& held_out_material, int n_bonafide_test,
                          std::uint64_t seed);

struct DetectionPoint {
  double tdr = 0.0;
  double threshold = 0.0;  // +inf when only the empty detection set qualifies
  double fdr = 0.0;
};

/// Best detection rate over thresholds drawn from the observed scores
/// (plus +inf) whose false detection rate stays <= fdr_target; a score
/// >= threshold counts as a detection. Among equal detection rates the
/// smallest threshold is returned.
DetectionPoint tdr_at_fdr(std::span<const double> bonafide_scores, std::span<const double> pa_scores,
                          double fdr_target);

using ImageLoader = std::function<GrayImage(const ManifestEntry&)>;

/// Reads entry paths relative to base_dir (absolute paths pass through).
ImageLoader file_loader(std::filesystem::path base_dir);

/// Image plus its minutiae and orientation field. The skeleton is dropped.
struct ImageAnalysis {
  GrayImage image;
  minutiae::OrientationField field;
  MinutiaSet minutiae;
};

std::vector<ImageAnalysis> analyse_images(const DatasetManifest& manifest, const ImageLoader& loader,
                                          const minutiae::ExtractorParams& extractor = {}, unsigned threads = 0);

inline constexpr int kAllMinutiae = 0;

struct PipelineConfig {
  int k_clusters = 10;  // kAllMinutiae = one patch per minutia
  scorer::ModelKind model = scorer::ModelKind::Logistic;
  scorer::TrainParams train;
  bool quantize = false;  // score with the 8-bit model
  double fdr_target = 0.002;
  int n_bonafide_test = 100;
  int kmeans_restarts = 5;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool known_material_check = false;
};

/// Scoring patches of one image for a patch budget. An image without
/// minutiae contributes a single centre patch.
patches::PatchSet scoring_patches(const ImageAnalysis& analysis, int k_clusters, std::uint64_t seed, int restarts);
/// One patch per minutia (or the centre patch), used for training.
patches::PatchSet training_patches(const ImageAnalysis& analysis);

struct MaterialResult {
  std::string material;
  int n_images = 0;   // PA test images
  int n_patches = 0;  // patches scored over those images
  DetectionPoint detection;
  std::string model_hash;
};

struct EvalReport {
  std::vector<MaterialResult> rows;
  double weighted_average_tdr = 0.0;
  double fdr_target = 0.0;
  std::uint64_t seed = 0;
  int k_clusters = 0;
  std::string scorer_hash;
  std::string manifest_hash;
  std::string model_kind;
  bool quantized = false;
  int n_bonafide_test = 0;
  /// Optional check on materials seen in training (half of each material's
  /// images held out), one row per material.
  std::vector<MaterialResult> known_material_rows;
};

/// sum(n_i tdr_i) / sum(n_i) over the rows, in row order.
double weighted_average(std::span<const MaterialResult> rows);

EvalReport run_loo_experiment(const DatasetManifest& manifest, std::span<const ImageAnalysis> analyses,
                              const PipelineConfig& config);
EvalReport run_loo_experiment(const DatasetManifest& manifest, const ImageLoader& loader,
                              const PipelineConfig& config);

/// Stable-key JSON. Infinite thresholds are written as null.
std::string to_json(const EvalReport& report);
/// Table-1 style summary: material,n_images,tdr_percent,threshold.
std::string summary_csv(const EvalReport& report);

struct BudgetStats {
  int patch_budget = 0;  // kAllMinutiae for "all"
  int folds = 0;
  double mean_ms = 0.0;
  std::optional<double> sd_ms;  // absent with a single fold
  double tdr_mean = 0.0;
  std::optional<double> tdr_sd;
  double mean_patches = 0.0;
  std::vector<double> fold_ms;
  std::vector<double> fold_tdr;
};

struct BenchStats {
  std::vector<BudgetStats> rows;
  int folds = 0;
  double mean_minutiae = 0.0;
};

/// Stratified K-fold. Per fold one scorer is trained on the other folds;
/// for each budget the held-out images are timed serially through
/// clustering, patch extraction, featurisation, scoring and fusion
/// (image decoding and minutiae extraction excluded). With folds == 1 a
/// single 80/20 hold-out is used and no standard deviation is reported.
BenchStats bench_patch_budgets(const DatasetManifest& manifest, std::span<const ImageAnalysis> analyses,
                               std::span<const int> budgets, int folds, const PipelineConfig& config);

std::string budget_name(int budget);
int parse_budget(std::string_view text);
/// budget,folds,mean_ms,sd_ms,tdr_mean,tdr_sd,mean_patches (sd columns empty with one fold).
std::string bench_csv(const BenchStats& stats);
std::string to_json(const BenchStats& stats);

}  // namespace spoofbench::protocol
