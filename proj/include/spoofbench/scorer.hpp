#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "spoofbench/patches.hpp"

namespace spoofbench::scorer {

inline constexpr std::size_t kFeatureCount = 34;
using PatchFeatures = std::array<double, kFeatureCount>;

/// Feature vector layout.
namespace feature {
inline constexpr std::size_t kHistogram = 0;     // 16 normalised intensity bins
inline constexpr std::size_t kMean = 16;
inline constexpr std::size_t kStd = 17;
inline constexpr std::size_t kGradientMean = 18;
inline constexpr std::size_t kGradientStd = 19;
inline constexpr std::size_t kDirectional = 20;  // 8 orientation bands of gradient energy
inline constexpr std::size_t kFrequencyPeak = 28;  // cycles / pixel
inline constexpr std::size_t kFrequencyEnergy = 29;
inline constexpr std::size_t kQuadrant = 30;     // 4 quadrant standard deviations
}  // namespace feature

/// Hand-crafted texture statistics of a 96x96 patch (intensities scaled to
/// [0, 1]). Deterministic; all entries finite.
PatchFeatures featurize(const GrayImage& patch_pixels);
inline PatchFeatures featurize(const patches::Patch& patch) { return featurize(patch.pixels); }

/// Anything that maps a patch to a spoofness score in [0, 1] (1 = PA).
class PatchScorer {
 public:
  virtual ~PatchScorer() = default;
  virtual double score(const patches::Patch& patch) const = 0;
};

enum class ModelKind : std::uint8_t { Logistic = 0, Mlp = 1 };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

struct ModelMetadata {
  std::string manifest_hash;
  std::uint64_t seed = 0;
  int epochs = 0;
  double final_loss = 0.0;
  std::vector<int> flagged_features;  // zero-variance features given std = 1

  bool operator==(const ModelMetadata&) const = default;
};

/// Sizes of the parameter tensors in storage order: logistic {w[34], b};
/// MLP {W1[hidden x 34], b1[hidden], w2[hidden], b2}.
std::vector<std::size_t> tensor_sizes(ModelKind kind, int hidden);
std::size_t parameter_count(ModelKind kind, int hidden);

/// Float model. Parameters and standardisation statistics are float32 so
/// that a saved model scores bit-identically after loading.
struct ScorerModel final : PatchScorer {
  ModelKind kind = ModelKind::Logistic;
  int hidden = 0;
  std::vector<float> params;
  std::array<float, kFeatureCount> feature_mean{};
  std::array<float, kFeatureCount> feature_std{};
  ModelMetadata metadata;

  /// All-zero logistic model with unit standardisation.
  static ScorerModel zeros(ModelKind kind, int hidden = 0);

  double logit(const PatchFeatures& features) const;
  double score_features(const PatchFeatures& features) const;
  double score(const patches::Patch& patch) const override { return score_features(featurize(patch)); }
  std::size_t weight_payload_bytes() const { return params.size() * sizeof(float); }
  void validate() const;
};

/// Per-tensor affine 8-bit code: value ~= (q - zero_point) * scale, q in [0, 255].
struct QuantizedTensor {
  std::vector<std::uint8_t> values;
  float scale = 1.0f;
  std::int32_t zero_point = 0;

  double dequantize(std::size_t i) const {
    return (static_cast<double>(values[i]) - zero_point) * static_cast<double>(scale);
  }
};

QuantizedTensor quantize_tensor(std::span<const float> values);

struct QuantizedModel final : PatchScorer {
  ModelKind kind = ModelKind::Logistic;
  int hidden = 0;
  std::vector<QuantizedTensor> tensors;
  std::array<float, kFeatureCount> feature_mean{};
  std::array<float, kFeatureCount> feature_std{};
  ModelMetadata metadata;

  /// Integer accumulation of each affine layer with one float rescale per layer.
  double logit(const PatchFeatures& features) const;
  double score_features(const PatchFeatures& features) const;
  double score(const patches::Patch& patch) const override { return score_features(featurize(patch)); }
  std::size_t weight_payload_bytes() const;
  std::vector<float> dequantized_params() const;
};

QuantizedModel quantize(const ScorerModel& model);

struct TrainParams {
  double learning_rate = 0.5;
  int epochs = 500;
  double l2 = 1e-4;
  double momentum = 0.9;
  int hidden = 16;  // MLP only
  std::uint64_t seed = 0;
};

/// label 1 = PA, 0 = bonafide.
struct TrainingSet {
  std::vector<PatchFeatures> features;
  std::vector<int> labels;

  void add(const PatchFeatures& f, int label) {
    features.push_back(f);
    labels.push_back(label);
  }
  void add(const patches::Patch& p, int label) { add(featurize(p), label); }
  std::size_t size() const { return labels.size(); }
};

/// Full-batch gradient descent with momentum on standardised features,
/// minimising mean cross-entropy + (l2/2)|weights|^2 (biases unpenalised).
/// Requires both classes with >= 10 samples each.
ScorerModel train(const TrainingSet& data, ModelKind kind, const TrainParams& params,
                  const std::string& manifest_hash = {});

/// Standardised design matrix (row-major n x 34) used by the objective.
struct Standardized {
  std::vector<double> x;
  std::vector<int> y;
  std::size_t rows = 0;
};

Standardized standardize(const TrainingSet& data, std::span<const float> mean, std::span<const float> stdev);

struct Objective {
  double loss = 0.0;
  std::vector<double> gradient;
};

/// Loss and analytic gradient at `params` (tensor order of tensor_sizes).
Objective loss_and_gradient(ModelKind kind, int hidden, std::span<const double> params, const Standardized& data,
                            double l2);

/// Binary container: "SPBL", u16 version, u8 kind, u8 quantized flag,
/// u32 hidden, u32 feature count, float32 standardisation stats, tensors,
/// then a u32-length-prefixed JSON metadata trailer. Little-endian.
std::vector<std::uint8_t> serialize(const ScorerModel& model);
std::vector<std::uint8_t> serialize(const QuantizedModel& model);

using AnyModel = std::variant<ScorerModel, QuantizedModel>;

AnyModel deserialize(std::span<const std::uint8_t> bytes);
void save_model(const std::filesystem::path& path, const AnyModel& model);
AnyModel load_model(const std::filesystem::path& path);
const PatchScorer& as_scorer(const AnyModel& model);
double score_features(const AnyModel& model, const PatchFeatures& features);

}  // namespace spoofbench::scorer
