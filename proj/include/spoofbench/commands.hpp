#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spoofbench/embed.hpp"
#include "spoofbench/protocol.hpp"

namespace spoofbench::commands {

enum class LogLevel { Info, Warn };
using LogFn = std::function<void(LogLevel, const std::string&)>;

struct Common {
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 0;
  unsigned threads = 0;
  LogFn log;  // optional
};

/// Library versions recorded in every run.json.
std::map<std::string, std::string> versions();

/// Seed from SPOOFBENCH_SEED when set, otherwise `fallback`.
std::uint64_t default_seed(std::uint64_t fallback = 0);

struct SynthOptions {
  Common common;
  std::filesystem::path specs;
  int per_material = 100;
  int bonafide = 600;
  int size = 256;
  double ridge_period = 9.0;
};
/// Images + manifest.csv under out_dir. Returns the manifest path.
std::filesystem::path cmd_synth(const SynthOptions& options);

struct ExtractOptions {
  Common common;
  std::filesystem::path image;
  std::optional<int> export_patches_k;  // kAllMinutiae for one patch per minutia
};
/// minutiae.csv and skeleton.pgm (plus patches/ when requested).
MinutiaSet cmd_extract(const ExtractOptions& options);

struct TrainOptions {
  Common common;
  std::filesystem::path manifest;
  scorer::ModelKind model = scorer::ModelKind::Logistic;
  scorer::TrainParams params;
  bool quantize = false;
};
/// model.spbl (and model_q.spbl when quantizing), trained on every image.
std::filesystem::path cmd_train(const TrainOptions& options);

struct ScoreOptions {
  Common common;
  std::filesystem::path model;
  std::filesystem::path manifest;  // scores every entry
  int k_clusters = 10;
  int kmeans_restarts = 5;
};
/// scores.csv `path,label,material,score,n_patches`.
std::vector<double> cmd_score(const ScoreOptions& options);

struct EvalOptions {
  Common common;
  std::filesystem::path manifest;
  protocol::PipelineConfig pipeline;  // seed/threads taken from common
};
/// report.json + summary.csv.
protocol::EvalReport cmd_eval(const EvalOptions& options);

struct MaterialsOptions {
  Common common;
  std::filesystem::path spectra_dir;
  std::filesystem::path classes;
  int reps = 6;
};
/// The four matrices and C_material as CSV, dendrogram.json,
/// dendrogram.nwk and representative_set.json.
std::vector<std::string> cmd_materials(const MaterialsOptions& options);

struct EmbedOptions {
  Common common;
  std::filesystem::path manifest;
  std::optional<std::filesystem::path> model;  // standardisation statistics
  double perplexity = 30.0;
  int iterations = 1000;
  double learning_rate = 100.0;
  int per_class_cap = 100;
};
/// embedding.csv, embedding.json, kl_trace.csv.
std::vector<embed::EmbeddedPoint> cmd_embed(const EmbedOptions& options);

struct BenchOptions {
  Common common;
  std::filesystem::path manifest;
  std::vector<int> budgets{5, 10, 15, 20, 25, 30, protocol::kAllMinutiae};
  int folds = 5;
  protocol::PipelineConfig pipeline;
};
/// bench.csv + bench.json.
protocol::BenchStats cmd_bench(const BenchOptions& options);

/// Per-class sample size for the embedding: min(cap, floor(n / 2)).
int embed_sample_size(int class_count, int cap = 100);

}  // namespace spoofbench::commands
