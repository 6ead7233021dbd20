#include "spoofbench/commands.hpp"

#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>

#include <fftw3.h>
#include <json.hpp>
#include <png.h>

#include "spoofbench/common.hpp"
#include "spoofbench/csv.hpp"
#include "spoofbench/dataset.hpp"
#include "spoofbench/materials.hpp"

#ifndef SPOOFBENCH_VERSION
#define SPOOFBENCH_VERSION "0.0.0"
#endif

namespace spoofbench::commands {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

std::map<std::string, std::string> versions() {
  return {{"spoofbench", SPOOFBENCH_VERSION},
          {"fftw", fftw_version},
          {"libpng", PNG_LIBPNG_VER_STRING},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

std::uint64_t default_seed(std::uint64_t fallback) {
  const char* env = std::getenv("SPOOFBENCH_SEED");
  if (!env || !*env) return fallback;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(env, &used);
    if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument("SPOOFBENCH_SEED must be a non-negative integer, got '" + std::string(env) + "'");
  }
}

int embed_sample_size(int class_count, int cap) { return std::min(cap, class_count / 2); }

namespace {

void info(const Common& c, const std::string& msg) {
  if (c.log) c.log(LogLevel::Info, msg);
}

void warn(const Common& c, const std::string& msg) {
  if (c.log) c.log(LogLevel::Warn, msg);
}

void prepare_dir(const Common& c) {
  std::error_code ec;
  fs::create_directories(c.out_dir, ec);
  if (ec || !fs::is_directory(c.out_dir)) throw DataError("cannot create output directory " + c.out_dir.string());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

void write_run_json(const Common& c, const std::string& command, ordered_json config, const std::vector<std::string>& outputs) {
  ordered_json j;
  j["command"] = command;
  j["versions"] = versions();
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["out_dir"] = c.out_dir.string();
  j["config"] = std::move(config);
  j["outputs"] = outputs;
  write_text(c.out_dir / "run.json", j.dump(2) + "\n");
}

std::string model_name(const scorer::ModelKind kind) { return std::string(scorer::to_string(kind)); }

ordered_json pipeline_json(const protocol::PipelineConfig& p) {
  ordered_json j;
  j["k_clusters"] = protocol::budget_name(p.k_clusters);
  j["model"] = model_name(p.model);
  j["learning_rate"] = p.train.learning_rate;
  j["epochs"] = p.train.epochs;
  j["l2"] = p.train.l2;
  j["momentum"] = p.train.momentum;
  j["hidden"] = p.train.hidden;
  j["quantize"] = p.quantize;
  j["fdr_target"] = p.fdr_target;
  j["n_bonafide_test"] = p.n_bonafide_test;
  j["kmeans_restarts"] = p.kmeans_restarts;
  j["known_material_check"] = p.known_material_check;
  return j;
}

fs::path manifest_dir(const fs::path& manifest) {
  auto dir = manifest.parent_path();
  return dir.empty() ? fs::path(".") : dir;
}

}  // namespace

fs::path cmd_synth(const SynthOptions& o) {
  dataset::SynthDatasetConfig config;
  config.materials = dataset::read_material_specs(o.specs);
  config.per_material = o.per_material;
  config.bonafide = o.bonafide;
  config.width = config.height = o.size;
  config.ridge_period = o.ridge_period;
  config.seed = o.common.seed;
  prepare_dir(o.common);
  info(o.common, "synthesising " + std::to_string(config.bonafide + config.per_material * static_cast<int>(config.materials.size())) + " images");
  const auto data = dataset::generate(config, o.common.threads);
  dataset::write(data, o.common.out_dir);

  ordered_json cfg;
  cfg["specs"] = o.specs.string();
  cfg["per_material"] = o.per_material;
  cfg["bonafide"] = o.bonafide;
  cfg["size"] = o.size;
  cfg["ridge_period"] = o.ridge_period;
  cfg["gain_jitter"] = config.gain_jitter;
  cfg["noise_jitter"] = config.noise_jitter;
  cfg["bonafide_effect"] = {{"contrast_gain", config.bonafide_effect.contrast_gain},
                            {"displacement_peak", config.bonafide_effect.displacement_peak},
                            {"noise_amplitude", config.bonafide_effect.noise_amplitude}};
  write_run_json(o.common, "synth", cfg, {"manifest.csv"});
  return o.common.out_dir / "manifest.csv";
}

MinutiaSet cmd_extract(const ExtractOptions& o) {
  const auto img = read_image(o.image);
  prepare_dir(o.common);
  const auto ex = minutiae::detect(img);
  {
    std::ofstream out(o.common.out_dir / "minutiae.csv");
    if (!out) throw DataError("cannot write minutiae.csv");
    write_minutiae_csv(out, ex.minutiae);
  }
  write_pgm(o.common.out_dir / "skeleton.pgm", ex.skeleton);
  std::vector<std::string> outputs{"minutiae.csv", "skeleton.pgm"};
  ordered_json cfg;
  cfg["image"] = o.image.string();
  if (o.export_patches_k) {
    protocol::ImageAnalysis a{img, ex.field, ex.minutiae};
    const auto set = protocol::scoring_patches(a, *o.export_patches_k, derive_seed(o.common.seed, fnv1a64(o.image.string())), 5);
    patches::export_patch_set(o.common.out_dir / "patches", set);
    outputs.emplace_back("patches/index.csv");
    cfg["patches_k"] = protocol::budget_name(*o.export_patches_k);
  }
  info(o.common, std::to_string(ex.minutiae.size()) + " minutiae");
  write_run_json(o.common, "extract", cfg, outputs);
  return ex.minutiae;
}

fs::path cmd_train(const TrainOptions& o) {
  const auto manifest = protocol::read_manifest(o.manifest);
  prepare_dir(o.common);
  const auto analyses = protocol::analyse_images(manifest, protocol::file_loader(manifest_dir(o.manifest)), {},
                                                 o.common.threads);
  scorer::TrainingSet data;
  for (std::size_t i = 0; i < analyses.size(); ++i) {
    const int label = manifest.entries[i].label == protocol::Label::PA ? 1 : 0;
    for (const auto& p : protocol::training_patches(analyses[i])) data.add(p, label);
  }
  auto params = o.params;
  params.seed = o.common.seed;
  const auto model = scorer::train(data, o.model, params, manifest.hash());
  const auto path = o.common.out_dir / "model.spbl";
  scorer::save_model(path, model);
  std::vector<std::string> outputs{"model.spbl"};
  if (o.quantize) {
    scorer::save_model(o.common.out_dir / "model_q.spbl", scorer::quantize(model));
    outputs.emplace_back("model_q.spbl");
  }
  info(o.common, "trained on " + std::to_string(data.size()) + " patches, final loss " +
                     csv::general(model.metadata.final_loss, 6));
  ordered_json cfg;
  cfg["manifest"] = o.manifest.string();
  cfg["manifest_hash"] = manifest.hash();
  cfg["model"] = model_name(o.model);
  cfg["learning_rate"] = params.learning_rate;
  cfg["epochs"] = params.epochs;
  cfg["l2"] = params.l2;
  cfg["momentum"] = params.momentum;
  cfg["hidden"] = params.hidden;
  cfg["quantize"] = o.quantize;
  cfg["n_patches"] = data.size();
  cfg["final_loss"] = model.metadata.final_loss;
  write_run_json(o.common, "train", cfg, outputs);
  return path;
}

std::vector<double> cmd_score(const ScoreOptions& o) {
  if (o.k_clusters < 0) throw InvalidArgument("k must be >= 1 or 'all'");
  const auto model = scorer::load_model(o.model);
  const auto manifest = protocol::read_manifest(o.manifest);
  prepare_dir(o.common);
  const auto analyses = protocol::analyse_images(manifest, protocol::file_loader(manifest_dir(o.manifest)), {},
                                                 o.common.threads);
  std::vector<double> scores(analyses.size());
  std::vector<int> counts(analyses.size());
  parallel_for(analyses.size(), o.common.threads, [&](std::size_t i) {
    const auto set = protocol::scoring_patches(analyses[i], o.k_clusters,
                                               derive_seed(o.common.seed, fnv1a64(manifest.entries[i].path)),
                                               o.kmeans_restarts);
    std::vector<double> s, w;
    for (const auto& p : set) {
      s.push_back(scorer::score_features(model, scorer::featurize(p)));
      w.push_back(p.weight);
    }
    scores[i] = patches::fuse_scores(s, w);
    counts[i] = static_cast<int>(set.size());
  });
  std::string out = "path,label,material,score,n_patches\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto& e = manifest.entries[i];
    out += e.path + "," + std::string(protocol::to_string(e.label)) + "," + e.material + "," +
           csv::general(scores[i], 9) + "," + std::to_string(counts[i]) + "\n";
  }
  write_text(o.common.out_dir / "scores.csv", out);
  ordered_json cfg;
  cfg["model"] = o.model.string();
  cfg["manifest"] = o.manifest.string();
  cfg["k_clusters"] = protocol::budget_name(o.k_clusters);
  cfg["kmeans_restarts"] = o.kmeans_restarts;
  write_run_json(o.common, "score", cfg, {"scores.csv"});
  return scores;
}

protocol::EvalReport cmd_eval(const EvalOptions& o) {
  const auto manifest = protocol::read_manifest(o.manifest);
  auto pipeline = o.pipeline;
  pipeline.seed = o.common.seed;
  pipeline.threads = o.common.threads;
  prepare_dir(o.common);
  info(o.common, "analysing " + std::to_string(manifest.entries.size()) + " images");
  const auto analyses = protocol::analyse_images(manifest, protocol::file_loader(manifest_dir(o.manifest)), {},
                                                 o.common.threads);
  info(o.common, "running leave-one-out over " + std::to_string(manifest.materials().size()) + " materials");
  const auto report = protocol::run_loo_experiment(manifest, analyses, pipeline);
  write_text(o.common.out_dir / "report.json", protocol::to_json(report));
  write_text(o.common.out_dir / "summary.csv", protocol::summary_csv(report));
  auto cfg = pipeline_json(pipeline);
  cfg["manifest"] = o.manifest.string();
  write_run_json(o.common, "eval", cfg, {"report.json", "summary.csv"});
  return report;
}

std::vector<std::string> cmd_materials(const MaterialsOptions& o) {
  using namespace materials;
  const auto profiles = load_profiles(o.spectra_dir, o.classes);
  if (o.reps < 1 || o.reps > static_cast<int>(profiles.size())) {
    throw InvalidArgument("--reps must be in [1, " + std::to_string(profiles.size()) + "]");
  }
  prepare_dir(o.common);
  const auto uv = continuous_corr(profiles, Spectrum::UvVis);
  const auto ir = continuous_corr(profiles, Spectrum::Ftir);
  const auto el = categorical_corr(profiles, Category::Elasticity);
  const auto mo = categorical_corr(profiles, Category::Moisture);
  const auto all = material_corr(uv, ir, el, mo);
  for (const auto* m : {&uv, &ir, &el, &mo, &all}) m->validate();
  write_text(o.common.out_dir / "c_uvvis.csv", matrix_csv(uv));
  write_text(o.common.out_dir / "c_ftir.csv", matrix_csv(ir));
  write_text(o.common.out_dir / "c_elastic.csv", matrix_csv(el));
  write_text(o.common.out_dir / "c_moisture.csv", matrix_csv(mo));
  write_text(o.common.out_dir / "c_material.csv", matrix_csv(all));
  const auto tree = complete_link(all);
  write_text(o.common.out_dir / "dendrogram.json", to_json(tree));
  write_text(o.common.out_dir / "dendrogram.nwk", to_newick(tree) + "\n");
  const auto reps = representative_set(tree, all, o.reps);
  ordered_json r;
  r["n_reps"] = o.reps;
  r["representative_set"] = reps;
  // Set named in the source study, for side-by-side comparison only.
  r["published_set"] = {"Silicone", "2D Paper", "Play Doh", "Gelatin", "Latex Body Paint", "Monster Liquid Latex"};
  write_text(o.common.out_dir / "representative_set.json", r.dump(2) + "\n");
  ordered_json cfg;
  cfg["spectra_dir"] = o.spectra_dir.string();
  cfg["classes"] = o.classes.string();
  cfg["reps"] = o.reps;
  cfg["grid_points"] = kGridPoints;
  cfg["distance"] = "1 - correlation";
  write_run_json(o.common, "materials", cfg,
                 {"c_uvvis.csv", "c_ftir.csv", "c_elastic.csv", "c_moisture.csv", "c_material.csv", "dendrogram.json",
                  "dendrogram.nwk", "representative_set.json"});
  return reps;
}

std::vector<embed::EmbeddedPoint> cmd_embed(const EmbedOptions& o) {
  if (o.per_class_cap < 1) throw InvalidArgument("per-class cap must be >= 1");
  const auto manifest = protocol::read_manifest(o.manifest);
  std::optional<scorer::AnyModel> model;
  if (o.model) model = scorer::load_model(*o.model);
  prepare_dir(o.common);

  // Balanced sampling per class (bonafide plus each material).
  std::map<std::string, std::vector<std::size_t>> classes;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const auto& e = manifest.entries[i];
    classes[e.label == protocol::Label::Bonafide ? "bonafide" : e.material].push_back(i);
  }
  std::vector<std::size_t> picked;
  ordered_json sampled;
  for (auto& [name, idx] : classes) {
    const int take = embed_sample_size(static_cast<int>(idx.size()), o.per_class_cap);
    Rng rng(derive_seed(o.common.seed, fnv1a64(name)));
    rng.shuffle(idx);
    picked.insert(picked.end(), idx.begin(), idx.begin() + take);
    sampled[name] = take;
  }
  std::sort(picked.begin(), picked.end());
  if (picked.size() < 4) throw InvalidArgument("embedding needs at least 4 sampled images");

  protocol::DatasetManifest subset;
  std::vector<std::string> labels;
  for (auto i : picked) {
    subset.entries.push_back(manifest.entries[i]);
    const auto& e = manifest.entries[i];
    labels.push_back(e.label == protocol::Label::Bonafide ? "bonafide" : e.material);
  }
  info(o.common, "embedding " + std::to_string(picked.size()) + " images");
  const auto analyses = protocol::analyse_images(subset, protocol::file_loader(manifest_dir(o.manifest)), {},
                                                 o.common.threads);
  embed::Matrix x;
  x.rows = analyses.size();
  x.cols = scorer::kFeatureCount;
  x.data.assign(x.rows * x.cols, 0.0);
  parallel_for(analyses.size(), o.common.threads, [&](std::size_t i) {
    const auto set = protocol::training_patches(analyses[i]);
    for (const auto& p : set) {
      const auto f = scorer::featurize(p);
      for (std::size_t k = 0; k < x.cols; ++k) x.data[i * x.cols + k] += f[k];
    }
    for (std::size_t k = 0; k < x.cols; ++k) x.data[i * x.cols + k] /= static_cast<double>(set.size());
  });

  std::string standardisation = "sample z-score";
  std::array<double, scorer::kFeatureCount> mean{}, sd{};
  if (model) {
    standardisation = "model feature statistics";
    std::visit([&](const auto& m) {
      for (std::size_t k = 0; k < sd.size(); ++k) {
        mean[k] = m.feature_mean[k];
        sd[k] = m.feature_std[k];
      }
    }, *model);
  } else {
    for (std::size_t k = 0; k < x.cols; ++k) {
      double s = 0, s2 = 0;
      for (std::size_t i = 0; i < x.rows; ++i) s += x.data[i * x.cols + k];
      mean[k] = s / static_cast<double>(x.rows);
      for (std::size_t i = 0; i < x.rows; ++i) s2 += std::pow(x.data[i * x.cols + k] - mean[k], 2);
      sd[k] = std::sqrt(s2 / static_cast<double>(x.rows));
      if (!(sd[k] > 1e-12)) sd[k] = 1.0;
    }
  }
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t k = 0; k < x.cols; ++k) x.data[i * x.cols + k] = (x.data[i * x.cols + k] - mean[k]) / sd[k];
  }

  embed::EmbeddingConfig config;
  config.perplexity = o.perplexity;
  config.iterations = o.iterations;
  config.learning_rate = o.learning_rate;
  config.seed = o.common.seed;
  const auto embedding = embed::tsne(x, config);
  const auto points = embed::label_points(embedding, labels);
  embed::write_csv(o.common.out_dir / "embedding.csv", points);
  write_text(o.common.out_dir / "embedding.json", embed::to_json(points));
  write_text(o.common.out_dir / "kl_trace.csv", embed::kl_trace_csv(embedding.kl_trace));

  ordered_json cfg;
  cfg["manifest"] = o.manifest.string();
  cfg["model"] = o.model ? o.model->string() : "";
  cfg["perplexity"] = o.perplexity;
  cfg["perplexity_used"] = embedding.perplexity;
  cfg["iterations"] = o.iterations;
  cfg["learning_rate"] = o.learning_rate;
  cfg["momentum"] = {{"initial", config.initial_momentum}, {"final", config.final_momentum}, {"switch", config.momentum_switch}};
  cfg["early_exaggeration"] = {{"factor", config.exaggeration}, {"iterations", config.exaggeration_iterations}};
  cfg["image_feature"] = "mean of per-minutia patch features";
  cfg["standardisation"] = standardisation;
  cfg["per_class_cap"] = o.per_class_cap;
  cfg["sampled"] = sampled;
  write_run_json(o.common, "embed", cfg, {"embedding.csv", "embedding.json", "kl_trace.csv"});
  return points;
}

protocol::BenchStats cmd_bench(const BenchOptions& o) {
  const auto manifest = protocol::read_manifest(o.manifest);
  auto pipeline = o.pipeline;
  pipeline.seed = o.common.seed;
  pipeline.threads = o.common.threads;
  if (o.folds == 1) warn(o.common, "--folds 1: single 80/20 hold-out, standard deviations omitted");
  prepare_dir(o.common);
  const auto analyses = protocol::analyse_images(manifest, protocol::file_loader(manifest_dir(o.manifest)), {},
                                                 o.common.threads);
  const auto stats = protocol::bench_patch_budgets(manifest, analyses, o.budgets, o.folds, pipeline);
  write_text(o.common.out_dir / "bench.csv", protocol::bench_csv(stats));
  write_text(o.common.out_dir / "bench.json", protocol::to_json(stats));
  auto cfg = pipeline_json(pipeline);
  cfg["manifest"] = o.manifest.string();
  std::vector<std::string> budgets;
  for (int b : o.budgets) budgets.push_back(protocol::budget_name(b));
  cfg["budgets"] = budgets;
  cfg["folds"] = o.folds;
  cfg["timing_excludes"] = "image decoding, minutiae extraction";
  write_run_json(o.common, "bench", cfg, {"bench.csv", "bench.json"});
  return stats;
}

}  // namespace spoofbench::commands
