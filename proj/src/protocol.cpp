#include "spoofbench/protocol.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "spoofbench/common.hpp"
#include "spoofbench/csv.hpp"

namespace spoofbench::protocol {

std::string_view to_string(Label label) { return label == Label::Bonafide ? "bonafide" : "pa"; }

Label parse_label(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "bonafide") return Label::Bonafide;
  if (lower == "pa") return Label::PA;
  throw DataError("unknown label '" + std::string(text) + "' (expected bonafide or pa)");
}

std::vector<std::string> DatasetManifest::materials() const {
  std::set<std::string> names;
  for (const auto& e : entries) {
    if (e.label == Label::PA) names.insert(e.material);
  }
  return {names.begin(), names.end()};
}

std::size_t DatasetManifest::count(Label label) const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [&](const ManifestEntry& e) { return e.label == label; }));
}

void DatasetManifest::validate() const {
  std::set<std::string> paths;
  for (const auto& e : entries) {
    if (e.path.empty()) throw DataError("manifest entry with empty path");
    if (!paths.insert(e.path).second) throw DataError("duplicate manifest path: " + e.path);
    if (e.label == Label::Bonafide && e.material != "-") {
      throw DataError("bonafide entry " + e.path + " must have material '-'");
    }
    if (e.label == Label::PA && (e.material.empty() || e.material == "-")) {
      throw DataError("PA entry " + e.path + " has no material");
    }
  }
}

std::string manifest_csv(const DatasetManifest& manifest) {
  bool tagged = std::any_of(manifest.entries.begin(), manifest.entries.end(),
                            [](const ManifestEntry& e) { return !e.split_tag.empty(); });
  std::string out = tagged ? "path,label,material,split_tag\n" : "path,label,material\n";
  for (const auto& e : manifest.entries) {
    out += e.path + ',' + std::string(to_string(e.label)) + ',' + e.material;
    if (tagged) out += ',' + e.split_tag;
    out += '\n';
  }
  return out;
}

std::string DatasetManifest::hash() const { return hex64(fnv1a64(manifest_csv(*this))); }

DatasetManifest parse_manifest(std::istream& in, std::string_view source_name) {
  const auto table = csv::read(in, source_name);
  const auto c_path = table.column("path");
  const auto c_label = table.column("label");
  const auto c_material = table.column("material");
  std::optional<std::size_t> c_tag;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (table.header[i] == "split_tag") c_tag = i;
  }
  DatasetManifest m;
  for (const auto& row : table.rows) {
    ManifestEntry e;
    e.path = row.at(c_path);
    e.label = parse_label(row.at(c_label));
    e.material = row.at(c_material);
    if (c_tag && *c_tag < row.size()) e.split_tag = row[*c_tag];
    m.entries.push_back(std::move(e));
  }
  m.validate();
  return m;
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path.string());
  return parse_manifest(in, path.string());
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest: " + path.string());
  out << manifest_csv(manifest);
}

Split split_leave_one_out(const DatasetManifest& manifest, const std::string& held_out_material, int n_bonafide_test,
                          std::uint64_t seed) {
  const auto materials = manifest.materials();
  if (std::find(materials.begin(), materials.end(), held_out_material) == materials.end()) {
    throw InvalidArgument("unknown PA material '" + held_out_material + "'");
  }
  std::vector<std::size_t> bonafide;
  Split split;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const auto& e = manifest.entries[i];
    if (e.label == Label::Bonafide) {
      bonafide.push_back(i);
    } else if (e.material == held_out_material) {
      split.test.push_back(i);
    } else {
      split.train.push_back(i);
    }
  }
  if (n_bonafide_test < 1 || static_cast<std::size_t>(n_bonafide_test) >= bonafide.size()) {
    throw InvalidArgument("n_bonafide_test must be in [1, " + std::to_string(bonafide.size()) + ")");
  }
  Rng rng(seed);
  rng.shuffle(bonafide);
  const auto cut = static_cast<std::size_t>(n_bonafide_test);
  split.test.insert(split.test.end(), bonafide.begin(), bonafide.begin() + static_cast<std::ptrdiff_t>(cut));
  split.train.insert(split.train.end(), bonafide.begin() + static_cast<std::ptrdiff_t>(cut), bonafide.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

DetectionPoint tdr_at_fdr(std::span<const double> bonafide_scores, std::span<const double> pa_scores,
                          double fdr_target) {
  if (bonafide_scores.empty() || pa_scores.empty()) throw InvalidArgument("tdr_at_fdr: empty score list");
  if (!(fdr_target >= 0.0 && fdr_target < 1.0)) throw InvalidArgument("tdr_at_fdr: fdr_target must be in [0, 1)");
  std::vector<double> bona(bonafide_scores.begin(), bonafide_scores.end());
  std::vector<double> pa(pa_scores.begin(), pa_scores.end());
  std::sort(bona.begin(), bona.end());
  std::sort(pa.begin(), pa.end());
  std::vector<double> candidates(bona);
  candidates.insert(candidates.end(), pa.begin(), pa.end());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  const auto at_or_above = [](const std::vector<double>& sorted, double t) {
    return static_cast<double>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), t));
  };
  const double nb = static_cast<double>(bona.size()), np = static_cast<double>(pa.size());
  // FDR only falls as t rises, so the first feasible candidate has the
  // highest TDR and is the smallest threshold reaching it.
  for (double t : candidates) {
    const double fdr = at_or_above(bona, t) / nb;
    if (fdr <= fdr_target) return {at_or_above(pa, t) / np, t, fdr};
  }
  return {0.0, std::numeric_limits<double>::infinity(), 0.0};
}

ImageLoader file_loader(std::filesystem::path base_dir) {
  return [base = std::move(base_dir)](const ManifestEntry& e) {
    std::filesystem::path p(e.path);
    return read_image(p.is_absolute() ? p : base / p);
  };
}

std::vector<ImageAnalysis> analyse_images(const DatasetManifest& manifest, const ImageLoader& loader,
                                          const minutiae::ExtractorParams& extractor, unsigned threads) {
  std::vector<ImageAnalysis> out(manifest.entries.size());
  parallel_for(out.size(), threads, [&](std::size_t i) {
    ImageAnalysis a;
    a.image = loader(manifest.entries[i]);
    auto ex = minutiae::detect(a.image, extractor);
    a.field = std::move(ex.field);
    a.minutiae = std::move(ex.minutiae);
    out[i] = std::move(a);
  });
  return out;
}

namespace {

patches::Patch centre_patch(const ImageAnalysis& a) {
  const double cx = (a.image.width() - 1) / 2.0, cy = (a.image.height() - 1) / 2.0;
  return patches::extract_patch(a.image, cx, cy, a.field.angle_at(cx, cy));
}

}  // namespace

patches::PatchSet scoring_patches(const ImageAnalysis& a, int k_clusters, std::uint64_t seed, int restarts) {
  if (a.minutiae.empty()) return {centre_patch(a)};
  if (k_clusters == kAllMinutiae) return patches::minutia_patches(a.image, a.minutiae);
  const auto assignment = patches::kmeans_minutiae(a.minutiae, k_clusters, seed, restarts);
  return patches::cluster_patches(a.image, assignment, a.field);
}

patches::PatchSet training_patches(const ImageAnalysis& a) {
  if (a.minutiae.empty()) return {centre_patch(a)};
  return patches::minutia_patches(a.image, a.minutiae);
}

namespace {

struct ImageFeatures {
  std::vector<scorer::PatchFeatures> features;
  std::vector<double> weights;
};

ImageFeatures featurize_all(const patches::PatchSet& set) {
  ImageFeatures f;
  for (const auto& p : set) {
    f.features.push_back(scorer::featurize(p));
    f.weights.push_back(p.weight);
  }
  return f;
}

std::uint64_t image_seed(std::uint64_t seed, const ManifestEntry& e) { return derive_seed(seed, fnv1a64(e.path)); }

double fused_score(const scorer::AnyModel& model, const ImageFeatures& f) {
  std::vector<double> scores;
  scores.reserve(f.features.size());
  for (const auto& x : f.features) scores.push_back(scorer::score_features(model, x));
  return patches::fuse_scores(scores, f.weights);
}

scorer::AnyModel fit(const DatasetManifest& manifest, std::span<const ImageFeatures> training,
                     std::span<const std::size_t> indices, const PipelineConfig& config, std::uint64_t seed) {
  scorer::TrainingSet data;
  for (auto i : indices) {
    const int label = manifest.entries[i].label == Label::PA ? 1 : 0;
    for (const auto& x : training[i].features) data.add(x, label);
  }
  std::size_t positives = 0;
  for (int l : data.labels) positives += static_cast<std::size_t>(l);
  if (positives == 0 || positives == data.size()) {
    throw ProtocolError("training split lacks " + std::string(positives == 0 ? "PA" : "bonafide") + " samples");
  }
  auto params = config.train;
  params.seed = seed;
  auto model = scorer::train(data, config.model, params, manifest.hash());
  if (config.quantize) return scorer::quantize(model);
  return model;
}

std::string model_hash(const scorer::AnyModel& model) {
  const auto bytes = std::visit([](const auto& m) { return scorer::serialize(m); }, model);
  return hex64(fnv1a64(bytes));
}

// Detection point for a set of PA test images against bonafide test images.
MaterialResult evaluate(const std::string& material, const scorer::AnyModel& model,
                        std::span<const ImageFeatures> scoring, std::span<const std::size_t> pa,
                        std::span<const std::size_t> bona, double fdr_target) {
  MaterialResult r;
  r.material = material;
  std::vector<double> pa_scores, bona_scores;
  for (auto i : pa) {
    pa_scores.push_back(fused_score(model, scoring[i]));
    r.n_patches += static_cast<int>(scoring[i].features.size());
  }
  for (auto i : bona) bona_scores.push_back(fused_score(model, scoring[i]));
  r.n_images = static_cast<int>(pa.size());
  r.detection = tdr_at_fdr(bona_scores, pa_scores, fdr_target);
  r.model_hash = model_hash(model);
  return r;
}

void check_config(const PipelineConfig& config) {
  if (config.k_clusters < 0) throw InvalidArgument("k_clusters must be >= 1 or 'all'");
  if (!(config.fdr_target >= 0.0 && config.fdr_target < 1.0)) throw InvalidArgument("fdr target must be in [0, 1)");
  if (config.kmeans_restarts < 1) throw InvalidArgument("kmeans restarts must be >= 1");
}

}  // namespace

double weighted_average(std::span<const MaterialResult> rows) {
  double num = 0.0, den = 0.0;
  for (const auto& r : rows) {
    num += r.n_images * r.detection.tdr;
    den += r.n_images;
  }
  return den > 0 ? num / den : 0.0;
}

EvalReport run_loo_experiment(const DatasetManifest& manifest, std::span<const ImageAnalysis> analyses,
                              const PipelineConfig& config) {
  check_config(config);
  manifest.validate();
  if (analyses.size() != manifest.entries.size()) throw InvalidArgument("one analysis per manifest entry required");
  const auto materials = manifest.materials();
  if (materials.size() < 2) throw ProtocolError("leave-one-out needs at least 2 PA materials");

  const std::size_t n = manifest.entries.size();
  std::vector<ImageFeatures> training(n), scoring(n);
  parallel_for(n, config.threads, [&](std::size_t i) {
    training[i] = featurize_all(training_patches(analyses[i]));
    if (config.k_clusters == kAllMinutiae || analyses[i].minutiae.empty()) {
      scoring[i] = training[i];
    } else {
      scoring[i] = featurize_all(scoring_patches(analyses[i], config.k_clusters,
                                                 image_seed(config.seed, manifest.entries[i]),
                                                 config.kmeans_restarts));
    }
  });

  EvalReport report;
  report.rows.resize(materials.size());
  parallel_for(materials.size(), config.threads, [&](std::size_t m) {
    const auto& name = materials[m];
    const auto sub = derive_seed(config.seed, fnv1a64(name));
    try {
      const auto split = split_leave_one_out(manifest, name, config.n_bonafide_test, sub);
      const auto model = fit(manifest, training, split.train, config, derive_seed(sub, 1));
      std::vector<std::size_t> pa, bona;
      for (auto i : split.test) (manifest.entries[i].label == Label::PA ? pa : bona).push_back(i);
      report.rows[m] = evaluate(name, model, scoring, pa, bona, config.fdr_target);
    } catch (const ProtocolError& e) {
      throw ProtocolError("material '" + name + "': " + e.what());
    }
  });

  if (config.known_material_check) {
    // Half of every material's images (and n_bonafide_test bonafide) held out
    // from a single model trained on all materials.
    Rng rng(derive_seed(config.seed, 0x6b6e6f776eULL));
    std::vector<std::size_t> train, bona;
    std::map<std::string, std::vector<std::size_t>> held;
    std::vector<std::size_t> all_bona;
    for (const auto& name : materials) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < n; ++i) {
        if (manifest.entries[i].label == Label::PA && manifest.entries[i].material == name) idx.push_back(i);
      }
      rng.shuffle(idx);
      const auto half = idx.size() / 2;
      held[name].assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(half));
      train.insert(train.end(), idx.begin() + static_cast<std::ptrdiff_t>(half), idx.end());
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (manifest.entries[i].label == Label::Bonafide) all_bona.push_back(i);
    }
    if (config.n_bonafide_test < 1 || static_cast<std::size_t>(config.n_bonafide_test) >= all_bona.size()) {
      throw InvalidArgument("n_bonafide_test must be smaller than the bonafide count");
    }
    rng.shuffle(all_bona);
    bona.assign(all_bona.begin(), all_bona.begin() + config.n_bonafide_test);
    train.insert(train.end(), all_bona.begin() + config.n_bonafide_test, all_bona.end());
    std::sort(train.begin(), train.end());
    std::sort(bona.begin(), bona.end());
    const auto model = fit(manifest, training, train, config, derive_seed(config.seed, 0x6b6e6f776fULL));
    for (const auto& name : materials) {
      report.known_material_rows.push_back(evaluate(name, model, scoring, held[name], bona, config.fdr_target));
    }
  }

  report.weighted_average_tdr = weighted_average(report.rows);
  report.fdr_target = config.fdr_target;
  report.seed = config.seed;
  report.k_clusters = config.k_clusters;
  report.manifest_hash = manifest.hash();
  report.model_kind = std::string(scorer::to_string(config.model));
  report.quantized = config.quantize;
  report.n_bonafide_test = config.n_bonafide_test;
  std::string joined;
  for (const auto& r : report.rows) joined += r.model_hash;
  report.scorer_hash = hex64(fnv1a64(joined));
  return report;
}

EvalReport run_loo_experiment(const DatasetManifest& manifest, const ImageLoader& loader,
                              const PipelineConfig& config) {
  check_config(config);
  const auto analyses = analyse_images(manifest, loader, {}, config.threads);
  return run_loo_experiment(manifest, analyses, config);
}

namespace {

nlohmann::ordered_json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

nlohmann::ordered_json rows_json(std::span<const MaterialResult> rows) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["material"] = r.material;
    j["n_images"] = r.n_images;
    j["n_patches"] = r.n_patches;
    j["tdr_at_fdr"] = r.detection.tdr;
    j["threshold"] = number_or_null(r.detection.threshold);
    j["fdr"] = r.detection.fdr;
    j["model_hash"] = r.model_hash;
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace

std::string budget_name(int budget) { return budget == kAllMinutiae ? "all" : std::to_string(budget); }

int parse_budget(std::string_view text) {
  if (text == "all") return kAllMinutiae;
  const auto v = csv::to_int(std::string(text), "patch budget");
  if (v < 1) throw InvalidArgument("patch budget must be >= 1 or 'all'");
  return static_cast<int>(v);
}

std::string to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["fdr_target"] = report.fdr_target;
  j["weighted_average_tdr"] = report.weighted_average_tdr;
  j["weighting"] = "images";
  j["materials"] = rows_json(report.rows);
  if (!report.known_material_rows.empty()) j["known_material"] = rows_json(report.known_material_rows);
  nlohmann::ordered_json meta;
  meta["seed"] = report.seed;
  meta["k_clusters"] = budget_name(report.k_clusters);
  meta["scorer_hash"] = report.scorer_hash;
  meta["manifest_hash"] = report.manifest_hash;
  meta["model"] = report.model_kind;
  meta["quantized"] = report.quantized;
  meta["n_bonafide_test"] = report.n_bonafide_test;
  meta["threshold_rule"] = "score >= threshold is a detection";
  j["protocol"] = std::move(meta);
  return j.dump(2) + "\n";
}

std::string summary_csv(const EvalReport& report) {
  std::string out = "material,n_images,tdr_percent,threshold\n";
  for (const auto& r : report.rows) {
    out += r.material + ',' + std::to_string(r.n_images) + ',' + csv::fixed(100.0 * r.detection.tdr, 2) + ',' +
           (std::isfinite(r.detection.threshold) ? csv::general(r.detection.threshold, 9) : "inf") + '\n';
  }
  int total = 0;
  for (const auto& r : report.rows) total += r.n_images;
  out += "Weighted Average," + std::to_string(total) + ',' +
         csv::fixed(100.0 * report.weighted_average_tdr, 2) + ",\n";
  return out;
}

namespace {

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Fold id per entry; stratified by (label, material).
std::vector<int> assign_folds(const DatasetManifest& manifest, int folds, std::uint64_t seed) {
  std::map<std::string, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const auto& e = manifest.entries[i];
    strata[std::string(to_string(e.label)) + "/" + e.material].push_back(i);
  }
  std::vector<int> fold(manifest.entries.size(), -1);
  Rng rng(seed);
  for (auto& [key, idx] : strata) {
    rng.shuffle(idx);
    for (std::size_t p = 0; p < idx.size(); ++p) {
      // A single fold means an 80/20 hold-out: fold 0 is the test part.
      fold[idx[p]] = folds == 1 ? (p % 5 == 0 ? 0 : 1) : static_cast<int>(p % static_cast<std::size_t>(folds));
    }
  }
  return fold;
}

}  // namespace

BenchStats bench_patch_budgets(const DatasetManifest& manifest, std::span<const ImageAnalysis> analyses,
                               std::span<const int> budgets, int folds, const PipelineConfig& config) {
  check_config(config);
  manifest.validate();
  if (analyses.size() != manifest.entries.size()) throw InvalidArgument("one analysis per manifest entry required");
  if (folds < 1) throw InvalidArgument("folds must be >= 1");
  if (budgets.empty()) throw InvalidArgument("no patch budgets given");
  for (int b : budgets) {
    if (b < 0) throw InvalidArgument("patch budget must be >= 1 or 'all'");
  }
  const std::size_t n = manifest.entries.size();
  const auto fold = assign_folds(manifest, folds, derive_seed(config.seed, 0x62656e6368ULL));

  std::vector<ImageFeatures> training(n);
  parallel_for(n, config.threads, [&](std::size_t i) { training[i] = featurize_all(training_patches(analyses[i])); });

  BenchStats stats;
  stats.folds = folds;
  double minutiae_total = 0.0;
  for (const auto& a : analyses) minutiae_total += static_cast<double>(a.minutiae.size());
  stats.mean_minutiae = minutiae_total / static_cast<double>(n);
  stats.rows.resize(budgets.size());
  for (std::size_t b = 0; b < budgets.size(); ++b) {
    stats.rows[b].patch_budget = budgets[b];
    stats.rows[b].folds = folds;
  }
  std::vector<double> patch_totals(budgets.size(), 0.0);
  std::size_t scored_images = 0;

  const int rounds = folds == 1 ? 1 : folds;
  for (int f = 0; f < rounds; ++f) {
    const auto fold_seed = derive_seed(config.seed, static_cast<std::uint64_t>(f) + 1);
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < n; ++i) (fold[i] == f ? test : train).push_back(i);
    const auto model = fit(manifest, training, train, config, derive_seed(fold_seed, 1));
    scored_images += test.size();

    for (std::size_t b = 0; b < budgets.size(); ++b) {
      std::vector<double> bona, pa;
      double elapsed_ms = 0.0;
      for (auto i : test) {
        const auto start = std::chrono::steady_clock::now();
        const auto set = scoring_patches(analyses[i], budgets[b], image_seed(fold_seed, manifest.entries[i]),
                                         config.kmeans_restarts);
        const double score = fused_score(model, featurize_all(set));
        elapsed_ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        patch_totals[b] += static_cast<double>(set.size());
        (manifest.entries[i].label == Label::PA ? pa : bona).push_back(score);
      }
      if (bona.empty() || pa.empty()) throw ProtocolError("bench fold " + std::to_string(f) + " lacks a class");
      stats.rows[b].fold_ms.push_back(elapsed_ms / static_cast<double>(test.size()));
      stats.rows[b].fold_tdr.push_back(tdr_at_fdr(bona, pa, config.fdr_target).tdr);
    }
  }
  for (std::size_t b = 0; b < budgets.size(); ++b) {
    auto& row = stats.rows[b];
    row.mean_ms = mean_of(row.fold_ms);
    row.tdr_mean = mean_of(row.fold_tdr);
    if (row.fold_ms.size() >= 2) {
      row.sd_ms = sample_sd(row.fold_ms);
      row.tdr_sd = sample_sd(row.fold_tdr);
    }
    row.mean_patches = patch_totals[b] / static_cast<double>(scored_images);
  }
  return stats;
}

std::string bench_csv(const BenchStats& stats) {
  std::string out = "budget,folds,mean_ms,sd_ms,tdr_mean,tdr_sd,mean_patches\n";
  for (const auto& r : stats.rows) {
    out += budget_name(r.patch_budget) + ',' + std::to_string(r.folds) + ',' + csv::fixed(r.mean_ms, 4) + ',' +
           (r.sd_ms ? csv::fixed(*r.sd_ms, 4) : "") + ',' + csv::fixed(r.tdr_mean, 6) + ',' +
           (r.tdr_sd ? csv::fixed(*r.tdr_sd, 6) : "") + ',' + csv::fixed(r.mean_patches, 3) + '\n';
  }
  return out;
}

std::string to_json(const BenchStats& stats) {
  nlohmann::ordered_json j;
  j["folds"] = stats.folds;
  j["mean_minutiae"] = stats.mean_minutiae;
  j["timing_scope"] = "clustering + patch extraction + featurize + score + fuse";
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : stats.rows) {
    nlohmann::ordered_json row;
    row["budget"] = budget_name(r.patch_budget);
    row["mean_ms"] = r.mean_ms;
    row["sd_ms"] = r.sd_ms ? nlohmann::ordered_json(*r.sd_ms) : nlohmann::ordered_json(nullptr);
    row["tdr_mean"] = r.tdr_mean;
    row["tdr_sd"] = r.tdr_sd ? nlohmann::ordered_json(*r.tdr_sd) : nlohmann::ordered_json(nullptr);
    row["mean_patches"] = r.mean_patches;
    row["fold_ms"] = r.fold_ms;
    row["fold_tdr"] = r.fold_tdr;
    rows.push_back(std::move(row));
  }
  j["budgets"] = std::move(rows);
  return j.dump(2) + "\n";
}

}  // namespace spoofbench::protocol
