// spoofbench command-line front end.
#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <exception>
#include <string>

#include "spoofbench/commands.hpp"
#include "spoofbench/common.hpp"

namespace sb = spoofbench;
namespace cmd = spoofbench::commands;

namespace {

int parse_k(const std::string& text) {
  try {
    return sb::protocol::parse_budget(text);
  } catch (const sb::DataError&) {
    throw sb::InvalidArgument("expected a positive count or 'all', got '" + text + "'");
  }
}

std::vector<int> parse_budget_list(const std::string& text) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (item.empty()) throw sb::InvalidArgument("empty entry in --budgets");
    out.push_back(parse_k(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

void add_pipeline_options(CLI::App* app, std::string& k, std::string& model, sb::protocol::PipelineConfig& p) {
  app->add_option("--k-clusters", k, "patches per image: a count or 'all'")->capture_default_str();
  app->add_option("--fdr", p.fdr_target, "false detection rate target")->capture_default_str();
  app->add_option("--n-bonafide-test", p.n_bonafide_test, "bonafide images held out per split")->capture_default_str();
  app->add_option("--model", model, "logistic or mlp")->capture_default_str();
  app->add_option("--epochs", p.train.epochs)->capture_default_str();
  app->add_option("--lr", p.train.learning_rate)->capture_default_str();
  app->add_option("--l2", p.train.l2)->capture_default_str();
  app->add_option("--hidden", p.train.hidden, "MLP hidden width")->capture_default_str();
  app->add_option("--kmeans-restarts", p.kmeans_restarts)->capture_default_str();
  app->add_flag("--quantize", p.quantize, "score with the 8-bit model");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spoofbench: minutiae-patch presentation attack detection toolkit"};
  app.require_subcommand(1);

  cmd::Common common;
  std::string log_level = "info";
  std::uint64_t seed = 0;
  bool seed_given = false;
  app.add_option("--out", common.out_dir, "output directory")->capture_default_str();
  app.add_option("--threads", common.threads, "worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--log-level", log_level, "debug, info, warn or error")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "random seed (default: $SPOOFBENCH_SEED or 0)");

  cmd::SynthOptions synth;
  auto* c_synth = app.add_subcommand("synth", "generate a synthetic dataset");
  c_synth->add_option("--specs", synth.specs, "material specs CSV")->required()->check(CLI::ExistingFile);
  c_synth->add_option("--count", synth.per_material, "images per material")->capture_default_str();
  c_synth->add_option("--bonafide", synth.bonafide, "bonafide images")->capture_default_str();
  c_synth->add_option("--size", synth.size, "image side in pixels")->capture_default_str();
  c_synth->add_option("--period", synth.ridge_period, "ridge period in pixels")->capture_default_str();

  cmd::ExtractOptions extract;
  std::string extract_k;
  auto* c_extract = app.add_subcommand("extract", "minutiae, skeleton and optional patches of one image");
  c_extract->add_option("image", extract.image)->required()->check(CLI::ExistingFile);
  c_extract->add_option("--patches", extract_k, "also export patches: a count or 'all'");

  cmd::TrainOptions train;
  std::string train_model = "logistic";
  auto* c_train = app.add_subcommand("train", "train a patch scorer on a manifest");
  c_train->add_option("manifest", train.manifest)->required()->check(CLI::ExistingFile);
  c_train->add_option("--model", train_model, "logistic or mlp")->capture_default_str();
  c_train->add_option("--epochs", train.params.epochs)->capture_default_str();
  c_train->add_option("--lr", train.params.learning_rate)->capture_default_str();
  c_train->add_option("--l2", train.params.l2)->capture_default_str();
  c_train->add_option("--hidden", train.params.hidden)->capture_default_str();
  c_train->add_flag("--quantize", train.quantize, "also write the 8-bit model");

  cmd::ScoreOptions score;
  std::string score_k = "10";
  auto* c_score = app.add_subcommand("score", "score every image of a manifest");
  c_score->add_option("manifest", score.manifest)->required()->check(CLI::ExistingFile);
  c_score->add_option("--model-file", score.model, "model file")->required()->check(CLI::ExistingFile);
  c_score->add_option("--k-clusters", score_k, "a count or 'all'")->capture_default_str();

  cmd::EvalOptions eval;
  std::string eval_k = "10", eval_model = "logistic";
  auto* c_eval = app.add_subcommand("eval", "leave-one-out evaluation");
  c_eval->add_option("manifest", eval.manifest)->required()->check(CLI::ExistingFile);
  add_pipeline_options(c_eval, eval_k, eval_model, eval.pipeline);
  c_eval->add_flag("--known-material", eval.pipeline.known_material_check,
                   "also report detection of materials seen in training");

  cmd::MaterialsOptions mats;
  auto* c_mats = app.add_subcommand("materials", "material correlation, clustering and representative set");
  c_mats->add_option("--spectra", mats.spectra_dir, "directory with uvvis/ and ftir/")->required()->check(CLI::ExistingDirectory);
  c_mats->add_option("--classes", mats.classes, "name,elasticity,moisture CSV")->required()->check(CLI::ExistingFile);
  c_mats->add_option("--reps", mats.reps, "representative set size")->capture_default_str();

  cmd::EmbedOptions emb;
  auto* c_embed = app.add_subcommand("embed", "3-D t-SNE of per-image features");
  c_embed->add_option("manifest", emb.manifest)->required()->check(CLI::ExistingFile);
  c_embed->add_option("--model-file", emb.model, "take standardisation from this model")->check(CLI::ExistingFile);
  c_embed->add_option("--perplexity", emb.perplexity)->capture_default_str();
  c_embed->add_option("--iterations", emb.iterations)->capture_default_str();
  c_embed->add_option("--lr", emb.learning_rate)->capture_default_str();
  c_embed->add_option("--per-class", emb.per_class_cap, "images per class cap")->capture_default_str();

  cmd::BenchOptions bench;
  std::string bench_budgets = "5,10,15,20,25,30,all", bench_model = "logistic", bench_k = "10";
  auto* c_bench = app.add_subcommand("bench", "patch-budget latency benchmark");
  c_bench->add_option("manifest", bench.manifest)->required()->check(CLI::ExistingFile);
  c_bench->add_option("--budgets", bench_budgets, "comma-separated counts or 'all'")->capture_default_str();
  c_bench->add_option("--folds", bench.folds)->capture_default_str();
  add_pipeline_options(c_bench, bench_k, bench_model, bench.pipeline);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    spdlog::set_level(spdlog::level::from_str(log_level));
    spdlog::set_pattern("[%l] %v");
    common.seed = seed_opt->count() > 0 ? seed : cmd::default_seed(0);
    seed_given = seed_opt->count() > 0;
    common.log = [](cmd::LogLevel level, const std::string& msg) {
      if (level == cmd::LogLevel::Warn) {
        spdlog::warn("{}", msg);
      } else {
        spdlog::info("{}", msg);
      }
    };
    spdlog::debug("seed {} ({})", common.seed, seed_given ? "--seed" : "default");

    if (*c_synth) {
      synth.common = common;
      cmd::cmd_synth(synth);
    } else if (*c_extract) {
      extract.common = common;
      if (!extract_k.empty()) extract.export_patches_k = parse_k(extract_k);
      cmd::cmd_extract(extract);
    } else if (*c_train) {
      train.common = common;
      train.model = sb::scorer::parse_model_kind(train_model);
      cmd::cmd_train(train);
    } else if (*c_score) {
      score.common = common;
      score.k_clusters = parse_k(score_k);
      cmd::cmd_score(score);
    } else if (*c_eval) {
      eval.common = common;
      eval.pipeline.k_clusters = parse_k(eval_k);
      eval.pipeline.model = sb::scorer::parse_model_kind(eval_model);
      const auto report = cmd::cmd_eval(eval);
      std::fputs(sb::protocol::summary_csv(report).c_str(), stdout);
    } else if (*c_mats) {
      mats.common = common;
      for (const auto& name : cmd::cmd_materials(mats)) std::printf("%s\n", name.c_str());
    } else if (*c_embed) {
      emb.common = common;
      cmd::cmd_embed(emb);
    } else if (*c_bench) {
      bench.common = common;
      bench.budgets = parse_budget_list(bench_budgets);
      bench.pipeline.k_clusters = parse_k(bench_k);
      bench.pipeline.model = sb::scorer::parse_model_kind(bench_model);
      const auto stats = cmd::cmd_bench(bench);
      std::fputs(sb::protocol::bench_csv(stats).c_str(), stdout);
    }
  } catch (const sb::InvalidArgument& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const sb::DataError& e) {
    spdlog::error("{}", e.what());
    return 3;
  } catch (const sb::ProtocolError& e) {
    spdlog::error("{}", e.what());
    return 3;
  } catch (const std::exception& e) {
    spdlog::error("internal error: {}", e.what());
    return 4;
  }
  return 0;
}
