#include <doctest.h>

#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "spoofbench/dataset.hpp"
#include "spoofbench/protocol.hpp"

using namespace spoofbench;
using protocol::Label;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

protocol::DatasetManifest manifest_of(int bonafide, const std::vector<std::pair<std::string, int>>& materials) {
  protocol::DatasetManifest m;
  for (int i = 0; i < bonafide; ++i) m.entries.push_back({"b" + std::to_string(i) + ".pgm", Label::Bonafide, "-", ""});
  for (const auto& [name, count] : materials) {
    for (int i = 0; i < count; ++i) m.entries.push_back({name + std::to_string(i) + ".pgm", Label::PA, name, ""});
  }
  return m;
}

// Small dataset shared by the pipeline tests.
const dataset::SyntheticDataset& small_dataset() {
  static const dataset::SyntheticDataset data = [] {
    dataset::SynthDatasetConfig cfg;
    cfg.materials = {{"Glue", Level::High, Level::High, 6.0, 0},
                     {"Paper", Level::Low, Level::Low, 12.0, 0},
                     {"Dough", Level::Medium, Level::Medium, 3.0, 0}};
    cfg.per_material = 10;
    cfg.bonafide = 30;
    cfg.width = 128;
    cfg.height = 128;
    cfg.seed = 5;
    return dataset::generate(cfg, 4);
  }();
  return data;
}

const std::vector<protocol::ImageAnalysis>& small_analyses() {
  static const auto a = protocol::analyse_images(small_dataset().manifest, small_dataset().loader(), {}, 4);
  return a;
}

protocol::PipelineConfig small_config() {
  protocol::PipelineConfig c;
  c.k_clusters = 4;
  c.n_bonafide_test = 10;
  c.fdr_target = 0.1;
  c.train.epochs = 60;
  c.kmeans_restarts = 2;
  c.seed = 3;
  return c;
}

}  // namespace

TEST_CASE("manifest parsing") {
  std::istringstream ok("path,label,material\na.png,bonafide,-\nb.png,pa,Gelatin\n");
  const auto m = protocol::parse_manifest(ok, "mem");
  REQUIRE(m.entries.size() == 2);
  CHECK(m.entries[1].label == Label::PA);
  CHECK(m.materials() == std::vector<std::string>{"Gelatin"});
  CHECK(m.count(Label::Bonafide) == 1);
  CHECK(m.hash().size() == 16);

  std::istringstream tagged("path,label,material,split_tag\na.png,bonafide,-,x\n");
  CHECK(protocol::parse_manifest(tagged, "mem").entries[0].split_tag == "x");

  for (const char* bad : {"path,label,material\na.png,live,-\n", "path,label,material\na.png,bonafide,Silicone\n",
                          "path,label,material\na.png,pa,-\n", "path,label,material\na.png,pa,\n",
                          "path,label,material\na.png,bonafide,-\na.png,pa,X\n", "path,label\na.png,pa\n"}) {
    std::istringstream in(bad);
    CAPTURE(bad);
    CHECK_THROWS_AS(protocol::parse_manifest(in, "mem"), DataError);
  }
}

TEST_CASE("manifest csv round trip keeps the hash") {
  const auto m = manifest_of(3, {{"A", 2}, {"B", 1}});
  std::istringstream in(protocol::manifest_csv(m));
  const auto back = protocol::parse_manifest(in, "mem");
  CHECK(back.hash() == m.hash());
  CHECK(back.entries.size() == m.entries.size());
}

TEST_CASE("leave-one-out split invariants (property)") {
  Rng rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<std::pair<std::string, int>> mats;
    const int n_mat = 2 + static_cast<int>(rng.below(6));
    for (int k = 0; k < n_mat; ++k) mats.emplace_back("M" + std::to_string(k), 1 + static_cast<int>(rng.below(8)));
    const int n_bona = 5 + static_cast<int>(rng.below(30));
    const auto m = manifest_of(n_bona, mats);
    const int n_test = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_bona - 1)));
    const auto& held = mats[rng.below(mats.size())].first;
    const auto split = protocol::split_leave_one_out(m, held, n_test, rng.next());

    std::set<std::size_t> train(split.train.begin(), split.train.end()), test(split.test.begin(), split.test.end());
    CHECK(train.size() + test.size() == m.entries.size());
    for (auto i : test) CHECK(train.count(i) == 0);
    int test_bona = 0;
    for (auto i : test) {
      const auto& e = m.entries[i];
      if (e.label == Label::Bonafide) ++test_bona;
      else CHECK(e.material == held);
    }
    CHECK(test_bona == n_test);
    for (auto i : train) CHECK(m.entries[i].material != held);
    // Every image of the held-out material is in test.
    for (std::size_t i = 0; i < m.entries.size(); ++i) {
      if (m.entries[i].material == held) CHECK(test.count(i) == 1);
    }
  }
}

TEST_CASE("twelve materials give twelve distinct splits") {
  std::vector<std::pair<std::string, int>> mats;
  for (int k = 0; k < 12; ++k) mats.emplace_back("Mat" + std::to_string(k), 5);
  const auto m = manifest_of(20, mats);
  std::set<std::vector<std::size_t>> tests;
  for (const auto& name : m.materials()) tests.insert(protocol::split_leave_one_out(m, name, 5, 1).test);
  CHECK(tests.size() == 12);
  CHECK_THROWS_AS(protocol::split_leave_one_out(m, "Unobtainium", 5, 1), InvalidArgument);
  CHECK_THROWS_AS(protocol::split_leave_one_out(m, "Mat0", 20, 1), InvalidArgument);
  CHECK_THROWS_AS(protocol::split_leave_one_out(m, "Mat0", 0, 1), InvalidArgument);
}

TEST_CASE("tdr_at_fdr examples") {
  const std::vector<double> bona{0.1, 0.2, 0.3, 0.9}, pa{0.5, 0.6, 0.95};
  auto p = protocol::tdr_at_fdr(bona, pa, 0.25);
  CHECK(p.tdr == 1.0);
  CHECK(p.threshold == 0.5);
  CHECK(p.fdr == 0.25);

  p = protocol::tdr_at_fdr(bona, pa, 0.0);
  CHECK(p.tdr == doctest::Approx(1.0 / 3.0));
  CHECK(p.threshold == 0.95);
  CHECK(p.fdr == 0.0);

  // Nothing beats the bonafide maximum: only the empty detection set qualifies.
  const std::vector<double> high_bona{0.99}, low_pa{0.1, 0.2};
  p = protocol::tdr_at_fdr(high_bona, low_pa, 0.0);
  CHECK(p.tdr == 0.0);
  CHECK(p.threshold == kInf);

  CHECK_THROWS_AS(protocol::tdr_at_fdr({}, pa, 0.1), InvalidArgument);
  CHECK_THROWS_AS(protocol::tdr_at_fdr(bona, pa, 1.0), InvalidArgument);
}

TEST_CASE("tdr_at_fdr agrees with a brute-force sweep (property)") {
  Rng rng(404);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> bona(1 + rng.below(60)), pa(1 + rng.below(60));
    // Coarse grid so ties between and within classes are common.
    const int grid = 2 + static_cast<int>(rng.below(30));
    for (auto& s : bona) s = static_cast<double>(rng.below(grid)) / grid;
    for (auto& s : pa) s = static_cast<double>(rng.below(grid)) / grid;
    const double target = rng.uniform(0.0, 0.5);
    const auto got = protocol::tdr_at_fdr(bona, pa, target);
    const auto want = oracle::tdr_sweep(bona, pa, target);
    CAPTURE(trial);
    CHECK(got.tdr == want.tdr);
    CHECK(got.threshold == want.threshold);
    CHECK(got.fdr == want.fdr);
    CHECK(got.fdr <= target);
  }
}

TEST_CASE("weighted average") {
  std::vector<protocol::MaterialResult> rows(3);
  rows[0].n_images = 10;
  rows[0].detection.tdr = 1.0;
  rows[1].n_images = 30;
  rows[1].detection.tdr = 0.5;
  rows[2].n_images = 60;
  rows[2].detection.tdr = 0.0;
  CHECK(protocol::weighted_average(rows) == doctest::Approx(0.25));
  // Equal sizes reduce to the plain mean.
  for (auto& r : rows) r.n_images = 7;
  CHECK(protocol::weighted_average(rows) == doctest::Approx(0.5));
}

TEST_CASE("report JSON writes infinite thresholds as null") {
  protocol::EvalReport r;
  r.rows.resize(1);
  r.rows[0].material = "Gelatin";
  r.rows[0].n_images = 4;
  r.rows[0].detection = {0.0, kInf, 0.0};
  const auto j = nlohmann::json::parse(protocol::to_json(r));
  CHECK(j.dump().find("null") != std::string::npos);
  CHECK(protocol::summary_csv(r).rfind("material,n_images,tdr_percent,threshold\n", 0) == 0);
}

TEST_CASE("budget names") {
  CHECK(protocol::parse_budget("all") == protocol::kAllMinutiae);
  CHECK(protocol::parse_budget("10") == 10);
  CHECK(protocol::budget_name(protocol::kAllMinutiae) == "all");
  CHECK_THROWS(protocol::parse_budget("0"));
  CHECK_THROWS(protocol::parse_budget("ten"));
}

TEST_CASE("scoring patches follow the budget") {
  const auto& a = small_analyses();
  for (std::size_t i = 0; i < a.size(); i += 7) {
    const auto n = a[i].minutiae.size();
    const auto all = protocol::scoring_patches(a[i], protocol::kAllMinutiae, 1, 2);
    const auto four = protocol::scoring_patches(a[i], 4, 1, 2);
    if (n == 0) {
      CHECK(all.size() == 1);
      continue;
    }
    CHECK(all.size() == n);
    CHECK(four.size() == std::min<std::size_t>(4, n));
    CHECK(protocol::training_patches(a[i]).size() == n);
  }
}

TEST_CASE("leave-one-out run is deterministic and thread-count independent") {
  const auto& data = small_dataset();
  auto cfg = small_config();
  cfg.threads = 1;
  const auto one = protocol::run_loo_experiment(data.manifest, small_analyses(), cfg);
  cfg.threads = 4;
  const auto four = protocol::run_loo_experiment(data.manifest, small_analyses(), cfg);
  CHECK(protocol::to_json(one) == protocol::to_json(four));
  REQUIRE(one.rows.size() == 3);
  CHECK(one.rows[0].material == "Dough");
  for (const auto& r : one.rows) {
    CHECK(r.n_images == 10);
    CHECK(r.detection.fdr <= cfg.fdr_target);
    CHECK((r.detection.tdr >= 0.0 && r.detection.tdr <= 1.0));
  }
  CHECK(one.weighted_average_tdr == doctest::Approx(protocol::weighted_average(one.rows)));
  CHECK(one.manifest_hash == data.manifest.hash());

  // Loading through the loader gives the same report.
  const auto via_loader = protocol::run_loo_experiment(data.manifest, data.loader(), cfg);
  CHECK(protocol::to_json(via_loader) == protocol::to_json(one));
}

TEST_CASE("patch budget changes the number of patches scored") {
  auto cfg = small_config();
  const auto k4 = protocol::run_loo_experiment(small_dataset().manifest, small_analyses(), cfg);
  cfg.k_clusters = protocol::kAllMinutiae;
  const auto all = protocol::run_loo_experiment(small_dataset().manifest, small_analyses(), cfg);
  for (std::size_t m = 0; m < all.rows.size(); ++m) CHECK(all.rows[m].n_patches > k4.rows[m].n_patches);
  CHECK(all.k_clusters == protocol::kAllMinutiae);
}

TEST_CASE("known-material check adds one row per material") {
  auto cfg = small_config();
  cfg.known_material_check = true;
  const auto r = protocol::run_loo_experiment(small_dataset().manifest, small_analyses(), cfg);
  REQUIRE(r.known_material_rows.size() == 3);
  for (const auto& row : r.known_material_rows) CHECK(row.n_images == 5);
}

TEST_CASE("leave-one-out needs two PA materials") {
  const auto& data = small_dataset();
  protocol::DatasetManifest m;
  std::vector<protocol::ImageAnalysis> a;
  for (std::size_t i = 0; i < data.manifest.entries.size(); ++i) {
    const auto& e = data.manifest.entries[i];
    if (e.label == Label::PA && e.material != "Glue") continue;
    m.entries.push_back(e);
    a.push_back(small_analyses()[i]);
  }
  CHECK_THROWS_AS(protocol::run_loo_experiment(m, a, small_config()), ProtocolError);
}

TEST_CASE("bench with one fold omits the spread") {
  const std::vector<int> budgets{2, protocol::kAllMinutiae};
  auto cfg = small_config();
  const auto one = protocol::bench_patch_budgets(small_dataset().manifest, small_analyses(), budgets, 1, cfg);
  REQUIRE(one.rows.size() == 2);
  for (const auto& r : one.rows) {
    CHECK(!r.sd_ms.has_value());
    CHECK(!r.tdr_sd.has_value());
    CHECK(r.fold_ms.size() == 1);
  }
  CHECK(one.rows[0].mean_patches <= one.rows[1].mean_patches);
  CHECK(one.mean_minutiae > 0.0);
  const auto csv = protocol::bench_csv(one);
  CHECK(csv.find("2,1,") != std::string::npos);
  CHECK(csv.find(",,") != std::string::npos);

  const auto three = protocol::bench_patch_budgets(small_dataset().manifest, small_analyses(), budgets, 3, cfg);
  for (const auto& r : three.rows) {
    CHECK(r.sd_ms.has_value());
    CHECK(r.fold_tdr.size() == 3);
  }
  CHECK_THROWS_AS(protocol::bench_patch_budgets(small_dataset().manifest, small_analyses(), budgets, 0, cfg),
                  InvalidArgument);
}
