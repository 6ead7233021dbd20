#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "spoofbench/imaging.hpp"
#include "spoofbench/patches.hpp"
#include "spoofbench/scorer.hpp"

using namespace spoofbench;
using scorer::ModelKind;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

GrayImage stripes96(double period, double angle) {
  GrayImage g(96, 96);
  const double c = std::cos(angle), s = std::sin(angle);
  for (int y = 0; y < 96; ++y)
    for (int x = 0; x < 96; ++x)
      g.at(x, y) = static_cast<std::uint8_t>(std::lround(127.5 + 100 * std::cos(2 * kPi * (x * c + y * s) / period)));
  return g;
}

GrayImage half_turn(const GrayImage& g) {
  GrayImage out(g.width(), g.height());
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x < g.width(); ++x) out.at(g.width() - 1 - x, g.height() - 1 - y) = g.at(x, y);
  return out;
}

// Two shifted Gaussian clouds in feature space.
scorer::TrainingSet gaussian_set(std::uint64_t seed, int n, double shift) {
  Rng rng(seed);
  scorer::TrainingSet ts;
  for (int i = 0; i < n; ++i) {
    scorer::PatchFeatures f{};
    const int label = i % 2;
    for (auto& v : f) v = rng.normal() + (label ? shift : 0.0);
    ts.add(f, label);
  }
  return ts;
}

double accuracy(const scorer::ScorerModel& m, const scorer::TrainingSet& ts) {
  int ok = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) ok += (m.score_features(ts.features[i]) >= 0.5) == (ts.labels[i] == 1);
  return static_cast<double>(ok) / static_cast<double>(ts.size());
}

std::vector<GrayImage> patch_pool(int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<GrayImage> out;
  const auto finger = imaging::synth_fingerprint(seed, 256, 256, 9);
  while (static_cast<int>(out.size()) < count) {
    const double x = rng.uniform(40, 216), y = rng.uniform(40, 216), t = rng.uniform(0, 2 * kPi);
    auto p = patches::extract_patch(finger, x, y, t).pixels;
    const double gain = rng.uniform(0.3, 1.2), noise = rng.uniform(0, 30);
    p = imaging::apply_effect(p, {gain, 0.0, noise}, rng.next());
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

TEST_CASE("featurize a constant patch") {
  const auto f = scorer::featurize(GrayImage(96, 96, 77));
  CHECK(f.size() == 34);
  CHECK(std::abs(f[scorer::feature::kStd]) <= 1e-9);
  CHECK(std::abs(f[scorer::feature::kGradientMean]) <= 1e-9);
  CHECK(std::abs(f[scorer::feature::kGradientStd]) <= 1e-9);
  CHECK(f[scorer::feature::kMean] == doctest::Approx(77.0 / 255.0));
  int ones = 0;
  for (std::size_t b = 0; b < 16; ++b) {
    CHECK((f[b] == 0.0 || f[b] == 1.0));
    ones += f[b] == 1.0;
  }
  CHECK(ones == 1);
  CHECK(f[77 * 16 / 256] == 1.0);
  for (double v : f) CHECK(std::isfinite(v));
}

TEST_CASE("half-turned patch has identical intensity statistics") {
  for (auto p : patch_pool(20, 3)) {
    const auto a = scorer::featurize(p), b = scorer::featurize(half_turn(p));
    for (std::size_t i = 0; i < 18; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
  }
}

TEST_CASE("ridge frequency of period-8 stripes") {
  const double bin = 1.0 / 96.0;
  for (double angle : {0.0, kPi / 2}) {
    const auto f = scorer::featurize(stripes96(8, angle));
    CHECK(std::abs(f[scorer::feature::kFrequencyPeak] - 1.0 / 8.0) <= bin);
    CHECK(f[scorer::feature::kFrequencyEnergy] > 0.0);
  }
}

TEST_CASE("histogram sums to one and features are finite (property)") {
  for (const auto& p : patch_pool(60, 9)) {
    const auto f = scorer::featurize(p);
    double sum = 0;
    for (std::size_t b = 0; b < 16; ++b) sum += f[b];
    CHECK(std::abs(sum - 1.0) <= 1e-9);
    for (double v : f) CHECK(std::isfinite(v));
  }
  CHECK_THROWS_AS(scorer::featurize(GrayImage(95, 96)), InvalidArgument);
}

TEST_CASE("tensor layout") {
  CHECK(scorer::tensor_sizes(ModelKind::Logistic, 0) == std::vector<std::size_t>{34, 1});
  CHECK(scorer::tensor_sizes(ModelKind::Mlp, 8) == std::vector<std::size_t>{8 * 34, 8, 8, 1});
  CHECK(scorer::parameter_count(ModelKind::Mlp, 8) == 8 * 34 + 8 + 8 + 1);
  CHECK(scorer::parse_model_kind("mlp") == ModelKind::Mlp);
  CHECK_THROWS(scorer::parse_model_kind("cnn"));
}

TEST_CASE("zero models score one half") {
  const auto zero = scorer::ScorerModel::zeros(ModelKind::Logistic);
  const auto q = scorer::quantize(zero);
  for (const auto& p : patch_pool(10, 4)) {
    const auto f = scorer::featurize(p);
    CHECK(zero.score_features(f) == 0.5);
    CHECK(q.score_features(f) == 0.5);
  }
  const auto mlp = scorer::quantize(scorer::ScorerModel::zeros(ModelKind::Mlp, 4));
  CHECK(mlp.score_features(scorer::featurize(GrayImage(96, 96, 10))) == 0.5);
}

TEST_CASE("training on separable data") {
  const auto ts = gaussian_set(1, 400, 3.0);
  for (auto kind : {ModelKind::Logistic, ModelKind::Mlp}) {
    scorer::TrainParams p;
    p.epochs = 500;
    p.learning_rate = kind == ModelKind::Logistic ? 0.5 : 0.1;
    const auto m = scorer::train(ts, kind, p, "abc");
    CHECK(accuracy(m, ts) >= 0.99);
    CHECK(m.metadata.manifest_hash == "abc");
    CHECK(m.metadata.epochs == 500);
    CHECK(std::isfinite(m.metadata.final_loss));
    CHECK(m.params.size() == scorer::parameter_count(kind, m.hidden));
  }
}

TEST_CASE("training is deterministic and duplicating the data changes nothing") {
  const auto ts = gaussian_set(2, 200, 0.5);
  auto doubled = ts;
  for (std::size_t i = 0; i < ts.size(); ++i) doubled.add(ts.features[i], ts.labels[i]);
  for (auto kind : {ModelKind::Logistic, ModelKind::Mlp}) {
    scorer::TrainParams p;
    p.epochs = 200;
    p.learning_rate = 0.1;
    p.seed = 17;
    const auto a = scorer::train(ts, kind, p);
    const auto b = scorer::train(ts, kind, p);
    CHECK(a.params == b.params);
    const auto c = scorer::train(doubled, kind, p);
    for (std::size_t i = 0; i < a.params.size(); ++i) CHECK(c.params[i] == doctest::Approx(a.params[i]).epsilon(1e-5));
  }
}

TEST_CASE("flipping labels mirrors the logistic scorer") {
  const auto ts = gaussian_set(3, 300, 0.8);
  auto flipped = ts;
  for (auto& l : flipped.labels) l = 1 - l;
  scorer::TrainParams p;
  p.epochs = 300;
  const auto m = scorer::train(ts, ModelKind::Logistic, p);
  const auto f = scorer::train(flipped, ModelKind::Logistic, p);
  for (std::size_t i = 0; i < 50; ++i) {
    CHECK(std::abs(f.score_features(ts.features[i]) - (1.0 - m.score_features(ts.features[i]))) <= 1e-6);
  }
}

TEST_CASE("training preconditions") {
  auto ts = gaussian_set(4, 40, 1.0);
  for (auto& l : ts.labels) l = 1;
  CHECK_THROWS_AS(scorer::train(ts, ModelKind::Logistic, {}), InvalidArgument);
  CHECK_THROWS_AS(scorer::train(gaussian_set(4, 18, 1.0), ModelKind::Logistic, {}), InvalidArgument);
}

TEST_CASE("zero-variance features are flagged with unit std") {
  auto ts = gaussian_set(5, 100, 1.0);
  for (auto& f : ts.features) f[7] = 0.25;
  scorer::TrainParams p;
  p.epochs = 20;
  const auto m = scorer::train(ts, ModelKind::Logistic, p);
  CHECK(m.metadata.flagged_features == std::vector<int>{7});
  CHECK(m.feature_std[7] == 1.0f);
  for (float s : m.feature_std) CHECK(s > 0.0f);
}

TEST_CASE("analytic gradient matches central differences") {
  const auto ts = gaussian_set(6, 60, 0.7);
  std::vector<float> mean(34, 0.0f), sd(34, 1.0f);
  const auto design = scorer::standardize(ts, mean, sd);
  Rng rng(8);
  for (auto kind : {ModelKind::Logistic, ModelKind::Mlp}) {
    const int hidden = kind == ModelKind::Mlp ? 6 : 0;
    std::vector<double> theta(scorer::parameter_count(kind, hidden));
    for (auto& v : theta) v = 0.3 * rng.normal();
    const auto obj = scorer::loss_and_gradient(kind, hidden, theta, design, 0.01);
    for (int probe = 0; probe < 10; ++probe) {
      const std::size_t i = rng.below(theta.size());
      const double h = 1e-5;
      auto up = theta, down = theta;
      up[i] += h;
      down[i] -= h;
      const double fd = (scorer::loss_and_gradient(kind, hidden, up, design, 0.01).loss -
                         scorer::loss_and_gradient(kind, hidden, down, design, 0.01).loss) /
                        (2 * h);
      const double denom = std::max({std::abs(fd), std::abs(obj.gradient[i]), 1e-8});
      CAPTURE(i);
      CHECK(std::abs(fd - obj.gradient[i]) / denom <= 1e-4);
    }
  }
}

TEST_CASE("quantize_tensor examples") {
  const std::vector<float> w{-1.0f, 0.0f, 1.0f};
  const auto q = scorer::quantize_tensor(w);
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(std::abs(q.dequantize(i) - w[i]) <= 2.0 / 255.0);
  CHECK(q.scale == doctest::Approx(2.0 / 255.0));

  const std::vector<float> zeros(10, 0.0f);
  const auto z = scorer::quantize_tensor(zeros);
  CHECK(z.scale == 1.0f);
  CHECK(z.zero_point == 0);
  for (std::size_t i = 0; i < zeros.size(); ++i) CHECK(z.dequantize(i) == 0.0);

  // A constant non-zero tensor: the range is widened to include 0, so the
  // constant sits on an end of the grid and comes back exactly.
  const std::vector<float> constant(5, -0.75f);
  const auto c = scorer::quantize_tensor(constant);
  for (std::size_t i = 0; i < constant.size(); ++i) CHECK(c.dequantize(i) == doctest::Approx(-0.75).epsilon(1e-7));
}

TEST_CASE("dequantized values are within half a step (property)") {
  Rng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.below(200);
    const double spread = std::exp(rng.uniform(-8, 3)), offset = rng.uniform(-1, 1) * spread;
    std::vector<float> v(n);
    for (auto& x : v) x = static_cast<float>(offset + spread * rng.normal());
    const auto q = scorer::quantize_tensor(v);
    CHECK((q.zero_point >= 0 && q.zero_point <= 255));
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(q.dequantize(i) - v[i]) <= q.scale * 0.5 * (1 + 1e-5));
  }
}

TEST_CASE("quantized scores track float scores on random models and patches") {
  Rng rng(31);
  const auto pool = patch_pool(1000, 12);
  std::vector<scorer::PatchFeatures> feats;
  for (const auto& p : pool) feats.push_back(scorer::featurize(p));
  for (auto kind : {ModelKind::Logistic, ModelKind::Mlp}) {
    auto m = scorer::ScorerModel::zeros(kind, kind == ModelKind::Mlp ? 12 : 0);
    for (auto& v : m.params) v = static_cast<float>(0.3 * rng.normal());
    for (std::size_t j = 0; j < 34; ++j) {
      double s = 0, s2 = 0;
      for (const auto& f : feats) {
        s += f[j];
        s2 += f[j] * f[j];
      }
      const double mean = s / feats.size();
      m.feature_mean[j] = static_cast<float>(mean);
      m.feature_std[j] = static_cast<float>(std::max(1e-3, std::sqrt(s2 / feats.size() - mean * mean)));
    }
    const auto q = scorer::quantize(m);
    double worst = 0;
    for (const auto& f : feats) worst = std::max(worst, std::abs(m.score_features(f) - q.score_features(f)));
    CAPTURE(scorer::to_string(kind));
    CHECK(worst <= 0.05);
    CHECK(q.weight_payload_bytes() * 10 <= m.weight_payload_bytes() * 3);
  }
}

TEST_CASE("score is monotone in the logistic logit") {
  const auto ts = gaussian_set(7, 200, 1.0);
  scorer::TrainParams p;
  p.epochs = 100;
  const auto m = scorer::train(ts, ModelKind::Logistic, p);
  std::vector<std::pair<double, double>> pairs;
  for (const auto& f : ts.features) pairs.emplace_back(m.logit(f), m.score_features(f));
  std::sort(pairs.begin(), pairs.end());
  for (std::size_t i = 1; i < pairs.size(); ++i) CHECK(pairs[i].second >= pairs[i - 1].second);
}

TEST_CASE("serialisation round trip is bit-identical") {
  const auto dir = fs::temp_directory_path() / "spoofbench_test_models";
  fs::create_directories(dir);
  const auto ts = gaussian_set(8, 200, 1.0);
  const auto pool = patch_pool(50, 13);
  for (auto kind : {ModelKind::Logistic, ModelKind::Mlp}) {
    scorer::TrainParams p;
    p.epochs = 50;
    p.learning_rate = 0.1;
    const auto m = scorer::train(ts, kind, p, "hash");
    const auto q = scorer::quantize(m);
    scorer::save_model(dir / "f.spbl", m);
    scorer::save_model(dir / "q.spbl", q);
    const auto fm = scorer::load_model(dir / "f.spbl");
    const auto qm = scorer::load_model(dir / "q.spbl");
    REQUIRE(std::holds_alternative<scorer::ScorerModel>(fm));
    REQUIRE(std::holds_alternative<scorer::QuantizedModel>(qm));
    CHECK(std::get<scorer::ScorerModel>(fm).metadata == m.metadata);
    CHECK(scorer::serialize(std::get<scorer::ScorerModel>(fm)) == scorer::serialize(m));
    CHECK(scorer::serialize(std::get<scorer::QuantizedModel>(qm)) == scorer::serialize(q));
    for (const auto& px : pool) {
      patches::Patch patch;
      patch.pixels = px;
      CHECK(scorer::as_scorer(fm).score(patch) == m.score(patch));
      CHECK(scorer::as_scorer(qm).score(patch) == q.score(patch));
    }
    const auto bytes = scorer::serialize(m);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "SPBL");
    CHECK(bytes[4] == 1);  // version, little-endian
    CHECK(bytes[5] == 0);
    CHECK(bytes[6] == static_cast<std::uint8_t>(kind));
  }
}

TEST_CASE("corrupt model files are rejected") {
  auto bytes = scorer::serialize(scorer::ScorerModel::zeros(ModelKind::Logistic));
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(scorer::deserialize(bad), DataError);
  auto truncated = bytes;
  truncated.resize(bytes.size() / 2);
  CHECK_THROWS_AS(scorer::deserialize(truncated), DataError);
  auto version = bytes;
  version[4] = 9;
  CHECK_THROWS_AS(scorer::deserialize(version), DataError);
  CHECK_THROWS_AS(scorer::load_model("/nonexistent/model.spbl"), DataError);
}
