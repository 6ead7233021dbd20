#include "spoofbench/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>

#include <json.hpp>

#include "fft.hpp"
#include "spoofbench/common.hpp"

namespace spoofbench::scorer {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kSize = patches::kPatchSize;

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

std::string_view to_string(ModelKind kind) { return kind == ModelKind::Logistic ? "logistic" : "mlp"; }

ModelKind parse_model_kind(std::string_view text) {
  if (text == "logistic") return ModelKind::Logistic;
  if (text == "mlp") return ModelKind::Mlp;
  throw InvalidArgument("unknown model kind '" + std::string(text) + "' (expected logistic or mlp)");
}

PatchFeatures featurize(const GrayImage& img) {
  if (img.width() != kSize || img.height() != kSize) throw InvalidArgument("featurize: patch must be 96x96");
  PatchFeatures f{};
  const auto px = img.pixels();
  const double n = static_cast<double>(px.size());

  double sum = 0;
  for (auto p : px) {
    f[feature::kHistogram + (p >> 4)] += 1.0;
    sum += p / 255.0;
  }
  for (std::size_t b = 0; b < 16; ++b) f[feature::kHistogram + b] /= n;
  const double mean = sum / n;
  double var = 0;
  for (auto p : px) var += (p / 255.0 - mean) * (p / 255.0 - mean);
  f[feature::kMean] = mean;
  f[feature::kStd] = std::sqrt(var / n);

  // Sobel gradients on the interior.
  const auto at = [&](int x, int y) { return img.at(x, y) / 255.0; };
  std::vector<double> magnitude;
  magnitude.reserve(static_cast<std::size_t>(kSize - 2) * (kSize - 2));
  std::array<double, 8> band{};
  double band_total = 0;
  for (int y = 1; y < kSize - 1; ++y) {
    for (int x = 1; x < kSize - 1; ++x) {
      const double gx = (at(x + 1, y - 1) + 2 * at(x + 1, y) + at(x + 1, y + 1) - at(x - 1, y - 1) -
                         2 * at(x - 1, y) - at(x - 1, y + 1)) / 8.0;
      const double gy = (at(x - 1, y + 1) + 2 * at(x, y + 1) + at(x + 1, y + 1) - at(x - 1, y - 1) -
                         2 * at(x, y - 1) - at(x + 1, y - 1)) / 8.0;
      const double m2 = gx * gx + gy * gy;
      magnitude.push_back(std::sqrt(m2));
      if (m2 > 0) {
        double a = std::atan2(gy, gx);
        if (a < 0) a += kPi;
        if (a >= kPi) a -= kPi;
        const auto b = std::min<std::size_t>(7, static_cast<std::size_t>(a / (kPi / 8)));
        band[b] += m2;
        band_total += m2;
      }
    }
  }
  double gsum = 0;
  for (double m : magnitude) gsum += m;
  const double gmean = gsum / static_cast<double>(magnitude.size());
  double gvar = 0;
  for (double m : magnitude) gvar += (m - gmean) * (m - gmean);
  f[feature::kGradientMean] = gmean;
  f[feature::kGradientStd] = std::sqrt(gvar / static_cast<double>(magnitude.size()));
  for (std::size_t b = 0; b < 8; ++b) f[feature::kDirectional + b] = band_total > 0 ? band[b] / band_total : 0.0;

  // Radially binned power spectrum of the mean-removed patch.
  thread_local detail::RealFft2d fft(kSize, kSize);
  for (std::size_t i = 0; i < px.size(); ++i) fft.real()[i] = px[i] / 255.0 - mean;
  fft.forward();
  std::array<double, kSize / 2 + 1> ring{};
  const int half = fft.half_cols();
  for (int ky = 0; ky < kSize; ++ky) {
    const int fy = ky <= kSize / 2 ? ky : ky - kSize;
    for (int kx = 0; kx < half; ++kx) {
      const auto r = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(kx * kx + fy * fy))));
      if (r > kSize / 2) continue;
      const auto& c = fft.spectrum()[static_cast<std::size_t>(ky) * half + kx];
      const double weight = (kx == 0 || kx == kSize / 2) ? 1.0 : 2.0;
      ring[r] += weight * (c[0] * c[0] + c[1] * c[1]);
    }
  }
  double ring_total = 0;
  for (std::size_t r = 1; r < ring.size(); ++r) ring_total += ring[r];
  std::size_t peak = 2;
  for (std::size_t r = 3; r < ring.size(); ++r) {
    if (ring[r] > ring[peak]) peak = r;
  }
  if (ring_total > 0) {
    f[feature::kFrequencyPeak] = static_cast<double>(peak) / kSize;
    f[feature::kFrequencyEnergy] = ring[peak] / ring_total;
  }

  constexpr int kq = kSize / 2;
  for (int q = 0; q < 4; ++q) {
    const int x0 = (q % 2) * kq, y0 = (q / 2) * kq;
    double s = 0, s2 = 0;
    for (int y = y0; y < y0 + kq; ++y) {
      for (int x = x0; x < x0 + kq; ++x) s += at(x, y);
    }
    const double m = s / (kq * kq);
    for (int y = y0; y < y0 + kq; ++y) {
      for (int x = x0; x < x0 + kq; ++x) s2 += (at(x, y) - m) * (at(x, y) - m);
    }
    f[feature::kQuadrant + static_cast<std::size_t>(q)] = std::sqrt(s2 / (kq * kq));
  }
  return f;
}

std::vector<std::size_t> tensor_sizes(ModelKind kind, int hidden) {
  if (kind == ModelKind::Logistic) return {kFeatureCount, 1};
  if (hidden < 1) throw InvalidArgument("MLP hidden width must be >= 1");
  const auto h = static_cast<std::size_t>(hidden);
  return {h * kFeatureCount, h, h, 1};
}

std::size_t parameter_count(ModelKind kind, int hidden) {
  std::size_t total = 0;
  for (auto s : tensor_sizes(kind, hidden)) total += s;
  return total;
}

namespace {

template <typename Norms>
std::array<double, kFeatureCount> standardized(const PatchFeatures& x, const Norms& mean, const Norms& stdev) {
  std::array<double, kFeatureCount> z{};
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    z[j] = (x[j] - static_cast<double>(mean[j])) / static_cast<double>(stdev[j]);
  }
  return z;
}

// Forward pass shared by training and float inference.
template <typename Params>
double forward_logit(ModelKind kind, int hidden, const Params& p, const double* z, double* hidden_out = nullptr) {
  if (kind == ModelKind::Logistic) {
    double acc = static_cast<double>(p[kFeatureCount]);
    for (std::size_t j = 0; j < kFeatureCount; ++j) acc += static_cast<double>(p[j]) * z[j];
    return acc;
  }
  const auto h = static_cast<std::size_t>(hidden);
  const std::size_t b1 = h * kFeatureCount, w2 = b1 + h, b2 = w2 + h;
  double out = static_cast<double>(p[b2]);
  for (std::size_t i = 0; i < h; ++i) {
    double a = static_cast<double>(p[b1 + i]);
    for (std::size_t j = 0; j < kFeatureCount; ++j) a += static_cast<double>(p[i * kFeatureCount + j]) * z[j];
    const double t = std::tanh(a);
    if (hidden_out) hidden_out[i] = t;
    out += static_cast<double>(p[w2 + i]) * t;
  }
  return out;
}

}  // namespace

ScorerModel ScorerModel::zeros(ModelKind kind, int hidden) {
  ScorerModel m;
  m.kind = kind;
  m.hidden = kind == ModelKind::Mlp ? hidden : 0;
  m.params.assign(parameter_count(kind, m.hidden), 0.0f);
  m.feature_mean.fill(0.0f);
  m.feature_std.fill(1.0f);
  return m;
}

void ScorerModel::validate() const {
  if (params.size() != parameter_count(kind, hidden)) throw InvalidArgument("model parameter count does not match kind");
  for (float v : params) {
    if (!std::isfinite(v)) throw InvalidArgument("model has non-finite parameters");
  }
  for (float s : feature_std) {
    if (!(s > 0.0f)) throw InvalidArgument("model feature std must be > 0");
  }
}

double ScorerModel::logit(const PatchFeatures& features) const {
  const auto z = standardized(features, feature_mean, feature_std);
  return forward_logit(kind, hidden, params, z.data());
}

double ScorerModel::score_features(const PatchFeatures& features) const { return sigmoid(logit(features)); }

QuantizedTensor quantize_tensor(std::span<const float> values) {
  QuantizedTensor t;
  t.values.resize(values.size());
  if (values.empty()) return t;
  // The representable range always contains 0 so that zero_point is in [0, 255].
  const double lo = std::min(0.0, static_cast<double>(*std::min_element(values.begin(), values.end())));
  const double hi = std::max(0.0, static_cast<double>(*std::max_element(values.begin(), values.end())));
  if (hi == lo) {
    t.scale = 1.0f;
    t.zero_point = 0;
    std::fill(t.values.begin(), t.values.end(), std::uint8_t{0});
    return t;
  }
  t.scale = static_cast<float>((hi - lo) / 255.0);
  const double scale = t.scale;
  t.zero_point = static_cast<std::int32_t>(std::clamp(std::lround(-lo / scale), 0L, 255L));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const long q = std::lround(static_cast<double>(values[i]) / scale) + t.zero_point;
    t.values[i] = static_cast<std::uint8_t>(std::clamp(q, 0L, 255L));
  }
  return t;
}

QuantizedModel quantize(const ScorerModel& model) {
  model.validate();
  QuantizedModel q;
  q.kind = model.kind;
  q.hidden = model.hidden;
  q.feature_mean = model.feature_mean;
  q.feature_std = model.feature_std;
  q.metadata = model.metadata;
  std::size_t offset = 0;
  for (auto size : tensor_sizes(model.kind, model.hidden)) {
    q.tensors.push_back(quantize_tensor(std::span(model.params).subspan(offset, size)));
    offset += size;
  }
  return q;
}

std::size_t QuantizedModel::weight_payload_bytes() const {
  std::size_t total = 0;
  for (const auto& t : tensors) total += t.values.size();
  return total;
}

std::vector<float> QuantizedModel::dequantized_params() const {
  std::vector<float> out;
  for (const auto& t : tensors) {
    for (std::size_t i = 0; i < t.values.size(); ++i) out.push_back(static_cast<float>(t.dequantize(i)));
  }
  return out;
}

namespace {

// Symmetric per-vector activation code: q = round(v / s), s = max|v| / 127.
double quantize_activations(std::span<const double> v, std::span<std::int32_t> q) {
  double peak = 0;
  for (double x : v) peak = std::max(peak, std::abs(x));
  const double s = peak > 0 ? peak / 127.0 : 1.0;
  for (std::size_t i = 0; i < v.size(); ++i) q[i] = static_cast<std::int32_t>(std::lround(v[i] / s));
  return s;
}

std::int64_t integer_dot(const QuantizedTensor& w, std::size_t offset, std::span<const std::int32_t> x) {
  std::int64_t acc = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    acc += static_cast<std::int64_t>(static_cast<std::int32_t>(w.values[offset + j]) - w.zero_point) * x[j];
  }
  return acc;
}

}  // namespace

double QuantizedModel::logit(const PatchFeatures& features) const {
  const auto z = standardized(features, feature_mean, feature_std);
  std::array<std::int32_t, kFeatureCount> qz{};
  const double sz = quantize_activations(z, qz);
  if (kind == ModelKind::Logistic) {
    const auto& w = tensors[0];
    return static_cast<double>(w.scale) * sz * static_cast<double>(integer_dot(w, 0, qz)) + tensors[1].dequantize(0);
  }
  const auto h = static_cast<std::size_t>(hidden);
  const auto& w1 = tensors[0];
  const auto& b1 = tensors[1];
  const auto& w2 = tensors[2];
  const auto& b2 = tensors[3];
  std::vector<double> act(h);
  for (std::size_t i = 0; i < h; ++i) {
    const double a = static_cast<double>(w1.scale) * sz * static_cast<double>(integer_dot(w1, i * kFeatureCount, qz)) +
                     b1.dequantize(i);
    act[i] = std::tanh(a);
  }
  std::vector<std::int32_t> qa(h);
  const double sa = quantize_activations(act, qa);
  return static_cast<double>(w2.scale) * sa * static_cast<double>(integer_dot(w2, 0, qa)) + b2.dequantize(0);
}

double QuantizedModel::score_features(const PatchFeatures& features) const { return sigmoid(logit(features)); }

Standardized standardize(const TrainingSet& data, std::span<const float> mean, std::span<const float> stdev) {
  Standardized s;
  s.rows = data.size();
  s.y = data.labels;
  s.x.resize(s.rows * kFeatureCount);
  for (std::size_t i = 0; i < s.rows; ++i) {
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      s.x[i * kFeatureCount + j] =
          (data.features[i][j] - static_cast<double>(mean[j])) / static_cast<double>(stdev[j]);
    }
  }
  return s;
}

Objective loss_and_gradient(ModelKind kind, int hidden, std::span<const double> params, const Standardized& data,
                            double l2) {
  Objective obj;
  obj.gradient.assign(params.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(data.rows);
  auto& g = obj.gradient;
  if (kind == ModelKind::Logistic) {
    for (std::size_t i = 0; i < data.rows; ++i) {
      const double* z = &data.x[i * kFeatureCount];
      const double logit = forward_logit(kind, 0, params, z);
      const double y = data.y[i];
      obj.loss += softplus(logit) - y * logit;
      const double d = (sigmoid(logit) - y) * inv_n;
      for (std::size_t j = 0; j < kFeatureCount; ++j) g[j] += d * z[j];
      g[kFeatureCount] += d;
    }
    obj.loss *= inv_n;
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      obj.loss += 0.5 * l2 * params[j] * params[j];
      g[j] += l2 * params[j];
    }
    return obj;
  }
  const auto h = static_cast<std::size_t>(hidden);
  const std::size_t b1 = h * kFeatureCount, w2 = b1 + h, b2 = w2 + h;
  std::vector<double> act(h);
  for (std::size_t i = 0; i < data.rows; ++i) {
    const double* z = &data.x[i * kFeatureCount];
    const double logit = forward_logit(kind, hidden, params, z, act.data());
    const double y = data.y[i];
    obj.loss += softplus(logit) - y * logit;
    const double d = (sigmoid(logit) - y) * inv_n;
    g[b2] += d;
    for (std::size_t u = 0; u < h; ++u) {
      g[w2 + u] += d * act[u];
      const double da = d * params[w2 + u] * (1.0 - act[u] * act[u]);
      g[b1 + u] += da;
      for (std::size_t j = 0; j < kFeatureCount; ++j) g[u * kFeatureCount + j] += da * z[j];
    }
  }
  obj.loss *= inv_n;
  auto penalise = [&](std::size_t from, std::size_t to) {
    for (std::size_t j = from; j < to; ++j) {
      obj.loss += 0.5 * l2 * params[j] * params[j];
      g[j] += l2 * params[j];
    }
  };
  penalise(0, b1);
  penalise(w2, b2);
  return obj;
}

ScorerModel train(const TrainingSet& data, ModelKind kind, const TrainParams& params, const std::string& manifest_hash) {
  if (data.features.size() != data.labels.size()) throw InvalidArgument("train: features and labels differ in length");
  std::size_t positives = 0;
  for (int label : data.labels) {
    if (label != 0 && label != 1) throw InvalidArgument("train: labels must be 0 or 1");
    positives += static_cast<std::size_t>(label);
  }
  const std::size_t negatives = data.labels.size() - positives;
  if (positives == 0 || negatives == 0) throw InvalidArgument("train: both classes must be present");
  if (positives < 10 || negatives < 10) throw InvalidArgument("train: need >= 10 samples per class");
  if (params.epochs < 1 || !(params.learning_rate > 0)) throw InvalidArgument("train: epochs and learning rate must be positive");

  ScorerModel model = ScorerModel::zeros(kind, kind == ModelKind::Mlp ? params.hidden : 0);
  const double n = static_cast<double>(data.size());
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    double s = 0;
    for (const auto& f : data.features) s += f[j];
    const double mean = s / n;
    double v = 0;
    for (const auto& f : data.features) v += (f[j] - mean) * (f[j] - mean);
    model.feature_mean[j] = static_cast<float>(mean);
    const auto sd = static_cast<float>(std::sqrt(v / n));
    if (!(sd > 1e-12f)) {
      model.feature_std[j] = 1.0f;
      model.metadata.flagged_features.push_back(static_cast<int>(j));
    } else {
      model.feature_std[j] = sd;
    }
  }
  const auto design = standardize(data, model.feature_mean, model.feature_std);

  std::vector<double> theta(model.params.size(), 0.0);
  if (kind == ModelKind::Mlp) {
    Rng rng(params.seed);
    const auto h = static_cast<std::size_t>(model.hidden);
    const std::size_t w2 = h * kFeatureCount + h;
    for (std::size_t i = 0; i < h * kFeatureCount; ++i) theta[i] = rng.normal() / std::sqrt(double(kFeatureCount));
    for (std::size_t i = 0; i < h; ++i) theta[w2 + i] = rng.normal() / std::sqrt(double(h));
  }
  std::vector<double> velocity(theta.size(), 0.0);
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    const auto obj = loss_and_gradient(kind, model.hidden, theta, design, params.l2);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      velocity[i] = params.momentum * velocity[i] - params.learning_rate * obj.gradient[i];
      theta[i] += velocity[i];
    }
  }
  for (std::size_t i = 0; i < theta.size(); ++i) model.params[i] = static_cast<float>(theta[i]);
  std::vector<double> rounded(model.params.begin(), model.params.end());
  model.metadata.final_loss = loss_and_gradient(kind, model.hidden, rounded, design, params.l2).loss;
  model.metadata.epochs = params.epochs;
  model.metadata.seed = params.seed;
  model.metadata.manifest_hash = manifest_hash;
  return model;
}

// ---------------------------------------------------------------------------
// Serialisation

namespace {

constexpr std::uint16_t kFormatVersion = 1;

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + n);
  }
  template <typename T>
  void le(T v) {
    static_assert(std::is_integral_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
  }
  void f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    le(bits);
  }
  std::vector<std::uint8_t> out;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}
  std::span<const std::uint8_t> take(std::size_t n) {
    if (pos_ + n > data_.size()) throw DataError("model file truncated");
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  template <typename T>
  T le() {
    const auto s = take(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(s[i]) << (8 * i);
    return static_cast<T>(v);
  }
  float f32() {
    const auto bits = le<std::uint32_t>();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

void write_header(Writer& w, ModelKind kind, bool quantized, int hidden, const std::array<float, kFeatureCount>& mean,
                  const std::array<float, kFeatureCount>& stdev) {
  w.bytes("SPBL", 4);
  w.le<std::uint16_t>(kFormatVersion);
  w.le<std::uint8_t>(static_cast<std::uint8_t>(kind));
  w.le<std::uint8_t>(quantized ? 1 : 0);
  w.le<std::uint32_t>(static_cast<std::uint32_t>(hidden));
  w.le<std::uint32_t>(static_cast<std::uint32_t>(kFeatureCount));
  for (float v : mean) w.f32(v);
  for (float v : stdev) w.f32(v);
}

void write_metadata(Writer& w, const ModelMetadata& meta) {
  nlohmann::ordered_json j;
  j["manifest_hash"] = meta.manifest_hash;
  j["seed"] = meta.seed;
  j["epochs"] = meta.epochs;
  j["final_loss"] = meta.final_loss;
  j["flagged_features"] = meta.flagged_features;
  const std::string text = j.dump();
  w.le<std::uint32_t>(static_cast<std::uint32_t>(text.size()));
  w.bytes(text.data(), text.size());
}

ModelMetadata read_metadata(Reader& r) {
  const auto len = r.le<std::uint32_t>();
  const auto raw = r.take(len);
  ModelMetadata meta;
  try {
    const auto j = nlohmann::json::parse(raw.begin(), raw.end());
    meta.manifest_hash = j.at("manifest_hash").get<std::string>();
    meta.seed = j.at("seed").get<std::uint64_t>();
    meta.epochs = j.at("epochs").get<int>();
    meta.final_loss = j.at("final_loss").get<double>();
    meta.flagged_features = j.at("flagged_features").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model metadata: ") + e.what());
  }
  return meta;
}

}  // namespace

std::vector<std::uint8_t> serialize(const ScorerModel& model) {
  model.validate();
  Writer w;
  write_header(w, model.kind, false, model.hidden, model.feature_mean, model.feature_std);
  const auto sizes = tensor_sizes(model.kind, model.hidden);
  w.le<std::uint32_t>(static_cast<std::uint32_t>(sizes.size()));
  std::size_t offset = 0;
  for (auto size : sizes) {
    w.le<std::uint32_t>(static_cast<std::uint32_t>(size));
    for (std::size_t i = 0; i < size; ++i) w.f32(model.params[offset + i]);
    offset += size;
  }
  write_metadata(w, model.metadata);
  return std::move(w.out);
}

std::vector<std::uint8_t> serialize(const QuantizedModel& model) {
  Writer w;
  write_header(w, model.kind, true, model.hidden, model.feature_mean, model.feature_std);
  w.le<std::uint32_t>(static_cast<std::uint32_t>(model.tensors.size()));
  for (const auto& t : model.tensors) {
    w.le<std::uint32_t>(static_cast<std::uint32_t>(t.values.size()));
    w.f32(t.scale);
    w.le<std::int32_t>(t.zero_point);
    w.bytes(t.values.data(), t.values.size());
  }
  write_metadata(w, model.metadata);
  return std::move(w.out);
}

AnyModel deserialize(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const auto magic = r.take(4);
  if (std::memcmp(magic.data(), "SPBL", 4) != 0) throw DataError("not a model file (bad magic)");
  const auto version = r.le<std::uint16_t>();
  if (version != kFormatVersion) throw DataError("unsupported model format version " + std::to_string(version));
  const auto kind_raw = r.le<std::uint8_t>();
  if (kind_raw > 1) throw DataError("unknown model kind in file");
  const auto kind = static_cast<ModelKind>(kind_raw);
  const bool quantized = r.le<std::uint8_t>() != 0;
  const auto hidden = static_cast<int>(r.le<std::uint32_t>());
  if (r.le<std::uint32_t>() != kFeatureCount) throw DataError("model feature count mismatch");
  std::array<float, kFeatureCount> mean{}, stdev{};
  for (auto& v : mean) v = r.f32();
  for (auto& v : stdev) v = r.f32();
  const auto expected = tensor_sizes(kind, hidden);
  const auto n_tensors = r.le<std::uint32_t>();
  if (n_tensors != expected.size()) throw DataError("model tensor count mismatch");

  if (!quantized) {
    ScorerModel m;
    m.kind = kind;
    m.hidden = hidden;
    m.feature_mean = mean;
    m.feature_std = stdev;
    for (auto size : expected) {
      if (r.le<std::uint32_t>() != size) throw DataError("model tensor size mismatch");
      for (std::size_t i = 0; i < size; ++i) m.params.push_back(r.f32());
    }
    m.metadata = read_metadata(r);
    if (!r.done()) throw DataError("trailing bytes in model file");
    m.validate();
    return m;
  }
  QuantizedModel q;
  q.kind = kind;
  q.hidden = hidden;
  q.feature_mean = mean;
  q.feature_std = stdev;
  for (auto size : expected) {
    if (r.le<std::uint32_t>() != size) throw DataError("model tensor size mismatch");
    QuantizedTensor t;
    t.scale = r.f32();
    t.zero_point = r.le<std::int32_t>();
    const auto raw = r.take(size);
    t.values.assign(raw.begin(), raw.end());
    q.tensors.push_back(std::move(t));
  }
  q.metadata = read_metadata(r);
  if (!r.done()) throw DataError("trailing bytes in model file");
  return q;
}

void save_model(const std::filesystem::path& path, const AnyModel& model) {
  const auto bytes = std::visit([](const auto& m) { return serialize(m); }, model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

AnyModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

const PatchScorer& as_scorer(const AnyModel& model) {
  return std::visit([](const auto& m) -> const PatchScorer& { return m; }, model);
}

double score_features(const AnyModel& model, const PatchFeatures& features) {
  return std::visit([&](const auto& m) { return m.score_features(features); }, model);
}

}  // namespace spoofbench::scorer
