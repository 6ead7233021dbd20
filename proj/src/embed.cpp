#include "spoofbench/embed.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "spoofbench/common.hpp"
#include "spoofbench/csv.hpp"

namespace spoofbench::embed {

namespace {

constexpr int kDims = 3;

void check_matrix(const Matrix& x) {
  if (x.rows < 4) throw InvalidArgument("t-SNE needs at least 4 points");
  if (x.cols < 1) throw InvalidArgument("t-SNE needs at least 1 feature");
  if (x.data.size() != x.rows * x.cols) throw InvalidArgument("feature matrix size mismatch");
  for (double v : x.data) {
    if (!std::isfinite(v)) throw InvalidArgument("feature matrix has non-finite values");
  }
}

std::size_t points_of(std::span<const double> p, std::span<const double> y) {
  const std::size_t n = y.size() / kDims;
  if (y.size() != n * kDims || p.size() != n * n) throw InvalidArgument("affinity / layout size mismatch");
  return n;
}

}  // namespace

double effective_perplexity(double perplexity, std::size_t n) {
  if (!(perplexity > 1.0)) throw InvalidArgument("perplexity must be > 1");
  return std::min(perplexity, (static_cast<double>(n) - 1.0) / 3.0);
}

std::vector<double> conditional_affinities(const Matrix& x, double perplexity) {
  check_matrix(x);
  const std::size_t n = x.rows;
  const double target = std::log2(perplexity);
  std::vector<double> p(n * n, 0.0);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d_min = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < x.cols; ++k) {
        const double diff = x.row(i)[k] - x.row(j)[k];
        s += diff * diff;
      }
      d[j] = s;
      if (j != i) d_min = std::min(d_min, s);
    }
    // Distances are shifted by the nearest neighbour so exp() never
    // underflows to an all-zero row; duplicates end up sharing the mass.
    double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double* row = &p[i * n];
    for (int step = 0; step < 50; ++step) {
      double sum = 0.0, weighted = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double e = std::exp(-beta * (d[j] - d_min));
        row[j] = e;
        sum += e;
        weighted += e * (d[j] - d_min);
      }
      const double entropy = (std::log(sum) + beta * weighted / sum) / std::log(2.0);
      for (std::size_t j = 0; j < n; ++j) row[j] = j == i ? 0.0 : row[j] / sum;
      const double gap = entropy - target;
      if (std::abs(gap) < 1e-5) break;
      if (gap > 0) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : (beta + hi) / 2.0;
      } else {
        hi = beta;
        beta = (beta + lo) / 2.0;
      }
    }
  }
  return p;
}

std::vector<double> pairwise_affinities(const Matrix& x, double perplexity) {
  check_matrix(x);
  const std::size_t n = x.rows;
  const auto cond = conditional_affinities(x, effective_perplexity(perplexity, n));
  std::vector<double> p(n * n, 0.0);
  const double denom = 2.0 * static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = (cond[i * n + j] + cond[j * n + i]) / denom;
      p[i * n + j] = p[j * n + i] = v;
    }
  }
  return p;
}

namespace {

// Unnormalised Student-t kernel, returns its off-diagonal sum.
double student_kernel(std::span<const double> y, std::size_t n, std::vector<double>& w) {
  w.assign(n * n, 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < kDims; ++k) {
        const double diff = y[i * kDims + k] - y[j * kDims + k];
        s += diff * diff;
      }
      const double v = 1.0 / (1.0 + s);
      w[i * n + j] = w[j * n + i] = v;
      z += 2.0 * v;
    }
  }
  return z;
}

double kl_from_kernel(std::span<const double> p, const std::vector<double>& w, double z, std::size_t n) {
  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double pij = p[i * n + j];
      if (i == j || pij <= 0.0) continue;
      kl += pij * std::log(pij / std::max(w[i * n + j] / z, std::numeric_limits<double>::min()));
    }
  }
  return kl;
}

void gradient_from_kernel(std::span<const double> p, double scale, const std::vector<double>& w, double z,
                          std::size_t n, std::vector<double>& grad, std::span<const double> y) {
  grad.assign(n * kDims, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double wij = w[i * n + j];
      const double m = 4.0 * (scale * p[i * n + j] - wij / z) * wij;
      for (int k = 0; k < kDims; ++k) grad[i * kDims + k] += m * (y[i * kDims + k] - y[j * kDims + k]);
    }
  }
}

}  // namespace

double kl_divergence(std::span<const double> p, std::span<const double> y) {
  const std::size_t n = points_of(p, y);
  std::vector<double> w;
  const double z = student_kernel(y, n, w);
  return kl_from_kernel(p, w, z, n);
}

std::vector<double> kl_gradient(std::span<const double> p, std::span<const double> y) {
  const std::size_t n = points_of(p, y);
  std::vector<double> w, grad;
  const double z = student_kernel(y, n, w);
  gradient_from_kernel(p, 1.0, w, z, n, grad, y);
  return grad;
}

Embedding tsne(const Matrix& x, const EmbeddingConfig& config) {
  check_matrix(x);
  if (config.iterations < 1) throw InvalidArgument("iterations must be >= 1");
  if (!(config.learning_rate > 0)) throw InvalidArgument("learning rate must be > 0");
  const std::size_t n = x.rows;
  Embedding out;
  out.perplexity = effective_perplexity(config.perplexity, n);
  const auto p = pairwise_affinities(x, config.perplexity);

  Rng rng(config.seed);
  std::vector<double> y(n * kDims);
  for (auto& v : y) v = 1e-4 * rng.normal();
  std::vector<double> update(y.size(), 0.0), gains(y.size(), 1.0), w, grad;

  for (int it = 0; it < config.iterations; ++it) {
    const double z = student_kernel(y, n, w);
    out.kl_trace.push_back(kl_from_kernel(p, w, z, n));
    const double scale = it < config.exaggeration_iterations ? config.exaggeration : 1.0;
    gradient_from_kernel(p, scale, w, z, n, grad, y);
    const double momentum = it < config.momentum_switch ? config.initial_momentum : config.final_momentum;
    for (std::size_t k = 0; k < y.size(); ++k) {
      const bool same_sign = (grad[k] > 0) == (update[k] > 0);
      gains[k] = std::max(0.01, same_sign ? gains[k] * 0.8 : gains[k] + 0.2);
      update[k] = momentum * update[k] - config.learning_rate * gains[k] * grad[k];
      y[k] += update[k];
    }
    for (int d = 0; d < kDims; ++d) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += y[i * kDims + d];
      mean /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) y[i * kDims + d] -= mean;
    }
  }
  out.coords = std::move(y);
  return out;
}

std::vector<EmbeddedPoint> label_points(const Embedding& embedding, std::span<const std::string> labels) {
  if (embedding.coords.size() != labels.size() * kDims) throw InvalidArgument("one label per embedded point required");
  std::vector<EmbeddedPoint> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    EmbeddedPoint pt;
    pt.label = labels[i];
    for (int k = 0; k < kDims; ++k) pt.coords[static_cast<std::size_t>(k)] = static_cast<float>(embedding.coords[i * kDims + k]);
    out.push_back(std::move(pt));
  }
  return out;
}

namespace {

std::string float9(float v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
  return buf;
}

}  // namespace

std::string to_csv(std::span<const EmbeddedPoint> points) {
  std::string out = "label,x,y,z\n";
  for (const auto& p : points) {
    if (p.label.find_first_of(",\n\r") != std::string::npos) throw InvalidArgument("label contains a comma or newline");
    out += p.label;
    for (float c : p.coords) out += "," + float9(c);
    out += "\n";
  }
  return out;
}

std::vector<EmbeddedPoint> parse_csv(std::istream& in, std::string_view source_name) {
  const auto table = csv::read(in, source_name);
  const auto cl = table.column("label");
  const std::array<std::size_t, 3> cc{table.column("x"), table.column("y"), table.column("z")};
  std::vector<EmbeddedPoint> out;
  for (const auto& row : table.rows) {
    EmbeddedPoint p;
    p.label = row.at(cl);
    for (std::size_t k = 0; k < 3; ++k) p.coords[k] = static_cast<float>(csv::to_double(row.at(cc[k]), "coordinate"));
    out.push_back(std::move(p));
  }
  return out;
}

void write_csv(const std::filesystem::path& path, std::span<const EmbeddedPoint> points) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_csv(points);
}

std::vector<EmbeddedPoint> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_csv(in, path.string());
}

std::string to_json(std::span<const EmbeddedPoint> points) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& p : points) {
    nlohmann::ordered_json j;
    j["label"] = p.label;
    j["coords"] = {p.coords[0], p.coords[1], p.coords[2]};
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

std::string kl_trace_csv(std::span<const double> trace) {
  std::string out = "iteration,kl\n";
  for (std::size_t i = 0; i < trace.size(); ++i) out += std::to_string(i) + "," + csv::general(trace[i], 12) + "\n";
  return out;
}

}  // namespace spoofbench::embed
