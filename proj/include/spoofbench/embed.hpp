#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace spoofbench::embed {

struct EmbeddingConfig {
  double perplexity = 30.0;
  int iterations = 1000;
  double learning_rate = 100.0;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  int momentum_switch = 250;
  double exaggeration = 12.0;
  int exaggeration_iterations = 100;
  std::uint64_t seed = 0;
};

/// Row-major n x d feature matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  const double* row(std::size_t i) const { return data.data() + i * cols; }
};

/// perplexity clamped to (n - 1) / 3.
double effective_perplexity(double perplexity, std::size_t n);

/// p_{j|i}, row-major n x n. Each row's Gaussian bandwidth is found by
/// bisection so that the row entropy is log2(perplexity) within 1e-5
/// (at most 50 steps).
std::vector<double> conditional_affinities(const Matrix& x, double perplexity);

/// (p_{j|i} + p_{i|j}) / 2n with a zero diagonal; uses the clamped perplexity.
std::vector<double> pairwise_affinities(const Matrix& x, double perplexity);

/// KL(P || Q) for a 3-D layout y (n x 3) with Student-t Q.
double kl_divergence(std::span<const double> p, std::span<const double> y);
/// dKL/dy, n x 3.
std::vector<double> kl_gradient(std::span<const double> p, std::span<const double> y);

struct Embedding {
  std::vector<double> coords;  // n x 3
  std::vector<double> kl_trace;  // KL against the unexaggerated P, per iteration
  double perplexity = 0.0;     // after clamping
};

/// Exact t-SNE to three dimensions: gains, momentum schedule, early
/// exaggeration, N(0, 1e-4) initialisation. Single-threaded and
/// deterministic for a fixed seed.
Embedding tsne(const Matrix& x, const EmbeddingConfig& config);

struct EmbeddedPoint {
  std::string label;
  std::array<float, 3> coords{};

  bool operator==(const EmbeddedPoint&) const = default;
};

std::vector<EmbeddedPoint> label_points(const Embedding& embedding, std::span<const std::string> labels);

/// CSV `label,x,y,z`, coordinates as float32 with 9 significant digits.
std::string to_csv(std::span<const EmbeddedPoint> points);
std::vector<EmbeddedPoint> parse_csv(std::istream& in, std::string_view source_name);
void write_csv(const std::filesystem::path& path, std::span<const EmbeddedPoint> points);
std::vector<EmbeddedPoint> read_csv(const std::filesystem::path& path);
std::string to_json(std::span<const EmbeddedPoint> points);
/// iteration,kl
std::string kl_trace_csv(std::span<const double> trace);

}  // namespace spoofbench::embed
