#include "spoofbench/imaging.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "fft.hpp"

namespace spoofbench::imaging {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

int fft_friendly(int n) { return (n + 31) / 32 * 32; }

// Ridge direction in [0, pi) at every pixel: one core singularity plus a
// few low-frequency undulations.
std::vector<double> orientation_map(Rng& rng, int width, int height) {
  const double cx = width * rng.uniform(0.35, 0.65);
  const double cy = height * rng.uniform(0.30, 0.60);
  const double base = rng.uniform(-0.35, 0.35);
  struct Wave {
    double kx, ky, phase, amplitude;
  };
  std::array<Wave, 3> waves{};
  for (auto& w : waves) {
    const double dir = rng.uniform(0.0, 2.0 * kPi);
    const double wavelength = rng.uniform(1.0, 2.0) * std::max(width, height);
    w = {std::cos(dir) * 2.0 * kPi / wavelength, std::sin(dir) * 2.0 * kPi / wavelength, rng.uniform(0.0, 2.0 * kPi),
         rng.uniform(0.05, 0.15)};
  }
  std::vector<double> angles(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double a = base + 0.5 * std::atan2(y - cy, x - cx);
      for (const auto& w : waves) a += w.amplitude * std::sin(w.kx * x + w.ky * y + w.phase);
      a = std::fmod(a, kPi);
      if (a < 0) a += kPi;
      angles[static_cast<std::size_t>(y) * width + x] = a;
    }
  }
  return angles;
}

}  // namespace

MaterialEffect effect_for(const SynthMaterialSpec& spec) {
  static constexpr std::array<double, 3> kGain{0.55, 0.8, 1.1};
  static constexpr std::array<double, 3> kDisplacement{0.5, 2.0, 4.0};
  if (spec.noise_amplitude < 0.0 || !std::isfinite(spec.noise_amplitude)) {
    throw InvalidArgument("material '" + spec.name + "': noise_amplitude must be finite and >= 0");
  }
  return {kGain[static_cast<std::size_t>(spec.moisture)], kDisplacement[static_cast<std::size_t>(spec.elasticity)],
          spec.noise_amplitude};
}

GrayImage synth_fingerprint(std::uint64_t seed, int width, int height, double ridge_period) {
  if (width < 128 || height < 128) throw InvalidArgument("synth_fingerprint: width and height must be >= 128");
  if (!(ridge_period >= 4.0 && ridge_period <= 20.0)) {
    throw InvalidArgument("synth_fingerprint: ridge_period must be in [4, 20]");
  }
  constexpr int kBins = 8;
  constexpr int kIterations = 6;

  Rng rng(seed);
  const auto angles = orientation_map(rng, width, height);
  const auto n = static_cast<std::size_t>(width) * height;

  const int pad = static_cast<int>(std::ceil(2.0 * ridge_period));
  detail::RealFft2d fft(fft_friendly(height + 2 * pad), fft_friendly(width + 2 * pad));
  const int rows = fft.rows();
  const int cols = fft.cols();
  const int half = fft.half_cols();

  // Oriented band-pass transfer functions, one per orientation bin. The
  // pass band is centred on the ridge frequency along the ridge normal and
  // narrow along the ridge, which favours continuous ridges.
  const double f0 = 1.0 / ridge_period;
  const double s_normal = 0.25 * f0;
  const double s_along = 0.25 * f0;
  std::vector<std::vector<double>> filters(kBins, std::vector<double>(static_cast<std::size_t>(rows) * half));
  for (int b = 0; b < kBins; ++b) {
    const double t = b * kPi / kBins;
    const double ax = std::cos(t), ay = std::sin(t);
    for (int ky = 0; ky < rows; ++ky) {
      const double fy = static_cast<double>(ky <= rows / 2 ? ky : ky - rows) / rows;
      for (int kx = 0; kx < half; ++kx) {
        const double fx = static_cast<double>(kx) / cols;
        const double f_along = fx * ax + fy * ay;
        const double f_normal = std::abs(-fx * ay + fy * ax);
        const double e = (f_normal - f0) * (f_normal - f0) / (2 * s_normal * s_normal) +
                         f_along * f_along / (2 * s_along * s_along);
        filters[b][static_cast<std::size_t>(ky) * half + kx] = std::exp(-e);
      }
    }
  }

  // Per-pixel blend between the two neighbouring orientation bins.
  std::vector<int> bin_lo(n);
  std::vector<double> bin_w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = angles[i] / (kPi / kBins);
    const int lo = static_cast<int>(std::floor(t));
    bin_lo[i] = lo % kBins;
    bin_w[i] = t - lo;
  }

  std::vector<double> field(n);
  for (auto& v : field) v = rng.uniform(-1.0, 1.0);

  const std::size_t spectrum_size = static_cast<std::size_t>(rows) * half;
  std::vector<std::array<double, 2>> source(spectrum_size);
  std::vector<double> response(n);
  for (int iter = 0; iter < kIterations; ++iter) {
    std::fill(fft.real(), fft.real() + static_cast<std::size_t>(rows) * cols, 0.0);
    for (int y = 0; y < height; ++y) {
      std::copy_n(field.data() + static_cast<std::size_t>(y) * width, width,
                  fft.real() + static_cast<std::size_t>(y + pad) * cols + pad);
    }
    fft.forward();
    for (std::size_t k = 0; k < spectrum_size; ++k) source[k] = {fft.spectrum()[k][0], fft.spectrum()[k][1]};

    std::fill(response.begin(), response.end(), 0.0);
    for (int b = 0; b < kBins; ++b) {
      const auto& h = filters[b];
      for (std::size_t k = 0; k < spectrum_size; ++k) {
        fft.spectrum()[k][0] = source[k][0] * h[k];
        fft.spectrum()[k][1] = source[k][1] * h[k];
      }
      fft.inverse();
      const int prev = (b + kBins - 1) % kBins;
      for (int y = 0; y < height; ++y) {
        const double* row = fft.real() + static_cast<std::size_t>(y + pad) * cols + pad;
        for (int x = 0; x < width; ++x) {
          const std::size_t i = static_cast<std::size_t>(y) * width + x;
          if (bin_lo[i] == b) response[i] += (1.0 - bin_w[i]) * row[x];
          else if (bin_lo[i] == prev) response[i] += bin_w[i] * row[x];
        }
      }
    }

    double energy = 0.0;
    for (double v : response) energy += v * v;
    const double rms = std::sqrt(energy / static_cast<double>(n));
    const double scale = rms > 0 ? 1.0 / rms : 0.0;
    const bool last = iter + 1 == kIterations;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = response[i] * scale;
      field[i] = last ? std::tanh(1.5 * v) : std::clamp(v, -1.0, 1.0);
    }
  }

  // Ridges dark, valleys light.
  std::vector<std::uint8_t> pixels(n);
  for (std::size_t i = 0; i < n; ++i) pixels[i] = to_byte(127.5 - 100.0 * field[i]);
  return GrayImage(width, height, std::move(pixels));
}

std::pair<GrayImage, MinutiaSet> synth_planted_pattern(const PlantedPattern& pattern) {
  const int w = pattern.width, h = pattern.height;
  const double period = pattern.ridge_period;
  if (w < 64 || h < 64) throw InvalidArgument("planted pattern: width and height must be >= 64");
  if (!(period >= 4.0 && period <= 20.0)) throw InvalidArgument("planted pattern: ridge_period must be in [4, 20]");

  const double alpha = pattern.ridge_angle;
  const auto& plants = pattern.plants;
  std::vector<double> charge(plants.size());
  for (std::size_t k = 0; k < plants.size(); ++k) {
    const auto& p = plants[k];
    if (p.x < 16 || p.y < 16 || p.x > w - 1 - 16 || p.y > h - 1 - 16) {
      throw InvalidArgument("planted minutia must be >= 16 px from the borders");
    }
    const double c = std::cos(p.theta - alpha);
    if (std::abs(std::abs(c) - 1.0) > 1e-6) {
      throw InvalidArgument("planted minutia theta must be parallel to the ridge angle");
    }
    charge[k] = c > 0 ? 1.0 : -1.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (std::hypot(p.x - plants[j].x, p.y - plants[j].y) < 2.0 * period) {
        throw InvalidArgument("overlapping planted minutiae (closer than 2 ridge periods)");
      }
    }
  }

  const double sn = std::sin(alpha), cs = std::cos(alpha);
  auto raw_phase = [&](double x, double y) {
    double phi = (-x * sn + y * cs) / period;
    for (std::size_t k = 0; k < plants.size(); ++k) {
      phi += charge[k] * std::atan2(y - plants[k].y, x - plants[k].x) / (2.0 * kPi);
    }
    return phi;
  };

  // Local phase corrections: Gaussian bumps that put a ridge (ending) or a
  // valley (bifurcation) on the ray leaving each singularity along theta.
  const double sigma = 0.6 * period;
  auto bump = [&](std::size_t k, double x, double y) {
    const double dx = x - plants[k].x, dy = y - plants[k].y;
    return std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
  };
  std::vector<double> probe_x(plants.size()), probe_y(plants.size()), needed(plants.size());
  for (std::size_t k = 0; k < plants.size(); ++k) {
    probe_x[k] = plants[k].x + std::cos(plants[k].theta);
    probe_y[k] = plants[k].y + std::sin(plants[k].theta);
    const double target = plants[k].kind == MinutiaKind::Ending ? 0.5 : 0.0;
    double d = target - raw_phase(probe_x[k], probe_y[k]);
    d -= std::floor(d + 0.5);
    needed[k] = d;
  }
  std::vector<double> amplitude(plants.size(), 0.0);
  for (int sweep = 0; sweep < 100; ++sweep) {
    for (std::size_t k = 0; k < plants.size(); ++k) {
      double rest = needed[k];
      for (std::size_t j = 0; j < plants.size(); ++j) {
        if (j != k) rest -= amplitude[j] * bump(j, probe_x[k], probe_y[k]);
      }
      amplitude[k] = rest / bump(k, probe_x[k], probe_y[k]);
    }
  }

  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double phi = raw_phase(x, y);
      for (std::size_t k = 0; k < plants.size(); ++k) phi += amplitude[k] * bump(k, x, y);
      pixels[static_cast<std::size_t>(y) * w + x] = to_byte(127.5 + 100.0 * std::cos(2.0 * kPi * phi));
    }
  }

  MinutiaSet truth;
  truth.reserve(plants.size());
  for (const auto& p : plants) truth.push_back({p.x, p.y, normalize_angle(p.theta), p.kind, 1.0});
  return {GrayImage(w, h, std::move(pixels)), std::move(truth)};
}

GrayImage apply_material(const GrayImage& img, const SynthMaterialSpec& spec) {
  return apply_effect(img, effect_for(spec), spec.seed);
}

GrayImage apply_effect(const GrayImage& img, const MaterialEffect& effect, std::uint64_t seed) {
  if (img.empty()) throw InvalidArgument("apply_effect: empty image");
  const int w = img.width(), h = img.height();
  const auto n = static_cast<std::size_t>(w) * h;
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 127.5 + effect.contrast_gain * (img.pixels()[i] - 127.5);

  if (effect.displacement_peak > 0.0) {
    // Band-limited displacement: random vectors on a coarse lattice,
    // smoothstep-interpolated, rescaled so the largest vector has the
    // requested magnitude.
    constexpr int kSpacing = 32;
    Rng rng(derive_seed(seed, 1));
    const int gw = w / kSpacing + 2, gh = h / kSpacing + 2;
    std::vector<double> gx(static_cast<std::size_t>(gw) * gh), gy(gx.size());
    for (std::size_t i = 0; i < gx.size(); ++i) {
      gx[i] = rng.uniform(-1.0, 1.0);
      gy[i] = rng.uniform(-1.0, 1.0);
    }
    auto smooth = [](double t) { return t * t * (3.0 - 2.0 * t); };
    std::vector<double> dx(n), dy(n);
    double peak = 0.0;
    for (int y = 0; y < h; ++y) {
      const double fy = static_cast<double>(y) / kSpacing;
      const int y0 = static_cast<int>(fy);
      const double ty = smooth(fy - y0);
      for (int x = 0; x < w; ++x) {
        const double fx = static_cast<double>(x) / kSpacing;
        const int x0 = static_cast<int>(fx);
        const double tx = smooth(fx - x0);
        auto lerp2 = [&](const std::vector<double>& g) {
          const auto at = [&](int cx, int cy) { return g[static_cast<std::size_t>(cy) * gw + cx]; };
          const double top = at(x0, y0) * (1 - tx) + at(x0 + 1, y0) * tx;
          const double bottom = at(x0, y0 + 1) * (1 - tx) + at(x0 + 1, y0 + 1) * tx;
          return top * (1 - ty) + bottom * ty;
        };
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        dx[i] = lerp2(gx);
        dy[i] = lerp2(gy);
        peak = std::max(peak, std::hypot(dx[i], dy[i]));
      }
    }
    const double scale = peak > 0 ? effect.displacement_peak / peak : 0.0;
    std::vector<double> warped(n);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        const double sx = std::clamp(x + scale * dx[i], 0.0, w - 1.0);
        const double sy = std::clamp(y + scale * dy[i], 0.0, h - 1.0);
        const int x0 = std::min(static_cast<int>(sx), w - 2 < 0 ? 0 : w - 2);
        const int y0 = std::min(static_cast<int>(sy), h - 2 < 0 ? 0 : h - 2);
        const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
        const double tx = sx - x0, ty = sy - y0;
        const auto at = [&](int cx, int cy) { return v[static_cast<std::size_t>(cy) * w + cx]; };
        warped[i] = (at(x0, y0) * (1 - tx) + at(x1, y0) * tx) * (1 - ty) + (at(x0, y1) * (1 - tx) + at(x1, y1) * tx) * ty;
      }
    }
    v = std::move(warped);
  }

  if (effect.noise_amplitude > 0.0) {
    Rng rng(derive_seed(seed, 2));
    for (auto& value : v) value += rng.uniform(-effect.noise_amplitude, effect.noise_amplitude);
  }

  std::vector<std::uint8_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = to_byte(v[i]);
  return GrayImage(w, h, std::move(out));
}

double rms_contrast(const GrayImage& img) {
  const double m = img.mean();
  double acc = 0.0;
  for (auto p : img.pixels()) acc += (p - m) * (p - m);
  return img.empty() ? 0.0 : std::sqrt(acc / static_cast<double>(img.size()));
}

}  // namespace spoofbench::imaging
