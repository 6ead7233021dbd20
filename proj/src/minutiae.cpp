#include "spoofbench/minutiae.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

#include "spoofbench/common.hpp"

namespace spoofbench::minutiae {

namespace {

constexpr double kPi = std::numbers::pi;

// Neighbour offsets in cyclic order starting East, counter-clockwise on
// screen (y grows downward, so "north" is dy = -1).
constexpr std::array<int, 8> kDx{1, 1, 0, -1, -1, -1, 0, 1};
constexpr std::array<int, 8> kDy{0, -1, -1, -1, 0, 1, 1, 1};

bool on(const GrayImage& img, int x, int y) {
  return x >= 0 && y >= 0 && x < img.width() && y < img.height() && img.at(x, y) != 0;
}

std::array<int, 8> ring(const GrayImage& img, int x, int y) {
  std::array<int, 8> r{};
  for (int k = 0; k < 8; ++k) r[k] = on(img, x + kDx[k], y + kDy[k]) ? 1 : 0;
  return r;
}

int clamp_index(double v, int block, int count) {
  const int i = static_cast<int>(std::floor(v / block));
  return std::clamp(i, 0, count - 1);
}

}  // namespace

double OrientationField::angle_at(double x, double y) const {
  return angle(clamp_index(x, block_size, cols), clamp_index(y, block_size, rows));
}

double OrientationField::coherence_at(double x, double y) const {
  return coherence_of(clamp_index(x, block_size, cols), clamp_index(y, block_size, rows));
}

OrientationField estimate_orientation(const GrayImage& img, int block_size) {
  if (block_size < 8 || block_size > 32) throw InvalidArgument("estimate_orientation: block_size must be in [8, 32]");
  if (img.empty()) throw InvalidArgument("estimate_orientation: empty image");
  const int w = img.width(), h = img.height();
  const auto px = [&](int x, int y) {
    return static_cast<double>(img.at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1)));
  };
  std::vector<double> gxx(static_cast<std::size_t>(w) * h), gyy(gxx.size()), gxy(gxx.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2 * px(x - 1, y) + px(x - 1, y + 1));
      const double gy = (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1));
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      gxx[i] = gx * gx;
      gyy[i] = gy * gy;
      gxy[i] = gx * gy;
    }
  }

  OrientationField field;
  field.block_size = block_size;
  field.cols = (w + block_size - 1) / block_size;
  field.rows = (h + block_size - 1) / block_size;
  field.angles.assign(static_cast<std::size_t>(field.cols) * field.rows, 0.0);
  field.coherence.assign(field.angles.size(), 0.0);

  // Each block averages over itself plus half a block of context on every side.
  const int reach = block_size / 2;
  for (int r = 0; r < field.rows; ++r) {
    for (int c = 0; c < field.cols; ++c) {
      const int x0 = std::max(0, c * block_size - reach), x1 = std::min(w, (c + 1) * block_size + reach);
      const int y0 = std::max(0, r * block_size - reach), y1 = std::min(h, (r + 1) * block_size + reach);
      double sxx = 0, syy = 0, sxy = 0;
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
          const std::size_t i = static_cast<std::size_t>(y) * w + x;
          sxx += gxx[i];
          syy += gyy[i];
          sxy += gxy[i];
        }
      }
      const double energy = sxx + syy;
      const std::size_t b = static_cast<std::size_t>(r) * field.cols + c;
      if (energy <= 1e-9) continue;
      const double gradient_dir = 0.5 * std::atan2(2 * sxy, sxx - syy);
      double ridge = gradient_dir + kPi / 2;
      ridge = std::fmod(ridge, kPi);
      if (ridge < 0) ridge += kPi;
      if (ridge >= kPi) ridge -= kPi;
      field.angles[b] = ridge;
      field.coherence[b] = std::clamp(std::sqrt((sxx - syy) * (sxx - syy) + 4 * sxy * sxy) / energy, 0.0, 1.0);
    }
  }
  return field;
}

GrayImage thin(const GrayImage& binary) {
  GrayImage img = binary;
  for (auto& p : img.pixels()) p = p ? 255 : 0;
  const int w = img.width(), h = img.height();
  std::vector<std::pair<int, int>> doomed;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      doomed.clear();
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          if (!img.at(x, y)) continue;
          // Zhang-Suen labels: P2=N, P3=NE, P4=E, P5=SE, P6=S, P7=SW, P8=W, P9=NW.
          const int p2 = on(img, x, y - 1), p3 = on(img, x + 1, y - 1), p4 = on(img, x + 1, y),
                    p5 = on(img, x + 1, y + 1), p6 = on(img, x, y + 1), p7 = on(img, x - 1, y + 1),
                    p8 = on(img, x - 1, y), p9 = on(img, x - 1, y - 1);
          const int b = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9;
          if (b < 2 || b > 6) continue;
          const std::array<int, 9> seq{p2, p3, p4, p5, p6, p7, p8, p9, p2};
          int a = 0;
          for (int k = 0; k < 8; ++k) a += (seq[k] == 0 && seq[k + 1] == 1);
          if (a != 1) continue;
          if (pass == 0) {
            if (p2 * p4 * p6 != 0 || p4 * p6 * p8 != 0) continue;
          } else {
            if (p2 * p4 * p8 != 0 || p2 * p6 * p8 != 0) continue;
          }
          doomed.emplace_back(x, y);
        }
      }
      for (auto [x, y] : doomed) img.at(x, y) = 0;
      if (!doomed.empty()) changed = true;
    }
  }
  return img;
}

GrayImage binarize(const GrayImage& img, const OrientationField& field, const BinarizeParams& params) {
  if (img.empty()) throw InvalidArgument("binarize: empty image");
  const int w = img.width(), h = img.height();
  const auto n = static_cast<std::size_t>(w) * h;

  std::vector<double> smooth(n);
  const int half = std::max(0, params.smoothing_length / 2);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (half == 0) {
        smooth[static_cast<std::size_t>(y) * w + x] = img.at(x, y);
        continue;
      }
      const double a = field.angle_at(x, y);
      const double ux = std::cos(a), uy = std::sin(a);
      double acc = 0;
      for (int t = -half; t <= half; ++t) {
        const double sx = std::clamp(x + t * ux, 0.0, w - 1.0), sy = std::clamp(y + t * uy, 0.0, h - 1.0);
        const int x0 = static_cast<int>(sx), y0 = static_cast<int>(sy);
        const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
        const double fx = sx - x0, fy = sy - y0;
        acc += (img.at(x0, y0) * (1 - fx) + img.at(x1, y0) * fx) * (1 - fy) +
               (img.at(x0, y1) * (1 - fx) + img.at(x1, y1) * fx) * fy;
      }
      smooth[static_cast<std::size_t>(y) * w + x] = acc / (2 * half + 1);
    }
  }

  // Integral image for the local mean.
  std::vector<double> integral(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
  for (int y = 0; y < h; ++y) {
    double row = 0;
    for (int x = 0; x < w; ++x) {
      row += smooth[static_cast<std::size_t>(y) * w + x];
      integral[static_cast<std::size_t>(y + 1) * (w + 1) + x + 1] = integral[static_cast<std::size_t>(y) * (w + 1) + x + 1] + row;
    }
  }
  const int r = std::max(1, params.mean_window / 2);
  GrayImage binary(w, h, 0);
  for (int y = 0; y < h; ++y) {
    const int y0 = std::max(0, y - r), y1 = std::min(h, y + r + 1);
    for (int x = 0; x < w; ++x) {
      if (field.coherence_at(x, y) <= 0.0) continue;
      const int x0 = std::max(0, x - r), x1 = std::min(w, x + r + 1);
      const auto at = [&](int ix, int iy) { return integral[static_cast<std::size_t>(iy) * (w + 1) + ix]; };
      const double sum = at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0);
      const double mean = sum / ((x1 - x0) * (y1 - y0));
      if (smooth[static_cast<std::size_t>(y) * w + x] < mean - 1e-9) binary.at(x, y) = 255;
    }
  }
  return binary;
}

GrayImage binarize_and_thin(const GrayImage& img, const OrientationField& field, const BinarizeParams& params) {
  return thin(binarize(img, field, params));
}

int crossing_number(const GrayImage& skeleton, int x, int y) {
  const auto r = ring(skeleton, x, y);
  int transitions = 0;
  for (int k = 0; k < 8; ++k) transitions += std::abs(r[k] - r[(k + 1) % 8]);
  return transitions / 2;
}

namespace {

// Walks up to `steps` pixels along the skeleton from `start` (already
// marked visited) and returns the displacement from the minutia.
std::pair<double, double> trace_branch(const GrayImage& skel, int mx, int my, int sx, int sy,
                                       std::vector<std::pair<int, int>>& visited, int steps) {
  int cx = sx, cy = sy;
  auto seen = [&](int x, int y) {
    return std::find(visited.begin(), visited.end(), std::make_pair(x, y)) != visited.end();
  };
  for (int s = 0; s < steps; ++s) {
    int nx = 0, ny = 0;
    bool found = false;
    // 4-neighbours first so diagonal shortcuts do not skip pixels.
    for (int pass = 0; pass < 2 && !found; ++pass) {
      for (int k = pass; k < 8; k += 2) {
        const int x = cx + kDx[k], y = cy + kDy[k];
        if (on(skel, x, y) && !seen(x, y)) {
          nx = x;
          ny = y;
          found = true;
          break;
        }
      }
    }
    if (!found) break;
    visited.emplace_back(nx, ny);
    cx = nx;
    cy = ny;
  }
  return {static_cast<double>(cx - mx), static_cast<double>(cy - my)};
}

// Tip of the ridge containing (x, y) in direction `dir`: the mean of the
// mask pixels within 1 px of the furthest extent along `dir`, searching
// the mask component of (x, y) no further than kEndingReach px away.
std::pair<double, double> ridge_tip(const GrayImage& mask, int x, int y, double dir) {
  const double dx = std::cos(dir), dy = std::sin(dir);
  const double reach2 = static_cast<double>(kEndingReach) * kEndingReach;
  std::vector<std::pair<int, int>> queue{{x, y}};
  double furthest = 0.0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto [cx, cy] = queue[head];
    furthest = std::max(furthest, (cx - x) * dx + (cy - y) * dy);
    for (int k = 0; k < 8; ++k) {
      const int nx = cx + kDx[k], ny = cy + kDy[k];
      if (!on(mask, nx, ny)) continue;
      if (static_cast<double>((nx - x) * (nx - x) + (ny - y) * (ny - y)) > reach2) continue;
      if (std::find(queue.begin(), queue.end(), std::make_pair(nx, ny)) != queue.end()) continue;
      queue.emplace_back(nx, ny);
    }
  }
  double sx = 0.0, sy = 0.0, count = 0.0;
  for (auto [cx, cy] : queue) {
    if ((cx - x) * dx + (cy - y) * dy < furthest - 1.0) continue;
    sx += cx;
    sy += cy;
    count += 1.0;
  }
  return {sx / count, sy / count};
}

}  // namespace

MinutiaSet extract_minutiae(const GrayImage& skeleton, const OrientationField& field, int border_margin,
                            const GrayImage* ridge_mask) {
  constexpr int kTraceSteps = 10;
  const int w = skeleton.width(), h = skeleton.height();
  if (ridge_mask && (ridge_mask->width() != w || ridge_mask->height() != h)) {
    throw InvalidArgument("extract_minutiae: ridge mask size differs from the skeleton");
  }
  struct Candidate {
    Minutia m;
    std::size_t raster;
  };
  std::vector<Candidate> candidates;
  for (int y = border_margin; y < h - border_margin; ++y) {
    for (int x = border_margin; x < w - border_margin; ++x) {
      if (!on(skeleton, x, y)) continue;
      const int cn = crossing_number(skeleton, x, y);
      if (cn != 1 && cn != 3) continue;

      // One branch start per run of set neighbours, preferring a 4-neighbour.
      const auto r = ring(skeleton, x, y);
      std::vector<std::pair<int, int>> starts;
      for (int k = 0; k < 8; ++k) {
        if (!r[k] || r[(k + 7) % 8]) continue;
        int best = k;
        for (int j = k; j < k + 8 && r[j % 8]; ++j) {
          if (j % 2 == 0) {
            best = j % 8;
            break;
          }
        }
        starts.emplace_back(x + kDx[best], y + kDy[best]);
      }

      std::vector<std::pair<int, int>> visited{{x, y}};
      for (auto s : starts) visited.push_back(s);
      double vx = 0, vy = 0;
      for (auto [sx, sy] : starts) {
        auto [dx, dy] = trace_branch(skeleton, x, y, sx, sy, visited, kTraceSteps);
        const double len = std::hypot(dx, dy);
        if (len > 0) {
          vx += dx / len;
          vy += dy / len;
        }
      }
      const double a = field.angle_at(x, y);
      const double dot = vx * std::cos(a) + vy * std::sin(a);
      const double theta = dot < 0 ? a + kPi : a;

      Minutia m;
      m.x = x;
      m.y = y;
      if (ridge_mask && cn == 1) {
        const auto tip = ridge_tip(*ridge_mask, x, y, theta + kPi);
        m.x = tip.first;
        m.y = tip.second;
        if (m.x < border_margin || m.y < border_margin || m.x >= w - border_margin || m.y >= h - border_margin) continue;
      }
      m.theta = normalize_angle(theta);
      m.kind = cn == 1 ? MinutiaKind::Ending : MinutiaKind::Bifurcation;
      m.quality = field.coherence_at(x, y);
      candidates.push_back({m, static_cast<std::size_t>(y) * w + x});
    }
  }

  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return candidates[a].m.quality > candidates[b].m.quality; });
  std::vector<std::size_t> kept;
  for (auto i : order) {
    const auto& m = candidates[i].m;
    const bool clash = std::any_of(kept.begin(), kept.end(), [&](std::size_t j) {
      return std::hypot(m.x - candidates[j].m.x, m.y - candidates[j].m.y) < kMergeRadius;
    });
    if (!clash) kept.push_back(i);
  }
  std::sort(kept.begin(), kept.end(), [&](std::size_t a, std::size_t b) { return candidates[a].raster < candidates[b].raster; });
  MinutiaSet out;
  out.reserve(kept.size());
  for (auto i : kept) out.push_back(candidates[i].m);
  return out;
}

Extraction detect(const GrayImage& img, const ExtractorParams& params) {
  Extraction e;
  e.field = estimate_orientation(img, params.block_size);
  const auto ridges = binarize(img, e.field, params.binarize);
  e.skeleton = thin(ridges);
  e.minutiae = extract_minutiae(e.skeleton, e.field, params.border_margin, &ridges);
  return e;
}

}  // namespace spoofbench::minutiae
