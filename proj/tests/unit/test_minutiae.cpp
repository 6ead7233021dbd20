#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "spoofbench/imaging.hpp"
#include "spoofbench/minutia.hpp"
#include "spoofbench/minutiae.hpp"

using namespace spoofbench;

namespace {

constexpr double kPi = std::numbers::pi;

GrayImage stripes(int size, double angle, double period) {
  GrayImage img(size, size);
  const double sn = std::sin(angle), cs = std::cos(angle);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double phase = (-x * sn + y * cs) / period;
      img.at(x, y) = static_cast<std::uint8_t>(std::lround(127.5 + 100 * std::cos(2 * kPi * phase)));
    }
  }
  return img;
}

// Difference of two pi-periodic angles, in [0, pi/2].
double axial_diff(double a, double b) {
  double d = std::fmod(std::abs(a - b), kPi);
  return std::min(d, kPi - d);
}

double circular_diff(double a, double b) {
  double d = std::fmod(std::abs(a - b), 2 * kPi);
  return std::min(d, 2 * kPi - d);
}

int neighbours(const GrayImage& sk, int x, int y) {
  int n = 0;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      if (dx == 0 && dy == 0) continue;
      const int xx = x + dx, yy = y + dy;
      if (xx >= 0 && yy >= 0 && xx < sk.width() && yy < sk.height() && sk.at(xx, yy)) ++n;
    }
  return n;
}

struct MatchResult {
  int matched = 0;
  int spurious = 0;
};

// Greedy nearest-neighbour assignment of detections to ground truth.
MatchResult match(const MinutiaSet& truth, const MinutiaSet& found, double max_dist, double max_angle) {
  std::vector<bool> used(found.size(), false);
  MatchResult r;
  for (const auto& t : truth) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < found.size(); ++j) {
      if (used[j]) continue;
      const double d = std::hypot(t.x - found[j].x, t.y - found[j].y);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(j);
      }
    }
    if (best >= 0 && best_d <= max_dist && circular_diff(t.theta, found[best].theta) <= max_angle &&
        t.kind == found[best].kind) {
      used[best] = true;
      ++r.matched;
    }
  }
  for (bool u : used) r.spurious += !u;
  return r;
}

imaging::PlantedPattern five_plants(double angle) {
  imaging::PlantedPattern p;
  p.ridge_period = 10;
  p.ridge_angle = angle;
  const double c = std::cos(angle), s = std::sin(angle);
  auto at = [&](double u, double v, bool back, MinutiaKind kind) {
    // (u, v) offsets from the centre in the ridge frame.
    return imaging::PlantedMinutia{128 + u * c - v * s, 128 + u * s + v * c, angle + (back ? kPi : 0.0), kind};
  };
  p.plants = {at(-68, -68, false, MinutiaKind::Ending), at(52, -58, true, MinutiaKind::Ending),
              at(-8, 0, false, MinutiaKind::Bifurcation), at(-58, 62, true, MinutiaKind::Bifurcation),
              at(62, 57, false, MinutiaKind::Ending)};
  return p;
}

}  // namespace

TEST_CASE("normalize_angle and kinds") {
  CHECK(normalize_angle(-kPi / 2) == doctest::Approx(3 * kPi / 2));
  CHECK(normalize_angle(2 * kPi) == doctest::Approx(0.0));
  CHECK(normalize_angle(5 * kPi) == doctest::Approx(kPi));
  for (double a : {-100.0, -1e-18, 0.0, 6.2831853, 1e6}) {
    const double n = normalize_angle(a);
    CHECK((n >= 0.0 && n < 2 * kPi));
  }
  CHECK(parse_minutia_kind(to_string(MinutiaKind::Bifurcation)) == MinutiaKind::Bifurcation);
  CHECK_THROWS(parse_minutia_kind("loop"));
}

TEST_CASE("minutiae csv round trip") {
  MinutiaSet set{{10.25, 20.5, 1.0, MinutiaKind::Ending, 0.75}, {3, 4, 6.0, MinutiaKind::Bifurcation, 1}};
  std::stringstream ss;
  write_minutiae_csv(ss, set);
  CHECK(ss.str().rfind("x,y,theta,kind,quality\n", 0) == 0);
  CHECK(ss.str().find("10.250000,20.500000,1.000000") != std::string::npos);
  const auto back = read_minutiae_csv(ss);
  CHECK(back == set);
}

TEST_CASE("orientation of vertical stripes") {
  // Vertical stripes: intensity varies along x, ridges run along y.
  const auto img = stripes(128, kPi / 2, 9);
  const auto f = minutiae::estimate_orientation(img, 16);
  CHECK(f.cols == 8);
  CHECK(f.rows == 8);
  for (double a : f.angles) CHECK(axial_diff(a, kPi / 2) <= 0.05);
  for (double a : f.angles) CHECK((a >= 0 && a < kPi));
}

TEST_CASE("orientation of 30 degree stripes") {
  const auto img = stripes(160, kPi / 6, 10);
  const auto f = minutiae::estimate_orientation(img, 16);
  for (int r = 1; r + 1 < f.rows; ++r)
    for (int c = 1; c + 1 < f.cols; ++c) CHECK(axial_diff(f.angle(c, r), kPi / 6) <= 0.05);
}

TEST_CASE("orientation of a constant image") {
  const auto f = minutiae::estimate_orientation(GrayImage(100, 70, 128), 16);
  CHECK(f.cols == 7);  // ceil(100 / 16)
  CHECK(f.rows == 5);  // ceil(70 / 16)
  for (double c : f.coherence) CHECK(c == 0.0);
  for (double a : f.angles) CHECK(a == 0.0);
  CHECK_THROWS_AS(minutiae::estimate_orientation(GrayImage(64, 64), 7), InvalidArgument);
  CHECK_THROWS_AS(minutiae::estimate_orientation(GrayImage(64, 64), 33), InvalidArgument);
}

TEST_CASE("coherence stays in [0, 1] on fingerprints (property)") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto f = minutiae::estimate_orientation(imaging::synth_fingerprint(seed, 200, 180, 9), 16);
    CHECK(f.cols == 13);
    CHECK(f.rows == 12);
    for (double c : f.coherence) CHECK((c >= 0.0 && c <= 1.0 + 1e-12));
    for (double a : f.angles) CHECK((a >= 0.0 && a < kPi));
  }
}

TEST_CASE("thinning fixed points") {
  GrayImage line(40, 40, 0);
  for (int x = 5; x < 35; ++x) line.at(x, 20) = 255;
  CHECK(minutiae::thin(line) == line);

  GrayImage diag(40, 40, 0);
  for (int i = 5; i < 35; ++i) diag.at(i, i) = 255;
  CHECK(minutiae::thin(diag) == diag);

  const GrayImage blank(30, 30, 0);
  CHECK(minutiae::thin(blank) == blank);
}

TEST_CASE("solid bar thins to a one-pixel curve") {
  GrayImage bar(60, 30, 0);
  for (int y = 13; y < 18; ++y)
    for (int x = 5; x < 55; ++x) bar.at(x, y) = 255;
  const auto sk = minutiae::thin(bar);
  int count = 0;
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 60; ++x) {
      if (!sk.at(x, y)) continue;
      ++count;
      CHECK(neighbours(sk, x, y) <= 2);
      CHECK((y >= 13 && y < 18));
    }
  CHECK(count >= 40);
}

TEST_CASE("thinning is idempotent (property)") {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    GrayImage img(48, 48, 0);
    for (int blob = 0; blob < 6; ++blob) {
      const int cx = static_cast<int>(rng.below(48)), cy = static_cast<int>(rng.below(48));
      const int rx = 1 + static_cast<int>(rng.below(8)), ry = 1 + static_cast<int>(rng.below(8));
      for (int y = std::max(0, cy - ry); y < std::min(48, cy + ry); ++y)
        for (int x = std::max(0, cx - rx); x < std::min(48, cx + rx); ++x) img.at(x, y) = 255;
    }
    const auto once = minutiae::thin(img);
    CHECK(minutiae::thin(once) == once);
    for (std::size_t i = 0; i < img.size(); ++i) {
      if (once.pixels()[i]) CHECK(img.pixels()[i]);
      CHECK((once.pixels()[i] == 0 || once.pixels()[i] == 255));
    }
  }
}

TEST_CASE("crossing number") {
  GrayImage sk(9, 9, 0);
  for (int x = 2; x <= 6; ++x) sk.at(x, 4) = 255;
  CHECK(minutiae::crossing_number(sk, 2, 4) == 1);
  CHECK(minutiae::crossing_number(sk, 4, 4) == 2);
  sk.at(4, 3) = 255;
  sk.at(4, 2) = 255;
  CHECK(minutiae::crossing_number(sk, 4, 4) == 3);
  GrayImage corner(3, 3, 0);
  corner.at(0, 0) = 255;
  corner.at(1, 0) = 255;
  CHECK(minutiae::crossing_number(corner, 0, 0) == 1);
}

TEST_CASE("blank skeleton and edge-to-edge line yield no minutiae") {
  const GrayImage blank(128, 128, 0);
  const auto field = minutiae::estimate_orientation(GrayImage(128, 128, 128), 16);
  CHECK(minutiae::extract_minutiae(blank, field).empty());

  GrayImage line(128, 128, 0);
  for (int x = 0; x < 128; ++x) line.at(x, 64) = 255;
  CHECK(minutiae::extract_minutiae(line, field).empty());

  GrayImage stub(128, 128, 0);
  for (int x = 40; x < 90; ++x) stub.at(x, 64) = 255;
  const auto found = minutiae::extract_minutiae(stub, field);
  REQUIRE(found.size() == 2);
  for (const auto& m : found) CHECK(m.kind == MinutiaKind::Ending);
  CHECK(minutiae::detect(GrayImage(128, 128, 200)).minutiae.empty());
}

TEST_CASE("ending direction follows the departing ridge") {
  GrayImage stub(128, 128, 0);
  for (int x = 40; x < 90; ++x) stub.at(x, 64) = 255;
  const auto field = minutiae::estimate_orientation(stripes(128, 0.0, 9), 16);
  auto found = minutiae::extract_minutiae(stub, field);
  REQUIRE(found.size() == 2);
  if (found[0].x > found[1].x) std::swap(found[0], found[1]);
  // The left end's ridge leaves towards +x, the right end's towards -x.
  CHECK(circular_diff(found[0].theta, 0.0) < 0.1);
  CHECK(circular_diff(found[1].theta, kPi) < 0.1);
}

TEST_CASE("planted minutiae are recovered") {
  for (double angle : {0.0, kPi / 2, 0.5, 2.2}) {
    CAPTURE(angle);
    const auto [img, truth] = imaging::synth_planted_pattern(five_plants(angle));
    const auto found = minutiae::detect(img).minutiae;
    const auto r = match(truth, found, 6.0, 0.35);
    CHECK(r.matched >= 4);
    CHECK(r.spurious <= 1);
  }
}

TEST_CASE("detections respect bounds and margin (property)") {
  for (std::uint64_t seed = 10; seed < 16; ++seed) {
    const auto img = imaging::synth_fingerprint(seed, 224, 256, 8 + static_cast<double>(seed % 3));
    const auto ex = minutiae::detect(img);
    for (std::size_t i = 0; i < ex.skeleton.size(); ++i) {
      CHECK((ex.skeleton.pixels()[i] == 0 || ex.skeleton.pixels()[i] == 255));
    }
    for (const auto& m : ex.minutiae) {
      CHECK(m.x >= 16);
      CHECK(m.y >= 16);
      CHECK(m.x < img.width() - 16);
      CHECK(m.y < img.height() - 16);
      CHECK((m.theta >= 0 && m.theta < 2 * kPi));
      CHECK((m.quality >= 0 && m.quality <= 1));
    }
    for (std::size_t i = 0; i < ex.minutiae.size(); ++i)
      for (std::size_t j = i + 1; j < ex.minutiae.size(); ++j)
        CHECK(std::hypot(ex.minutiae[i].x - ex.minutiae[j].x, ex.minutiae[i].y - ex.minutiae[j].y) >=
              minutiae::kMergeRadius);
  }
}

TEST_CASE("rotating a planted pattern rotates its minutiae (property)") {
  // "Within 1 px" is taken per axis: thinning may settle a junction on the
  // diagonal neighbour of its rotated counterpart.
  for (int step = 0; step < 40; ++step) {
    const double angle = step * kPi / 40;
    CAPTURE(angle);
    const auto img = imaging::synth_planted_pattern(five_plants(angle)).first;
    const auto before = minutiae::detect(img).minutiae;
    const auto after = minutiae::detect(rotate90(img)).minutiae;
    REQUIRE(before.size() == after.size());
    const int h = img.height();
    for (const auto& m : before) {
      const double rx = h - 1 - m.y, ry = m.x, rt = normalize_angle(m.theta + kPi / 2);
      double best = std::numeric_limits<double>::infinity();
      const Minutia* hit = nullptr;
      for (const auto& a : after) {
        const double d = std::max(std::abs(a.x - rx), std::abs(a.y - ry));
        if (d < best) {
          best = d;
          hit = &a;
        }
      }
      REQUIRE(hit != nullptr);
      CHECK(best <= 1.0);
      CHECK(circular_diff(hit->theta, rt) <= 0.1);
      CHECK(hit->kind == m.kind);
    }
  }
}

TEST_CASE("a ridge mask moves endings back to the ridge end") {
  GrayImage bar(128, 128, 0);
  for (int y = 62; y < 67; ++y)
    for (int x = 40; x < 90; ++x) bar.at(x, y) = 255;
  const auto sk = minutiae::thin(bar);
  const auto field = minutiae::estimate_orientation(stripes(128, 0.0, 9), 16);
  auto plain = minutiae::extract_minutiae(sk, field);
  auto refined = minutiae::extract_minutiae(sk, field, 16, &bar);
  REQUIRE(plain.size() == 2);
  REQUIRE(refined.size() == 2);
  if (refined[0].x > refined[1].x) std::swap(refined[0], refined[1]);
  // Mean of the end column and its neighbour: within half a pixel of the bar end.
  CHECK(std::abs(refined[0].x - 40.0) <= 0.5);
  CHECK(std::abs(refined[1].x - 89.0) <= 0.5);
  CHECK(std::abs(refined[0].y - 64.0) <= 0.5);
  CHECK(std::abs(plain[0].x - refined[0].x) + std::abs(plain[1].x - refined[1].x) > 0.0);
  const GrayImage small(5, 5);
  CHECK_THROWS_AS(minutiae::extract_minutiae(sk, field, 16, &small), InvalidArgument);
}
