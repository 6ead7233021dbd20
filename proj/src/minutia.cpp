#include "spoofbench/minutia.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>

#include "spoofbench/common.hpp"
#include "spoofbench/csv.hpp"

namespace spoofbench {

std::string_view to_string(MinutiaKind kind) {
  return kind == MinutiaKind::Ending ? "ending" : "bifurcation";
}

MinutiaKind parse_minutia_kind(std::string_view text) {
  if (text == "ending") return MinutiaKind::Ending;
  if (text == "bifurcation") return MinutiaKind::Bifurcation;
  throw DataError("unknown minutia kind '" + std::string(text) + "'");
}

double normalize_angle(double radians) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double a = std::fmod(radians, kTwoPi);
  if (a < 0) a += kTwoPi;
  if (a >= kTwoPi) a -= kTwoPi;
  return a;
}

void write_minutiae_csv(std::ostream& out, const MinutiaSet& minutiae) {
  out << "x,y,theta,kind,quality\n";
  for (const auto& m : minutiae) {
    out << csv::fixed(m.x, 6) << ',' << csv::fixed(m.y, 6) << ',' << csv::fixed(m.theta, 6) << ','
        << to_string(m.kind) << ',' << csv::fixed(m.quality, 6) << '\n';
  }
}

MinutiaSet read_minutiae_csv(std::istream& in) {
  const auto table = csv::read(in, "minutiae CSV");
  const auto cx = table.column("x"), cy = table.column("y"), ct = table.column("theta"),
             ck = table.column("kind"), cq = table.column("quality");
  MinutiaSet out;
  for (const auto& row : table.rows) {
    out.push_back({csv::to_double(row[cx], "x"), csv::to_double(row[cy], "y"), csv::to_double(row[ct], "theta"),
                   parse_minutia_kind(row[ck]), csv::to_double(row[cq], "quality")});
  }
  return out;
}

}  // namespace spoofbench
