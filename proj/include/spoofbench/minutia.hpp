#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace spoofbench {

enum class MinutiaKind : std::uint8_t { Ending = 0, Bifurcation = 1 };

std::string_view to_string(MinutiaKind kind);
MinutiaKind parse_minutia_kind(std::string_view text);

/// Ridge ending or bifurcation. theta is the direction of the departing
/// ridge (endings) or of the fork opening (bifurcations), radians in
/// [0, 2pi), measured in image coordinates (x right, y down).
struct Minutia {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  MinutiaKind kind = MinutiaKind::Ending;
  double quality = 0.0;

  bool operator==(const Minutia&) const = default;
};

using MinutiaSet = std::vector<Minutia>;

double normalize_angle(double radians);  // -> [0, 2pi)

/// CSV `x,y,theta,kind,quality` with 6-decimal floats and a header row.
void write_minutiae_csv(std::ostream& out, const MinutiaSet& minutiae);
MinutiaSet read_minutiae_csv(std::istream& in);

}  // namespace spoofbench
