#pragma once

// Text formats: sampled fields, tomogram tables and R surfaces.

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "beamtomo/entropy.hpp"

namespace beamtomo::io {

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

/// Field file: `x1: center step count`, `x2: center step count`, then one
/// line per x2 index holding `re im` for every x1 (x1 fastest).
void write_field(std::ostream& out, const SampledField<double>& field);
SampledField<double> read_field(std::istream& in);
SampledField<double> load_field(const std::filesystem::path& path);

struct TomogramRow {
  TomogramQuery<double> query;
  double w = 0;
};

/// Header `X1,mu1,nu1,X2,mu2,nu2,w`.
void write_tomogram_csv(std::ostream& out, const std::vector<TomogramRow>& rows);
void write_tomogram_json(std::ostream& out, const std::vector<TomogramRow>& rows);

/// Header `theta1,theta2,R`, theta1-major, 12 significant digits.
void write_rsurface_csv(std::ostream& out, const RSurface<double>& surface);
/// Mode, lattice, min/mean/max summary and the value matrix.
void write_rsurface_json(std::ostream& out, const RSurface<double>& surface);

/// "X1,mu1,nu1,X2,mu2,nu2" -> query; throws ValidationError.
TomogramQuery<double> parse_query(const std::string& text);

/// Writes through `fill` into a sibling temporary, then renames over `path`.
void write_atomically(const std::filesystem::path& path, const std::function<void(std::ostream&)>& fill);

}  // namespace beamtomo::io
