#include "beamtomo/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include <json.hpp>

namespace beamtomo::io {

namespace {

double parse_double(const std::string& token, const char* what) {
  double value = 0;
  const char* first = token.data();
  const char* last = first + token.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw ValidationError(std::string("cannot parse ") + what + " '" + token + "'");
  return value;
}

UniformGrid<double> read_axis_header(std::istream& in, const std::string& label) {
  std::string line;
  while (std::getline(in, line))
    if (line.find_first_not_of(" \t\r") != std::string::npos) break;
  std::istringstream fields(line);
  std::string tag, center, step;
  Index count = 0;
  if (!(fields >> tag >> center >> step >> count) || tag != label + ":")
    throw ValidationError("field file: expected '" + label + ": center step count'");
  UniformGrid<double> grid{parse_double(center, "grid center"), parse_double(step, "grid step"), count};
  grid.validate();
  return grid;
}

double rounded(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw Error("number formatting failed");
  return std::string(buf, ptr);
}

void write_field(std::ostream& out, const SampledField<double>& field) {
  for (const auto& [label, g] : {std::pair{"x1", &field.axis1()}, std::pair{"x2", &field.axis2()}})
    out << label << ": " << format_double(g->center) << ' ' << format_double(g->step) << ' ' << g->count << '\n';
  const auto& a = field.amplitudes();
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      if (i) out << ' ';
      out << format_double(a(i, j).real()) << ' ' << format_double(a(i, j).imag());
    }
    out << '\n';
  }
}

SampledField<double> read_field(std::istream& in) {
  const auto axis1 = read_axis_header(in, "x1");
  const auto axis2 = read_axis_header(in, "x2");
  SampledField<double>::Amplitudes a(axis1.count, axis2.count);
  std::string re, im;
  for (Index j = 0; j < axis2.count; ++j)
    for (Index i = 0; i < axis1.count; ++i) {
      if (!(in >> re >> im)) throw ValidationError("field file ended before all amplitudes were read");
      a(i, j) = {parse_double(re, "amplitude"), parse_double(im, "amplitude")};
    }
  if (in >> re) throw ValidationError("field file has trailing data");
  return SampledField<double>(axis1, axis2, std::move(a));
}

SampledField<double> load_field(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open field file " + path.string());
  return read_field(in);
}

void write_tomogram_csv(std::ostream& out, const std::vector<TomogramRow>& rows) {
  out << "X1,mu1,nu1,X2,mu2,nu2,w\n";
  for (const auto& r : rows) {
    const auto& q = r.query;
    for (double v : {q.X1, q.mu1, q.nu1, q.X2, q.mu2, q.nu2}) out << format_double(v) << ',';
    out << format_double(r.w) << '\n';
  }
}

void write_tomogram_json(std::ostream& out, const std::vector<TomogramRow>& rows) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    const auto& q = r.query;
    doc.push_back({{"X1", q.X1}, {"mu1", q.mu1}, {"nu1", q.nu1}, {"X2", q.X2}, {"mu2", q.mu2}, {"nu2", q.nu2}, {"w", r.w}});
  }
  out << doc.dump(2) << '\n';
}

void write_rsurface_csv(std::ostream& out, const RSurface<double>& surface) {
  out << "theta1,theta2,R\n";
  char line[96];
  for (Index i = 0; i < surface.theta1.size(); ++i)
    for (Index j = 0; j < surface.theta2.size(); ++j) {
      std::snprintf(line, sizeof line, "%.12g,%.12g,%.12g\n", surface.theta1[i], surface.theta2[j], surface.values(i, j));
      out << line;
    }
}

void write_rsurface_json(std::ostream& out, const RSurface<double>& surface) {
  nlohmann::ordered_json doc;
  if (surface.mode)
    doc["mode"] = {{"n", surface.mode->n}, {"m", surface.mode->m}, {"sigma0", surface.mode->sigma0}};
  else
    doc["mode"] = nullptr;
  const Index n = surface.theta1.size();
  doc["grid"] = {{"points_per_axis", n}, {"theta_min", 0.0}, {"theta_step", n > 1 ? surface.theta1[1] : 0.0},
                 {"units", "radians"}};
  doc["summary"] = {{"min", surface.min()}, {"mean", surface.mean()}, {"max", surface.max()}};
  auto theta = nlohmann::ordered_json::array();
  for (Index i = 0; i < n; ++i) theta.push_back(rounded(surface.theta1[i]));
  doc["theta"] = theta;
  auto values = nlohmann::ordered_json::array();
  for (Index i = 0; i < surface.values.rows(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (Index j = 0; j < surface.values.cols(); ++j) row.push_back(rounded(surface.values(i, j)));
    values.push_back(row);
  }
  doc["R"] = values;
  out << doc.dump(2) << '\n';
}

TomogramQuery<double> parse_query(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    const auto first = token.find_first_not_of(" \t");
    const auto last = token.find_last_not_of(" \t");
    v.push_back(parse_double(first == std::string::npos ? "" : token.substr(first, last - first + 1), "query entry"));
  }
  if (v.size() != 6) throw ValidationError("query needs six values X1,mu1,nu1,X2,mu2,nu2: '" + text + "'");
  TomogramQuery<double> q{v[0], v[1], v[2], v[3], v[4], v[5]};
  q.validate();
  return q;
}

void write_atomically(const std::filesystem::path& path, const std::function<void(std::ostream&)>& fill) {
  auto temp = path;
  temp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + temp.string());
    fill(out);
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(temp, ignored);
      throw ValidationError("write failed for " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(temp, path, ec);
  if (ec) {
    std::filesystem::remove(temp, ec);
    throw ValidationError("cannot move output into place at " + path.string());
  }
}

}  // namespace beamtomo::io
