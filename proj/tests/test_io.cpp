#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "beamtomo/io.hpp"

using namespace beamtomo;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("beamtomo_io_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("format_double round-trips") {
  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::format_double(0.0) == "0");
  CHECK(io::format_double(-2.5e-300) == "-2.5e-300");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> mantissa(-1, 1);
  std::uniform_int_distribution<int> exponent(-300, 300);
  for (int k = 0; k < 2000; ++k) {
    const double v = std::ldexp(mantissa(rng), exponent(rng));
    CHECK(std::stod(io::format_double(v)) == v);
  }
}

TEST_CASE("field files round-trip exactly") {
  const HGModeSpec<> spec{2, 1, 1.1};
  const UniformGrid<> g1{0.25, 0.09, 160}, g2{-0.1, 0.1, 150};
  const auto field = sample_function(
      [&](double x, double y) { return hg_amplitude(spec, x, y) * std::polar(1.0, 0.3 * x - 0.7 * y * y); }, g1, g2);
  std::stringstream buffer;
  io::write_field(buffer, field);
  const auto back = io::read_field(buffer);
  CHECK(back.axis1() == field.axis1());
  CHECK(back.axis2() == field.axis2());
  CHECK(back.amplitudes() == field.amplitudes());
  const TomogramQuery<> q{0.2, 0.7, 0.6, -0.3, 1.0, 0.4};
  CHECK(std::abs(symplectic_tomogram(back, q) - symplectic_tomogram(field, q)) <= 1e-12);

  const auto path = scratch("field.txt");
  io::write_atomically(path, [&](std::ostream& o) { io::write_field(o, field); });
  CHECK(io::load_field(path).amplitudes() == field.amplitudes());
}

TEST_CASE("field reader layout and errors") {
  // x1 fastest; any whitespace between numbers.
  std::istringstream compact("x1: 0 1 2\nx2: 5 0.5 2\n1 0\t2 0 3 -1\n\n4 0.5\n");
  const auto f = io::read_field(compact);
  CHECK(f.amplitudes()(0, 0) == std::complex<double>(1, 0));
  CHECK(f.amplitudes()(1, 0) == std::complex<double>(2, 0));
  CHECK(f.amplitudes()(0, 1) == std::complex<double>(3, -1));
  CHECK(f.amplitudes()(1, 1) == std::complex<double>(4, 0.5));
  CHECK(f.axis2().center == 5.0);

  auto read = [](const std::string& text) {
    std::istringstream in(text);
    return io::read_field(in);
  };
  CHECK_THROWS_AS(read("x2: 0 1 2\nx1: 0 1 2\n0 0 0 0 0 0 0 0\n"), ValidationError);
  CHECK_THROWS_AS(read("x1: 0 1 2\nx2: 0 1 2\n0 0 0 0 0 0\n"), ValidationError);
  CHECK_THROWS_AS(read("x1: 0 1 2\nx2: 0 1 2\n0 0 0 0 0 0 0 0 9\n"), ValidationError);
  CHECK_THROWS_AS(read("x1: 0 1 2\nx2: 0 1 2\n0 0 0 0 0 x 0 0\n"), ValidationError);
  CHECK_THROWS_AS(read("x1: 0 -1 2\nx2: 0 1 2\n0 0 0 0 0 0 0 0\n"), ValidationError);
  CHECK_THROWS_AS(io::load_field("/nonexistent/field.txt"), ValidationError);
}

TEST_CASE("tomogram tables") {
  std::ostringstream csv;
  io::write_tomogram_csv(csv, {{{0, 0, 1, 0, 0, 1}, 1 / std::numbers::pi}, {{0.5, 1, -0.25, 2, 1, 0}, 0}});
  CHECK(csv.str() ==
        "X1,mu1,nu1,X2,mu2,nu2,w\n"
        "0,0,1,0,0,1,0.3183098861837907\n"
        "0.5,1,-0.25,2,1,0,0\n");
  std::ostringstream json;
  io::write_tomogram_json(json, {{{0.5, 1, -0.25, 2, 1, 0}, 0.125}});
  const auto doc = nlohmann::json::parse(json.str());
  CHECK(doc[0]["nu1"] == -0.25);
  CHECK(doc[0]["w"] == 0.125);
}

TEST_CASE("parse_query") {
  const auto q = io::parse_query(" 0.5, 1 ,-2e-1,3,+1,0");
  CHECK(q.X1 == 0.5);
  CHECK(q.nu1 == -0.2);
  CHECK(q.mu2 == 1.0);
  CHECK_THROWS_AS(io::parse_query("1,2,3"), ValidationError);
  CHECK_THROWS_AS(io::parse_query("1,2,3,4,5,six"), ValidationError);
  CHECK_THROWS_AS(io::parse_query("0,0,0,0,1,1"), DegenerateQueryError);
}

TEST_CASE("R surface exports") {
  RSurface<> s;
  s.theta1.resize(2);
  s.theta1 << 0, std::numbers::pi / 2;
  s.theta2 = s.theta1;
  s.values.resize(2, 2);
  s.values << 0.1, 0.2, 0.3, 0.4;
  s.mode = ModeMeta<>{1, 0, 4.0};
  std::ostringstream csv;
  io::write_rsurface_csv(csv, s);
  CHECK(csv.str() ==
        "theta1,theta2,R\n"
        "0,0,0.1\n"
        "0,1.57079632679,0.2\n"
        "1.57079632679,0,0.3\n"
        "1.57079632679,1.57079632679,0.4\n");
  std::ostringstream json;
  io::write_rsurface_json(json, s);
  const auto doc = nlohmann::json::parse(json.str());
  CHECK(doc["mode"]["sigma0"] == 4.0);
  CHECK(doc["grid"]["points_per_axis"] == 2);
  CHECK(doc["summary"]["mean"].get<double>() == doctest::Approx(0.25));
  CHECK(doc["R"][1][0] == 0.3);
}

TEST_CASE("write_atomically") {
  const auto path = scratch("out.csv");
  io::write_atomically(path, [](std::ostream& o) { o << "first\n"; });
  io::write_atomically(path, [](std::ostream& o) { o << "second\n"; });
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), {});
  CHECK(text == "second\n");
  for (const auto& entry : std::filesystem::directory_iterator(path.parent_path()))
    CHECK(entry.path().filename().string().find(".tmp") == std::string::npos);
  CHECK_THROWS_AS(io::write_atomically("/nonexistent/dir/out.csv", [](std::ostream& o) { o << "x"; }), ValidationError);
}
