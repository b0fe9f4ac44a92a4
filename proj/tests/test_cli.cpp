#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "beamtomo/cli.hpp"
#include "beamtomo/io.hpp"

using namespace beamtomo;

namespace {

struct Result {
  int status;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int status = cli::run(args, out, err);
  return {status, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("beamtomo_cli_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("tomogram command") {
  const auto r = run({"tomogram", "--n", "1", "--m", "1", "--sigma0", "1", "--query", "0,0,1,0,0,1"});
  CHECK(r.status == cli::kOk);
  CHECK(r.out == "X1,mu1,nu1,X2,mu2,nu2,w\n0,0,1,0,0,1,0\n");

  const auto two = run({"tomogram", "--sigma0", "1.4142135623730951", "--query", "0,0,1,0,0,1", "--query", "0,1,1,0,1,1"});
  std::istringstream lines(two.out);
  std::string line;
  std::getline(lines, line);
  for (const double expected : {1 / std::numbers::pi, 1 / (2 * std::numbers::pi)}) {
    REQUIRE(std::getline(lines, line));
    CHECK(std::stod(line.substr(line.rfind(',') + 1)) == doctest::Approx(expected).epsilon(1e-14));
  }

  const auto flags = run({"tomogram", "--n", "2", "--X1", "0.3", "--mu1", "0.5", "--nu1", "0.7", "--nu2", "0.2"});
  const auto direct = symplectic_tomogram_hg(HGModeSpec<>{2, 0, 1.0}, TomogramQuery<>{0.3, 0.5, 0.7, 0, 1, 0.2});
  CHECK(flags.out.find(io::format_double(direct)) != std::string::npos);
}

TEST_CASE("rsurface command") {
  const auto path = scratch("r00.csv");
  const auto r = run({"rsurface", "--n", "0", "--m", "0", "--sigma0", "1", "--grid", "32", "--out", path.string()});
  CHECK(r.status == cli::kOk);
  std::istringstream lines(slurp(path));
  std::string line;
  std::getline(lines, line);
  CHECK(line == "theta1,theta2,R");
  int rows = 0;
  double min_r = 1e9;
  while (std::getline(lines, line)) {
    ++rows;
    min_r = std::min(min_r, std::stod(line.substr(line.rfind(',') + 1)));
  }
  CHECK(rows == 1024);
  CHECK(min_r >= -1e-4);

  // Same configuration, byte-identical output.
  const auto again = scratch("r00_again.csv");
  run({"rsurface", "--n", "0", "--m", "0", "--sigma0", "1", "--grid", "32", "--out", again.string()});
  CHECK(slurp(path) == slurp(again));

  const auto json = run({"rsurface", "--sigma0", "1", "--grid", "4", "--format", "json"});
  CHECK(json.status == cli::kOk);
  CHECK(json.out.find("\"summary\"") != std::string::npos);
}

TEST_CASE("check command") {
  const auto r = run({"check", "--n", "0", "--m", "0", "--sigma0", "1.41421356"});
  CHECK(r.status == cli::kOk);
  CHECK(r.out.find("R ≈ 0 everywhere") != std::string::npos);
  CHECK(r.out.find("FAIL") == std::string::npos);

  const auto excited = run({"check", "--n", "1", "--m", "0", "--sigma0", "1", "--grid", "4"});
  CHECK(excited.status == cli::kOk);
  CHECK(excited.out.find("R ≈ 0") == std::string::npos);
}

TEST_CASE("sample, then use the field file") {
  const auto path = scratch("mode.txt");
  CHECK(run({"sample", "--n", "1", "--m", "2", "--sigma0", "1.2", "--points", "256", "--out", path.string()}).status ==
        cli::kOk);
  const auto from_file = run({"tomogram", "--field", path.string(), "--query", "0.3,0.6,0.8,0.1,1,0.5"});
  const auto analytic = run({"tomogram", "--n", "1", "--m", "2", "--sigma0", "1.2", "--query", "0.3,0.6,0.8,0.1,1,0.5"});
  REQUIRE(from_file.status == cli::kOk);
  const double a = std::stod(from_file.out.substr(from_file.out.rfind(',') + 1));
  const double b = std::stod(analytic.out.substr(analytic.out.rfind(',') + 1));
  CHECK(std::abs(a - b) < 1e-10);

  const auto bound = run({"entropy", "--kind", "bound", "--field", path.string()});
  CHECK(bound.status == cli::kOk);
  CHECK(bound.out.rfind("Hx,Hp,slack\n", 0) == 0);
}

TEST_CASE("entropy and reconstruct commands") {
  const auto h = run({"entropy", "--sigma0", "1", "--theta1", "1.5707963267948966", "--theta2", "1.5707963267948966"});
  CHECK(h.status == cli::kOk);
  std::istringstream rows(h.out);
  std::string header, values;
  std::getline(rows, header);
  std::getline(rows, values);
  CHECK(header == "theta1,theta2,H,estimated_error");
  std::vector<double> v;
  std::stringstream ss(values);
  for (std::string cell; std::getline(ss, cell, ',');) v.push_back(std::stod(cell));
  CHECK(v.at(2) == doctest::Approx(2.8378770664093455).epsilon(1e-9));

  const auto rec = run({"reconstruct", "--sigma0", "1.4142135623730951", "--x-min", "0", "--x-max", "0", "--points", "1"});
  CHECK(rec.status == cli::kOk);
  const auto line = rec.out.substr(rec.out.find('\n') + 1);
  CHECK(std::stod(line.substr(4, line.find(',', 4) - 4)) == doctest::Approx(1 / std::sqrt(std::numbers::pi)).epsilon(1e-6));
}

TEST_CASE("exit statuses") {
  CHECK(run({}).status == cli::kValidation);
  CHECK(run({"tomogram", "--bogus"}).status == cli::kValidation);
  CHECK(run({"tomogram", "--query", "0,0,0,0,1,1"}).status == cli::kValidation);
  CHECK(run({"tomogram", "--sigma0", "-1"}).status == cli::kValidation);
  CHECK(run({"tomogram", "--n", "1", "--field", "x.txt"}).status == cli::kValidation);
  CHECK(run({"tomogram", "--field", "/nonexistent.txt"}).status == cli::kValidation);
  CHECK(run({"rsurface", "--grid", "1"}).status == cli::kValidation);
  CHECK(run({"--help"}).status == cli::kOk);

  // A quadrature tolerance no grid can meet.
  const auto path = scratch("ground.txt");
  run({"sample", "--sigma0", "1", "--points", "128", "--out", path.string()});
  const auto strict = run({"tomogram", "--field", path.string(), "--abs-tol", "1e-30", "--query", "0.1,1,0.5,0,1,0.5"});
  CHECK(strict.status == cli::kNonConvergence);

  // Norm 1 + 9e-7 loads, but the tomogram integrates to 1 + 1.8e-6.
  const auto fine = scratch("ground256.txt");
  run({"sample", "--sigma0", "1", "--points", "256", "--out", fine.string()});
  const auto field = io::load_field(fine);
  const SampledField<> off(field.axis1(), field.axis2(), field.amplitudes() * (1 + 9e-7));
  const auto off_path = scratch("off.txt");
  io::write_atomically(off_path, [&](std::ostream& o) { io::write_field(o, off); });
  const auto r = run({"check", "--field", off_path.string(), "--grid", "2"});
  CHECK(r.status == cli::kInvariant);
  CHECK(r.out.find("normalization              FAIL") != std::string::npos);
}
