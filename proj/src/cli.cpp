#include "beamtomo/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <variant>

#include <CLI11.hpp>
#include <json.hpp>

#include "beamtomo/io.hpp"

namespace beamtomo::cli {

namespace {

using Source = std::variant<HGModeSpec<double>, SampledField<double>>;

struct SourceOptions {
  int n = 0;
  int m = 0;
  double sigma0 = 1;
  double lambda = 2 * std::numbers::pi;
  std::string field;

  void attach(CLI::App* cmd) {
    auto* field_opt = cmd->add_option("--field", field, "Sampled field file instead of an HG mode");
    for (auto* opt : {cmd->add_option("--n", n, "HG order along x1"), cmd->add_option("--m", m, "HG order along x2"),
                      cmd->add_option("--sigma0", sigma0, "Waist width"),
                      cmd->add_option("--lambda", lambda, "Wavelength (default 2 pi)")})
      opt->excludes(field_opt);
  }

  bool analytic() const { return field.empty(); }

  HGModeSpec<double> mode() const {
    HGModeSpec<double> spec{n, m, sigma0, lambda};
    spec.validate();
    return spec;
  }

  Source load() const {
    if (analytic()) return mode();
    auto f = io::load_field(field);
    if (!f.is_normalized(1e-6)) throw ValidationError("field file is not normalized (norm " + io::format_double(f.norm()) + ")");
    return f;
  }
};

struct QuadratureOptions {
  std::optional<double> half_width;
  std::optional<Index> nodes;
  std::optional<double> abs_tol;

  void attach(CLI::App* cmd) {
    cmd->add_option("--half-width", half_width, "Quadrature truncation half-width");
    cmd->add_option("--nodes", nodes, "Quadrature nodes per axis");
    cmd->add_option("--abs-tol", abs_tol, "Quadrature absolute tolerance");
  }

  QuadratureSpec<double> resolve(QuadratureSpec<double> base) const {
    if (half_width) base.half_width = *half_width;
    if (nodes) base.nodes_per_axis = *nodes;
    if (abs_tol) base.abs_tol = *abs_tol;
    base.validate();
    return base;
  }
};

struct OutputOptions {
  std::string path;
  std::string format = "csv";

  void attach(CLI::App* cmd) {
    cmd->add_option("--out", path, "Output file (default: standard output)");
    cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  }

  void emit(std::ostream& out, const std::function<void(std::ostream&)>& fill) const {
    if (path.empty())
      fill(out);
    else
      io::write_atomically(path, fill);
  }
};

int scan_thread_count() {
  if (const char* env = std::getenv("BEAMTOMO_THREADS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && value > 0) return static_cast<int>(value);
    throw ValidationError(std::string("BEAMTOMO_THREADS must be a positive integer, got '") + env + "'");
  }
  return 0;
}

std::string fixed(double v, const char* fmt = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

// ---------------------------------------------------------------------------

struct TomogramCommand {
  SourceOptions source;
  QuadratureOptions quadrature;
  OutputOptions output;
  std::vector<std::string> queries;
  double X1 = 0, mu1 = 1, nu1 = 0, X2 = 0, mu2 = 1, nu2 = 0;

  void attach(CLI::App* cmd) {
    source.attach(cmd);
    quadrature.attach(cmd);
    output.attach(cmd);
    auto* q = cmd->add_option("--query", queries, "X1,mu1,nu1,X2,mu2,nu2 (repeatable)");
    for (auto* opt : {cmd->add_option("--X1", X1), cmd->add_option("--mu1", mu1), cmd->add_option("--nu1", nu1),
                      cmd->add_option("--X2", X2), cmd->add_option("--mu2", mu2), cmd->add_option("--nu2", nu2)})
      opt->excludes(q);
  }

  int run(std::ostream& out) const {
    std::vector<io::TomogramRow> rows;
    if (queries.empty())
      rows.push_back({{X1, mu1, nu1, X2, mu2, nu2}, 0});
    else
      for (const auto& text : queries) rows.push_back({io::parse_query(text), 0});
    const auto spec = quadrature.resolve({});
    const Source src = source.load();
    for (auto& row : rows)
      row.w = std::visit([&](const auto& s) { return symplectic_tomogram(s, row.query, spec); }, src);
    output.emit(out, [&](std::ostream& o) {
      if (output.format == "json")
        io::write_tomogram_json(o, rows);
      else
        io::write_tomogram_csv(o, rows);
    });
    return kOk;
  }
};

struct EntropyCommand {
  SourceOptions source;
  QuadratureOptions quadrature;
  OutputOptions output;
  std::string kind = "optical";
  double theta1 = 0, theta2 = 0;
  double mu1 = 1, nu1 = 0, mu2 = 1, nu2 = 0;

  void attach(CLI::App* cmd) {
    source.attach(cmd);
    quadrature.attach(cmd);
    output.attach(cmd);
    cmd->add_option("--kind", kind, "optical | symplectic | fresnel | bound")
        ->check(CLI::IsMember({"optical", "symplectic", "fresnel", "bound"}));
    cmd->add_option("--theta1", theta1);
    cmd->add_option("--theta2", theta2);
    cmd->add_option("--mu1", mu1);
    cmd->add_option("--nu1", nu1);
    cmd->add_option("--mu2", mu2);
    cmd->add_option("--nu2", nu2);
  }

  int run(std::ostream& out) const {
    const auto spec = quadrature.resolve(entropy_quadrature<double>());
    const Source src = source.load();
    std::vector<std::pair<std::string, double>> fields;
    if (kind == "bound") {
      const SampledField<double> field = source.analytic() ? sample(source.mode(), default_grid(source.mode()))
                                                           : std::get<SampledField<double>>(src);
      const auto r = position_momentum_entropy_sum(field);
      fields = {{"Hx", r.position_entropy}, {"Hp", r.momentum_entropy}, {"slack", r.slack}};
    } else {
      EntropyValue<double> h;
      std::visit(
          [&](const auto& s) {
            if (kind == "optical") {
              h = optical_entropy(s, OpticalAngles<double>{theta1, theta2}, spec);
            } else if (kind == "fresnel") {
              h = fresnel_entropy(s, nu1, nu2, spec);
            } else {
              h = tomographic_entropy(s, mu1, nu1, mu2, nu2, spec);
            }
          },
          src);
      if (kind == "optical")
        fields = {{"theta1", theta1}, {"theta2", theta2}};
      else if (kind == "fresnel")
        fields = {{"nu1", nu1}, {"nu2", nu2}};
      else
        fields = {{"mu1", mu1}, {"nu1", nu1}, {"mu2", mu2}, {"nu2", nu2}};
      fields.push_back({"H", h.value});
      fields.push_back({"estimated_error", h.estimated_error});
    }
    output.emit(out, [&](std::ostream& o) {
      if (output.format == "json") {
        nlohmann::ordered_json doc;
        doc["kind"] = kind;
        for (const auto& [k, v] : fields) doc[k] = v;
        o << doc.dump(2) << '\n';
        return;
      }
      for (std::size_t i = 0; i < fields.size(); ++i) o << (i ? "," : "") << fields[i].first;
      o << '\n';
      for (std::size_t i = 0; i < fields.size(); ++i) o << (i ? "," : "") << io::format_double(fields[i].second);
      o << '\n';
    });
    return kOk;
  }
};

struct RSurfaceCommand {
  SourceOptions source;
  QuadratureOptions quadrature;
  OutputOptions output;
  Index grid = 32;

  void attach(CLI::App* cmd) {
    source.attach(cmd);
    quadrature.attach(cmd);
    output.attach(cmd);
    cmd->add_option("--grid", grid, "Lattice points per angle over [0, pi)")->check(CLI::Range(2, 4096));
  }

  int run(std::ostream& out, std::ostream& err) const {
    const auto spec = quadrature.resolve(entropy_quadrature<double>());
    const Source src = source.load();
    const int threads = scan_thread_count();
    const auto surface = std::visit([&](const auto& s) { return r_surface_scan(s, grid, spec, threads); }, src);
    output.emit(out, [&](std::ostream& o) {
      if (output.format == "json")
        io::write_rsurface_json(o, surface);
      else
        io::write_rsurface_csv(o, surface);
    });
    std::ostream& report = output.path.empty() ? err : out;
    report << "R over " << grid << "x" << grid << ": min " << fixed(surface.min()) << ", mean "
           << fixed(surface.mean()) << ", max " << fixed(surface.max()) << '\n';
    if (surface.min() < -kRTolerance) {
      err << "error: R < " << -kRTolerance << " violates the entropic uncertainty relation\n";
      return kInvariant;
    }
    return kOk;
  }
};

struct ReconstructCommand {
  int n = 0;
  double sigma0 = 1;
  double x_min = -3, x_max = 3;
  Index points = 13;
  std::optional<double> xprime;
  OutputOptions output;

  void attach(CLI::App* cmd) {
    cmd->add_option("--n", n, "Order of the 1D HG mode");
    cmd->add_option("--sigma0", sigma0, "Waist width");
    cmd->add_option("--x-min", x_min);
    cmd->add_option("--x-max", x_max);
    cmd->add_option("--points", points)->check(CLI::PositiveNumber);
    cmd->add_option("--xprime", xprime, "Fixed x' (default: the diagonal x' = x)");
    output.attach(cmd);
  }

  int run(std::ostream& out) const {
    HGModeSpec<double>{n, 0, sigma0}.validate();
    if (!(x_max >= x_min)) throw ValidationError("--x-max must be >= --x-min");
    const auto spec = InversionSpec<double>::for_waist(sigma0);
    auto sampler = [&](double X, double mu, double nu) { return hg_axis_tomogram(n, sigma0, X, mu, nu); };
    struct Row {
      double x, xp;
      std::complex<double> rho;
    };
    std::vector<Row> rows;
    for (Index k = 0; k < points; ++k) {
      const double x = points == 1 ? x_min : x_min + (x_max - x_min) * double(k) / double(points - 1);
      const double xp = xprime.value_or(x);
      rows.push_back({x, xp, reconstruct_correlation_1d(sampler, x, xp, spec)});
    }
    output.emit(out, [&](std::ostream& o) {
      if (output.format == "json") {
        auto doc = nlohmann::ordered_json::array();
        for (const auto& r : rows) doc.push_back({{"x", r.x}, {"xprime", r.xp}, {"re", r.rho.real()}, {"im", r.rho.imag()}});
        o << doc.dump(2) << '\n';
        return;
      }
      o << "x,xprime,re,im\n";
      for (const auto& r : rows)
        o << io::format_double(r.x) << ',' << io::format_double(r.xp) << ',' << io::format_double(r.rho.real()) << ','
          << io::format_double(r.rho.imag()) << '\n';
    });
    return kOk;
  }
};

struct SampleCommand {
  int n = 0, m = 0;
  double sigma0 = 1;
  Index points = 512;
  std::optional<double> half_width;
  std::string path;

  void attach(CLI::App* cmd) {
    cmd->add_option("--n", n);
    cmd->add_option("--m", m);
    cmd->add_option("--sigma0", sigma0);
    cmd->add_option("--points", points, "Grid points per axis")->check(CLI::Range(2, 1 << 14));
    cmd->add_option("--half-width", half_width, "Grid half-width (default from the mode)");
    cmd->add_option("--out", path, "Field file")->required();
  }

  int run() const {
    const HGModeSpec<double> spec{n, m, sigma0};
    spec.validate();
    const auto grid = half_width ? UniformGrid<double>::spanning(*half_width, points) : default_grid(spec, points);
    const auto field = sample(spec, grid);
    io::write_atomically(path, [&](std::ostream& o) { io::write_field(o, field); });
    return kOk;
  }
};

// ---------------------------------------------------------------------------
// check: the invariant suite on one source.

class Report {
 public:
  explicit Report(std::ostream& out) : out_(out) {}

  void line(const std::string& name, bool ok, const std::string& detail) {
    char head[48];
    std::snprintf(head, sizeof head, "%-26s %-4s ", name.c_str(), ok ? "ok" : "FAIL");
    out_ << head << detail << '\n';
    failed_ = failed_ || !ok;
  }

  bool failed() const { return failed_; }

 private:
  std::ostream& out_;
  bool failed_ = false;
};

const std::array<std::array<double, 4>, 5> kCheckSettings{
    {{1, 0, 1, 0}, {0, 1, 0, 1}, {0.6, 0.8, -0.3, 1.2}, {1.2, -0.5, 0.9, 0.4}, {0.2, 1.5, 1.0, -1.0}}};

struct CheckCommand {
  SourceOptions source;
  Index grid = 16;

  void attach(CLI::App* cmd) {
    source.attach(cmd);
    cmd->add_option("--grid", grid, "R lattice points per angle")->check(CLI::Range(2, 1024));
  }

  static std::vector<TomogramQuery<double>> sample_queries() {
    return {{0.3, 0.8, 0.5, -0.4, 1.1, -0.6},
            {-0.7, 1.3, -0.4, 0.2, 0.6, 0.9},
            {1.1, 0.5, 1.0, 0.9, 1.4, 0.3},
            {0.0, 2.0, 0.7, -1.2, 0.9, -1.1},
            {-0.5, 0.7, -1.3, 0.4, 1.6, 0.8}};
  }

  template <typename S>
  void normalization(const S& s, Report& report) const {
    double worst = 0;
    for (const auto& p : kCheckSettings) {
      TomogramProfile<double> profile;
      if constexpr (std::is_same_v<S, HGModeSpec<double>>)
        profile = tomogram_profile(s, p[0], p[1], p[2], p[3], 512);
      else
        profile = tomogram_profile(s, p[0], p[1], p[2], p[3]);
      worst = std::max(worst, std::abs(profile.total() - 1));
    }
    report.line("normalization", worst <= 1e-6, "max |integral w - 1| = " + fixed(worst, "%.2e"));
  }

  template <typename S>
  void identities(const S& s, Report& report) const {
    double conversion = 0, homogeneity = 0;
    const std::array<std::pair<double, double>, 5> scales{{{1, 1}, {-1, 1}, {2, 3}, {0.5, -1.5}, {-2.5, 0.8}}};
    const auto queries = sample_queries();
    for (std::size_t k = 0; k < queries.size(); ++k) {
      const auto& q = queries[k];
      const double w = symplectic_tomogram(s, q);
      conversion = std::max({conversion, std::abs(symplectic_from_optical(s, q) - w),
                             std::abs(symplectic_from_fresnel(s, q) - w)});
      const auto [lhs, rhs] = homogeneity_check(q, scales[k].first, scales[k].second, s);
      homogeneity = std::max(homogeneity, std::abs(lhs - rhs));
    }
    report.line("conversions", conversion <= 1e-8, "max deviation " + fixed(conversion, "%.2e"));
    report.line("homogeneity", homogeneity <= 1e-8, "max deviation " + fixed(homogeneity, "%.2e"));
  }

  void oracle(const HGModeSpec<double>& spec, Report& report) const {
    const double half = spec.sigma0 * (std::sqrt(2.0 * spec.max_order() + 1) + 8);
    const auto field = sample(spec, UniformGrid<double>::spanning(half, 1024));
    double worst = 0;
    bool ok = true;
    for (const auto& q : sample_queries()) {
      const double closed = symplectic_tomogram_hg(spec, q);
      const double numeric = symplectic_tomogram_numeric(field, q);
      const double gap = std::abs(closed - numeric);
      ok = ok && gap <= std::max(1e-8, 1e-6 * closed);
      worst = std::max(worst, gap);
    }
    report.line("closed form vs quadrature", ok, "max deviation " + fixed(worst, "%.2e"));
  }

  void propagation(const HGModeSpec<double>& spec, Report& report) const {
    const auto field = sample(spec, default_grid(spec));
    const double z0 = spec.confocal_parameter();
    const auto propagated = free_space_propagate(field, z0, spec.lambda);
    const double mu = 1, nu = z0 * spec.lambda / (2 * std::numbers::pi);
    double worst = 0;
    const Index c = field.axis1().count / 2;
    for (Index i = c - 40; i <= c + 40; i += 8)
      for (Index j = c - 40; j <= c + 40; j += 8) {
        const TomogramQuery<double> q{mu * field.axis1()[i], mu, nu, mu * field.axis2()[j], mu, nu};
        worst = std::max(worst, std::abs(symplectic_tomogram_hg(spec, q) - std::norm(propagated.amplitudes()(i, j))));
      }
    report.line("propagation law", worst <= 1e-4, "max |w - |psi_z0|^2| = " + fixed(worst, "%.2e"));
  }

  int run(std::ostream& out) const {
    const Source src = source.load();
    Report report(out);
    std::visit([&](const auto& s) { normalization(s, report); }, src);
    std::visit([&](const auto& s) { identities(s, report); }, src);
    if (source.analytic()) {
      oracle(source.mode(), report);
      propagation(source.mode(), report);
    }
    const SampledField<double> field = source.analytic() ? sample(source.mode(), default_grid(source.mode()))
                                                         : std::get<SampledField<double>>(src);
    const auto bound = position_momentum_entropy_sum(field);
    report.line("entropic bound", bound.slack >= -kEntropyTolerance,
                "Hx + Hp - 2 ln(pi e) = " + fixed(bound.slack, "%.3e"));

    const auto surface = std::visit(
        [&](const auto& s) { return r_surface_scan(s, grid, entropy_quadrature<double>(), scan_thread_count()); }, src);
    const bool nonnegative = surface.min() >= -kRTolerance;
    report.line("R nonnegative", nonnegative,
                "min " + fixed(surface.min(), "%.3e") + ", max " + fixed(surface.max(), "%.3e") + " on " +
                    std::to_string(grid) + "x" + std::to_string(grid));
    if (nonnegative && surface.values.cwiseAbs().maxCoeff() <= kRTolerance) out << "R ≈ 0 everywhere\n";
    out << (report.failed() ? "check FAILED\n" : "all checks passed\n");
    return report.failed() ? kInvariant : kOk;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tomograms, tomographic entropies and entropic uncertainty surfaces of paraxial beams", "beamtomo"};
  app.require_subcommand(1);

  TomogramCommand tomogram;
  EntropyCommand entropy;
  RSurfaceCommand rsurface;
  ReconstructCommand reconstruct;
  CheckCommand check;
  SampleCommand sample_cmd;
  auto* c_tomogram = app.add_subcommand("tomogram", "Evaluate symplectic tomogram values");
  auto* c_entropy = app.add_subcommand("entropy", "Tomographic entropy or the position-momentum bound");
  auto* c_rsurface = app.add_subcommand("rsurface", "Scan R(theta1, theta2) over [0, pi)^2");
  auto* c_reconstruct = app.add_subcommand("reconstruct", "Recover psi(x) psi*(x') of a 1D HG mode from its tomogram");
  auto* c_check = app.add_subcommand("check", "Run the invariant suite on a mode or field");
  auto* c_sample = app.add_subcommand("sample", "Write an HG mode as a field file");
  tomogram.attach(c_tomogram);
  entropy.attach(c_entropy);
  rsurface.attach(c_rsurface);
  reconstruct.attach(c_reconstruct);
  check.attach(c_check);
  sample_cmd.attach(c_sample);

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (c_tomogram->parsed()) return tomogram.run(out);
    if (c_entropy->parsed()) return entropy.run(out);
    if (c_rsurface->parsed()) return rsurface.run(out, err);
    if (c_reconstruct->parsed()) return reconstruct.run(out);
    if (c_check->parsed()) return check.run(out);
    if (c_sample->parsed()) return sample_cmd.run();
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const NonConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kNonConvergence;
  } catch (const InvariantViolation& e) {
    err << "error: " << e.what() << '\n';
    return kInvariant;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }
  return kValidation;
}

}  // namespace beamtomo::cli
