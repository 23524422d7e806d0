#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "output.hpp"
#include "symberg/bergman.hpp"
#include "symberg/config.hpp"
#include "symberg/errors.hpp"
#include "symberg/expansion.hpp"
#include "symberg/selftest.hpp"

#ifndef SYMBERG_VERSION
#define SYMBERG_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace symberg;
using namespace symberg::cli;

namespace {

enum ExitCode { kOk = 0, kSelftestFailed = 1, kConfigError = 2, kDomainError = 3 };

struct RunConfig {
  std::string command;
  std::string model_path;
  std::string k_list;   // "8,16,24"
  std::string k_range;  // "5:30" or "5:30:5"
  std::string points = "0:0";
  int order = config::default_order;
  int quad_radial = config::default_quad_radial;
  int quad_angular = config::default_quad_angular;
  std::string out_dir;
  std::uint64_t seed = config::default_seed;
  std::string format = "csv";
  std::string filter;
  std::string sections = "0,1,2";
  bool flip_lambdaF = false;
  bool include_slow = false;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

int parse_int(const std::string& s, const std::string& what) {
  size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw ConfigError(what + ": '" + s + "' is not an integer");
  return v;
}

double parse_double(const std::string& s, const std::string& what) {
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw ConfigError(what + ": '" + s + "' is not a number");
  return v;
}

std::vector<int> k_values(const RunConfig& cfg) {
  if (!cfg.k_list.empty() && !cfg.k_range.empty()) throw ConfigError("give either --k or --k-range, not both");
  std::vector<int> ks;
  if (!cfg.k_list.empty()) {
    for (const std::string& t : split(cfg.k_list, ',')) ks.push_back(parse_int(t, "--k"));
  } else if (!cfg.k_range.empty()) {
    const std::vector<std::string> parts = split(cfg.k_range, ':');
    if (parts.size() < 2 || parts.size() > 3) throw ConfigError("--k-range: expected lo:hi or lo:hi:step");
    const int lo = parse_int(parts[0], "--k-range"), hi = parse_int(parts[1], "--k-range");
    const int step = parts.size() == 3 ? parse_int(parts[2], "--k-range") : 1;
    if (step <= 0) throw ConfigError("--k-range: step must be positive");
    for (int k = lo; k <= hi; k += step) ks.push_back(k);
  }
  if (ks.empty()) throw ConfigError("the k range is empty (use --k or --k-range)");
  for (int k : ks)
    if (k < 1) throw ConfigError("k must be at least 1");
  return ks;
}

// "re:im,re:im,..."; a bare number is a real point.
std::vector<cplx> point_values(const RunConfig& cfg) {
  std::vector<cplx> pts;
  for (const std::string& t : split(cfg.points, ',')) {
    const std::vector<std::string> p = split(t, ':');
    if (p.size() == 1) pts.emplace_back(parse_double(p[0], "--points"), 0.0);
    else if (p.size() == 2) pts.emplace_back(parse_double(p[0], "--points"), parse_double(p[1], "--points"));
    else throw ConfigError("--points: expected re:im entries separated by commas");
  }
  if (pts.empty()) throw ConfigError("--points: no points given");
  return pts;
}

BundleModel load_model(const RunConfig& cfg, bool global) {
  if (cfg.model_path.empty()) throw ConfigError("--model is required for '" + cfg.command + "'");
  std::ifstream in(cfg.model_path);
  if (!in) throw ConfigError("model file: cannot open '" + cfg.model_path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  BundleModel m = BundleModel::from_json(buf.str());
  if (global && m.kahler().kind == KahlerKind::flat_chart)
    throw ConfigError("model file: the flat_chart Kaehler form is local; '" + cfg.command +
                      "' needs a global model");
  return m;
}

void check_order(const RunConfig& cfg) {
  if (cfg.order < 0 || cfg.order > config::max_order)
    throw ConfigError("--order must be in 0.." + std::to_string(config::max_order));
}

Header make_header(const RunConfig& cfg) {
  Header h;
  h.command = cfg.command;
  h.version = SYMBERG_VERSION;
  h.seed = cfg.seed;
  return h;
}

// Writes to --out/<name> or to stdout. Output is assembled in memory and
// written once.
void emit(const RunConfig& cfg, const std::string& name, const std::string& text) {
  if (cfg.out_dir.empty()) {
    std::cout << text;
    return;
  }
  fs::create_directories(cfg.out_dir);
  const fs::path p = fs::path(cfg.out_dir) / name;
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + p.string() + "'");
  out << text;
}

void emit_table(const RunConfig& cfg, const Header& h, const Table& t,
                nlohmann::ordered_json json_extra = nlohmann::ordered_json::object()) {
  std::ostringstream os;
  if (cfg.format == "json") {
    nlohmann::ordered_json doc;
    doc["meta"] = json_meta(h);
    for (auto it = json_extra.begin(); it != json_extra.end(); ++it) doc[it.key()] = it.value();
    doc["rows"] = t.to_json();
    os << doc.dump(2) << "\n";
  } else {
    write_csv_header(os, h);
    t.write_csv(os);
  }
  emit(cfg, cfg.command + "." + cfg.format, os.str());
}

int chart_order(int N) { return std::max(2 * N + 4, 6); }

// ---------------------------------------------------------------- commands

int cmd_coeffs(const RunConfig& cfg) {
  check_order(cfg);
  const BundleModel model = load_model(cfg, false);
  const std::vector<int> ks = k_values(cfg);
  const std::vector<cplx> pts = point_values(cfg);
  Header h = make_header(cfg);
  h.extra = {{"model", model.id()}, {"order", std::to_string(cfg.order)}};
  Table t({"model", "x_re", "x_im", "k", "m", "recursion_norm", "closed_norm", "agreement", "scalar_defect"});
  for (cplx x : pts) {
    const ChartData chart = chart_from_model(model, x, chart_order(cfg.order));
    for (int k : ks) {
      for (const CoefficientRow& r : coefficient_report(chart, k, cfg.order)) {
        nlohmann::ordered_json extra;
        extra["recursion"] = json_matrix(r.recursion);
        if (r.closed.size() > 0) extra["closed"] = json_matrix(r.closed);
        t.add({model.id(), x.real(), x.imag(), static_cast<long long>(k), static_cast<long long>(r.m),
               r.recursion_norm, r.closed_norm, r.agreement, r.scalar_defect},
              extra);
      }
    }
  }
  emit_table(cfg, h, t);
  return kOk;
}

int cmd_recursion(const RunConfig& cfg) {
  check_order(cfg);
  const BundleModel model = load_model(cfg, false);
  const std::vector<int> ks = k_values(cfg);
  const std::vector<cplx> pts = point_values(cfg);
  Header h = make_header(cfg);
  h.extra = {{"model", model.id()}, {"order", std::to_string(cfg.order)}};
  Table t({"model", "x_re", "x_im", "k", "m", "op_norm"});
  for (cplx x : pts) {
    const ChartData chart = chart_from_model(model, x, chart_order(cfg.order));
    for (int k : ks) {
      const CoefficientTable table = coeff_recursion(chart, k, cfg.order);
      for (int m = 0; m <= cfg.order; ++m)
        t.add({model.id(), x.real(), x.imag(), static_cast<long long>(k), static_cast<long long>(m),
               op_norm(table.b[m])},
              {{"b", json_matrix(table.b[m])}});
    }
  }
  emit_table(cfg, h, t);
  return kOk;
}

int cmd_bergman(const RunConfig& cfg) {
  const BundleModel model = load_model(cfg, true);
  model.verify_griffiths_positive();
  const std::vector<int> ks = k_values(cfg);
  const std::vector<cplx> pts = point_values(cfg);
  const QuadratureRule quad = sphere_quadrature(model, cfg.quad_radial, cfg.quad_angular);
  std::mt19937_64 rng(cfg.seed);
  Header h = make_header(cfg);
  h.extra = {{"model", model.id()}, {"quadrature", quad.id()}};
  Table t({"model", "k", "x_re", "x_im", "d_k", "op_norm", "trace", "extremal_lower_bound"});
  for (int k : ks) {
    const BergmanSolver solver(model, k, quad);
    for (cplx x : pts) {
      const BergmanSample s = solver.at(x);
      const double lower = extremal_lower_bound(solver, x, 8, rng);
      t.add({model.id(), static_cast<long long>(k), x.real(), x.imag(),
             static_cast<long long>(solver.dimension()), s.op_norm, s.trace, lower},
            {{"B", json_matrix(s.B)}});
    }
  }
  emit_table(cfg, h, t);
  return kOk;
}

int cmd_compare(const RunConfig& cfg) {
  check_order(cfg);
  const BundleModel model = load_model(cfg, true);
  model.verify_griffiths_positive();
  const std::vector<int> ks = k_values(cfg);
  const std::vector<cplx> pts = point_values(cfg);
  const std::vector<CompareRow> rows =
      compare_expansion(model, ks, pts, cfg.order, cfg.quad_radial, cfg.quad_angular);
  Header h = make_header(cfg);
  const std::string quad_id = sphere_quadrature(model, cfg.quad_radial, cfg.quad_angular).id();
  h.extra = {{"model", model.id()},
             {"order", std::to_string(cfg.order)},
             {"quadrature", quad_id},
             {"gram_path", uses_diagonal_gram(model) ? "diagonal" : "full"}};
  Table t({"model", "k", "x_re", "x_im", "residual_op_norm", "b0k_norm", "fitted_exponent"});
  for (const CompareRow& r : rows)
    t.add({r.model, static_cast<long long>(r.k), r.x.real(), r.x.imag(), r.residual_op_norm, r.b0k_norm,
           r.fitted_exponent});
  emit_table(cfg, h, t);

  // Plot data: one file per point, k against log residual.
  const std::vector<DecaySeries> series = decay_series(rows);
  for (size_t p = 0; p < series.size(); ++p) {
    Header ph = h;
    ph.extra.push_back({"point", fmt(series[p].x.real()) + ":" + fmt(series[p].x.imag())});
    Table pt({"k", "log_k", "log_residual"});
    for (size_t i = 0; i < series[p].k.size(); ++i)
      pt.add({static_cast<long long>(series[p].k[i]), series[p].log_k[i], series[p].log_residual[i]});
    std::ostringstream os;
    write_csv_header(os, ph);
    pt.write_csv(os);
    const std::string name = "compare_plot_" + std::to_string(p) + ".dat";
    if (cfg.out_dir.empty()) std::cout << "\n# plot-data " << name << "\n";
    emit(cfg, name, os.str());
  }
  return kOk;
}

int cmd_rr(const RunConfig& cfg) {
  const BundleModel model = load_model(cfg, true);
  model.verify_griffiths_positive();
  const std::vector<int> ks = k_values(cfg);
  const RiemannRochConstants c =
      pin_riemann_roch(sphere_quadrature(BundleModel::fs_line(1), cfg.quad_radial, cfg.quad_angular));
  Header h = make_header(cfg);
  h.extra = {{"model", model.id()}, {"c1", fmt(c.c1)}, {"c2", fmt(c.c2)}};
  Table t({"model", "k", "d_k", "predicted", "error", "error_times_k_over_rk"});
  for (int k : ks) {
    const RiemannRochRecord r = riemann_roch_report(model, k, c, cfg.quad_radial, cfg.quad_angular);
    t.add({r.model, static_cast<long long>(r.k), static_cast<long long>(r.d_k), r.predicted, r.error,
           r.error_times_k_over_rk});
  }
  emit_table(cfg, h, t, {{"constants", {{"c1", c.c1}, {"c2", c.c2}}}});
  return kOk;
}

int cmd_reproduce(const RunConfig& cfg) {
  check_order(cfg);
  const BundleModel model = load_model(cfg, true);
  model.verify_griffiths_positive();
  const std::vector<int> ks = k_values(cfg);
  const std::vector<cplx> pts = point_values(cfg);
  std::vector<int> sections;
  for (const std::string& s : split(cfg.sections, ',')) sections.push_back(parse_int(s, "--sections"));
  if (sections.empty()) throw ConfigError("--sections: no sections given");
  Header h = make_header(cfg);
  h.extra = {{"model", model.id()}, {"order", std::to_string(cfg.order)}};
  Table t({"model", "k", "x_re", "x_im", "section", "residual"});
  for (int k : ks)
    for (cplx x : pts) {
      const std::vector<double> r = reproducing_check(model, k, cfg.order, x, sections);
      for (size_t i = 0; i < sections.size(); ++i)
        t.add({model.id(), static_cast<long long>(k), x.real(), x.imag(), static_cast<long long>(sections[i]),
               r[i]});
    }
  emit_table(cfg, h, t);
  return kOk;
}

int cmd_selftest(const RunConfig& cfg) {
  SelftestOptions o;
  o.filter = cfg.filter;
  o.seed = cfg.seed;
  o.include_slow = cfg.include_slow;
  o.debug.flip_lambdaF_sign = cfg.flip_lambdaF;
  const std::vector<SelftestResult> results = run_selftest(o);
  int failed = 0;
  for (const SelftestResult& r : results) {
    if (!r.passed) ++failed;
    std::printf("%s  %-10s %-55s value %-12.4g limit %-10.3g %8.3f s%s%s\n", r.passed ? "PASS" : "FAIL",
                r.module.c_str(), r.name.c_str(), r.value, r.limit, r.seconds, r.error.empty() ? "" : "  ",
                r.error.c_str());
  }
  std::printf("%zu checks, %d failed\n", results.size(), failed);
  return failed == 0 ? kOk : kSelftestFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bergman kernels of symmetric powers: direct computation and asymptotic expansion"};
  app.set_version_flag("--version", std::string("symberg ") + SYMBERG_VERSION);
  app.require_subcommand(1);
  RunConfig cfg;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed, "seed of the random stream")->capture_default_str();
  };
  auto model_opts = [&](CLI::App* sub) {
    sub->add_option("--model", cfg.model_path, "model JSON file")->required();
    sub->add_option("--k", cfg.k_list, "comma-separated tensor powers");
    sub->add_option("--k-range", cfg.k_range, "lo:hi or lo:hi:step");
    sub->add_option("--points", cfg.points, "re:im pairs separated by commas")->capture_default_str();
    sub->add_option("--out", cfg.out_dir, "output directory (default: stdout)");
    sub->add_option("--format", cfg.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    common(sub);
  };
  auto order_opt = [&](CLI::App* sub) {
    sub->add_option("--order", cfg.order, "expansion order N")->capture_default_str();
  };
  auto quad_opts = [&](CLI::App* sub) {
    sub->add_option("--quad-radial", cfg.quad_radial, "radial quadrature nodes")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--quad-angular", cfg.quad_angular, "angular quadrature nodes")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  };

  CLI::App* coeffs = app.add_subcommand("coeffs", "expansion coefficients: recursion against closed forms");
  model_opts(coeffs);
  order_opt(coeffs);
  CLI::App* recursion = app.add_subcommand("recursion", "expansion coefficients from the recursion");
  model_opts(recursion);
  order_opt(recursion);
  CLI::App* bergman = app.add_subcommand("bergman", "Bergman function by orthonormalized sections");
  model_opts(bergman);
  quad_opts(bergman);
  CLI::App* compare = app.add_subcommand("compare", "Bergman function against the truncated expansion");
  model_opts(compare);
  order_opt(compare);
  quad_opts(compare);
  CLI::App* rr = app.add_subcommand("rr", "Riemann-Roch after normalization pinning");
  model_opts(rr);
  quad_opts(rr);
  CLI::App* reproduce = app.add_subcommand("reproduce", "local reproducing property of the truncated kernel");
  model_opts(reproduce);
  order_opt(reproduce);
  reproduce->add_option("--sections", cfg.sections, "section indices")->capture_default_str();
  CLI::App* selftest = app.add_subcommand("selftest", "invariant suite over every module");
  common(selftest);
  selftest->add_option("--filter", cfg.filter, "run one module only");
  selftest->add_flag("--slow", cfg.include_slow, "include slow checks");
  selftest->add_flag("--flip-lambdaF", cfg.flip_lambdaF, "debug: flip the sign of Lambda F");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  cfg.command = app.get_subcommands().front()->get_name();

  try {
    if (cfg.command == "coeffs") return cmd_coeffs(cfg);
    if (cfg.command == "recursion") return cmd_recursion(cfg);
    if (cfg.command == "bergman") return cmd_bergman(cfg);
    if (cfg.command == "compare") return cmd_compare(cfg);
    if (cfg.command == "rr") return cmd_rr(cfg);
    if (cfg.command == "reproduce") return cmd_reproduce(cfg);
    return cmd_selftest(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const InvalidInput& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kDomainError;
  } catch (const TruncationError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kDomainError;
  } catch (const NonDivisibleError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kDomainError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
}
