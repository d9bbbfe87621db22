// Command-line front end: density/measure evaluation, verification reports,
// path counting, identity suites, Monte Carlo simulation.

#include <clocale>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bmv/core.hpp"
#include "bmv/density.hpp"
#include "bmv/identities.hpp"
#include "bmv/json_io.hpp"
#include "bmv/mcsim.hpp"
#include "bmv/paths.hpp"
#include "bmv/verify.hpp"

namespace {

using nlohmann::json;

constexpr const char* kVersion = "bmv 0.1.0";
constexpr int kSchemaVersion = 1;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) bmv::raise(bmv::errc::bad_input, "cannot open output file: " + out_path);
  out << text;
}

struct CommonOpts {
  std::string problem_path;
  std::string out_path;
  std::string format = "csv";
  int grid = 200;
  int nmax = 20;
  double tol = 1e-10;
};

json config_json(const CommonOpts& c, const json& extra = {}) {
  json j;
  j["problem"] = c.problem_path;
  j["grid"] = c.grid;
  j["nmax"] = c.nmax;
  j["tol"] = c.tol;
  j["format"] = c.format;
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  return j;
}

std::string csv_header(const json& config, const std::string& columns) {
  std::ostringstream os;
  os << "# " << kVersion << " schema=" << kSchemaVersion << "\n";
  os << "# config: " << config.dump() << "\n";
  os << columns << "\n";
  return os.str();
}

json artifact_shell(const json& config) {
  json j;
  j["tool"] = kVersion;
  j["schema_version"] = kSchemaVersion;
  j["config"] = config;
  return j;
}

bmv::PsiMethod parse_method(const std::string& m) {
  if (m == "bruteforce") return bmv::PsiMethod::bruteforce;
  if (m == "le12") return bmv::PsiMethod::le12;
  if (m == "le13") return bmv::PsiMethod::le13;
  bmv::raise(bmv::errc::bad_input, "unknown method: " + m + " (expected bruteforce|le12|le13)");
}

std::vector<double> parse_z_list(const std::string& zs) {
  std::vector<double> out;
  std::stringstream ss(zs);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stod(tok));
  }
  if (out.empty()) bmv::raise(bmv::errc::bad_input, "empty z list");
  return out;
}

int run_density(const CommonOpts& c, const std::string& method, bool with_atoms) {
  bmv::BMVProblem p = bmv::load_problem(c.problem_path);
  bmv::TruncationPolicy tp;
  tp.n_max = c.nmax;
  tp.tol = c.tol;
  bmv::GridSpec grid;
  grid.points_per_interval = c.grid;
  bmv::SignedMeasure m = bmv::build_measure(p, grid, tp, parse_method(method));

  json cfg = config_json(c, {{"method", method}, {"command", with_atoms ? "measure" : "density"}});
  if (with_atoms || c.format == "json") {
    json art = artifact_shell(cfg);
    for (const auto& [loc, w] : m.atoms) art["atoms"].push_back({{"location", loc}, {"weight", w}});
    art["support"] = {m.support_lo, m.support_hi};
    art["breakpoints"] = m.breakpoints;
    for (std::size_t i = 0; i < m.xs.size(); ++i)
      art["density"].push_back({{"x", m.xs[i]},
                                {"interval", m.interval_tag[i] == 0 ? "lower" : "upper"},
                                {"psi", m.psis[i]},
                                {"tail_bound", m.tail_bounds[i]}});
    write_text(c.out_path, art.dump(2) + "\n");
  } else {
    std::ostringstream os;
    os << csv_header(cfg, "x,interval,psi,tail_bound");
    for (std::size_t i = 0; i < m.xs.size(); ++i)
      os << fmt17(m.xs[i]) << "," << (m.interval_tag[i] == 0 ? "lower" : "upper") << ","
         << fmt17(m.psis[i]) << "," << fmt17(m.tail_bounds[i]) << "\n";
    write_text(c.out_path, os.str());
  }
  return 0;
}

int run_transform_check(const CommonOpts& c, const std::string& zs, const std::string& method) {
  bmv::BMVProblem p = bmv::load_problem(c.problem_path);
  std::vector<double> z_grid = parse_z_list(zs);
  bmv::TruncationPolicy tp;
  tp.n_max = c.nmax;
  tp.tol = c.tol;
  bmv::GridSpec grid;
  grid.kind = bmv::GridSpec::Kind::gauss;
  grid.points_per_interval = std::max(64, c.grid);
  bmv::SignedMeasure m = bmv::build_measure(p, grid, tp, parse_method(method));

  json cfg = config_json(c, {{"command", "transform-check"}, {"z", zs}, {"method", method}});
  json art = artifact_shell(cfg);
  double max_rel = 0;
  for (double z : z_grid) {
    double lap = bmv::laplace_of_measure(m, z);
    double tr = bmv::trace_exp(p, z);
    double rel = std::abs(lap - tr) / std::abs(tr);
    max_rel = std::max(max_rel, rel);
    art["laplace_roundtrip"].push_back(
        {{"z", z}, {"laplace", lap}, {"trace_exp", tr}, {"rel_error", rel}});
  }
  art["max_rel_error"] = max_rel;

  bmv::InvarianceReport inv = bmv::invariance_checks(p, z_grid);
  art["invariance"] = {{"a_shift", inv.max_rel_a_shift},
                       {"b_shift", inv.max_rel_b_shift},
                       {"permutation", inv.max_rel_permutation},
                       {"roundtrip", inv.max_rel_roundtrip},
                       {"ok", inv.ok()}};

  std::vector<double> bz;
  for (double z = 0.0; z <= 10.0; z += 0.5) bz.push_back(z);
  bmv::BernsteinReport br = bmv::bernstein_checks(p, bz);
  art["bernstein"] = {{"all_signs_ok", br.all_signs_ok},
                      {"max_dphi_mismatch", br.max_dphi_mismatch},
                      {"max_d2phi_mismatch", br.max_d2phi_mismatch}};
  write_text(c.out_path, art.dump(2) + "\n");
  bool ok = max_rel <= 1e-5 && inv.ok() && br.all_signs_ok && br.max_dphi_mismatch <= 1e-6;
  return ok ? 0 : 3;
}

int run_simulate(const CommonOpts& c, double z, long long samples, unsigned long long seed,
                 int streams, bool histogram, int bins) {
  bmv::BMVProblem p = bmv::load_problem(c.problem_path);
  bmv::MCConfig cfg;
  cfg.samples = samples;
  cfg.seed = seed;
  cfg.streams = streams;
  json jcfg = config_json(c, {{"command", "simulate"},
                              {"z", z},
                              {"samples", samples},
                              {"seed", seed},
                              {"streams", streams}});
  if (histogram) {
    bmv::CanonicalForm cf = bmv::canonicalize(p);
    bmv::HistogramResult hr = bmv::density_histogram(cf, bins, cfg);
    jcfg["bins"] = bins;
    std::ostringstream os;
    os << csv_header(jcfg, "bin_lo,bin_hi,density,std_error");
    for (std::size_t i = 0; i + 1 < hr.edges.size(); ++i)
      os << fmt17(hr.edges[i]) << "," << fmt17(hr.edges[i + 1]) << "," << fmt17(hr.density[i])
         << "," << fmt17(hr.density_se[i]) << "\n";
    write_text(c.out_path, os.str());
    return 0;
  }
  bmv::MCEstimate est = bmv::fk_trace_estimate(p, z, cfg);
  double exact = bmv::trace_exp(p, z);
  json art = artifact_shell(jcfg);
  art["estimate"] = est.estimate;
  art["std_error"] = est.std_error;
  art["exact"] = exact;
  art["sigmas"] = est.std_error > 0 ? std::abs(est.estimate - exact) / est.std_error : 0.0;
  write_text(c.out_path, art.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::setlocale(LC_ALL, "C");  // '.' decimal point in every artifact
  CLI::App app{"Signed spectral measures of 3x3 trace exponentials: construction, "
               "positivity certificates, and cross-validation"};
  app.require_subcommand(1);

  CommonOpts c;
  std::string method = "le12";
  std::string zs = "0,0.5,1,2,5";
  double z_single = 0.7;
  long long samples = 1'000'000;
  unsigned long long seed = 42;
  int streams = 8;
  bool histogram = false;
  int bins = 64;
  double eps = 0.1;
  int pk = 1, pl = 0, pm = 0, pd = 3, pn = 2;
  std::string suite = "lereps";

  auto add_common = [&](CLI::App* cmd, bool needs_problem) {
    if (needs_problem) cmd->add_option("--problem", c.problem_path, "problem JSON file")->required();
    cmd->add_option("--out", c.out_path, "output path (default stdout)");
    cmd->add_option("--format", c.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--grid", c.grid, "grid points per interval");
    cmd->add_option("--nmax", c.nmax, "loop-length truncation");
    cmd->add_option("--tol", c.tol, "series tolerance");
  };

  CLI::App* density = app.add_subcommand("density", "sample the absolutely continuous density");
  add_common(density, true);
  density->add_option("--method", method, "bruteforce|le12|le13");

  CLI::App* measure = app.add_subcommand("measure", "atoms plus sampled density as JSON");
  add_common(measure, true);
  measure->add_option("--method", method, "bruteforce|le12|le13");

  CLI::App* tcheck = app.add_subcommand("transform-check",
                                        "Laplace round trip, invariances, derivative signs");
  add_common(tcheck, true);
  tcheck->add_option("--z", zs, "comma-separated z values");
  tcheck->add_option("--method", method, "bruteforce|le12|le13");

  CLI::App* paths = app.add_subcommand("paths", "favorable path counting and enumeration");
  CLI::App* pcount = paths->add_subcommand("count", "closed-form count for (k, l, m)");
  pcount->add_option("--k", pk, "visits to state 1")->required();
  pcount->add_option("--l", pl, "jumps along 1-3")->required();
  pcount->add_option("--m", pm, "jumps along 2-3")->required();
  CLI::App* penum = paths->add_subcommand("enum", "stream all favorable paths");
  penum->add_option("--d", pd, "number of states")->required();
  penum->add_option("--n", pn, "path length")->required();
  paths->require_subcommand(1);

  CLI::App* ident = app.add_subcommand("identities", "hypergeometric identity suites");
  ident->add_option("--suite", suite, "gauss|pfaff|lemma5|lebasic|lereps")->required();
  std::string ident_grid = "default";
  ident->add_option("--grid", ident_grid, "grid selector (only 'default')");
  ident->add_option("--out", c.out_path, "output path (default stdout)");

  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo trace estimate / histogram");
  add_common(simulate, true);
  simulate->add_option("--z", z_single, "Laplace variable");
  simulate->add_option("--samples", samples, "number of trajectories");
  simulate->add_option("--seed", seed, "master seed");
  simulate->add_option("--streams", streams, "independent RNG streams");
  simulate->add_flag("--histogram", histogram, "emit the occupation histogram");
  simulate->add_option("--bins", bins, "histogram bins");

  CLI::App* certify = app.add_subcommand("certify", "positivity certificate");
  add_common(certify, true);

  CLI::App* ce = app.add_subcommand("counterexample", "first-conjecture counterexample table");
  ce->add_option("--eps", eps, "perturbation size (0, 0.3]");
  ce->add_option("--grid", c.grid, "grid points on (0,1)");
  ce->add_option("--nmax", c.nmax, "loop-length truncation");
  ce->add_option("--out", c.out_path, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (density->parsed()) return run_density(c, method, false);
    if (measure->parsed()) return run_density(c, method, true);
    if (tcheck->parsed()) return run_transform_check(c, zs, method);
    if (paths->parsed()) {
      if (pcount->parsed()) {
        bmv::PathCount out = bmv::count_paths(pk, pl, pm);
        std::cout << "P1=" << bmv::to_string(out.p1) << " P=" << bmv::to_string(out.p) << "\n";
        return 0;
      }
      for (const auto& g : bmv::enumerate_paths(pd, pn)) {
        for (std::size_t i = 0; i < g.size(); ++i)
          std::cout << g[i] << (i + 1 < g.size() ? ' ' : '\n');
      }
      return 0;
    }
    if (ident->parsed()) {
      if (ident_grid != "default") bmv::raise(bmv::errc::bad_input, "only --grid default exists");
      bmv::IdentityReport rep = bmv::run_identity_suite(suite);
      json art = artifact_shell({{"command", "identities"}, {"suite", suite}, {"grid", ident_grid}});
      art["cases"] = rep.cases;
      art["max_error"] = rep.max_error;
      art["min_kernel"] = rep.min_kernel;
      art["threshold"] = rep.threshold;
      art["worst_case"] = rep.worst_case;
      art["passed"] = rep.passed();
      write_text(c.out_path, art.dump(2) + "\n");
      return rep.passed() ? 0 : 3;
    }
    if (simulate->parsed())
      return run_simulate(c, z_single, samples, seed, streams, histogram, bins);
    if (certify->parsed()) {
      bmv::BMVProblem p = bmv::load_problem(c.problem_path);
      bmv::Certificate cert = bmv::certificate(p);
      json art = artifact_shell(config_json(c, {{"command", "certify"}}));
      art["verdict"] = bmv::to_string(cert.verdict);
      art["reasons"] = json::array();
      for (auto r : cert.reasons) art["reasons"].push_back(bmv::to_string(r));
      art["condition_values"] = {{"cond1_lower", cert.cond1_lower},
                                 {"cond1_upper", cert.cond1_upper},
                                 {"cond2", cert.cond2},
                                 {"cond2_b1zero", cert.cond2_b1zero}};
      write_text(c.out_path, art.dump(2) + "\n");
      return 0;
    }
    if (ce->parsed()) {
      std::vector<double> xs;
      for (int i = 0; i < c.grid; ++i) xs.push_back((i + 0.5) / c.grid);
      bmv::CounterexampleReport rep = bmv::counterexample(eps, xs, c.nmax);
      json cfg = {{"command", "counterexample"}, {"eps", eps}, {"grid", c.grid}, {"nmax", c.nmax}};
      std::ostringstream os;
      os << csv_header(cfg, "x,ratio,poly");
      for (const auto& pt : rep.points)
        os << fmt17(pt.x) << "," << fmt17(pt.ratio) << "," << fmt17(pt.poly) << "\n";
      write_text(c.out_path, os.str());
      return 0;
    }
  } catch (const bmv::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return bmv::is_validation(e.code()) ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
