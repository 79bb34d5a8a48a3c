// Command-line driver: single solves, convergence studies, trace constants,
// the Green's identity check, and load-data export/import.
#include <omp.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "kls/numio.hpp"
#include "kls/verification.hpp"
#include "kls/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNumeric = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

int exit_code_for(kls::ErrorKind k) {
  switch (k) {
    case kls::ErrorKind::NotSpd:
    case kls::ErrorKind::Eigen:
    case kls::ErrorKind::SingularSurface: return kExitSolver;
    case kls::ErrorKind::InsufficientData: return kExitNumeric;
    default: return kExitConfig;
  }
}

int report_error(const std::string& kind, const std::string& message, int code) {
  json j;
  j["error"] = kind;
  j["message"] = message;
  j["exit_code"] = code;
  j["version"] = kls::version_string();
  std::cerr << j.dump() << '\n';
  return code;
}

struct Options {
  kls::StudyConfig study;
  std::string out = "kls_out";
  int jobs = 0;
  int problem = 1, degree = 2, mesh = 4;
  std::uint64_t seed = 20240611;
  int pairs = 5;
  std::string file;
};

kls::ErsatzVariant parse_variant(const std::string& s) {
  if (s == "consistent") return kls::ErsatzVariant::Consistent;
  if (s == "inconsistent") return kls::ErsatzVariant::Inconsistent;
  throw kls::Error(kls::ErrorKind::Validation, "variant must be 'consistent' or 'inconsistent', got '" + s + "'");
}

kls::TraceConvention parse_convention(const std::string& s) {
  if (s == "proved") return kls::TraceConvention::Proved;
  if (s == "paper-literal") return kls::TraceConvention::PaperLiteral;
  throw kls::Error(kls::ErrorKind::Validation, "convention must be 'proved' or 'paper-literal', got '" + s + "'");
}

const char* variant_name(kls::ErsatzVariant v) {
  return v == kls::ErsatzVariant::Consistent ? "consistent" : "inconsistent";
}

// Config file values; command-line flags given explicitly are applied later
// and win.
void apply_config_file(const std::string& path, Options& o) {
  std::ifstream in(path);
  if (!in) throw kls::Error(kls::ErrorKind::Validation, "cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw kls::Error(kls::ErrorKind::Validation, std::string("config file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw kls::Error(kls::ErrorKind::Validation, "config file must hold a JSON object");
  std::vector<std::string> bad;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    try {
      if (k == "problems") o.study.problems = v.get<std::vector<int>>();
      else if (k == "degrees") o.study.degrees = v.get<std::vector<int>>();
      else if (k == "meshes") o.study.meshes = v.get<std::vector<int>>();
      else if (k == "gammas") o.study.gammas = v.get<std::array<double, 4>>();
      else if (k == "quadrature_points") o.study.quadrature_points = v.get<int>();
      else if (k == "variant") o.study.variant = parse_variant(v.get<std::string>());
      else if (k == "convention") o.study.convention = parse_convention(v.get<std::string>());
      else if (k == "trace_mesh") o.study.trace_mesh = v.get<int>();
      else if (k == "cache_dir") o.study.cache_dir = v.get<std::string>();
      else if (k == "load_data_dir") o.study.load_data_dir = v.get<std::string>();
      else if (k == "force_trace") o.study.force_trace = v.get<bool>();
      else if (k == "refinement_iters") o.study.refinement_iters = v.get<int>();
      else if (k == "out") o.out = v.get<std::string>();
      else if (k == "jobs") o.jobs = v.get<int>();
      else if (k == "problem") o.problem = v.get<int>();
      else if (k == "degree") o.degree = v.get<int>();
      else if (k == "mesh") o.mesh = v.get<int>();
      else if (k == "seed") o.seed = v.get<std::uint64_t>();
      else if (k == "pairs") o.pairs = v.get<int>();
      else bad.push_back("unknown key '" + k + "'");
    } catch (const json::exception&) {
      bad.push_back("key '" + k + "' has the wrong type");
    } catch (const kls::Error& e) {
      bad.push_back(e.what());
    }
  }
  if (!bad.empty()) {
    std::string msg = "invalid config file:";
    for (const auto& b : bad) msg += "\n  - " + b;
    throw kls::Error(kls::ErrorKind::Validation, msg);
  }
}

json config_json(const Options& o) {
  json j;
  j["problems"] = o.study.problems;
  j["degrees"] = o.study.degrees;
  j["meshes"] = o.study.meshes;
  j["gammas"] = o.study.gammas;
  j["quadrature_points"] = o.study.quadrature_points;
  j["variant"] = variant_name(o.study.variant);
  j["convention"] = kls::convention_name(o.study.convention);
  j["trace_mesh"] = o.study.trace_mesh;
  j["refinement_iters"] = o.study.refinement_iters;
  j["load_data_dir"] = o.study.load_data_dir;
  j["problem"] = o.problem;
  j["degree"] = o.degree;
  j["mesh"] = o.mesh;
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  const std::string tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw kls::Error(kls::ErrorKind::Validation, "cannot write '" + tmp + "'");
    out << text;
  }
  fs::rename(tmp, path);
}

std::string cell_tag(const Options& o) {
  std::ostringstream os;
  os << "P" << o.problem << "_p" << o.degree << "_m" << o.mesh << "_" << variant_name(o.study.variant);
  return os.str();
}

// Single-cell settings share the study validation so that every offense is listed.
void validate_cell(const Options& o) {
  kls::StudyConfig c = o.study;
  c.problems = {o.problem};
  c.degrees = {o.degree};
  c.meshes = {o.mesh};
  c.validate();
}

std::string header_comment(const Options& o) {
  return "# kls " + std::string(kls::version_string()) + " config " + config_json(o).dump() + "\n";
}

struct CellSetup {
  kls::Discretization disc;
  kls::PenaltyConfig pen;
  kls::TraceConstants trace;
};

CellSetup setup_cell(const Options& o) {
  const kls::ProblemSpec spec = kls::get_problem(o.problem);
  kls::TraceConstants tc = kls::cached_trace_constants(o.study.cache_dir, spec, o.degree, o.study.trace_mesh,
                                                       o.study.variant, o.study.force_trace);
  kls::PenaltyConfig pen = kls::compute_penalties(tc, o.study.gammas, o.study.convention);
  return {kls::make_discretization(spec, o.degree, o.mesh, o.study.quadrature_points), pen, tc};
}

int solve_with(const Options& o, const CellSetup& cs, const kls::LoadData& loads) {
  kls::AssemblyOptions opt;
  opt.variant = o.study.variant;
  const kls::AssembledSystem sys = kls::assemble(cs.disc, &loads, cs.pen, opt);
  const kls::SolveReport rep = kls::solve_spd(sys.K, sys.F, o.study.refinement_iters);
  const kls::ErrorNorms n = kls::error_norms(cs.disc, rep.x, cs.pen);

  const fs::path dir = fs::path(o.out) / ("solve_" + cell_tag(o));
  std::ostringstream sol;
  sol << header_comment(o) << "basis,ux,uy,uz\n";
  const auto coeffs = kls::coefficients_from_dofs(rep.x);
  for (size_t k = 0; k < coeffs.size(); ++k)
    sol << k << ',' << kls::format_double(coeffs[k][0]) << ',' << kls::format_double(coeffs[k][1]) << ','
        << kls::format_double(coeffs[k][2]) << '\n';
  write_text(dir / "solution.csv", sol.str());

  const kls::RecoveredMultiplier mult = kls::recover_multiplier(cs.disc, rep.x, loads, cs.pen, o.study.variant);
  std::ostringstream mo;
  mo << header_comment(o) << "location,xi1,xi2,force_x,force_y,force_z,moment\n";
  const char* edge_names[] = {"S", "E", "N", "W"};
  for (int e = 0; e < 4; ++e)
    for (const auto& p : mult.edges[e])
      mo << edge_names[e] << ',' << kls::format_double(p.xi1) << ',' << kls::format_double(p.xi2) << ','
         << kls::format_double(p.force[0]) << ',' << kls::format_double(p.force[1]) << ','
         << kls::format_double(p.force[2]) << ',' << kls::format_double(p.moment) << '\n';
  for (const auto& info : kls::corner_table()) {
    const int c = static_cast<int>(info.corner);
    if (!mult.corner_active[c]) continue;
    mo << kls::corner_name(info.corner) << ',' << kls::format_double(info.xi1) << ','
       << kls::format_double(info.xi2) << ",,,," << kls::format_double(mult.corners[c]) << '\n';
  }
  write_text(dir / "multiplier.csv", mo.str());

  std::ostringstream row;
  row << "problem,degree,mesh,variant,l2,h1,energy,triple,residual\n"
      << o.problem << ',' << o.degree << ',' << o.mesh << ',' << variant_name(o.study.variant) << ','
      << kls::format_double(n.l2) << ',' << kls::format_double(n.h1) << ',' << kls::format_double(n.energy) << ','
      << kls::format_double(n.triple) << ',' << kls::format_double(rep.residuals.back()) << '\n';
  write_text(dir / "norms.csv", header_comment(o) + row.str());
  std::cout << row.str();
  return kExitOk;
}

int cmd_solve(const Options& o) {
  validate_cell(o);
  const CellSetup cs = setup_cell(o);
  kls::LoadData loads;
  if (o.study.load_data_dir.empty()) {
    loads = kls::generate_load_data(cs.disc.spec, cs.disc.rule, o.degree);
  } else {
    std::ostringstream name;
    name << "load_P" << o.problem << "_m" << o.mesh << "_q" << cs.disc.rule.nq << ".json";
    loads = kls::import_load_data((fs::path(o.study.load_data_dir) / name.str()).string(), o.problem, cs.disc.rule);
  }
  return solve_with(o, cs, loads);
}

int cmd_import(const Options& o) {
  validate_cell(o);
  if (o.file.empty()) throw kls::Error(kls::ErrorKind::Validation, "import-data needs --file");
  const CellSetup cs = setup_cell(o);
  const kls::LoadData loads = kls::import_load_data(o.file, o.problem, cs.disc.rule);
  return solve_with(o, cs, loads);
}

int cmd_gen_data(const Options& o) {
  o.study.validate();
  for (int p : o.study.problems) {
    const kls::ProblemSpec spec = kls::get_problem(p);
    for (int m : o.study.meshes)
      for (int d : o.study.degrees) {
        const kls::Discretization disc = kls::make_discretization(spec, d, m, o.study.quadrature_points);
        std::ostringstream name;
        name << "load_P" << p << "_m" << m << "_q" << disc.rule.nq << ".json";
        const fs::path path = fs::path(o.out) / "load_data" / name.str();
        if (fs::exists(path)) continue;  // the grid depends only on (problem, mesh, nq)
        fs::create_directories(path.parent_path());
        kls::export_load_data(path.string(), kls::generate_load_data(spec, disc.rule, d));
        std::cout << path.string() << '\n';
      }
  }
  return kExitOk;
}

int cmd_study(const Options& o) {
  const kls::ConvergenceReport r = kls::run_study(o.study);
  kls::write_report(r, (fs::path(o.out) / "study").string());
  int failed = 0;
  for (const auto& c : r.cells)
    if (!c.ok) {
      ++failed;
      std::cerr << "cell P" << c.problem << " p=" << c.degree << " m=" << c.mesh << " failed: " << c.error << '\n';
    }
  std::cout << "problem,degree,norm,slope\n";
  for (const auto& s : r.rates)
    std::cout << s.problem << ',' << s.degree << ',' << s.norm << ','
              << (s.ok ? kls::format_double(s.fit.slope) : std::string("n/a")) << '\n';
  std::cout << "report written to " << (fs::path(o.out) / "study").string() << '\n';
  return failed ? kExitNumeric : kExitOk;
}

int cmd_trace(const Options& o) {
  validate_cell(o);
  const kls::ProblemSpec spec = kls::get_problem(o.problem);
  const kls::TraceConstants tc =
      kls::cached_trace_constants(o.study.cache_dir, spec, o.degree, o.mesh, o.study.variant, o.study.force_trace);
  json j;
  j["version"] = kls::version_string();
  j["config"] = config_json(o);
  j["problem"] = o.problem;
  j["degree"] = o.degree;
  j["mesh"] = o.mesh;
  json lam = json::array(), act = json::array();
  for (int i = 0; i < 5; ++i) {
    lam.push_back(kls::format_double(tc.lambda_max[i]));
    act.push_back(tc.active[i]);
  }
  j["lambda_max"] = lam;
  j["active"] = act;
  for (auto conv : {kls::TraceConvention::Proved, kls::TraceConvention::PaperLiteral}) {
    const kls::PenaltyConfig pen = kls::compute_penalties(tc, o.study.gammas, conv);
    json c, cp = json::array();
    for (double v : pen.ctr) c["ctr"].push_back(kls::format_double(v));
    for (double v : pen.cpen()) cp.push_back(kls::format_double(v));
    c["cpen"] = cp;
    j[kls::convention_name(conv)] = c;
  }
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_verify_identity(const Options& o) {
  validate_cell(o);
  if (o.pairs < 1) throw kls::Error(kls::ErrorKind::Validation, "pairs must be positive");
  const auto res =
      kls::verify_green_identity(kls::get_problem(o.problem), o.degree, o.mesh, o.pairs, o.seed, o.study.variant);
  std::cout << header_comment(o) << "pair,a,rhs,residual,tolerance,pass\n";
  bool all = true;
  for (size_t i = 0; i < res.size(); ++i) {
    const auto& r = res[i];
    std::cout << i << ',' << kls::format_double(r.a) << ',' << kls::format_double(r.rhs) << ','
              << kls::format_double(r.residual) << ',' << kls::format_double(r.tolerance) << ','
              << (r.pass ? "yes" : "no") << '\n';
    all = all && r.pass;
  }
  return all ? kExitOk : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nitsche Kirchhoff-Love shell solver and verification suite"};
  app.set_version_flag("--version", std::string(kls::version_string()));
  app.require_subcommand(1);

  Options o;
  std::string config_path, variant = "consistent", convention = "proved";
  std::vector<int> problems, degrees, meshes;
  std::vector<double> gammas;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file; explicit flags override its values");
    sub->add_option("--out", o.out, "Output directory (default kls_out, or $KLS_OUT)");
    sub->add_option("--jobs", o.jobs, "OpenMP threads for assembly and integration (0 = runtime default)");
    sub->add_option("--variant", variant, "Ersatz force: consistent or inconsistent");
    sub->add_option("--convention", convention, "Trace constant scaling: proved or paper-literal");
    sub->add_option("--gammas", gammas, "Four penalty factors gamma_1..gamma_4")->expected(4);
    sub->add_option("--quadrature", o.study.quadrature_points, "Gauss points per element direction (0 = default)");
    sub->add_option("--trace-mesh", o.study.trace_mesh, "Mesh on which trace constants are computed");
    sub->add_option("--cache-dir", o.study.cache_dir, "Trace-constant cache directory");
    sub->add_option("--load-data-dir", o.study.load_data_dir, "Read load files from here instead of generating");
    sub->add_option("--refinement", o.study.refinement_iters, "Iterative refinement steps");
    sub->add_flag("--force-trace", o.study.force_trace, "Recompute cached trace constants");
  };
  auto add_cell = [&](CLI::App* sub) {
    sub->add_option("--problem", o.problem, "Problem id 1..8");
    sub->add_option("--degree", o.degree, "Polynomial degree");
    sub->add_option("--mesh", o.mesh, "Elements per side");
  };

  CLI::App* solve = app.add_subcommand("solve", "Solve one problem and print the four error norms");
  add_common(solve);
  add_cell(solve);
  CLI::App* study = app.add_subcommand("study", "Convergence sweep with CSV, JSON and SVG reports");
  add_common(study);
  study->add_option("--problems", problems, "Problem ids");
  study->add_option("--degrees", degrees, "Degrees");
  study->add_option("--meshes", meshes, "Elements per side");
  CLI::App* trace = app.add_subcommand("trace-constants", "Largest finite eigenvalues and penalties as JSON");
  add_common(trace);
  add_cell(trace);
  CLI::App* ident = app.add_subcommand("verify-identity", "Green's identity residuals for random discrete fields");
  add_common(ident);
  add_cell(ident);
  ident->add_option("--pairs", o.pairs, "Number of random field pairs");
  ident->add_option("--seed", o.seed, "Random seed");
  CLI::App* gen = app.add_subcommand("gen-data", "Export load files for problems x meshes");
  add_common(gen);
  gen->add_option("--problems", problems, "Problem ids");
  gen->add_option("--degrees", degrees, "Degrees (select the quadrature grid)");
  gen->add_option("--meshes", meshes, "Elements per side");
  CLI::App* imp = app.add_subcommand("import-data", "Solve one problem with loads read from a file");
  add_common(imp);
  add_cell(imp);
  imp->add_option("--file", o.file, "Load file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("Validation", e.what(), kExitConfig);
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    // Precedence: defaults, then $KLS_OUT, then the config file, then flags.
    const Options flags = o;
    Options merged;
    if (const char* env = std::getenv("KLS_OUT"); env && *env) merged.out = env;
    if (!config_path.empty()) apply_config_file(config_path, merged);
    auto given = [&](const char* name) { return sub->get_option_no_throw(name) && sub->count(name) > 0; };
    if (given("--out")) merged.out = flags.out;
    if (given("--jobs")) merged.jobs = flags.jobs;
    if (given("--variant")) merged.study.variant = parse_variant(variant);
    if (given("--convention")) merged.study.convention = parse_convention(convention);
    if (given("--gammas")) std::copy(gammas.begin(), gammas.end(), merged.study.gammas.begin());
    if (given("--quadrature")) merged.study.quadrature_points = flags.study.quadrature_points;
    if (given("--trace-mesh")) merged.study.trace_mesh = flags.study.trace_mesh;
    if (given("--cache-dir")) merged.study.cache_dir = flags.study.cache_dir;
    if (given("--load-data-dir")) merged.study.load_data_dir = flags.study.load_data_dir;
    if (given("--refinement")) merged.study.refinement_iters = flags.study.refinement_iters;
    if (given("--force-trace")) merged.study.force_trace = true;
    if (given("--problem")) merged.problem = flags.problem;
    if (given("--degree")) merged.degree = flags.degree;
    if (given("--mesh")) merged.mesh = flags.mesh;
    if (given("--pairs")) merged.pairs = flags.pairs;
    if (given("--seed")) merged.seed = flags.seed;
    if (given("--file")) merged.file = flags.file;
    if (given("--problems")) merged.study.problems = problems;
    if (given("--degrees")) merged.study.degrees = degrees;
    if (given("--meshes")) merged.study.meshes = meshes;
    if (merged.jobs < 0) throw kls::Error(kls::ErrorKind::Validation, "jobs must be non-negative");
    if (merged.jobs > 0) omp_set_num_threads(merged.jobs);

    const std::string name = sub->get_name();
    if (name == "solve") return cmd_solve(merged);
    if (name == "study") return cmd_study(merged);
    if (name == "trace-constants") return cmd_trace(merged);
    if (name == "verify-identity") return cmd_verify_identity(merged);
    if (name == "gen-data") return cmd_gen_data(merged);
    return cmd_import(merged);
  } catch (const kls::Error& e) {
    const int code = exit_code_for(e.kind());
    return report_error(kls::to_string(e.kind()), e.what(), code);
  } catch (const std::exception& e) {
    return report_error("Internal", e.what(), kExitSolver);
  }
}
