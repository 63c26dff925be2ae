// wisq: command-line front end for the weighted intrinsic square function library.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#ifdef WISQ_CLI11_PACKAGE
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif
#include <nlohmann/json.hpp>

#include "wisq/atoms.hpp"
#include "wisq/dictionary_io.hpp"
#include "wisq/harness/config.hpp"
#include "wisq/harness/report.hpp"
#include "wisq/harness/suites.hpp"
#include "wisq/intrinsic.hpp"
#include "wisq/weights.hpp"

namespace fs = std::filesystem;
using namespace wisq;
using namespace wisq::harness;

namespace {

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::optional<int> points;
  std::optional<int> dict_size;
  std::string format = "json";
  std::optional<unsigned> threads;
};

ExperimentConfig resolve(const GlobalOptions& g) {
  ExperimentConfig c = g.config.empty() ? config_from_json(nlohmann::json::object()) : load_config(g.config);
  if (g.seed) c.seed = *g.seed;
  if (!g.out_dir.empty()) c.out_dir = g.out_dir;
  if (g.points) c.output.points = *g.points;
  if (g.dict_size) c.dictionary.size = *g.dict_size;
  if (g.threads) c.threads = *g.threads;
  c.validate();
  return c;
}

std::string fmt(double v) { return harness::detail::csv_number(v); }

int cmd_apconst(const GlobalOptions& g, const std::vector<double>& ps) {
  const ExperimentConfig c = resolve(g);
  const Weight w = c.weight_function();
  const CubeFamily fam = screen_family(c);
  const CubeFamily fine = make_cube_family(fam.domain, refined([&] {
                                             CubeFamilyOptions o;
                                             if (c.weight.kind == "power") o.anchors.push_back(c.weight.center);
                                             return o;
                                           }()));
  nlohmann::ordered_json out;
  out["weight"] = config_to_json(c)["weight"];
  out["cubes"] = fam.cubes.size();
  double a1 = kInf, a1_fine = kInf;
  try {
    a1 = a1_constant(w, fam);
    a1_fine = a1_constant(w, fine);
  } catch (const Error&) {
  }
  out["a1_constant"] = harness::detail::number(a1);
  out["a1_constant_refined"] = harness::detail::number(a1_fine);
  out["a1_pass"] = a1 <= c.a1_threshold;
  out["ap_constant"] = nlohmann::ordered_json::array();
  for (double p : ps) {
    out["ap_constant"].push_back({{"p", p},
                                  {"value", harness::detail::number(ap_constant(w, p, fam))},
                                  {"refined", harness::detail::number(ap_constant(w, p, fine))}});
  }
  out["critical_index"] = harness::detail::number(critical_index(w, fam, c.a1_threshold));
  std::cout << out.dump(2) << '\n';
  return 0;
}

void write_atom_csv(const Atom& a, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "# center=" << fmt(a.cube.center[0]);
  if (a.cube.dim == 2) out << ' ' << fmt(a.cube.center[1]);
  out << " side=" << fmt(a.cube.side) << " dim=" << a.cube.dim << " points=" << a.f.grid.points_per_axis()
      << " p=" << fmt(a.p) << " q=" << fmt(a.q) << " s=" << a.s << '\n';
  out << (a.cube.dim == 1 ? "x,value\n" : "x,y,value\n");
  for (std::size_t i = 0; i < a.f.grid.size(); ++i) {
    const Point x = a.f.grid.point(i);
    out << fmt(x[0]) << ',';
    if (a.cube.dim == 2) out << fmt(x[1]) << ',';
    out << fmt(a.f.values[i]) << '\n';
  }
}

Atom read_atom_csv(const fs::path& path, const Weight& w) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::string header;
  std::getline(in, header);
  if (header.rfind("# ", 0) != 0) throw Error(path.string() + " lacks the atom header line");
  std::istringstream hs(header.substr(2));
  std::string tok;
  Point center{};
  double side = 0, p = 0, q = 0;
  int dim = 1, points = 0, s = 0;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    const std::string key = eq == std::string::npos ? "" : tok.substr(0, eq);
    const std::string val = eq == std::string::npos ? tok : tok.substr(eq + 1);
    if (key == "center") center[0] = std::stod(val);
    else if (key.empty()) center[1] = std::stod(val);
    else if (key == "side") side = std::stod(val);
    else if (key == "dim") dim = std::stoi(val);
    else if (key == "points") points = std::stoi(val);
    else if (key == "p") p = std::stod(val);
    else if (key == "q") q = std::stod(val);
    else if (key == "s") s = std::stoi(val);
  }
  std::string line;
  std::getline(in, line);  // column names
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    values.push_back(std::stod(line.substr(line.rfind(',') + 1)));
  }
  const Cube cube(center, side, dim);
  return Atom{SampledFunction(make_grid(cube, points), std::move(values)), cube, p, q, s, w};
}

int cmd_atom_gen(const GlobalOptions& g) {
  const ExperimentConfig c = resolve(g);
  const Weight w = c.weight_function();
  const auto sweep = build_sweep(c, w, moment_order(c), c.atoms.points_per_axis);
  fs::create_directories(c.out_dir);
  nlohmann::ordered_json summary = nlohmann::ordered_json::array();
  for (const auto& sa : sweep) {
    char name[32];
    std::snprintf(name, sizeof name, "atom_%04d.csv", sa.entry.index);
    write_atom_csv(sa.atom, fs::path(c.out_dir) / name);
    const AtomCertificate cert = validate_atom(sa.atom);
    summary.push_back({{"file", name}, {"side", sa.entry.scale}, {"accepted", cert.accepted()}, {"norm_ratio", cert.norm_ratio}});
  }
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int cmd_atom_check(const GlobalOptions& g, const std::vector<std::string>& files) {
  const ExperimentConfig c = resolve(g);
  const Weight w = c.weight_function();
  bool all = true;
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& f : files) {
    const Atom a = read_atom_csv(f, w);
    const AtomCertificate cert = validate_atom(a);
    all = all && cert.accepted();
    nlohmann::ordered_json moments = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < cert.moments.size(); ++k) {
      moments.push_back({{"beta", {cert.moment_indices[k][0], cert.moment_indices[k][1]}},
                         {"value", cert.moments[k]},
                         {"ok", bool(cert.moment_ok[k])}});
    }
    out.push_back({{"file", f},
                   {"support_ok", cert.support_ok},
                   {"moments_ok", cert.moments_ok},
                   {"norm_ok", cert.norm_ok},
                   {"norm_ratio", cert.norm_ratio},
                   {"moments", moments}});
  }
  std::cout << out.dump(2) << '\n';
  return all ? 0 : 1;
}

int cmd_sq(const GlobalOptions& g, const std::string& op, int atom_index, double beta, double lambda) {
  const ExperimentConfig c = resolve(g);
  const Weight w = c.weight_function();
  const auto sweep = build_sweep(c, w, moment_order(c), c.atoms.points_per_axis);
  if (atom_index < 0 || atom_index >= int(sweep.size())) throw InvalidArgument("atom index out of range");
  const Atom& a = sweep[std::size_t(atom_index)].atom;
  const TestFunctionDictionary dict = build_dictionary(c.alpha, c.dictionary.size, c.dictionary.seed, c.dictionary_options());
  const Grid out = output_grid(c, a, c.output.points);
  const ConeGrid cone = cone_for(c, a);
  std::vector<double> v;
  if (op == "g") {
    v = g_values(a, out, cone, dict, c.threads);
  } else {
    const ConeField field(a.f, cone, dict, c.threads);
    if (op == "s") {
      v = evaluate_on(out, [&](const Point& x) { return area_function(field, x, beta); }, c.threads);
    } else {
      v = evaluate_on(out, [&](const Point& x) { return gstar_function(field, x, lambda, c.cone.k_max); }, c.threads);
    }
  }
  fs::create_directories(c.out_dir);
  const fs::path path = fs::path(c.out_dir) / ("sq_" + op + "_atom" + std::to_string(atom_index) + ".csv");
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  f << (c.n == 1 ? "x,value\n" : "x,y,value\n");
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Point x = out.point(i);
    f << fmt(x[0]) << ',';
    if (c.n == 2) f << fmt(x[1]) << ',';
    f << fmt(v[i]) << '\n';
  }
  const auto masses = w.cell_masses(out);
  nlohmann::ordered_json summary{{"operator", op},
                                 {"atom", atom_index},
                                 {"file", path.string()},
                                 {"weak_norm", weak_lp_norm(v, masses, c.p())},
                                 {"l2w_norm", lp_norm(v, masses, 2.0)}};
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int cmd_verify(const GlobalOptions& g, std::vector<std::string> suites) {
  const ExperimentConfig c = resolve(g);
  if (suites.empty() || (suites.size() == 1 && suites[0] == "all")) suites = suite_names();
  const Format format = format_from_string(g.format);
  bool all = true;
  for (const auto& name : suites) {
    VerificationReport r;
    try {
      r = run_suite(name, c);
    } catch (const InvalidArgument& e) {
      r = new_report(c, name);
      r.status = Status::fail;
      r.message = std::string("error: ") + e.what();
    }
    const fs::path path = fs::path(c.out_dir) / (name + (format == Format::json ? ".json" : ".csv"));
    emit_report(r, format, path);
    std::printf("%-9s %-8s %s%s%s\n", name.c_str(), to_string(r.status).c_str(), path.string().c_str(),
                r.message.empty() ? "" : "  ", r.message.c_str());
    all = all && r.passed();
  }
  return all ? 0 : 1;
}

int cmd_report(const GlobalOptions& g) {
  const std::string dir = g.out_dir.empty() ? resolve(g).out_dir : g.out_dir;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  bool all = !files.empty();
  for (const auto& f : files) {
    std::ifstream in(f);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
      if (!j.contains("suite") || !j.contains("criteria")) continue;
    } catch (const nlohmann::json::exception&) {
      continue;
    }
    const VerificationReport r = report_from_json(j);
    std::printf("%-9s %-8s hash=%s\n", r.suite.c_str(), to_string(r.status).c_str(), r.config_hash.c_str());
    for (const auto& cr : r.criteria) {
      std::printf("    %s %-55s %.6g %s %.6g\n", cr.pass ? "ok  " : "FAIL", cr.name.c_str(), cr.value, cr.relation.c_str(),
                  cr.limit);
    }
    all = all && r.passed();
  }
  if (files.empty()) std::printf("no reports in %s\n", dir.c_str());
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted intrinsic square functions: atoms, A_p weights and verification suites"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config, "JSON experiment configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "global seed");
  app.add_option("--out-dir", g.out_dir, "output directory");
  app.add_option("--points", g.points, "evaluation grid points per axis");
  app.add_option("--dict-size", g.dict_size, "dictionary size");
  app.add_option("--format", g.format, "report format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--threads", g.threads, "worker threads (0 = all cores)");

  auto* ap = app.add_subcommand("apconst", "A_1 / A_p constants and critical index of the configured weight");
  std::vector<double> ps = {1.5, 2.0, 2.5, 3.0};
  ap->add_option("--p", ps, "A_p exponents");

  auto* atom = app.add_subcommand("atom", "generate or validate atoms");
  atom->require_subcommand(1);
  auto* gen = atom->add_subcommand("gen", "write the configured atom sweep as CSV");
  auto* check = atom->add_subcommand("check", "validate atom CSV files");
  std::vector<std::string> atom_files;
  check->add_option("files", atom_files, "atom CSV files")->required()->check(CLI::ExistingFile);

  auto* sq = app.add_subcommand("sq", "evaluate a square function of one sweep atom on its window");
  std::string op;
  int atom_index = 0;
  double beta = 1.0, lambda = 4.5;
  sq->add_option("operator", op, "g | s | gstar")->required()->check(CLI::IsMember({"g", "s", "gstar"}));
  sq->add_option("--atom", atom_index, "sweep index");
  sq->add_option("--beta", beta, "aperture for s");
  sq->add_option("--lambda", lambda, "exponent for gstar");

  auto* verify = app.add_subcommand("verify", "run verification suites");
  std::vector<std::string> suites;
  std::vector<std::string> allowed = suite_names();
  allowed.push_back("all");
  verify->add_option("suites", suites, "thm1 thm2 thm3 lemA lem31 lem41 aperture farfield | all")
      ->check(CLI::IsMember(allowed));

  auto* report = app.add_subcommand("report", "summarise JSON reports in --out-dir");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*ap) return cmd_apconst(g, ps);
    if (*gen) return cmd_atom_gen(g);
    if (*check) return cmd_atom_check(g, atom_files);
    if (*sq) return cmd_sq(g, op, atom_index, beta, lambda);
    if (*verify) return cmd_verify(g, suites);
    if (*report) return cmd_report(g);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "wisq: %s\n", e.what());
    return 2;
  }
  return 0;
}
