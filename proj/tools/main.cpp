// fracvar command-line front-end: derive | solve | kernel | sweep.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fracvar/pathint.hpp"
#include "fracvar/solver.hpp"
#include "json.hpp"

using json = nlohmann::json;
using namespace fracvar;

namespace {

struct CliError {
  int code;
  std::string msg;
};

[[noreturn]] void fail(int code, const std::string& msg) {
  throw CliError{code, msg};
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key))
      fail(2, "config: unknown key '" + key + "' in " + where);
}

double num_at(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number())
    fail(2, "config: '" + key + "' must be a number");
  return obj.at(key).get<double>();
}

struct Run {
  LagrangianSpec spec;
  std::string system;
  std::optional<UniformGrid> grid;
  BoundaryData bc;
  bool have_bc = false;
  CompositionConvention convention = CompositionConvention::RiewePhase;
  SolveOptions solve_opts;
  FitWindow fit;
  std::vector<double> sweep_alphas;
};

Complex parse_complex(const json& v, const std::string& where) {
  if (v.is_number()) return Complex(v.get<double>());
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return Complex(v[0].get<double>(), v[1].get<double>());
  fail(2, "config: " + where + " must be a number or [re, im] pair");
}

std::vector<std::pair<int, Complex>> parse_side(const json& side,
                                                const std::string& where) {
  std::vector<std::pair<int, Complex>> out;
  if (!side.is_array()) fail(2, "config: boundary." + where + " must be a list");
  for (const auto& entry : side) {
    if (!entry.is_array() || entry.size() < 2 || entry.size() > 3 ||
        !entry[0].is_number_integer())
      fail(2, "config: boundary." + where +
                  " entries must be [slot, re] or [slot, re, im]");
    Complex v(entry[1].get<double>(),
              entry.size() == 3 ? entry[2].get<double>() : 0.0);
    out.emplace_back(entry[0].get<int>(), v);
  }
  return out;
}

LagrangianSpec build_spec(const std::string& system, double alpha,
                          const json& cfg) {
  std::map<std::string, Complex> params;
  if (cfg.contains("params")) {
    if (!cfg.at("params").is_object())
      fail(2, "config: params must be an object");
    for (const auto& [name, v] : cfg.at("params").items())
      params[name] = parse_complex(v, "params." + name);
  }
  auto real_param = [&](const std::string& name, double fallback) {
    auto it = params.find(name);
    if (it == params.end()) return fallback;
    if (it->second.imag() != 0.0)
      fail(2, "config: parameter '" + name + "' must be real");
    return it->second.real();
  };
  try {
    if (system == "pu")
      return make_pu(alpha, real_param("eps", 0.1), real_param("w", 1.0));
    if (system == "damped") {
      if (std::abs(alpha - 0.5) > 1e-12)
        fail(2, "config: the damped system is defined at alpha = 0.5");
      return make_damped(real_param("m", 1.0), real_param("g", 0.4),
                         real_param("k", 1.0));
    }
    if (system != "custom")
      fail(2, "config: system must be \"pu\", \"damped\" or \"custom\"");
    if (!cfg.contains("ladder") || !cfg.contains("lagrangian"))
      fail(2, "config: custom systems need \"ladder\" and \"lagrangian\"");
    std::vector<double> ladder;
    for (const auto& v : cfg.at("ladder")) {
      if (!v.is_number()) fail(2, "config: ladder entries must be numbers");
      ladder.push_back(v.get<double>());
    }
    if (!cfg.at("lagrangian").is_string())
      fail(2, "config: lagrangian must be a DSL string");
    return make_lagrangian(cfg.at("lagrangian").get<std::string>(), ladder,
                           alpha, params);
  } catch (const CliError&) {
    throw;
  } catch (const std::exception& e) {
    fail(2, std::string("config: ") + e.what());
  }
}

Run load_config(const std::string& path, std::optional<double> alpha_override,
                std::optional<std::size_t> grid_n_override) {
  std::ifstream in(path);
  if (!in) fail(2, "config: cannot open '" + path + "'");
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const std::exception& e) {
    fail(2, std::string("config: invalid JSON: ") + e.what());
  }
  if (!cfg.is_object()) fail(2, "config: top level must be an object");
  check_keys(cfg,
             {"schema", "system", "alpha", "params", "ladder", "lagrangian",
              "grid", "boundary", "options", "sweep"},
             "the top level");
  if (!cfg.contains("schema") || cfg.at("schema") != 1)
    fail(2, "config: missing or unsupported \"schema\" (expected 1)");
  if (!cfg.contains("system") || !cfg.at("system").is_string())
    fail(2, "config: missing \"system\"");
  Run run;
  run.system = cfg.at("system").get<std::string>();
  double default_alpha = run.system == "damped" ? 0.5 : 1.0;
  double alpha = num_at(cfg, "alpha", default_alpha);
  if (alpha_override) alpha = *alpha_override;
  run.spec = build_spec(run.system, alpha, cfg);

  if (cfg.contains("grid")) {
    const json& g = cfg.at("grid");
    check_keys(g, {"a", "b", "n"}, "grid");
    if (!g.contains("a") || !g.contains("b") || !g.contains("n"))
      fail(2, "config: grid needs a, b, n");
    auto n = g.at("n");
    if (!n.is_number_integer() || n.get<long long>() < 2)
      fail(2, "config: grid.n must be an integer >= 2");
    std::size_t nn = n.get<std::size_t>();
    if (grid_n_override) nn = *grid_n_override;
    try {
      run.grid = UniformGrid(num_at(g, "a", 0.0), num_at(g, "b", 1.0), nn);
    } catch (const std::exception& e) {
      fail(2, std::string("config: ") + e.what());
    }
  } else if (grid_n_override) {
    fail(2, "config: --grid-n given but the config has no grid");
  }

  if (cfg.contains("boundary")) {
    const json& b = cfg.at("boundary");
    check_keys(b, {"left", "right"}, "boundary");
    if (b.contains("left")) run.bc.left = parse_side(b.at("left"), "left");
    if (b.contains("right")) run.bc.right = parse_side(b.at("right"), "right");
    run.have_bc = true;
  }

  if (cfg.contains("options")) {
    const json& o = cfg.at("options");
    check_keys(o,
               {"riewe_composition", "convention", "fit_tau_min",
                "fit_tau_max", "max_unknowns"},
               "options");
    if (o.contains("riewe_composition")) {
      if (!o.at("riewe_composition").is_boolean())
        fail(2, "config: options.riewe_composition must be a boolean");
      run.solve_opts.riewe_composition = o.at("riewe_composition").get<bool>();
    }
    if (o.contains("convention")) {
      std::string c = o.at("convention").is_string()
                          ? o.at("convention").get<std::string>()
                          : std::string();
      if (c == "phase")
        run.convention = CompositionConvention::RiewePhase;
      else if (c == "conjugate")
        run.convention = CompositionConvention::ConjugatePhase;
      else if (c == "numeric")
        run.convention = CompositionConvention::NumericRight;
      else
        fail(2, "config: options.convention must be \"phase\", \"conjugate\" "
                "or \"numeric\"");
    }
    run.fit.tau_min = num_at(o, "fit_tau_min", run.fit.tau_min);
    run.fit.tau_max = num_at(o, "fit_tau_max", run.fit.tau_max);
    if (o.contains("max_unknowns")) {
      if (!o.at("max_unknowns").is_number_integer())
        fail(2, "config: options.max_unknowns must be an integer");
      run.solve_opts.max_unknowns = o.at("max_unknowns").get<std::size_t>();
    }
  }

  if (cfg.contains("sweep")) {
    const json& s = cfg.at("sweep");
    check_keys(s, {"alphas"}, "sweep");
    if (!s.contains("alphas") || !s.at("alphas").is_array() ||
        s.at("alphas").empty())
      fail(2, "config: sweep.alphas must be a non-empty list");
    for (const auto& v : s.at("alphas")) {
      if (!v.is_number()) fail(2, "config: sweep.alphas entries must be numbers");
      run.sweep_alphas.push_back(v.get<double>());
    }
  }
  return run;
}

const UniformGrid& require_grid(const Run& run) {
  if (!run.grid) fail(2, "config: this command needs a \"grid\" section");
  return *run.grid;
}

const BoundaryData& require_bc(const Run& run) {
  if (!run.have_bc) fail(2, "config: this command needs a \"boundary\" section");
  return run.bc;
}

BoundaryData default_zero_bc(const LagrangianSpec& spec) {
  std::size_t m = static_cast<std::size_t>(std::ceil(spec.top_order() - 1e-9));
  BoundaryData bc;
  for (std::size_t j = 0; j < m; ++j) {
    // pin the integer-order slots when present, the base slot otherwise
    int slot = 0;
    for (int l = 0; l <= spec.top_index(); ++l)
      if (std::abs(spec.ladder[l] - double(j)) < 1e-9) slot = l;
    bc.left.emplace_back(slot, Complex(0.0));
    bc.right.emplace_back(slot, Complex(0.0));
  }
  return bc;
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const LagrangianSpec& spec, const SampledPath& x) {
  CoordinateStack stack = coordinate_stack(spec, x);
  std::ofstream os(path);
  if (!os) fail(2, "cannot write '" + path.string() + "'");
  os << "t,re,im";
  for (int l = 0; l <= spec.top_index(); ++l)
    os << ",q" << l << "_re,q" << l << "_im";
  os << "\n";
  for (std::size_t i = 0; i < x.grid.n; ++i) {
    os << fmt17(x.grid.t(i)) << ',' << fmt17(x.values[i].real()) << ','
       << fmt17(x.values[i].imag());
    for (int l = 0; l <= spec.top_index(); ++l)
      os << ',' << fmt17(stack.derived[l].values[i].real()) << ','
         << fmt17(stack.derived[l].values[i].imag());
    os << "\n";
  }
}

int run_derive(const Run& run) {
  try {
    std::cout << "system: " << run.system << "\n";
    std::cout << "alpha: " << fmt17(run.spec.alpha) << "\n";
    std::cout << "ladder:";
    for (double nu : run.spec.ladder) std::cout << ' ' << fmt17(nu);
    std::cout << "\n";
    std::cout << "L = " << print(fold(run.spec.expr)) << "\n";
    auto ps = symbolic_momenta(run.spec, run.convention);
    for (std::size_t l = 0; l < ps.size(); ++l)
      std::cout << "p" << l << " = " << print(ps[l]) << "\n";
    std::cout << "H = " << print(symbolic_hamiltonian(run.spec, run.convention))
              << "\n";
    std::cout << "EL = " << print(symbolic_el(run.spec, run.convention))
              << "\n";
    bool fractional_chain = false;
    for (std::size_t l = 0; l + 1 < run.spec.ladder.size(); ++l) {
      double d = run.spec.ladder[l + 1] - run.spec.ladder[l];
      if (std::abs(d - std::round(d)) > 1e-9) fractional_chain = true;
    }
    if (fractional_chain &&
        run.convention != CompositionConvention::NumericRight)
      std::cout << "note: composed right-derivative factors of non-integer "
                   "order carry the phase exp(i*pi*nu)\n";
    return 0;
  } catch (const CliError&) {
    throw;
  } catch (const std::exception& e) {
    fail(3, std::string("derivation: ") + e.what());
  }
}

SampledPath solve_run(const Run& run, const LagrangianSpec& spec) {
  try {
    return solve_stationary(spec, require_grid(run), require_bc(run),
                            run.solve_opts);
  } catch (const CliError&) {
    throw;
  } catch (const SingularSystemError& e) {
    fail(4, std::string("solve: ") + e.what());
  } catch (const BoundaryError& e) {
    fail(2, std::string("config: ") + e.what());
  } catch (const std::exception& e) {
    fail(3, std::string("solve: ") + e.what());
  }
}

int run_solve(const Run& run, const std::filesystem::path& out) {
  SampledPath x = solve_run(run, run.spec);
  write_trajectory_csv(out / "trajectory.csv", run.spec, x);

  SampledPath r = euler_lagrange_residual(
      run.spec, x,
      run.solve_opts.riewe_composition ? CompositionConvention::RiewePhase
                                       : run.convention);
  std::size_t n = x.grid.n;
  std::size_t skip = std::max<std::size_t>(2, n / 10);
  double max_res = 0.0;
  for (std::size_t i = skip; i + skip < n; ++i)
    max_res = std::max(max_res, std::abs(r.values[i]));
  double max_imag = 0.0, max_abs = 0.0;
  for (const auto& v : x.values) {
    max_imag = std::max(max_imag, std::abs(v.imag()));
    max_abs = std::max(max_abs, std::abs(v));
  }
  std::ofstream os(out / "residuals.json");
  if (!os) fail(2, "cannot write residuals.json");
  os << "{\"max_el_residual_interior\":" << fmt17(max_res)
     << ",\"max_imag\":" << fmt17(max_imag) << ",\"max_abs\":"
     << fmt17(max_abs) << ",\"n\":" << n << "}\n";
  return 0;
}

int run_kernel(const Run& run, const std::filesystem::path& out) {
  const UniformGrid& grid = require_grid(run);
  BoundaryData bc = run.have_bc ? run.bc : default_zero_bc(run.spec);
  std::string extra;
  SpectralReport rep;
  try {
    if (run.spec.half_index() >= 0) {
      auto res = marginalize_auxiliary(run.spec, grid, bc);
      rep.log_det = kernel_log_det(res.full);
      rep.grid = grid;
      rep.metadata["log_det_effective"] = kernel_log_det(res.effective);
      rep.metadata["log_c"] = res.log_c;
      rep.metadata["aux_count"] = static_cast<double>(res.aux_count);
      std::size_t nu = res.effective.unknown_indices.size();
      std::vector<std::pair<std::size_t, std::size_t>> pairs;
      for (std::size_t d = 0; nu / 2 + d < nu; ++d)
        pairs.emplace_back(nu / 2, nu / 2 + d);
      SpectralReport eff = correlator(res.effective, pairs, run.fit);
      rep.correlator = eff.correlator;
      rep.gap_estimates = eff.gap_estimates;
    } else if (run.spec.top_index() == 2) {
      rep = mode_split_report(run.spec, grid, run.fit);
    } else {
      QuadraticForm form = euclidean_quadratic_form(run.spec, grid, bc);
      std::size_t nu = form.unknown_indices.size();
      std::vector<std::pair<std::size_t, std::size_t>> pairs;
      for (std::size_t d = 0; nu / 2 + d < nu; ++d)
        pairs.emplace_back(nu / 2, nu / 2 + d);
      rep = correlator(form, pairs, run.fit);
      for (const auto& [k, v] : form.metadata) rep.metadata[k] = v;
    }
  } catch (const CliError&) {
    throw;
  } catch (const SingularSystemError& e) {
    fail(4, std::string("kernel: ") + e.what());
  } catch (const BoundaryError& e) {
    fail(2, std::string("config: ") + e.what());
  } catch (const std::exception& e) {
    fail(3, std::string("kernel: ") + e.what());
  }
  std::ofstream js(out / "spectral.json");
  if (!js) fail(2, "cannot write spectral.json");
  js << to_json(rep) << "\n";
  std::ofstream csv(out / "correlator.csv");
  if (!csv) fail(2, "cannot write correlator.csv");
  write_correlator_csv(csv, rep);
  return 0;
}

int run_sweep(const Run& run, const std::filesystem::path& out,
              const json& raw_cfg_unused) {
  (void)raw_cfg_unused;
  if (run.sweep_alphas.empty())
    fail(2, "config: sweep command needs a \"sweep\" section");
  std::vector<SampledPath> paths;
  std::vector<LagrangianSpec> specs;
  for (double alpha : run.sweep_alphas) {
    LagrangianSpec spec = run.spec;
    try {
      if (run.system == "pu") {
        double eps = spec.params.at("eps").real();
        double w = spec.params.at("w").real();
        spec = make_pu(alpha, eps, w);
      } else if (run.system == "damped") {
        fail(2, "config: the damped system cannot be alpha-swept");
      } else {
        spec.alpha = alpha;
        // rescale any non-integer rungs proportionally to alpha
        std::vector<double> ladder;
        for (double nu : run.spec.ladder) {
          double scaled = nu / (run.spec.alpha > 0 ? run.spec.alpha : 1.0);
          bool integer = std::abs(nu - std::round(nu)) < 1e-9;
          ladder.push_back(integer && std::abs(run.spec.alpha - 1.0) > 1e-12
                               ? nu
                               : scaled * alpha);
        }
        spec.ladder = ladder;
        spec.validate();
      }
    } catch (const CliError&) {
      throw;
    } catch (const std::exception& e) {
      fail(2, std::string("config: sweep alpha ") + fmt17(alpha) + ": " +
                  e.what());
    }
    SampledPath x = solve_run(run, spec);
    char name[64];
    std::snprintf(name, sizeof(name), "trajectory_alpha_%g.csv", alpha);
    write_trajectory_csv(out / name, spec, x);
    paths.push_back(x);
    specs.push_back(spec);
  }
  std::ofstream js(out / "sweep.json");
  if (!js) fail(2, "cannot write sweep.json");
  js << "[";
  for (std::size_t k = 0; k < paths.size(); ++k) {
    double dist = 0.0;
    for (std::size_t i = 0; i < paths[k].grid.n; ++i)
      dist = std::max(dist,
                      std::abs(paths[k].values[i] - paths[0].values[i]));
    if (k) js << ",";
    js << "{\"alpha\":" << fmt17(run.sweep_alphas[k])
       << ",\"sup_distance_to_first\":" << fmt17(dist) << "}";
  }
  js << "]\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fractional variational toolkit"};
  app.require_subcommand(1);
  std::string config_path, out_dir = ".";
  double alpha_override = -1.0;
  bool has_alpha = false;
  long long grid_n_override = -1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file")->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--alpha", alpha_override, "override the base order")
        ->each([&](const std::string&) { has_alpha = true; });
    cmd->add_option("--grid-n", grid_n_override, "override the sample count");
  };
  CLI::App* derive = app.add_subcommand("derive", "print symbolic results");
  CLI::App* solve = app.add_subcommand("solve", "stationary trajectory");
  CLI::App* kernel = app.add_subcommand("kernel", "Euclidean kernel report");
  CLI::App* sweep = app.add_subcommand("sweep", "alpha sweep of solutions");
  for (CLI::App* cmd : {derive, solve, kernel, sweep}) add_common(cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "{\"error\":\"invalid command line\",\"code\":2}\n";
    return 2;
  }

  try {
    std::optional<double> ao;
    if (has_alpha) ao = alpha_override;
    std::optional<std::size_t> gno;
    if (grid_n_override >= 0) {
      if (grid_n_override < 2) fail(2, "config: --grid-n must be >= 2");
      gno = static_cast<std::size_t>(grid_n_override);
    }
    Run run = load_config(config_path, ao, gno);
    std::filesystem::path out(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (derive->parsed()) return run_derive(run);
    if (solve->parsed()) return run_solve(run, out);
    if (kernel->parsed()) return run_kernel(run, out);
    return run_sweep(run, out, json());
  } catch (const CliError& e) {
    json msg = e.msg;  // JSON-escape the message
    std::cerr << "{\"error\":" << msg.dump() << ",\"code\":" << e.code
              << "}\n";
    return e.code;
  } catch (const std::exception& e) {
    json msg = std::string(e.what());
    std::cerr << "{\"error\":" << msg.dump() << ",\"code\":3}\n";
    return 3;
  }
}
