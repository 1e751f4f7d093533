#include "svfb/cli.hpp"

#include "svfb/calculus.hpp"
#include "svfb/kinematics.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace svfb {

namespace fs = std::filesystem;

namespace {

constexpr double kMassTolerance = 1e-6;

WeightField validated_weight(const SolverConfig& config, ValidationReport* report) {
  const Grid grid = build_grid(config.n1, config.n2);
  WeightField w = build_weight(make_profile(config), grid);
  *report = validate_physical_vacuum(w);
  return w;
}

std::string join(const std::vector<std::string>& parts) {
  std::string s;
  for (const auto& p : parts) s += (s.empty() ? "" : "; ") + p;
  return s;
}

fs::path output_dir(const SolverConfig& config, const std::string& override_dir) {
  if (!override_dir.empty()) return override_dir;
  return config.out_dir;
}

}  // namespace

RunOutcome run_pipeline(const SolverConfig& config) {
  ValidationReport validation;
  WeightField weight = validated_weight(config, &validation);
  if (!validation.pass) {
    throw ConfigError("weight profile fails the physical-vacuum check: " +
                      join(validation.messages));
  }
  RunOutcome out(config, std::move(weight), validation);
  const Grid& grid = out.weight.grid;

  const OperatorPair op = assemble_operator(out.weight, grid);
  EigenOptions opts;
  opts.seed = config.seed;
  out.basis = solve_eigenbasis(op, config.n_modes, opts);
  out.basis_report = verify_basis(out.basis, op);

  std::tie(out.solution, out.trace) =
      picard_solve(initial_velocity(config, grid), out.basis, config.picard());
  if (out.solution.size() == 0) return out;

  out.bounds_ok = true;
  for (const auto& b : out.solution.bounds) out.bounds_ok = out.bounds_ok && b.pass();

  out.energy_ok = true;
  for (std::size_t n = 0; n < out.solution.size(); ++n) {
    out.energy.push_back(energy_functional(out.solution, out.weight, n, config.truncation_order));
    out.energy_ok = out.energy_ok && out.energy.back().bound_holds;
  }

  out.export_indices = export_schedule(out.solution.size(), config.export_every);
  out.mass_ok = true;
  for (std::size_t idx : out.export_indices) {
    const FlowMapInterpolant map(out.solution.states[idx], grid);
    out.snapshots.push_back(eulerian_fields(out.solution, out.weight, idx,
                                            query_lattice(map, config.query_n1, config.query_n2)));
    out.stress_free.push_back(stress_free_residual(out.snapshots.back()));
    out.mass.push_back(mass_balance(out.solution.states[idx], out.weight));
    out.mass_ok = out.mass_ok && out.mass.back().relative_error <= kMassTolerance &&
                  out.mass.back().failed_inversions == 0;
  }
  return out;
}

RunArtifacts artifacts(const RunOutcome& o) {
  RunArtifacts a;
  a.config = &o.config;
  a.weight = &o.weight;
  a.solution = &o.solution;
  a.trace = &o.trace;
  a.energy = o.energy;
  a.export_indices = o.export_indices;
  a.snapshots = o.snapshots;
  const auto& sol = o.solution;
  a.summary.emplace_back("T_used", format_double(sol.T));
  a.summary.emplace_back("steps", std::to_string(sol.size() ? sol.size() - 1 : 0));
  a.summary.emplace_back("n_modes", std::to_string(o.basis.n_modes()));
  a.summary.emplace_back("sigma_1", o.basis.n_modes() ? format_double(o.basis.sigma(0)) : "nan");
  a.summary.emplace_back("orthonormality_defect",
                         format_double(o.basis_report.orthonormality_defect));
  if (!o.energy.empty()) {
    a.summary.emplace_back("E0", format_double(o.energy.front().total));
    a.summary.emplace_back("E_final", format_double(o.energy.back().total));
    a.summary.emplace_back("boundary_residual_final",
                           format_double(o.energy.back().boundary_residual));
  }
  if (!o.stress_free.empty()) {
    a.summary.emplace_back("stress_free_residual_final", format_double(o.stress_free.back()));
  }
  double worst_mass = 0.0;
  for (const auto& m : o.mass) worst_mass = std::max(worst_mass, m.relative_error);
  a.summary.emplace_back("mass_relative_error_max", format_double(worst_mass));
  a.checks.emplace_back("picard_converged", o.trace.converged);
  a.checks.emplace_back("bounds_J_and_b", o.bounds_ok);
  a.checks.emplace_back("energy_bound", o.energy_ok);
  a.checks.emplace_back("mass_balance", o.mass_ok);
  return a;
}

namespace {

int command_run(const SolverConfig& config, const fs::path& dir, bool quiet, std::ostream& out) {
  const RunOutcome o = run_pipeline(config);
  export_run(artifacts(o), dir);
  if (!quiet) {
    out << "picard: " << (o.trace.converged ? "converged" : "FAILED") << " in "
        << o.trace.iteration_count() << " iterations, T = " << o.solution.T << " ("
        << o.trace.halvings.size() << " halvings)\n";
    for (const auto& it : o.trace.final_iterations()) {
      out << "  iter " << it.iteration << "  d = " << it.d << "  e = " << it.e
          << "  ratio = " << it.ratio << '\n';
    }
    if (!o.energy.empty()) {
      out << "energy: E(0) = " << o.energy.front().total << ", E(T) = " << o.energy.back().total
          << (o.energy_ok ? "  (bound holds)\n" : "  (bound VIOLATED)\n");
      out << "boundary residual at T: " << o.energy.back().boundary_residual << '\n';
    }
    out << "bounds: " << (o.bounds_ok ? "ok" : "VIOLATED") << ", mass balance: "
        << (o.mass_ok ? "ok" : "VIOLATED") << '\n';
    out << "output: " << dir.string() << '\n';
  }
  return o.trace.converged ? 0 : 1;
}

int command_eigen(const SolverConfig& config, const fs::path& dir, bool quiet, std::ostream& out) {
  ValidationReport validation;
  const WeightField w = validated_weight(config, &validation);
  if (!validation.pass) {
    throw ConfigError("weight profile fails the physical-vacuum check: " +
                      join(validation.messages));
  }
  const OperatorPair op = assemble_operator(w, w.grid);
  EigenOptions opts;
  opts.seed = config.seed;
  const SpectralBasis basis = solve_eigenbasis(op, config.n_modes, opts);
  const BasisReport rep = verify_basis(basis, op);

  fs::create_directories(dir);
  std::vector<std::string> rows;
  for (int l = 0; l < basis.n_modes(); ++l) {
    rows.push_back(std::to_string(l + 1) + ',' + format_double(basis.sigma(l)) + ',' +
                   format_double(basis.residuals(l)));
  }
  write_csv(dir / "eigenvalues.csv", "l,sigma,residual", rows);
  if (config.write_modes) {
    const Grid& g = w.grid;
    for (int l = 0; l < basis.n_modes(); ++l) {
      const Field m = basis.mode(l);
      rows.clear();
      for (int j = 0; j < g.n2; ++j) {
        for (int i = 0; i < g.n1; ++i) {
          rows.push_back(format_double(g.x1(i)) + ',' + format_double(g.x2(j)) + ',' +
                         format_double(m(i, j)));
        }
      }
      char name[32];
      std::snprintf(name, sizeof name, "mode_%03d.csv", l + 1);
      write_csv(dir / name, "x1,x2,w", rows);
    }
  }
  RunArtifacts a;
  a.config = &config;
  a.summary.emplace_back("orthonormality_defect", format_double(rep.orthonormality_defect));
  a.summary.emplace_back("stiffness_offdiag", format_double(rep.stiffness_offdiag));
  a.summary.emplace_back("eigen_residual", format_double(rep.eigen_residual));
  a.checks.emplace_back("orthonormality", rep.orthonormality_defect <= 1e-10);
  a.checks.emplace_back("eigen_residual", rep.eigen_residual <= 1e-8);
  export_run(a, dir);
  if (!quiet) {
    out << "eigenbasis: " << basis.n_modes() << " modes on " << w.grid.n1 << "x" << w.grid.n2
        << '\n';
    for (int l = 0; l < std::min(basis.n_modes(), 8); ++l) {
      out << "  sigma_" << l + 1 << " = " << basis.sigma(l) << '\n';
    }
    out << "orthonormality defect " << rep.orthonormality_defect << ", residual "
        << rep.eigen_residual << '\n';
  }
  return 0;
}

// Smooth x1-periodic perturbation of the identity used by the kinematics checks.
KinematicTensors perturbation_tensors(const Grid& g, double amp) {
  constexpr double pi = std::numbers::pi;
  VectorField disp{g.sample([amp](double a, double b) {
                     return amp * std::sin(2 * pi * a) * std::sin(pi * b);
                   }),
                   g.sample([amp](double a, double b) {
                     return amp * std::cos(2 * pi * a) * b * (1 - b);
                   })};
  return deformation(disp, g);
}

int command_check(const SolverConfig& config, const fs::path& dir, bool quiet, std::ostream& out) {
  ValidationReport validation;
  const WeightField w = validated_weight(config, &validation);
  fs::create_directories(dir);

  const auto samples = random_samples(config.seed, 100);
  std::vector<std::string> rows;
  std::vector<std::pair<std::string, double>> maxima;
  for (int alpha = 0; alpha <= 2; ++alpha) {
    const SampleSuiteResult r = hardy_suite(w, samples, alpha);
    for (const auto& rep : r.reports) rows.push_back(to_csv_row(rep));
    maxima.emplace_back("hardy alpha=" + std::to_string(alpha), r.max_constant);
  }
  const SampleSuiteResult ip = interpolation_suite(w, samples);
  for (const auto& rep : ip.reports) rows.push_back(to_csv_row(rep));
  maxima.emplace_back("interpolation", ip.max_constant);
  write_csv(dir / "inequalities.csv", "name,LHS,RHS,C,n1,n2,seed", rows);

  rows.clear();
  for (int l = 1; l <= 4; ++l) {
    rows.push_back("tangent_ratio_" + std::to_string(l) + ',' + format_double(tangent_ratio(w, l)));
  }
  const KinematicTensors kt = perturbation_tensors(w.grid, 0.02);
  const BoundsReport b = check_bounds(kt);
  const double det_defect = (kt.cof[0][0] * kt.cof[1][1] - kt.cof[0][1] * kt.cof[1][0] - kt.jacobian)
                   .abs()
                   .maxCoeff();
  rows.push_back("piola_residual," + format_double(piola_residual(kt, w.grid)));
  rows.push_back("det_a_minus_J," + format_double(det_defect));
  rows.push_back("J_min," + format_double(b.j_min));
  rows.push_back("J_max," + format_double(b.j_max));
  rows.push_back("b_min_eig," + format_double(b.b_min_eig));
  rows.push_back("weight_valid," + std::string(validation.pass ? "1" : "0"));
  write_csv(dir / "kinematics.csv", "quantity,value", rows);

  RunArtifacts a;
  a.config = &config;
  for (const auto& [k, v] : maxima) a.summary.emplace_back(k + " max C", format_double(v));
  a.checks.emplace_back("physical_vacuum", validation.pass);
  a.checks.emplace_back("kinematic_bounds", b.pass());
  export_run(a, dir);
  if (!quiet) {
    out << "weight '" << w.profile.name() << "': " << (validation.pass ? "valid" : "INVALID")
        << "  C1 = " << w.c1 << ", C2 = " << w.c2 << '\n';
    for (const auto& m : validation.messages) out << "  " << m << '\n';
    for (const auto& [k, v] : maxima) out << k << ": max C = " << v << '\n';
    out << "piola residual " << piola_residual(kt, w.grid) << ", det(a) - J " << det_defect
        << '\n';
    out << "output: " << dir.string() << '\n';
  }
  return validation.pass ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Viscous shallow-water vacuum free-boundary lab", "svfb"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  bool quiet = false;
  std::string chosen;
  for (const char* name : {"run", "eigen", "check"}) {
    auto* sub = app.add_subcommand(name, std::string(name) == "run"     ? "Picard solve and export"
                                         : std::string(name) == "eigen" ? "eigenbasis only"
                                                                        : "inequality and kinematics suites");
    sub->add_option("config", config_path, "INI configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides [output] dir)");
    sub->add_flag("--quiet", quiet, "suppress the summary");
    sub->callback([&chosen, name] { chosen = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return 2;
  }

  SolverConfig config;
  try {
    config = load_config(config_path);
  } catch (const ConfigError& e) {
    err << e.what() << '\n';
    return 2;
  }
  const fs::path dir = output_dir(config, out_dir);
  try {
    if (chosen == "run") return command_run(config, dir, quiet, out);
    if (chosen == "eigen") return command_eigen(config, dir, quiet, out);
    return command_check(config, dir, quiet, out);
  } catch (const ConfigError& e) {
    err << e.what() << '\n';
    return 2;
  } catch (const EigenSolveError& e) {
    err << "eigensolver: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace svfb
