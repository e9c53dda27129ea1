#include "complasso/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>

#include "complasso/diagnostics.hpp"
#include "complasso/io.hpp"
#include "complasso/parallel.hpp"
#include "complasso/sim.hpp"
#include "complasso/tuning.hpp"

namespace complasso::cli {
namespace {

namespace fs = std::filesystem;

struct Common {
  std::string out = ".";
  int threads = 0;  // 0: default_thread_count()
};

struct FitFlags {
  std::string input;
  std::string groups;
  std::optional<double> pseudo;
  double alpha = 0.05;
  std::optional<double> lambda;
  std::optional<double> gamma;
  double mu = 1.0;
  double tol_beta = 1e-7;
  double tol_constraint = 1e-8;
  std::string qp = "cd";
};

struct SimFlags {
  std::string grid;
  std::vector<std::string> cells;
  std::string modes = "multiple,one,none";
  int reps = 100;
  std::uint64_t seed = 1;
  double alpha = 0.05;
  double mu = 1.0;
  std::string qp = "cd";
};

struct DiagFlags {
  std::string groups;
  std::string input;
  std::optional<std::string> cell;
  std::uint64_t seed = 1;
  std::optional<int> rip_k;
  std::vector<int> roc_k;
  std::optional<double> pseudo;
};

int threads_of(const Common& c) { return c.threads > 0 ? c.threads : default_thread_count(); }

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InvalidInput("cannot create output directory '" + dir + "'");
}

std::string join(const std::string& dir, const std::string& file) { return (fs::path(dir) / file).string(); }

QpMethod parse_qp(const std::string& s) {
  if (s == "cd") return QpMethod::kCoordinateDescent;
  if (s == "admm") return QpMethod::kAdmm;
  throw InvalidInput("--qp must be cd or admm");
}

int cmd_fit(const FitFlags& f, const Common& common, std::ostream& log, std::ostream& err) {
  if (!(f.alpha > 0.0 && f.alpha < 1.0)) throw InvalidInput("--alpha must lie in (0, 1)");
  const io::InputData data = io::load_input(f.input);
  const CompositionMatrix comp = io::to_composition(data, f.pseudo);
  const Index p = comp.cols();
  const std::vector<Index> sizes = io::parse_group_spec(f.groups, p, data.taxon_names);
  const ConstraintSet cs = build_constraints(sizes);
  RegressionProblem prob = clr_design(comp, cs, data.response, data.covariates);
  prob.extra_names = data.covariate_names;

  CdmmSettings cdmm;
  cdmm.mu = f.mu;
  cdmm.tol_beta = f.tol_beta;
  cdmm.tol_constraint = f.tol_constraint;
  cdmm.validate();

  FitResult fit;
  TuningResult tune;
  if (f.lambda) {
    if (!(*f.lambda > 0.0)) throw InvalidInput("--lambda must be positive");
    // Fixed penalty: sigma from the residual of that fit.
    cdmm.lambda = *f.lambda;
    fit = complasso::fit(prob, cdmm);
    tune.lambda0 = universal_lambda0(static_cast<int>(prob.n()), static_cast<int>(p));
    tune.lambda_hat = *f.lambda;
    const Vector r = prob.y - prob.z_tilde * fit.coef.beta - prob.extra * fit.coef.gamma;
    tune.sigma_hat = r.norm() / std::sqrt(static_cast<double>(prob.n()));
    tune.gamma = kDebiasRatio * tune.lambda0;
    tune.converged = fit.converged;
    fit.sigma_hat = tune.sigma_hat;
  } else {
    std::tie(fit, tune) = scaled_lasso(prob, cdmm);
  }
  const double gamma = f.gamma ? *f.gamma : tune.gamma;
  if (!(gamma > 0.0)) throw InvalidInput("--gamma must be positive");

  QpSettings qp;
  qp.method = parse_qp(f.qp);
  qp.threads = 1;  // the fit path is sequential
  const DebiasResult db = debias(prob, fit, gamma, qp);
  const InferenceResult inf = confidence_intervals(db, tune.sigma_hat, f.alpha, prob.n());

  ensure_dir(common.out);
  const io::FitOutputs outs = io::render_fit(prob, fit, tune, db, inf, gamma);
  io::write_text(join(common.out, "estimates.json"), outs.estimates_json);
  io::write_text(join(common.out, "inference.csv"), outs.inference_csv);
  io::write_text(join(common.out, "selection.txt"), outs.selection_txt);
  log << "fit: n=" << prob.n() << " p=" << p << " sigma_hat=" << tune.sigma_hat << " lambda=" << fit.lambda
      << " gamma=" << gamma << " selected=" << select_by_ci(inf).size() << "\n";
  if (!fit.converged || !tune.converged) {
    err << "error: solver did not converge (outputs written and flagged in estimates.json)\n";
    return kExitSolver;
  }
  return kExitOk;
}

std::vector<io::SimCell> full_grid() {
  std::vector<io::SimCell> cells;
  for (double zeta : {0.2, 0.5})
    for (Index p : {50, 100})
      for (Index n : {50, 100, 200, 500}) cells.push_back({zeta, p, n});
  return cells;
}

int cmd_simulate(const SimFlags& f, const Common& common, std::ostream& log, std::ostream& err) {
  std::vector<io::SimCell> cells;
  if (!f.grid.empty()) {
    if (f.grid != "paper") throw InvalidInput("--grid supports 'paper'");
    cells = full_grid();
  }
  for (const auto& c : f.cells) cells.push_back(io::parse_cell(c));
  if (cells.empty()) throw InvalidInput("give --grid paper or at least one --cell zeta=..,p=..,n=..");
  std::vector<ConstraintMode> modes;
  {
    std::stringstream ss(f.modes);
    std::string m;
    while (std::getline(ss, m, ',')) modes.push_back(parse_constraint_mode(m));
  }
  if (modes.empty()) throw InvalidInput("--modes is empty");

  // Validate every cell before spending time on any.
  std::vector<SimConfig> configs;
  for (const auto& cell : cells) {
    for (auto mode : modes) {
      SimConfig cfg;
      cfg.p = cell.p;
      cfg.n = cell.n;
      cfg.zeta = cell.zeta;
      cfg.n_reps = f.reps;
      cfg.seed = f.seed;
      cfg.alpha = f.alpha;
      cfg.constraint_mode = mode;
      cfg.threads = threads_of(common);
      cfg.cdmm.mu = f.mu;
      cfg.qp.method = parse_qp(f.qp);
      cfg.finalize();
      configs.push_back(cfg);
    }
  }
  ensure_dir(common.out);
  std::vector<SimReport> reports;
  bool aborted = false;
  for (const auto& cfg : configs) {
    SimReport r = run_experiment(cfg);
    log << "cell zeta=" << cfg.zeta << " p=" << cfg.p << " n=" << cfg.n << " " << to_string(cfg.constraint_mode)
        << ": " << r.completed << "/" << cfg.n_reps << " reps, " << r.seconds << " s\n";
    if (r.completed == 0) aborted = true;
    for (const auto& msg : r.failures) err << "warning: " << msg << "\n";
    reports.push_back(std::move(r));
  }
  const io::SimTables t = io::render_simulation(cells, modes, reports);
  io::write_text(join(common.out, "table1.csv"), t.table1_csv);
  io::write_text(join(common.out, "table2.csv"), t.table2_csv);
  io::write_text(join(common.out, "coverage.csv"), t.coverage_csv);
  io::write_text(join(common.out, "lengths.csv"), t.lengths_csv);
  io::write_text(join(common.out, "report.json"), t.report_json);
  if (aborted) {
    err << "error: at least one cell produced no successful replication\n";
    return kExitSolver;
  }
  return kExitOk;
}

int cmd_diagnose(const DiagFlags& f, const Common& common, std::ostream& log, std::ostream&) {
  std::optional<io::InputData> data;
  std::optional<SimConfig> sim;
  Index p = 0;
  if (!f.input.empty()) {
    data = io::load_input(f.input);
    p = data->taxa.cols();
  } else if (f.cell) {
    const io::SimCell cell = io::parse_cell(*f.cell);
    SimConfig cfg;
    cfg.p = cell.p;
    cfg.n = cell.n;
    cfg.zeta = cell.zeta;
    cfg.seed = f.seed;
    cfg.finalize();
    sim = cfg;
    p = cfg.p;
  }
  std::vector<Index> sizes;
  if (p == 0) {
    // Constraints alone: p is implied by the group spec.
    if (f.groups.empty()) throw InvalidInput("diagnose needs --groups, --input or --cell");
    for (Index s : io::group_sizes_of(f.groups)) p += s;
    sizes = io::parse_group_spec(f.groups, p);
  } else {
    sizes = f.groups.empty() && sim ? multiple_group_sizes(p) : io::parse_group_spec(f.groups, p);
  }
  const ConstraintSet cs = build_constraints(sizes);

  // Refuse oversized enumeration before touching any data.
  if (f.rip_k) {
    const std::uint64_t need = binomial(static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(*f.rip_k));
    if (need > kEnumerationCap) {
      throw InvalidInput("RIP of order " + std::to_string(*f.rip_k) + " at p = " + std::to_string(p) + " needs " +
                         std::to_string(need) + " subsets; the cap is " + std::to_string(kEnumerationCap));
    }
  }
  if (!f.roc_k.empty() && f.roc_k.size() != 2) throw InvalidInput("--roc-k takes two orders, e.g. --roc-k 1 2");

  ConditionReport report;
  report.k0_observed = check_condition1(cs);
  report.cond2_min_diag = check_condition2(cs);

  std::optional<Matrix> design;
  if (data) {
    const CompositionMatrix comp = io::to_composition(*data, f.pseudo);
    const RegressionProblem prob = clr_design(comp, cs, data->response, data->covariates);
    design = prob.z_tilde / std::sqrt(static_cast<double>(prob.n()));
  } else if (sim) {
    RandomStream stream(sim->seed, 0);
    const Dataset ds = gen_dataset(*sim, sim->n, stream);
    const RegressionProblem prob = design_from_log(ds.log_composition, cs, ds.y);
    design = prob.z_tilde / std::sqrt(static_cast<double>(prob.n()));
    Matrix sigma(p, p);
    for (Index i = 0; i < p; ++i)
      for (Index j = 0; j < p; ++j) sigma(i, j) = std::pow(sim->zeta, static_cast<double>(std::abs(i - j)));
    report.eigen_bounds = restricted_eigen_bounds(sigma, cs);
  }
  if (f.rip_k || !f.roc_k.empty()) {
    if (!design) throw InvalidInput("RIP/ROC need a design: pass --input or --cell");
    const int threads = threads_of(common);
    if (f.rip_k) {
      report.rip_k = *f.rip_k;
      report.rip = rip_constants(*design, *f.rip_k, threads);
    }
    if (!f.roc_k.empty()) {
      report.roc_k = std::make_pair(f.roc_k[0], f.roc_k[1]);
      report.roc_theta = roc_constant(*design, f.roc_k[0], f.roc_k[1], threads);
    }
  }
  ensure_dir(common.out);
  io::write_text(join(common.out, "conditions.json"), io::render_conditions(report, sizes));
  log << "diagnose: p=" << p << " k0=" << report.k0_observed << " min diag=" << report.cond2_min_diag << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& log, std::ostream& err) {
  CLI::App app{"Sparse constrained lasso for compositional covariates: fit, de-biased inference, simulation"};
  app.require_subcommand(1);
  Common common;
  FitFlags fit;
  SimFlags sim;
  DiagFlags diag;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", common.out, "Output directory")->capture_default_str();
    sub->add_option("--threads", common.threads, "Worker threads (default: COMPLASSO_THREADS or all cores)");
  };

  CLI::App* f = app.add_subcommand("fit", "Fit, de-bias and compute intervals on a CSV data set");
  f->add_option("--input", fit.input, "Sample CSV (response, covariate:*, taxon columns)")->required();
  f->add_option("--groups", fit.groups, "Group sizes '10,6,4', or a JSON file of sizes or labels (default: one group)");
  f->add_option("--pseudo", fit.pseudo, "Replace zeros by this value before closing rows");
  f->add_option("--alpha", fit.alpha, "Interval level is 1 - alpha")->capture_default_str();
  f->add_option("--lambda", fit.lambda, "Fixed penalty instead of the scaled-lasso choice");
  f->add_option("--gamma", fit.gamma, "Row-program radius (default lambda0 / 3)");
  f->add_option("--mu", fit.mu, "Augmented Lagrangian weight")->capture_default_str();
  f->add_option("--tol-beta", fit.tol_beta, "Coordinate tolerance")->capture_default_str();
  f->add_option("--tol-constraint", fit.tol_constraint, "Constraint tolerance")->capture_default_str();
  f->add_option("--qp", fit.qp, "Row-program solver: cd or admm")->capture_default_str();
  add_common(f);

  CLI::App* s = app.add_subcommand("simulate", "Run the simulation grid");
  s->add_option("--grid", sim.grid, "'paper': zeta {0.2,0.5} x p {50,100} x n {50,100,200,500}");
  s->add_option("--cell", sim.cells, "A cell 'zeta=0.2,p=50,n=500' (repeatable)");
  s->add_option("--modes", sim.modes, "Constraint modes: multiple,one,none,misspecified")->capture_default_str();
  s->add_option("--reps", sim.reps, "Replications per cell")->capture_default_str();
  s->add_option("--seed", sim.seed, "Base seed")->capture_default_str();
  s->add_option("--alpha", sim.alpha, "Interval level is 1 - alpha")->capture_default_str();
  s->add_option("--mu", sim.mu, "Augmented Lagrangian weight")->capture_default_str();
  s->add_option("--qp", sim.qp, "Row-program solver: cd or admm")->capture_default_str();
  add_common(s);

  CLI::App* d = app.add_subcommand("diagnose", "Check design conditions and RIP/ROC constants");
  d->add_option("--groups", diag.groups, "Group sizes or JSON group file");
  d->add_option("--input", diag.input, "Sample CSV providing the design");
  d->add_option("--cell", diag.cell, "Simulated design 'zeta=..,p=..,n=..'");
  d->add_option("--seed", diag.seed, "Seed for --cell")->capture_default_str();
  d->add_option("--pseudo", diag.pseudo, "Replace zeros by this value");
  d->add_option("--rip-k", diag.rip_k, "RIP order (exhaustive enumeration)");
  d->add_option("--roc-k", diag.roc_k, "ROC orders k1 k2")->expected(2);
  add_common(d);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    log << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    log << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    if (f->parsed()) return cmd_fit(fit, common, log, err);
    if (s->parsed()) return cmd_simulate(sim, common, log, err);
    return cmd_diagnose(diag, common, log, err);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const SolverError& e) {
    err << "error: " << e.what() << "\n";
    return kExitSolver;
  }
}

}  // namespace complasso::cli
