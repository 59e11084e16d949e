#include "ssi/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "ssi/csv_io.hpp"
#include "ssi/data_model.hpp"
#include "ssi/imputer.hpp"
#include "ssi/metrics.hpp"
#include "ssi/regression.hpp"
#include "ssi/simulation.hpp"
#include "ssi/tuning.hpp"

namespace ssi {

namespace {

struct CommonIo {
  std::string data_path;
  std::string schema_path;
  std::string out_path;
  bool no_header = false;
  std::string delimiter = ",";
  bool sort_patterns = false;
};

struct ParamArgs {
  std::optional<double> tau;
  std::optional<double> lambda1;
  std::optional<double> lambda2;
  std::string tune_method;  // "", "interchangeable", "cv"
  std::string grid_spec = "0:2:21";
  bool swap_keep_column = false;
  bool intercept = false;
  int threads = 0;
};

void add_common_io(CLI::App* cmd, CommonIo& io) {
  cmd->add_option("--data", io.data_path, "input CSV file")->required();
  cmd->add_option("--schema", io.schema_path, "companion schema file")->required();
  cmd->add_option("--out", io.out_path, "output path")->required();
  cmd->add_flag("--no-header", io.no_header, "input CSV has no header row");
  cmd->add_option("--delimiter", io.delimiter, "field delimiter (default ',')");
  cmd->add_flag("--sort-patterns", io.sort_patterns,
                "group identical missing patterns before computing d0");
}

void add_param_args(CLI::App* cmd, ParamArgs& pa, bool with_tune) {
  cmd->add_option("--tau", pa.tau, "normalized scale; lambda = tau * n^{1/(2*d0+1)}");
  cmd->add_option("--lambda1", pa.lambda1, "response kernel scale");
  cmd->add_option("--lambda2", pa.lambda2, "covariate kernel scale");
  if (with_tune)
    cmd->add_option("--tune", pa.tune_method, "tune the scale: interchangeable | cv")
        ->check(CLI::IsMember({"interchangeable", "cv"}));
  cmd->add_option("--grid", pa.grid_spec, "tau grid as lo:hi:steps (default 0:2:21)");
  cmd->add_flag("--swap-keep-column", pa.swap_keep_column,
                "keep the target column in the role-swapped tuning kernel");
  cmd->add_flag("--intercept", pa.intercept, "prepend a ones column to the regression design");
  cmd->add_option("--threads", pa.threads, "worker threads (0 = hardware)");
}

TauGrid parse_grid(const std::string& spec) {
  TauGrid grid;
  double lo, hi;
  int steps;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%d", &lo, &hi, &steps) != 3)
    throw Error(errc::invalid_argument, "grid must be lo:hi:steps, got '" + spec + "'");
  grid.lo = lo;
  grid.hi = hi;
  grid.steps = steps;
  return grid;
}

MissingDataset load_input(const CommonIo& io) {
  CsvSpec spec;
  spec.path = io.data_path;
  spec.schema_path = io.schema_path;
  spec.header = !io.no_header;
  if (io.delimiter.size() != 1)
    throw Error(errc::invalid_argument, "delimiter must be a single character");
  spec.delimiter = io.delimiter[0];
  MissingDataset ds = load_csv(spec);
  if (io.sort_patterns) ds = sort_by_pattern(ds).first;
  return ds;
}

/// Resolves the kernel scales: explicit tau / lambdas win, otherwise the
/// requested tuner runs (interchangeable when nothing was specified).
ScaleParams resolve_params(const MissingDataset& ds, const ParamArgs& pa, TuneReport* report) {
  int given = (pa.tau ? 1 : 0) + ((pa.lambda1 || pa.lambda2) ? 1 : 0) +
              (!pa.tune_method.empty() ? 1 : 0);
  if (given > 1)
    throw Error(errc::invalid_argument, "choose one of --tau, --lambda1/--lambda2, --tune");

  if (pa.tau) {
    PatternIndex idx = validate(ds);
    return ScaleParams::from_tau(*pa.tau, ds.n(), idx.d0);
  }
  if (pa.lambda1 || pa.lambda2) {
    double l1 = pa.lambda1 ? *pa.lambda1 : *pa.lambda2;
    double l2 = pa.lambda2 ? *pa.lambda2 : l1;
    return ScaleParams::from_lambdas(l1, l2);
  }
  TuneOptions topt;
  topt.swap_keep_column = pa.swap_keep_column;
  topt.intercept = pa.intercept;
  topt.threads = pa.threads;
  TauGrid grid = parse_grid(pa.grid_spec);
  TuneReport tuned = pa.tune_method == "cv" ? tune_cv(ds, grid, topt)
                                            : tune_interchangeable(ds, grid, topt);
  if (report) *report = tuned;
  ScaleParams params = ScaleParams::from_lambdas(tuned.lambda_hat, tuned.lambda_hat);
  params.tau = tuned.tau_hat;
  return params;
}

int run_impute(const CommonIo& io, const ParamArgs& pa, int sssi_sweeps, bool include_diagonal) {
  MissingDataset ds = load_input(io);
  ScaleParams params = resolve_params(ds, pa, nullptr);
  ImputationResult result;
  if (sssi_sweeps > 0) {
    SssiOptions opt;
    opt.threads = pa.threads;
    opt.include_diagonal = include_diagonal;
    result = impute_sssi(ds, params, sssi_sweeps, opt);
  } else {
    ImputeOptions opt;
    opt.threads = pa.threads;
    opt.include_diagonal = include_diagonal;
    result = impute_all(ds, params, opt);
  }
  save_result(result, ds, io.out_path);
  return 0;
}

int run_tune(const CommonIo& io, const ParamArgs& pa, const std::string& method) {
  MissingDataset ds = load_input(io);
  TuneOptions topt;
  topt.swap_keep_column = pa.swap_keep_column;
  topt.intercept = pa.intercept;
  topt.threads = pa.threads;
  TauGrid grid = parse_grid(pa.grid_spec);
  TuneReport report =
      method == "cv" ? tune_cv(ds, grid, topt) : tune_interchangeable(ds, grid, topt);
  save_tune_report(report, io.out_path);
  return 0;
}

int run_fit(const CommonIo& io, const ParamArgs& pa) {
  MissingDataset ds = load_input(io);
  if (!ds.y_fully_observed())
    throw Error(errc::invalid_argument, "fit needs a fully observed response");
  ScaleParams params = resolve_params(ds, pa, nullptr);
  ImputeOptions opt;
  opt.threads = pa.threads;
  ImputationResult imputed = impute_all(ds, params, opt);

  Matrix design = imputed.x_hat;
  std::vector<std::string> names;
  if (pa.intercept) {
    Matrix with_ones(design.rows(), design.cols() + 1);
    with_ones.col(0).setOnes();
    with_ones.rightCols(design.cols()) = design;
    design = std::move(with_ones);
    names.push_back("(intercept)");
  }
  for (const auto& col : ds.schema) names.push_back(col.name);
  OlsFit fit = fit_ols(design, ds.y);

  std::ofstream out(io.out_path);
  if (!out) throw Error(errc::io_error, "cannot write '" + io.out_path + "'");
  out << "# ssi-tsv v1 fit\n";
  out << "name\tbeta\n";
  for (Index k = 0; k < fit.beta_hat.size(); ++k)
    out << names[static_cast<std::size_t>(k)] << '\t' << format_double(fit.beta_hat(k)) << '\n';
  out << "# sigma2=" << format_double(fit.sigma2_hat) << '\n';
  out << "# lambda1=" << format_double(params.lambda1)
      << " lambda2=" << format_double(params.lambda2) << '\n';
  return 0;
}

SimScenario scenario_from_json(const nlohmann::json& j) {
  SimScenario sc;
  sc.id = j.value("id", std::string("scenario"));
  sc.n = j.value("n", 500);
  sc.p = j.value("p", 10);
  sc.rho = j.value("rho", 0.5);
  sc.r2 = j.value("r2", 0.6);
  sc.cov_structure = cov_structure_from_string(j.value("cov", std::string("exchangeable")));
  sc.covariate_law = covariate_law_from_string(j.value("law", std::string("normal")));
  sc.mechanism = mechanism_from_string(j.value("mechanism", std::string("mcar")));
  sc.pattern_family = pattern_from_string(j.value("pattern", std::string("blockwise7")));
  sc.target_missing_rate = j.value("rate", 0.5);
  sc.train_fraction = j.value("train_fraction", 0.7);
  sc.seed = j.value("seed", 1ull);
  sc.check();
  return sc;
}

int run_simulate(const SimScenario& sc, const std::string& prefix) {
  SimDraw d = draw(sc);
  save_dataset(d.dataset, prefix + ".csv");

  MissingDataset truth = d.dataset;
  truth.x = d.x_true;
  truth.mask.setOnes(d.x_true.rows(), d.x_true.cols());
  save_dataset(truth, prefix + ".truth.csv");

  nlohmann::json meta;
  meta["format"] = "ssi-meta v1";
  meta["id"] = sc.id;
  meta["n"] = sc.n;
  meta["p"] = sc.p;
  meta["rho"] = sc.rho;
  meta["r2"] = sc.r2;
  meta["seed"] = sc.seed;
  meta["sigma2"] = d.sigma2;
  meta["realized_missing"] = d.realized_missing;
  meta["train_idx"] = d.train_idx;
  meta["test_idx"] = d.test_idx;
  std::ofstream js(prefix + ".meta.json");
  if (!js) throw Error(errc::io_error, "cannot write '" + prefix + ".meta.json'");
  js << meta.dump(2) << '\n';
  return 0;
}

int run_bench_cmd(const std::string& config_path, const std::string& out_dir, int threads) {
  std::ifstream in(config_path);
  if (!in) throw Error(errc::io_error, "cannot open '" + config_path + "'");
  nlohmann::json cfg;
  try {
    in >> cfg;
  } catch (const nlohmann::json::exception& e) {
    throw Error(errc::parse_error, std::string("bad bench config: ") + e.what());
  }

  int reps = cfg.value("reps", 10);
  TauGrid grid;
  if (cfg.contains("grid")) {
    grid.lo = cfg["grid"].value("lo", 0.0);
    grid.hi = cfg["grid"].value("hi", 2.0);
    grid.steps = cfg["grid"].value("steps", 21);
  }

  std::vector<MethodSpec> methods;
  for (const auto& m : cfg.at("methods")) {
    MethodSpec spec;
    if (m.is_string()) {
      spec = MethodSpec::from_name(m.get<std::string>());
    } else {
      spec = MethodSpec::from_name(m.at("name").get<std::string>());
      spec.knn_k = m.value("k", 5);
      spec.sssi_sweeps = m.value("sweeps", 10);
    }
    spec.grid = grid;
    methods.push_back(spec);
  }
  std::vector<SimScenario> scenarios;
  for (const auto& s : cfg.at("scenarios")) scenarios.push_back(scenario_from_json(s));
  if (scenarios.empty() || methods.empty())
    throw Error(errc::invalid_argument, "bench config needs scenarios and methods");

  BenchTable table = run_bench(scenarios, methods, reps, threads);

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  auto open = [&](const std::string& name) {
    std::ofstream out(out_dir + "/" + name);
    if (!out) throw Error(errc::io_error, "cannot write '" + out_dir + "/" + name + "'");
    return out;
  };
  {
    auto out = open("bench.tsv");
    table.write_tsv(out);
  }
  {
    auto out = open("bench.jsonl");
    table.write_jsonl(out);
  }
  for (const std::string metric : {"ia_raw", "ia_rmse", "ea", "pa_raw", "pa_rmse"}) {
    auto out = open("plot_" + metric + ".csv");
    table.write_plot_csv(out, metric);
  }
  return 0;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args) {
  CLI::App app{"semi-supervised imputation for covariates with high missing rates"};
  app.require_subcommand(1);

  CommonIo impute_io, tune_io, fit_io;
  ParamArgs impute_pa, tune_pa, fit_pa;
  int sssi_sweeps = 0;
  bool include_diagonal = false;
  std::string tune_method = "interchangeable";

  auto* impute_cmd = app.add_subcommand("impute", "fill missing covariate entries");
  add_common_io(impute_cmd, impute_io);
  add_param_args(impute_cmd, impute_pa, true);
  impute_cmd->add_option("--sssi-sweeps", sssi_sweeps,
                         "sequential re-imputation sweeps (0 = single pass)");
  impute_cmd->add_flag("--include-diagonal", include_diagonal,
                       "include a unit self-weight in the row normalization");

  auto* tune_cmd = app.add_subcommand("tune", "select the kernel scale on a grid");
  add_common_io(tune_cmd, tune_io);
  add_param_args(tune_cmd, tune_pa, false);
  tune_cmd->add_option("--method", tune_method, "interchangeable | cv")
      ->check(CLI::IsMember({"interchangeable", "cv"}));

  auto* fit_cmd = app.add_subcommand("fit", "impute, then fit least squares");
  add_common_io(fit_cmd, fit_io);
  add_param_args(fit_cmd, fit_pa, true);

  auto* sim_cmd = app.add_subcommand("simulate", "draw one synthetic dataset");
  SimScenario sc;
  std::string sim_out, sim_cov = "exchangeable", sim_law = "normal", sim_mechanism = "mcar",
              sim_pattern = "blockwise7";
  sim_cmd->add_option("--out", sim_out, "output path prefix")->required();
  sim_cmd->add_option("--n", sc.n, "sample size");
  sim_cmd->add_option("--p", sc.p, "covariate count");
  sim_cmd->add_option("--rho", sc.rho, "correlation parameter");
  sim_cmd->add_option("--r2", sc.r2, "target coefficient of determination");
  sim_cmd->add_option("--cov", sim_cov, "exchangeable | ar1");
  sim_cmd->add_option("--law", sim_law, "normal | exponential");
  sim_cmd->add_option("--mechanism", sim_mechanism, "mcar | mar | mnar | mnar2 | mnar3");
  sim_cmd->add_option("--pattern", sim_pattern, "blockwise7 | none");
  sim_cmd->add_option("--rate", sc.target_missing_rate, "target missing rate");
  sim_cmd->add_option("--train-fraction", sc.train_fraction, "training split fraction");
  sim_cmd->add_option("--seed", sc.seed, "generator seed");

  auto* bench_cmd = app.add_subcommand("bench", "replicate scenarios and tabulate metrics");
  std::string bench_config, bench_out;
  int bench_threads = 0;
  bench_cmd->add_option("--config", bench_config, "scenario matrix JSON file")->required();
  bench_cmd->add_option("--out", bench_out, "output directory")->required();
  bench_cmd->add_option("--threads", bench_threads, "worker threads (0 = hardware)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());  // CLI11 wants last-first
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "ssi-error\tcode=1\tkind=Usage\tmessage=" << e.what() << "\n";
    return 1;
  }

  try {
    if (impute_cmd->parsed()) return run_impute(impute_io, impute_pa, sssi_sweeps, include_diagonal);
    if (tune_cmd->parsed()) return run_tune(tune_io, tune_pa, tune_method);
    if (fit_cmd->parsed()) return run_fit(fit_io, fit_pa);
    if (sim_cmd->parsed()) {
      sc.cov_structure = cov_structure_from_string(sim_cov);
      sc.covariate_law = covariate_law_from_string(sim_law);
      sc.mechanism = mechanism_from_string(sim_mechanism);
      sc.pattern_family = pattern_from_string(sim_pattern);
      return run_simulate(sc, sim_out);
    }
    if (bench_cmd->parsed()) return run_bench_cmd(bench_config, bench_out, bench_threads);
  } catch (const Error& e) {
    int code = exit_code_for(e.code());
    std::cerr << "ssi-error\tcode=" << code << "\tkind=" << errc_name(e.code())
              << "\tmessage=" << e.what() << "\n";
    return code;
  } catch (const std::exception& e) {
    std::cerr << "ssi-error\tcode=3\tkind=Internal\tmessage=" << e.what() << "\n";
    return 3;
  }
  return 1;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_dispatch(args);
}

}  // namespace ssi
