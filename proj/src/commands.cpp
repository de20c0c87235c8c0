#include "planeclust/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "planeclust/baselines.hpp"
#include "planeclust/bench.hpp"
#include "planeclust/cluster.hpp"
#include "planeclust/data.hpp"
#include "planeclust/error.hpp"
#include "planeclust/format.hpp"
#include "planeclust/metrics.hpp"
#include "planeclust/model_io.hpp"
#include "planeclust/ramp.hpp"

namespace planeclust {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string option_key(const std::string& token) {
  if (token.rfind("--", 0) != 0) return "";
  return token.substr(2, token.find('=') - 2);
}

// Turns key=value lines into flag tokens; keys already present on the
// command line are skipped so flags override the file.
std::vector<std::string> config_tokens(const std::string& path,
                                       const std::set<std::string>& given) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::vector<std::string> tokens;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    const std::string key = trim(line.substr(0, eq));
    const std::string value = eq == std::string::npos ? "true" : trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(path + ": line " + std::to_string(line_no) + " has no key");
    }
    if (key == "config" || given.count(key)) continue;
    if (value == "true" || value == "yes" || value == "on") {
      tokens.push_back("--" + key);
    } else if (value == "false" || value == "no" || value == "off") {
      continue;
    } else {
      tokens.push_back("--" + key);
      tokens.push_back(value);
    }
  }
  return tokens;
}

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::optional<std::string> path;
  std::set<std::string> given;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string key = option_key(args[i]);
    if (key.empty()) continue;
    given.insert(key);
    if (key == "config") {
      const auto eq = args[i].find('=');
      if (eq != std::string::npos) {
        path = args[i].substr(eq + 1);
      } else if (i + 1 < args.size()) {
        path = args[i + 1];
      }
    }
  }
  if (!path) return args;
  const std::vector<std::string> extra = config_tokens(*path, given);
  std::vector<std::string> out;
  std::size_t insert_at = 0;
  if (!args.empty() && args.front().rfind("-", 0) != 0) insert_at = 1;
  out.insert(out.end(), args.begin(), args.begin() + static_cast<std::ptrdiff_t>(insert_at));
  out.insert(out.end(), extra.begin(), extra.end());
  out.insert(out.end(), args.begin() + static_cast<std::ptrdiff_t>(insert_at), args.end());
  return out;
}

std::pair<int, int> parse_exponent_range(const std::string& spec, const std::string& flag) {
  const auto colon = spec.find(':');
  try {
    if (colon == std::string::npos) {
      const int v = std::stoi(spec);
      return {v, v};
    }
    const int lo = std::stoi(spec.substr(0, colon));
    const int hi = std::stoi(spec.substr(colon + 1));
    if (lo > hi) throw std::invalid_argument(spec);
    return {lo, hi};
  } catch (const std::exception&) {
    throw ConfigError(flag + " expects LO:HI integer exponents with LO <= HI, got '" + spec + "'");
  }
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << content;
  if (!out) throw DataError(path + ": write failed");
}

struct SolverFlags {
  SolverOptions opts;

  void add(CLI::App* app) {
    app->add_option("--max-iter", opts.max_iter, "CCCP iteration cap per plane")
        ->capture_default_str();
    app->add_option("--subproblem-tol", opts.subproblem_tol, "relative gradient-norm target")
        ->capture_default_str();
    app->add_option("--smoothing", opts.smoothing, "final hinge smoothing half-width")
        ->capture_default_str();
    app->add_option("--objective-tol", opts.objective_tol, "CCCP objective decrease threshold")
        ->capture_default_str();
    app->add_option("--newton-max", opts.newton_max, "Newton steps per smoothing level")
        ->capture_default_str();
  }
};

struct ClusterArgs {
  std::string data;
  std::string label_column = "last";
  bool no_truth = false;
  std::string method = "ramptwsvc";
  std::string mode = "linear";
  int k = 0;
  HyperParams hp;
  std::string init = "nng";
  std::uint64_t seed = 0;
  std::string scaling = "minmax";
  int outer_max = 50;
  SolverFlags solver;
  std::string labels_out = "labels.csv";
  std::string model_out = "model.txt";
  std::string trace_dir;
};

struct EvalArgs {
  std::string pred;
  std::string truth;
  std::string data;
  std::string label_column = "last";
  std::string out;
};

struct BenchArgs {
  std::vector<std::string> data;
  std::vector<std::string> methods = {"kmeans", "kpc", "ppc", "ramptwsvc"};
  std::vector<std::string> modes = {"linear", "kernel"};
  std::string c_exp = "-8:7";
  std::string mu_exp = "-10:5";
  double delta = 0.3;
  double s = -0.2;
  std::string scaling = "minmax";
  std::string init = "nng";
  std::uint64_t seed = 0;
  int repetitions = 10;
  int outer_max = 50;
  unsigned workers = 1;
  SolverFlags solver;
  std::string journal;
  std::vector<std::string> external;
  std::string out;
  std::string table_out;
};

struct LossArgs {
  double delta = 0.3;
  double s = -0.2;
  double lo = -3.0;
  double hi = 3.0;
  double step = 0.01;
  std::string out;
};

Dataset load_input(const std::string& path, const std::string& label_column, bool with_truth) {
  CsvOptions csv;
  if (with_truth) csv.label_column = label_column;
  return load_csv(path, csv);
}

int cmd_cluster(const ClusterArgs& a, std::ostream& out, std::string& stage) {
  stage = "configuration";
  const Method method = parse_method(a.method);
  const Mode mode = parse_mode(a.mode);
  const InitKind init_kind = parse_init(a.init);
  const Scaling scaling = parse_scaling(a.scaling);
  a.hp.validate();
  a.solver.opts.validate();
  if (a.outer_max < 1) throw ConfigError("outer-max must be at least 1");

  stage = "loading data";
  const Dataset raw = load_input(a.data, a.label_column, !a.no_truth);
  const Dataset d = standardize(raw, scaling);
  int k = a.k;
  if (k == 0) {
    if (!d.truth) throw ConfigError("--k is required when the data carry no labels");
    k = d.truth->k();
  }
  if (k < 1 || k > d.size()) {
    throw ConfigError("k=" + std::to_string(k) + " must lie in [1, m=" +
                      std::to_string(d.size()) + "]");
  }

  stage = "initialization";
  const Labels init = initial_labels(d.samples, k, init_kind, a.seed, mode, a.hp.mu);

  stage = "fitting";
  const auto start = std::chrono::steady_clock::now();
  std::optional<KernelMap> kernel;
  if (mode == Mode::kernel) kernel = KernelMap{KernelType::gaussian, a.hp.mu, d.samples};
  AnyModel model;
  TrainingMeta meta;
  switch (method) {
    case Method::ramptwsvc: {
      FitOptions opts;
      opts.outer_max = a.outer_max;
      opts.solver = a.solver.opts;
      opts.scaling = scaling;
      if (!a.trace_dir.empty()) {
        std::filesystem::create_directories(a.trace_dir);
        opts.on_solve = [&](int round, int cluster, const CccpState& state) {
          std::ostringstream csv;
          write_trace_csv(csv, state);
          write_file((std::filesystem::path(a.trace_dir) /
                      ("outer" + std::to_string(round) + "_cluster" + std::to_string(cluster) +
                       ".csv"))
                         .string(),
                     csv.str());
        };
      }
      PlaneModel m = fit(d, k, a.hp, mode, init, opts);
      meta = m.meta;
      model = std::move(m);
      break;
    }
    case Method::kpc: {
      PlaneModel m = kpc_fit(d, k, init, a.outer_max, kernel);
      meta = m.meta;
      model = std::move(m);
      break;
    }
    case Method::ppc: {
      PlaneModel m = ppc_fit(d, k, a.hp.c, init, a.outer_max, kernel);
      meta = m.meta;
      model = std::move(m);
      break;
    }
    case Method::kmeans: {
      CentroidModel m = kmeans_fit(d, k, a.seed, a.outer_max, kernel);
      meta = m.meta;
      model = std::move(m);
      break;
    }
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  stage = "writing output";
  std::ostringstream labels;
  write_labels(labels, meta.final_labels);
  write_file(a.labels_out, labels.str());
  save_model(a.model_out, model);

  out << "method=" << a.method << " mode=" << a.mode << " k=" << k << " m=" << d.size()
      << " objective=" << format_real(meta.objective)
      << " outer_iterations=" << meta.outer_iterations << " wall_time=" << format_fixed(seconds, 3)
      << "s";
  if (d.truth) {
    out << " AC=" << format_fixed(rand_accuracy(d.truth->values(), meta.final_labels.values()))
        << " MI=" << format_fixed(nmi(d.truth->values(), meta.final_labels.values()));
  }
  if (meta.oscillation_stop) out << " oscillation_stop=1";
  if (meta.reached_outer_max) out << " reached_outer_max=1";
  if (meta.solver_warning) out << " solver_warning=1";
  out << '\n';
  return kExitOk;
}

int cmd_eval(const EvalArgs& a, std::ostream& out, std::string& stage) {
  stage = "loading labels";
  if (a.truth.empty() == a.data.empty()) {
    throw ConfigError("eval needs exactly one of --truth (label file) or --data (labelled CSV)");
  }
  const std::vector<int> pred = load_labels(a.pred);
  std::vector<int> truth;
  if (!a.truth.empty()) {
    truth = load_labels(a.truth);
  } else {
    const Dataset d = load_input(a.data, a.label_column, true);
    if (!d.truth) throw DataError(a.data + ": no ground-truth column");
    truth.assign(d.truth->values().begin(), d.truth->values().end());
  }
  if (pred.size() != truth.size()) {
    throw DataError("length mismatch: " + std::to_string(pred.size()) + " predicted labels vs " +
                    std::to_string(truth.size()) + " truth labels");
  }
  stage = "evaluation";
  const MetricReport r = evaluate(truth, pred);
  out << "AC=" << format_fixed(r.ac_percent) << " MI=" << format_fixed(r.mi_percent) << '\n';
  if (!a.out.empty()) {
    stage = "writing output";
    write_file(a.out, "ac,mi\n" + format_real(r.ac_percent) + "," + format_real(r.mi_percent) +
                          "\n");
  }
  return kExitOk;
}

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err, std::string& stage) {
  stage = "configuration";
  BenchConfig cfg;
  cfg.datasets = a.data;
  cfg.methods.clear();
  for (const auto& m : a.methods) cfg.methods.push_back(parse_method(m));
  cfg.modes.clear();
  for (const auto& m : a.modes) cfg.modes.push_back(parse_mode(m));
  const auto [c_lo, c_hi] = parse_exponent_range(a.c_exp, "--c-exp");
  const auto [mu_lo, mu_hi] = parse_exponent_range(a.mu_exp, "--mu-exp");
  cfg.c_grid = power_grid(c_lo, c_hi);
  cfg.mu_grid = power_grid(mu_lo, mu_hi);
  cfg.delta = a.delta;
  cfg.s = a.s;
  cfg.scaling = parse_scaling(a.scaling);
  cfg.init = parse_init(a.init);
  cfg.seed = a.seed;
  if (a.repetitions < 1) throw ConfigError("repetitions must be at least 1");
  if (a.outer_max < 1) throw ConfigError("outer-max must be at least 1");
  cfg.repetitions = a.repetitions;
  cfg.outer_max = a.outer_max;
  cfg.solver = a.solver.opts;
  cfg.workers = a.workers;
  cfg.journal_path = a.journal;
  for (const auto& e : a.external) {
    const auto eq = e.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == e.size()) {
      throw ConfigError("--external expects NAME=DIR, got '" + e + "'");
    }
    cfg.external[e.substr(0, eq)] = e.substr(eq + 1);
  }

  stage = "benchmark";
  const BenchReport report = run_bench(cfg, &err);

  stage = "writing output";
  std::ostringstream table;
  for (std::size_t i = 0; i < cfg.modes.size(); ++i) {
    if (i > 0) table << '\n';
    write_bench_table(table, report, cfg.modes[i]);
  }
  out << table.str();
  if (!a.table_out.empty()) write_file(a.table_out, table.str());
  if (!a.out.empty()) {
    std::ostringstream csv;
    write_bench_csv(csv, report);
    write_file(a.out, csv.str());
  }
  return kExitOk;
}

int cmd_losscurve(const LossArgs& a, std::ostream& out, std::string& stage) {
  stage = "configuration";
  HyperParams hp;
  hp.delta = a.delta;
  hp.s = a.s;
  hp.validate();
  if (!(a.step > 0.0) || !(a.hi >= a.lo)) {
    throw ConfigError("loss-curve grid needs step > 0 and max >= min");
  }
  const auto count = static_cast<long>(std::floor((a.hi - a.lo) / a.step + 1e-9)) + 1;
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) {
    // Snap to the step lattice so the grid prints cleanly (e.g. 0 not 1e-17).
    const double v = a.lo + static_cast<double>(i) * a.step;
    grid.push_back(std::round(v / a.step) * a.step);
  }
  stage = "writing output";
  const auto rows = loss_curves(hp, grid);
  if (a.out.empty()) {
    write_loss_curves(out, rows);
  } else {
    std::ostringstream csv;
    write_loss_curves(csv, rows);
    write_file(a.out, csv.str());
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"planeclust: plane-based clustering with ramp losses", "planeclust"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path;

  ClusterArgs ca;
  auto* cluster = app.add_subcommand("cluster", "cluster a dataset and save labels and model");
  cluster->add_option("--config", config_path, "key=value file of default flags");
  cluster->add_option("--data", ca.data, "input CSV")->required();
  cluster->add_option("--label-column", ca.label_column,
                      "ground-truth column (index, name or 'last')")
      ->capture_default_str();
  cluster->add_flag("--no-truth", ca.no_truth, "the CSV has no ground-truth column");
  cluster->add_option("--method", ca.method, "ramptwsvc, kmeans, kpc or ppc")
      ->capture_default_str();
  cluster->add_option("--mode", ca.mode, "linear or kernel")->capture_default_str();
  cluster->add_option("--k", ca.k, "number of clusters (default: from ground truth)");
  cluster->add_option("--c1", ca.hp.c1)->capture_default_str();
  cluster->add_option("--c2", ca.hp.c2)->capture_default_str();
  cluster->add_option("--delta", ca.hp.delta)->capture_default_str();
  cluster->add_option("--s", ca.hp.s)->capture_default_str();
  cluster->add_option("--mu", ca.hp.mu, "Gaussian kernel width")->capture_default_str();
  cluster->add_option("--c", ca.hp.c, "PPC trade-off")->capture_default_str();
  cluster->add_option("--init", ca.init, "nng or random")->capture_default_str();
  cluster->add_option("--seed", ca.seed)->capture_default_str();
  cluster->add_option("--scaling", ca.scaling, "minmax, zscore or none")->capture_default_str();
  cluster->add_option("--outer-max", ca.outer_max)->capture_default_str();
  ca.solver.add(cluster);
  cluster->add_option("--out", ca.labels_out, "label file (index,label)")->capture_default_str();
  cluster->add_option("--model-out", ca.model_out, "model file")->capture_default_str();
  cluster->add_option("--trace-dir", ca.trace_dir,
                      "write one iter,objective,nnz_p1,nnz_p2 CSV per plane solve here");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "score predicted labels against ground truth");
  eval->add_option("--config", config_path);
  eval->add_option("--pred", ea.pred, "predicted label file")->required();
  eval->add_option("--truth", ea.truth, "ground-truth label file");
  eval->add_option("--data", ea.data, "labelled CSV supplying the ground truth");
  eval->add_option("--label-column", ea.label_column)->capture_default_str();
  eval->add_option("--out", ea.out, "write ac,mi CSV here");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "grid-search benchmark over datasets and methods");
  bench->add_option("--config", config_path);
  bench->add_option("--data", ba.data, "labelled CSV files")->required()->delimiter(',');
  bench->add_option("--methods", ba.methods)->delimiter(',')->capture_default_str();
  bench->add_option("--modes", ba.modes)->delimiter(',')->capture_default_str();
  bench->add_option("--c-exp", ba.c_exp, "exponent range LO:HI of the c grid")
      ->capture_default_str();
  bench->add_option("--mu-exp", ba.mu_exp, "exponent range LO:HI of the mu grid")
      ->capture_default_str();
  bench->add_option("--delta", ba.delta)->capture_default_str();
  bench->add_option("--s", ba.s)->capture_default_str();
  bench->add_option("--scaling", ba.scaling)->capture_default_str();
  bench->add_option("--init", ba.init)->capture_default_str();
  bench->add_option("--seed", ba.seed)->capture_default_str();
  bench->add_option("--repetitions", ba.repetitions, "kmeans seeds per grid point")
      ->capture_default_str();
  bench->add_option("--outer-max", ba.outer_max)->capture_default_str();
  bench->add_option("--workers", ba.workers, "concurrent grid-point fits")->capture_default_str();
  ba.solver.add(bench);
  bench->add_option("--journal", ba.journal, "progress journal for resumable sweeps");
  bench->add_option("--external", ba.external, "NAME=DIR of <dataset>_<mode>.csv label files")
      ->delimiter(',');
  bench->add_option("--out", ba.out, "result CSV");
  bench->add_option("--table-out", ba.table_out, "also write the text table here");

  LossArgs la;
  auto* loss = app.add_subcommand("losscurve", "export the cost functions on a deviation grid");
  loss->add_option("--config", config_path);
  loss->add_option("--delta", la.delta)->capture_default_str();
  loss->add_option("--s", la.s)->capture_default_str();
  loss->add_option("--min", la.lo)->capture_default_str();
  loss->add_option("--max", la.hi)->capture_default_str();
  loss->add_option("--step", la.step)->capture_default_str();
  loss->add_option("--out", la.out, "CSV path (default: stdout)");

  std::string stage = "parsing arguments";
  try {
    std::vector<std::string> tokens = expand_config(args);
    std::reverse(tokens.begin(), tokens.end());
    try {
      app.parse(tokens);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kExitOk : kExitConfig;
    }
    if (cluster->parsed()) return cmd_cluster(ca, out, stage);
    if (eval->parsed()) return cmd_eval(ea, out, stage);
    if (bench->parsed()) return cmd_bench(ba, out, err, stage);
    if (loss->parsed()) return cmd_losscurve(la, out, stage);
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "planeclust: invalid configuration (" << stage << "): " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "planeclust: error during " << stage << ": " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace planeclust
