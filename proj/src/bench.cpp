#include "planeclust/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "planeclust/baselines.hpp"
#include "planeclust/error.hpp"
#include "planeclust/format.hpp"
#include "planeclust/metrics.hpp"

namespace planeclust {

Method parse_method(const std::string& name) {
  if (name == "ramptwsvc") return Method::ramptwsvc;
  if (name == "kmeans") return Method::kmeans;
  if (name == "kpc") return Method::kpc;
  if (name == "ppc") return Method::ppc;
  throw ConfigError("unknown method '" + name + "' (expected ramptwsvc, kmeans, kpc or ppc)");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::ramptwsvc: return "ramptwsvc";
    case Method::kmeans: return "kmeans";
    case Method::kpc: return "kpc";
    case Method::ppc: return "ppc";
  }
  return "";
}


std::vector<double> power_grid(int lo, int hi) {
  std::vector<double> g;
  for (int i = lo; i <= hi; ++i) g.push_back(std::ldexp(1.0, i));
  return g;
}

std::string params_string(Method method, Mode mode, const GridParams& p) {
  std::vector<std::string> parts;
  if (method == Method::ramptwsvc) {
    parts.push_back("c1=" + format_real(p.c1));
    parts.push_back("c2=" + format_real(p.c2));
  }
  if (method == Method::ppc) parts.push_back("c=" + format_real(p.c));
  if (mode == Mode::kernel) parts.push_back("mu=" + format_real(p.mu));
  std::string s;
  for (const auto& part : parts) s += (s.empty() ? "" : ";") + part;
  return s.empty() ? "-" : s;
}

std::vector<GridParams> grid_points(Method method, Mode mode, const std::vector<double>& c_grid,
                                    const std::vector<double>& mu_grid) {
  const std::vector<double> mus = mode == Mode::kernel ? mu_grid : std::vector<double>{0.0};
  std::vector<GridParams> points;
  for (double mu : mus) {
    switch (method) {
      case Method::ramptwsvc:
        for (double c1 : c_grid) {
          for (double c2 : c_grid) points.push_back({c1, c2, 0.0, mu});
        }
        break;
      case Method::ppc:
        for (double c : c_grid) points.push_back({0.0, 0.0, c, mu});
        break;
      case Method::kpc:
      case Method::kmeans:
        points.push_back({0.0, 0.0, 0.0, mu});
        break;
    }
  }
  return points;
}

const BenchCell* BenchReport::find(const std::string& dataset, const std::string& method,
                                   Mode mode) const {
  for (const auto& c : cells) {
    if (c.dataset == dataset && c.method == method && c.mode == mode) return &c;
  }
  return nullptr;
}

unsigned effective_workers(unsigned requested) {
  unsigned n = std::max(1u, requested);
  if (const char* env = std::getenv("PLANECLUST_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap >= 1) n = std::min(n, static_cast<unsigned>(cap));
    } catch (const std::exception&) {
      // Unparseable caps are ignored.
    }
  }
  return n;
}

std::string dataset_name(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

namespace {

struct DatasetContext {
  std::string name;
  Dataset data;
  int k = 0;
  Labels linear_init;
};

struct Task {
  Method method;
  Mode mode;
  GridParams params;
  std::uint64_t seed;
};

struct Score {
  double ac = 0.0;
  double mi = 0.0;
};

std::string config_tag(const BenchConfig& c) {
  return to_string(c.scaling) + "/" + to_string(c.init) + "/" + format_real(c.delta) + "/" +
         format_real(c.s) + "/" + std::to_string(c.outer_max);
}

std::string journal_key(const std::string& dataset, const Task& t, const std::string& tag) {
  return dataset + "," + to_string(t.method) + "," + to_string(t.mode) + "," +
         params_string(t.method, t.mode, t.params) + "," + std::to_string(t.seed) + "," + tag;
}

// Journal lines: dataset,method,mode,params,seed,config,ac,mi
class Journal {
 public:
  explicit Journal(const std::string& path) : path_(path) {
    if (path_.empty()) return;
    std::vector<std::string> kept;
    {
      std::ifstream in(path_);
      std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      std::istringstream lines(text);
      std::string line;
      while (std::getline(lines, line)) {
        // An unterminated last line was cut off mid-write; recompute that point.
        if (lines.eof() && !text.empty() && text.back() != '\n') break;
        if (line.empty() || line.front() == '#') continue;
        const auto last = line.rfind(',');
        if (last == std::string::npos || last == 0) continue;
        const auto prev = line.rfind(',', last - 1);
        if (prev == std::string::npos) continue;
        try {
          done_[line.substr(0, prev)] = {std::stod(line.substr(prev + 1, last - prev - 1)),
                                         std::stod(line.substr(last + 1))};
          kept.push_back(line);
        } catch (const std::exception&) {
          // Unreadable line; recompute that point.
        }
      }
    }
    // Rewrite with the complete lines only, so appends start on a fresh line.
    {
      std::ofstream rewrite(path_, std::ios::trunc);
      if (!rewrite) throw DataError(path_ + ": cannot open journal for writing");
      for (const auto& line : kept) rewrite << line << '\n';
    }
    out_.open(path_, std::ios::app);
    if (!out_) throw DataError(path_ + ": cannot open journal for writing");
  }

  std::optional<Score> lookup(const std::string& key) const {
    const auto it = done_.find(key);
    if (it == done_.end()) return std::nullopt;
    return it->second;
  }

  void record(const std::string& key, Score s) {
    if (path_.empty()) return;
    std::lock_guard lock(mutex_);
    out_ << key << ',' << format_real(s.ac) << ',' << format_real(s.mi) << '\n';
    out_.flush();
  }

 private:
  std::string path_;
  std::map<std::string, Score> done_;
  std::ofstream out_;
  std::mutex mutex_;
};

Score run_task(const DatasetContext& ctx, const Task& t, const BenchConfig& config) {
  const auto truth = ctx.data.truth->values();
  std::optional<KernelMap> kernel;
  if (t.mode == Mode::kernel) kernel = KernelMap{KernelType::gaussian, t.params.mu, ctx.data.samples};
  // Kernel runs start from labels computed on their own Gram features.
  const Labels init = t.mode == Mode::kernel
                          ? initial_labels(ctx.data.samples, ctx.k, config.init, config.seed,
                                           Mode::kernel, t.params.mu)
                          : ctx.linear_init;
  Labels pred;
  switch (t.method) {
    case Method::kmeans:
      pred = kmeans_fit(ctx.data, ctx.k, t.seed, config.outer_max, kernel).meta.final_labels;
      break;
    case Method::kpc:
      pred = kpc_fit(ctx.data, ctx.k, init, config.outer_max, kernel).meta.final_labels;
      break;
    case Method::ppc:
      pred = ppc_fit(ctx.data, ctx.k, t.params.c, init, config.outer_max, kernel)
                 .meta.final_labels;
      break;
    case Method::ramptwsvc: {
      HyperParams hp;
      hp.c1 = t.params.c1;
      hp.c2 = t.params.c2;
      hp.delta = config.delta;
      hp.s = config.s;
      if (t.mode == Mode::kernel) hp.mu = t.params.mu;
      FitOptions opts;
      opts.outer_max = config.outer_max;
      opts.solver = config.solver;
      opts.scaling = config.scaling;
      pred = fit(ctx.data, ctx.k, hp, t.mode, init, opts).meta.final_labels;
      break;
    }
  }
  return {rand_accuracy(truth, pred.values()), nmi(truth, pred.values())};
}

// Higher AC, then higher MI, then smaller parameters.
bool better(const Score& a, const GridParams& pa, const Score& b, const GridParams& pb) {
  if (a.ac != b.ac) return a.ac > b.ac;
  if (a.mi != b.mi) return a.mi > b.mi;
  return pa < pb;
}

std::vector<Score> run_tasks(const DatasetContext& ctx, const std::vector<Task>& tasks,
                             const BenchConfig& config, Journal& journal) {
  const std::string tag = config_tag(config);
  std::vector<std::optional<Score>> results(tasks.size());
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    results[i] = journal.lookup(journal_key(ctx.name, tasks[i], tag));
    if (!results[i]) pending.push_back(i);
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    while (true) {
      const std::size_t slot = next.fetch_add(1);
      if (slot >= pending.size()) return;
      const std::size_t i = pending[slot];
      try {
        const Score s = run_task(ctx, tasks[i], config);
        results[i] = s;
        journal.record(journal_key(ctx.name, tasks[i], tag), s);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(pending.size());
      }
    }
  };
  const unsigned n = std::min<unsigned>(effective_workers(config.workers),
                                        static_cast<unsigned>(std::max<std::size_t>(1, pending.size())));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < n; ++w) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  std::vector<Score> out;
  for (auto& r : results) out.push_back(*r);
  return out;
}

BenchCell sweep_cell(const DatasetContext& ctx, Method method, Mode mode,
                     const BenchConfig& config, Journal& journal) {
  const std::vector<GridParams> points = grid_points(method, mode, config.c_grid, config.mu_grid);
  const int reps = method == Method::kmeans ? std::max(1, config.repetitions) : 1;
  std::vector<Task> tasks;
  for (const auto& p : points) {
    for (int r = 0; r < reps; ++r) {
      tasks.push_back({method, mode, p, config.seed + static_cast<std::uint64_t>(r)});
    }
  }
  const std::vector<Score> scores = run_tasks(ctx, tasks, config, journal);

  BenchCell cell;
  cell.dataset = ctx.name;
  cell.method = to_string(method);
  cell.mode = mode;
  cell.available = true;
  cell.grid_size = points.size();
  cell.seed = config.seed;
  std::optional<std::size_t> best;
  std::vector<Score> mean(points.size());
  std::vector<Score> spread(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    Score sum;
    for (int r = 0; r < reps; ++r) {
      const Score& s = scores[p * static_cast<std::size_t>(reps) + static_cast<std::size_t>(r)];
      sum.ac += s.ac;
      sum.mi += s.mi;
    }
    mean[p] = {sum.ac / reps, sum.mi / reps};
    Score var;
    for (int r = 0; r < reps; ++r) {
      const Score& s = scores[p * static_cast<std::size_t>(reps) + static_cast<std::size_t>(r)];
      var.ac += (s.ac - mean[p].ac) * (s.ac - mean[p].ac);
      var.mi += (s.mi - mean[p].mi) * (s.mi - mean[p].mi);
    }
    const double denom = reps > 1 ? reps - 1 : 1;
    spread[p] = {std::sqrt(var.ac / denom), std::sqrt(var.mi / denom)};
    if (!best || better(mean[p], points[p], mean[*best], points[*best])) best = p;
  }
  cell.ac = mean[*best].ac;
  cell.mi = mean[*best].mi;
  cell.params = params_string(method, mode, points[*best]);
  if (method == Method::kmeans) {
    cell.ac_std = spread[*best].ac;
    cell.mi_std = spread[*best].mi;
  }
  return cell;
}

BenchCell external_cell(const DatasetContext& ctx, const std::string& name,
                        const std::string& dir, Mode mode) {
  BenchCell cell;
  cell.dataset = ctx.name;
  cell.method = name;
  cell.mode = mode;
  cell.params = "external";
  const auto path = std::filesystem::path(dir) / (ctx.name + "_" + to_string(mode) + ".csv");
  if (!std::filesystem::exists(path)) return cell;
  const std::vector<int> pred = load_labels(path.string());
  const auto truth = ctx.data.truth->values();
  if (pred.size() != truth.size()) {
    throw DataError(path.string() + ": " + std::to_string(pred.size()) + " labels for " +
                    std::to_string(truth.size()) + " samples");
  }
  cell.available = true;
  cell.ac = rand_accuracy(truth, pred);
  cell.mi = nmi(truth, pred);
  return cell;
}

}  // namespace

BenchReport run_bench(const BenchConfig& config, std::ostream* log) {
  if (config.datasets.empty()) throw ConfigError("bench: no datasets given");
  if (config.c_grid.empty() || config.mu_grid.empty()) throw ConfigError("bench: empty grid");
  HyperParams probe;
  probe.delta = config.delta;
  probe.s = config.s;
  probe.validate();
  config.solver.validate();

  BenchReport report;
  std::ostringstream meta;
  meta << "selection=best-over-grid by AC (ties: higher MI, then smallest parameters); scaling="
       << to_string(config.scaling) << "; init=" << to_string(config.init)
       << "; seed=" << config.seed << "; delta=" << config.delta
       << "; s=" << config.s << "; outer_max=" << config.outer_max
       << "; kmeans=random init, mean±std over " << config.repetitions << " seeds";
  report.metadata = meta.str();
  for (Method m : config.methods) report.methods.push_back(to_string(m));
  for (const auto& [name, dir] : config.external) report.methods.push_back(name);

  Journal journal(config.journal_path);
  for (const auto& path : config.datasets) {
    DatasetContext ctx;
    ctx.name = dataset_name(path);
    CsvOptions csv;
    csv.has_truth = true;
    Dataset raw = load_csv(path, csv);
    if (!raw.truth) throw ConfigError(path + ": bench needs ground-truth labels");
    ctx.data = standardize(raw, config.scaling);
    ctx.k = ctx.data.truth->k();
    ctx.linear_init =
        initial_labels(ctx.data.samples, ctx.k, config.init, config.seed, Mode::linear, 1.0);
    report.datasets.push_back(ctx.name);
    for (Mode mode : config.modes) {
      for (Method method : config.methods) {
        BenchCell cell = sweep_cell(ctx, method, mode, config, journal);
        if (log) {
          *log << ctx.name << ' ' << cell.method << '/' << to_string(mode)
               << " AC=" << format_fixed(cell.ac) << " MI=" << format_fixed(cell.mi) << " ("
               << cell.params << ", " << cell.grid_size << " grid points)" << std::endl;
        }
        report.cells.push_back(std::move(cell));
      }
      for (const auto& [name, dir] : config.external) {
        report.cells.push_back(external_cell(ctx, name, dir, mode));
      }
    }
  }
  return report;
}

void write_bench_csv(std::ostream& out, const BenchReport& report) {
  out << "# " << report.metadata << '\n';
  out << "dataset,method,ac,mi,params,seed\n";
  for (const auto& c : report.cells) {
    if (!c.available) continue;
    std::string params = c.params;
    if (c.ac_std) {
      params += ";ac_std=" + format_real(*c.ac_std) + ";mi_std=" + format_real(*c.mi_std);
    }
    out << c.dataset << ',' << c.method << '/' << to_string(c.mode) << ','
        << format_real(c.ac) << ',' << format_real(c.mi) << ',' << params << ',' << c.seed
        << '\n';
  }
}

void write_bench_table(std::ostream& out, const BenchReport& report, Mode mode) {
  auto title = [](const std::string& m) {
    if (m == "kmeans") return std::string("kmeans");
    if (m == "kpc") return std::string("kPC");
    if (m == "ppc") return std::string("PPC");
    if (m == "ramptwsvc") return std::string("RampTWSVC");
    return m;
  };
  // RampTWSVC goes last, as the method under study.
  std::vector<std::string> order;
  for (const auto& m : report.methods) {
    if (m != "ramptwsvc") order.push_back(m);
  }
  if (std::find(report.methods.begin(), report.methods.end(), "ramptwsvc") !=
      report.methods.end()) {
    order.push_back("ramptwsvc");
  }
  constexpr int kName = 16;
  constexpr int kCell = 15;
  auto pad = [](std::string s, int width) {
    // Count UTF-8 code points so "±" occupies a single column.
    int visible = 0;
    for (unsigned char ch : s) {
      if ((ch & 0xC0) != 0x80) ++visible;
    }
    if (visible < width) s.append(static_cast<std::size_t>(width - visible), ' ');
    return s;
  };
  out << (mode == Mode::linear ? "Linear" : "Nonlinear") << " clustering (AC% / MI%)\n";
  out << "# " << report.metadata << '\n';
  out << pad("Data", kName);
  for (const auto& m : order) out << pad(title(m), kCell);
  out << '\n';
  for (const auto& d : report.datasets) {
    std::string ac_line = pad(d, kName);
    std::string mi_line = pad("", kName);
    for (const auto& m : order) {
      const BenchCell* c = report.find(d, m, mode);
      if (!c || !c->available) {
        ac_line += pad("-", kCell);
        mi_line += pad("-", kCell);
        continue;
      }
      std::string ac = format_fixed(c->ac);
      std::string mi = format_fixed(c->mi);
      if (c->ac_std) {
        ac += "±" + format_fixed(*c->ac_std);
        mi += "±" + format_fixed(*c->mi_std);
      }
      ac_line += pad(ac, kCell);
      mi_line += pad(mi, kCell);
    }
    out << ac_line << '\n' << mi_line << '\n';
  }
}

}  // namespace planeclust
