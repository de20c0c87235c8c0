#ifndef PLANECLUST_BENCH_HPP
#define PLANECLUST_BENCH_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "planeclust/cluster.hpp"
#include "planeclust/data.hpp"
#include "planeclust/ramp.hpp"
#include "planeclust/solver.hpp"

namespace planeclust {

enum class Method { ramptwsvc, kmeans, kpc, ppc };

Method parse_method(const std::string& name);
std::string to_string(Method m);

/// {2^lo, ..., 2^hi}.
std::vector<double> power_grid(int lo, int hi);

/// Hyperparameters of one grid point; unused fields stay 0.
struct GridParams {
  double c1 = 0.0;
  double c2 = 0.0;
  double c = 0.0;
  double mu = 0.0;

  friend auto operator<=>(const GridParams&, const GridParams&) = default;
};

/// "c1=...;c2=...;mu=..." with only the fields the method uses.
std::string params_string(Method method, Mode mode, const GridParams& p);

/// The grid points swept for a method, in sweep order.
std::vector<GridParams> grid_points(Method method, Mode mode, const std::vector<double>& c_grid,
                                    const std::vector<double>& mu_grid);

struct BenchConfig {
  std::vector<std::string> datasets;
  std::vector<Method> methods = {Method::kmeans, Method::kpc, Method::ppc, Method::ramptwsvc};
  std::vector<Mode> modes = {Mode::linear, Mode::kernel};
  std::vector<double> c_grid = power_grid(-8, 7);
  std::vector<double> mu_grid = power_grid(-10, 5);
  double delta = 0.3;
  double s = -0.2;
  Scaling scaling = Scaling::minmax;
  InitKind init = InitKind::nng;
  std::uint64_t seed = 0;
  /// Seeded kmeans repetitions behind the mean +- std cells.
  int repetitions = 10;
  int outer_max = 50;
  SolverOptions solver;
  unsigned workers = 1;
  /// Line-per-point progress journal; finished points are not recomputed.
  std::string journal_path;
  /// External label sets: name -> directory holding <dataset>_<mode>.csv.
  std::map<std::string, std::string> external;
};

/// The best-over-grid outcome of one method on one dataset in one mode.
struct BenchCell {
  std::string dataset;
  std::string method;
  Mode mode = Mode::linear;
  bool available = false;
  double ac = 0.0;
  double mi = 0.0;
  /// Set for repeated (kmeans) cells.
  std::optional<double> ac_std;
  std::optional<double> mi_std;
  std::string params;
  std::uint64_t seed = 0;
  std::size_t grid_size = 0;
};

struct BenchReport {
  std::vector<std::string> datasets;
  std::vector<std::string> methods;
  std::vector<BenchCell> cells;
  std::string metadata;

  const BenchCell* find(const std::string& dataset, const std::string& method, Mode mode) const;
};

/// Number of workers after applying the PLANECLUST_THREADS cap.
unsigned effective_workers(unsigned requested);

/// Sweeps every dataset x method x mode; progress lines go to `log` if given.
BenchReport run_bench(const BenchConfig& config, std::ostream* log = nullptr);

/// "dataset,method,ac,mi,params,seed" preceded by '#' metadata lines.
void write_bench_csv(std::ostream& out, const BenchReport& report);

/// Aligned text table with an AC row and an MI row per dataset.
void write_bench_table(std::ostream& out, const BenchReport& report, Mode mode);

/// Dataset name used in tables: the file stem.
std::string dataset_name(const std::string& path);

}  // namespace planeclust

#endif  // PLANECLUST_BENCH_HPP
