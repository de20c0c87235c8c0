#include "planeclust/cluster.hpp"

#include <cmath>
#include <limits>

#include "planeclust/baselines.hpp"
#include "planeclust/error.hpp"

namespace planeclust {

Mode parse_mode(const std::string& name) {
  if (name == "linear") return Mode::linear;
  if (name == "kernel") return Mode::kernel;
  throw ConfigError("unknown mode '" + name + "' (expected linear or kernel)");
}

std::string to_string(Mode m) { return m == Mode::linear ? "linear" : "kernel"; }

Eigen::MatrixXd gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double mu) {
  if (a.cols() != b.cols()) {
    throw DimensionError("gram: feature dimensions " + std::to_string(a.cols()) + " and " +
                         std::to_string(b.cols()) + " differ");
  }
  if (!(mu > 0.0)) throw ConfigError("gram: mu must be > 0");
  Eigen::MatrixXd k(a.rows(), b.rows());
  for (Index j = 0; j < b.rows(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      k(i, j) = std::exp(-mu * (a.row(i) - b.row(j)).squaredNorm());
    }
  }
  return k;
}

Eigen::MatrixXd dot_gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("dot_gram: feature dimensions " + std::to_string(a.cols()) + " and " +
                         std::to_string(b.cols()) + " differ");
  }
  return a * b.transpose();
}

Eigen::MatrixXd KernelMap::features(const Eigen::MatrixXd& x) const {
  return type == KernelType::gaussian ? gram(x, support, mu) : dot_gram(x, support);
}

Eigen::MatrixXd PlaneModel::features(const Eigen::MatrixXd& x) const {
  if (x.cols() != input_dim) {
    throw DimensionError("model expects " + std::to_string(input_dim) + " features, got " +
                         std::to_string(x.cols()));
  }
  return kernel ? kernel->features(x) : x;
}

namespace {

Eigen::MatrixXd plane_deviations(std::span<const Plane> planes, const Eigen::MatrixXd& f) {
  Eigen::MatrixXd dev(f.rows(), static_cast<Index>(planes.size()));
  for (std::size_t i = 0; i < planes.size(); ++i) {
    if (planes[i].w.size() != f.cols()) {
      throw DimensionError("plane " + std::to_string(i + 1) + " has " +
                           std::to_string(planes[i].w.size()) + " coefficients for " +
                           std::to_string(f.cols()) + " features");
    }
    dev.col(static_cast<Index>(i)) =
        (f * planes[i].w).array() + planes[i].b;
  }
  return dev;
}

}  // namespace

Eigen::MatrixXd PlaneModel::deviations(const Eigen::MatrixXd& x) const {
  return plane_deviations(planes, features(x));
}

Labels assign_by_deviation(const Eigen::MatrixXd& deviations) {
  const Index k = deviations.cols();
  if (k < 1) throw DimensionError("assign: no planes");
  std::vector<int> y(static_cast<std::size_t>(deviations.rows()));
  for (Index j = 0; j < deviations.rows(); ++j) {
    Index best = 0;
    double best_abs = std::abs(deviations(j, 0));
    for (Index i = 1; i < k; ++i) {
      const double a = std::abs(deviations(j, i));
      if (a < best_abs) {
        best_abs = a;
        best = i;
      }
    }
    y[static_cast<std::size_t>(j)] = static_cast<int>(best) + 1;
  }
  return Labels(std::move(y), static_cast<int>(k));
}

Labels assign(const PlaneModel& model, const Eigen::MatrixXd& x) {
  return assign_by_deviation(model.deviations(x));
}

Labels predict(const PlaneModel& model, const Eigen::MatrixXd& x) { return assign(model, x); }

Labels repair_empty_clusters(const Labels& labels, const Eigen::VectorXd& misfit) {
  if (misfit.size() != labels.size()) {
    throw DimensionError("repair_empty_clusters: misfit size does not match labels");
  }
  std::vector<int> y(labels.values().begin(), labels.values().end());
  std::vector<Index> counts = labels.counts();
  std::vector<char> moved(y.size(), 0);
  for (int empty = 1; empty <= labels.k(); ++empty) {
    if (counts[static_cast<std::size_t>(empty - 1)] > 0) continue;
    int largest = 1;
    for (int i = 2; i <= labels.k(); ++i) {
      if (counts[static_cast<std::size_t>(i - 1)] > counts[static_cast<std::size_t>(largest - 1)]) {
        largest = i;
      }
    }
    Index worst = -1;
    for (Index j = 0; j < labels.size(); ++j) {
      const auto sj = static_cast<std::size_t>(j);
      if (y[sj] != largest || moved[sj]) continue;
      if (worst < 0 || misfit(j) > misfit(worst)) worst = j;
    }
    y[static_cast<std::size_t>(worst)] = empty;
    moved[static_cast<std::size_t>(worst)] = 1;
    --counts[static_cast<std::size_t>(largest - 1)];
    ++counts[static_cast<std::size_t>(empty - 1)];
  }
  return Labels(std::move(y), labels.k());
}

OuterResult plane_clustering(const Eigen::MatrixXd& features, const Labels& init,
                             int outer_max, const PlaneBuilder& build) {
  if (init.size() != features.rows()) {
    throw DimensionError("initial labels have " + std::to_string(init.size()) +
                         " entries for " + std::to_string(features.rows()) + " samples");
  }
  if (outer_max < 1) throw ConfigError("outer_max must be >= 1");
  const int k = init.k();

  struct Round {
    std::vector<Plane> planes;
    double objective = 0.0;
    bool warning = false;
  };
  auto build_round = [&](const Labels& labels, const Round* previous) {
    Round round;
    for (int i = 1; i <= k; ++i) {
      const ClusterSplit split = split_cluster(features, labels, i);
      const Plane* prev = previous ? &previous->planes[static_cast<std::size_t>(i - 1)] : nullptr;
      PlaneFit fit = build(split, i, prev);
      round.objective += fit.objective;
      round.warning = round.warning || fit.warning;
      round.planes.push_back(std::move(fit.plane));
    }
    return round;
  };
  auto finish = [&](Round round, int iterations) {
    OuterResult r;
    r.labels = assign_by_deviation(plane_deviations(round.planes, features));
    r.planes = std::move(round.planes);
    r.objective = round.objective;
    r.iterations = iterations;
    r.warning = round.warning;
    return r;
  };

  Labels current = init;
  std::optional<Labels> before;
  std::optional<Round> last_round;
  bool warning = false;
  for (int it = 1; it <= outer_max; ++it) {
    Round round = build_round(current, last_round ? &*last_round : nullptr);
    warning = warning || round.warning;
    const Eigen::MatrixXd dev = plane_deviations(round.planes, features);
    const Labels raw = assign_by_deviation(dev);
    Eigen::VectorXd misfit(raw.size());
    for (Index j = 0; j < raw.size(); ++j) misfit(j) = std::abs(dev(j, raw[j] - 1));
    Labels next = repair_empty_clusters(raw, misfit);

    if (next == current) {
      OuterResult r = finish(std::move(round), it);
      r.warning = warning;
      return r;
    }
    if (before && next == *before) {
      // Two-step cycle: keep the planes with the lower total objective.
      const bool keep_last = last_round->objective < round.objective;
      OuterResult r = finish(keep_last ? std::move(*last_round) : std::move(round), it);
      r.oscillation_stop = true;
      r.warning = warning;
      return r;
    }
    before = std::move(current);
    current = std::move(next);
    last_round = std::move(round);
  }
  OuterResult r = finish(std::move(*last_round), outer_max);
  r.reached_outer_max = true;
  r.warning = warning;
  return r;
}

namespace {

// The least-squares plane comes with unit |w|, a normalization unrelated to
// the ramp margins 1-delta and 1+delta. Rescaling leaves the hyperplane
// itself unchanged, so pick the factor with the lowest ramp objective on a
// log grid spanning 2^-4 .. 2^16.
Eigen::VectorXd scaled_start(const Eigen::VectorXd& u, const ClusterSplit& split,
                             const HyperParams& hp) {
  Eigen::VectorXd best = u;
  double best_obj = plane_objective(u, split, hp);
  for (int j = -16; j <= 64; ++j) {
    const Eigen::VectorXd cand = std::exp2(j / 4.0) * u;
    const double obj = plane_objective(cand, split, hp);
    if (obj < best_obj) {
      best_obj = obj;
      best = cand;
    }
  }
  return best;
}

// Candidate starts: the within-cluster least-squares plane and, when others
// exist, the contrastive least-squares plane that also pushes them away. In
// the kernel-generated space the former is degenerate (the scatter of m_i
// samples in R^m has a large null space that nearly annihilates every
// sample), which the latter avoids. The lower ramp objective wins.
Eigen::VectorXd initial_plane(const ClusterSplit& split, const HyperParams& hp) {
  Eigen::VectorXd best = scaled_start(kpc_plane(split).stacked(), split, hp);
  if (split.others_count() > 0) {
    const Eigen::VectorXd alt = scaled_start(ppc_plane(split, 1.0).stacked(), split, hp);
    if (plane_objective(alt, split, hp) < plane_objective(best, split, hp)) return alt;
  }
  return best;
}

}  // namespace

Labels initial_labels(const Eigen::MatrixXd& samples, int k, InitKind kind, std::uint64_t seed,
                      Mode mode, double mu) {
  if (kind == InitKind::random) return random_init(samples.rows(), k, seed);
  if (mode == Mode::kernel) return nng_init(gram(samples, samples, mu), k, seed);
  return nng_init(samples, k, seed);
}

PlaneModel fit(const Dataset& d, int k, const HyperParams& hp, Mode mode, const Labels& init,
               const FitOptions& options) {
  hp.validate();
  options.solver.validate();
  if (k < 1 || k > d.size()) {
    throw ConfigError("cluster count k=" + std::to_string(k) + " must lie in [1, m=" +
                      std::to_string(d.size()) + "]");
  }
  if (init.k() != k) {
    throw ConfigError("initial labels use k=" + std::to_string(init.k()) + ", expected " +
                      std::to_string(k));
  }
  PlaneModel model;
  model.input_dim = d.dim();
  if (mode == Mode::kernel) model.kernel = KernelMap{options.kernel, hp.mu, d.samples};
  const Eigen::MatrixXd features = model.features(d.samples);

  int solves = 0;
  const PlaneBuilder build = [&](const ClusterSplit& split, int cluster, const Plane* previous) {
    Eigen::VectorXd u0;
    if (previous) {
      u0 = previous->stacked();
    } else if (split.within_count() > 0) {
      u0 = initial_plane(split, hp);
    } else {
      u0 = Eigen::VectorXd::Zero(split.dim());
    }
    const CccpState state = solve_plane_cccp(split, hp, options.solver, u0);
    if (options.on_solve) options.on_solve(solves / k + 1, cluster, state);
    ++solves;
    return PlaneFit{Plane::from_stacked(state.u), state.objective_trace.back(),
                    state.reached_max_iter || state.subproblem_warning};
  };
  OuterResult outer = plane_clustering(features, init, options.outer_max, build);

  model.planes = std::move(outer.planes);
  model.meta.method = "ramptwsvc";
  model.meta.hp = hp;
  model.meta.scaling = options.scaling;
  model.meta.outer_iterations = outer.iterations;
  model.meta.final_labels = std::move(outer.labels);
  model.meta.objective = outer.objective;
  model.meta.oscillation_stop = outer.oscillation_stop;
  model.meta.reached_outer_max = outer.reached_outer_max;
  model.meta.solver_warning = outer.warning;
  return model;
}

}  // namespace planeclust
