#include "planeclust/baselines.hpp"

#include <cmath>

#include "planeclust/error.hpp"

namespace planeclust {

namespace {

// Makes the entry of largest magnitude positive (first such entry on ties).
void fix_sign(Eigen::VectorXd& v) {
  Index pivot = 0;
  for (Index i = 1; i < v.size(); ++i) {
    if (std::abs(v(i)) > std::abs(v(pivot))) pivot = i;
  }
  if (v(pivot) < 0.0) v = -v;
}

Eigen::VectorXd smallest_eigenvector(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) throw Error("eigen decomposition failed");
  Eigen::VectorXd v = eig.eigenvectors().col(0);
  fix_sign(v);
  return v;
}

Eigen::MatrixXd centers_of(const Eigen::MatrixXd& x, const Labels& labels) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(labels.k(), x.cols());
  const std::vector<Index> counts = labels.counts();
  for (Index j = 0; j < x.rows(); ++j) c.row(labels[j] - 1) += x.row(j);
  for (int i = 0; i < labels.k(); ++i) {
    if (counts[static_cast<std::size_t>(i)] > 0) {
      c.row(i) /= static_cast<double>(counts[static_cast<std::size_t>(i)]);
    }
  }
  return c;
}

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centers) {
  Eigen::MatrixXd d2(x.rows(), centers.rows());
  for (Index i = 0; i < centers.rows(); ++i) {
    for (Index j = 0; j < x.rows(); ++j) d2(j, i) = (x.row(j) - centers.row(i)).squaredNorm();
  }
  return d2;
}

double within_sse(const Eigen::MatrixXd& x, const Labels& labels, const Eigen::MatrixXd& c) {
  double sse = 0.0;
  for (Index j = 0; j < x.rows(); ++j) sse += (x.row(j) - c.row(labels[j] - 1)).squaredNorm();
  return sse;
}

PlaneModel finish_plane_model(const Dataset& d, const std::optional<KernelMap>& kernel,
                              OuterResult outer, const std::string& method) {
  PlaneModel model;
  model.input_dim = d.dim();
  model.kernel = kernel;
  model.planes = std::move(outer.planes);
  model.meta.method = method;
  model.meta.outer_iterations = outer.iterations;
  model.meta.final_labels = std::move(outer.labels);
  model.meta.objective = outer.objective;
  model.meta.oscillation_stop = outer.oscillation_stop;
  model.meta.reached_outer_max = outer.reached_outer_max;
  return model;
}

void check_fit_args(const Dataset& d, int k, const Labels& init) {
  if (k < 1 || k > d.size()) {
    throw ConfigError("cluster count k=" + std::to_string(k) + " must lie in [1, m=" +
                      std::to_string(d.size()) + "]");
  }
  if (init.k() != k) {
    throw ConfigError("initial labels use k=" + std::to_string(init.k()) + ", expected " +
                      std::to_string(k));
  }
}

}  // namespace

Eigen::MatrixXd CentroidModel::features(const Eigen::MatrixXd& x) const {
  if (x.cols() != input_dim) {
    throw DimensionError("model expects " + std::to_string(input_dim) + " features, got " +
                         std::to_string(x.cols()));
  }
  return kernel ? kernel->features(x) : x;
}

Labels assign(const CentroidModel& model, const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd d2 = squared_distances(model.features(x), model.centers);
  std::vector<int> y(static_cast<std::size_t>(d2.rows()));
  for (Index j = 0; j < d2.rows(); ++j) {
    Index best = 0;
    d2.row(j).minCoeff(&best);
    y[static_cast<std::size_t>(j)] = static_cast<int>(best) + 1;
  }
  return Labels(std::move(y), model.k());
}

CentroidModel kmeans_fit(const Eigen::MatrixXd& x, int k, std::uint64_t seed, int outer_max,
                         std::vector<double>* sse_trace) {
  if (outer_max < 1) throw ConfigError("outer_max must be >= 1");
  Labels labels = random_init(x.rows(), k, seed);
  CentroidModel model;
  model.input_dim = x.cols();
  model.centers = centers_of(x, labels);
  if (sse_trace) sse_trace->push_back(within_sse(x, labels, model.centers));
  int it = 1;
  for (; it <= outer_max; ++it) {
    const Eigen::MatrixXd d2 = squared_distances(x, model.centers);
    std::vector<int> y(static_cast<std::size_t>(x.rows()));
    Eigen::VectorXd misfit(x.rows());
    for (Index j = 0; j < x.rows(); ++j) {
      Index best = 0;
      misfit(j) = d2.row(j).minCoeff(&best);
      y[static_cast<std::size_t>(j)] = static_cast<int>(best) + 1;
    }
    Labels next = repair_empty_clusters(Labels(std::move(y), k), misfit);
    if (next == labels) break;
    labels = std::move(next);
    model.centers = centers_of(x, labels);
    if (sse_trace) sse_trace->push_back(within_sse(x, labels, model.centers));
  }
  model.meta.method = "kmeans";
  model.meta.outer_iterations = std::min(it, outer_max);
  model.meta.reached_outer_max = it > outer_max;
  model.meta.objective = within_sse(x, labels, model.centers);
  model.meta.final_labels = assign(model, x);
  return model;
}

CentroidModel kmeans_fit(const Dataset& d, int k, std::uint64_t seed, int outer_max,
                         const std::optional<KernelMap>& kernel) {
  const Eigen::MatrixXd features = kernel ? kernel->features(d.samples) : d.samples;
  CentroidModel model = kmeans_fit(features, k, seed, outer_max);
  model.kernel = kernel;
  model.input_dim = d.dim();
  return model;
}

Plane kpc_plane(const ClusterSplit& split) {
  const Index mi = split.within_count();
  if (mi < 1) throw ConfigError("kpc_plane: cluster has no samples");
  const Index d = split.dim() - 1;
  const auto x = split.within.topRows(d);
  const Eigen::VectorXd mean = x.rowwise().mean();
  const Eigen::MatrixXd centered = x.colwise() - mean;
  const Eigen::MatrixXd scatter = centered * centered.transpose();
  Plane p;
  p.w = smallest_eigenvector(scatter);
  p.w.normalize();
  p.b = -p.w.dot(mean);
  return p;
}

Plane ppc_plane(const ClusterSplit& split, double c) {
  if (!(c > 0.0)) throw ConfigError("ppc_plane: c must be > 0");
  const Index d = split.dim();
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d, d) * 1e-8;
  if (split.within_count() > 0) m.noalias() += split.within * split.within.transpose();
  if (split.others_count() > 0) m.noalias() -= c * (split.others * split.others.transpose());
  return Plane::from_stacked(smallest_eigenvector(m));
}

double kpc_objective(const Plane& p, const ClusterSplit& split) {
  if (split.within_count() == 0) return 0.0;
  return (split.within.transpose() * p.stacked()).squaredNorm();
}

double ppc_objective(const Plane& p, const ClusterSplit& split, double c) {
  const Eigen::VectorXd u = p.stacked();
  double f = 0.0;
  if (split.within_count() > 0) f += (split.within.transpose() * u).squaredNorm();
  if (split.others_count() > 0) f -= c * (split.others.transpose() * u).squaredNorm();
  return f;
}

PlaneModel kpc_fit(const Dataset& d, int k, const Labels& init, int outer_max,
                   const std::optional<KernelMap>& kernel) {
  check_fit_args(d, k, init);
  const Eigen::MatrixXd features = kernel ? kernel->features(d.samples) : d.samples;
  const PlaneBuilder build = [](const ClusterSplit& split, int, const Plane*) {
    Plane p = kpc_plane(split);
    const double f = kpc_objective(p, split);
    return PlaneFit{std::move(p), f, false};
  };
  return finish_plane_model(d, kernel, plane_clustering(features, init, outer_max, build), "kpc");
}

PlaneModel ppc_fit(const Dataset& d, int k, double c, const Labels& init, int outer_max,
                   const std::optional<KernelMap>& kernel) {
  check_fit_args(d, k, init);
  if (!(c > 0.0)) throw ConfigError("c=" + std::to_string(c) + " must lie in (0, inf)");
  const Eigen::MatrixXd features = kernel ? kernel->features(d.samples) : d.samples;
  const PlaneBuilder build = [c](const ClusterSplit& split, int, const Plane*) {
    Plane p = ppc_plane(split, c);
    const double f = ppc_objective(p, split, c);
    return PlaneFit{std::move(p), f, false};
  };
  PlaneModel model =
      finish_plane_model(d, kernel, plane_clustering(features, init, outer_max, build), "ppc");
  model.meta.hp.c = c;
  return model;
}

}  // namespace planeclust
