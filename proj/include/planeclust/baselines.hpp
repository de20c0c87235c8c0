#ifndef PLANECLUST_BASELINES_HPP
#define PLANECLUST_BASELINES_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "planeclust/cluster.hpp"
#include "planeclust/data.hpp"
#include "planeclust/ramp.hpp"

namespace planeclust {

/// Point-center clustering model.
struct CentroidModel {
  Eigen::MatrixXd centers;  // k x d, rows are centers
  std::optional<KernelMap> kernel;
  Index input_dim = 0;
  TrainingMeta meta;

  int k() const { return static_cast<int>(centers.rows()); }
  Eigen::MatrixXd features(const Eigen::MatrixXd& x) const;
};

/// Nearest center, ties to the smaller index.
Labels assign(const CentroidModel& model, const Eigen::MatrixXd& x);

/// Lloyd iterations from random_init(seed) until the assignment is stable.
///
/// When `sse_trace` is given it receives the within-cluster sum of squares
/// after every center update.
CentroidModel kmeans_fit(const Eigen::MatrixXd& x, int k, std::uint64_t seed, int outer_max,
                         std::vector<double>* sse_trace = nullptr);

/// kmeans on the empirical kernel map K(x, X) when `kernel` is given.
CentroidModel kmeans_fit(const Dataset& d, int k, std::uint64_t seed, int outer_max,
                         const std::optional<KernelMap>& kernel);

/// Least-squares plane of the cluster samples: unit w along the smallest
/// eigenvector of the centered scatter, b = -w'mean.
Plane kpc_plane(const ClusterSplit& split);

/// Smallest eigenvector (w; b) of Z Z' - c Zhat Zhat' + 1e-8 I.
Plane ppc_plane(const ClusterSplit& split, double c);

/// sum over cluster samples of (z'u)^2.
double kpc_objective(const Plane& p, const ClusterSplit& split);

/// sum (z'u)^2 over the cluster minus c * sum (zhat'u)^2 over the rest.
double ppc_objective(const Plane& p, const ClusterSplit& split, double c);

PlaneModel kpc_fit(const Dataset& d, int k, const Labels& init, int outer_max,
                   const std::optional<KernelMap>& kernel = std::nullopt);

PlaneModel ppc_fit(const Dataset& d, int k, double c, const Labels& init, int outer_max,
                   const std::optional<KernelMap>& kernel = std::nullopt);

}  // namespace planeclust

#endif  // PLANECLUST_BASELINES_HPP
