#ifndef PLANECLUST_CLUSTER_HPP
#define PLANECLUST_CLUSTER_HPP

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "planeclust/data.hpp"
#include "planeclust/ramp.hpp"
#include "planeclust/solver.hpp"

namespace planeclust {

enum class Mode { linear, kernel };

Mode parse_mode(const std::string& name);
std::string to_string(Mode m);

enum class KernelType { gaussian, dot };

/// Gaussian Gram matrix, entry (i, j) = exp(-mu * |a_i - b_j|^2). Rows are samples.
Eigen::MatrixXd gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double mu);

/// Dot-product Gram matrix a * b'.
Eigen::MatrixXd dot_gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Empirical kernel map x -> K(x, support).
struct KernelMap {
  KernelType type = KernelType::gaussian;
  double mu = 1.0;
  Eigen::MatrixXd support;

  Eigen::MatrixXd features(const Eigen::MatrixXd& x) const;
};

struct TrainingMeta {
  std::string method;
  HyperParams hp;
  Scaling scaling = Scaling::none;
  int outer_iterations = 0;
  /// Labels produced by assigning the training samples with the final planes.
  Labels final_labels;
  /// Sum of the per-plane objectives of the final planes.
  double objective = 0.0;
  bool oscillation_stop = false;
  bool reached_outer_max = false;
  bool solver_warning = false;
};

/// k cluster-center planes, in input space or in the kernel-generated space.
struct PlaneModel {
  std::vector<Plane> planes;
  /// Present in kernel mode; each plane's w then has one entry per support row.
  std::optional<KernelMap> kernel;
  /// Dimension of the raw input samples.
  Index input_dim = 0;
  TrainingMeta meta;

  int k() const { return static_cast<int>(planes.size()); }
  bool is_kernel() const { return kernel.has_value(); }

  /// The representation the planes act on: x itself or K(x, X).
  Eigen::MatrixXd features(const Eigen::MatrixXd& x) const;
  /// Signed deviations, one row per sample and one column per plane.
  Eigen::MatrixXd deviations(const Eigen::MatrixXd& x) const;
};

/// Label of the plane with the smallest |deviation| per row; ties go to the
/// smaller index.
Labels assign_by_deviation(const Eigen::MatrixXd& deviations);

/// Assignment of raw samples x to the model's planes.
Labels assign(const PlaneModel& model, const Eigen::MatrixXd& x);

/// Out-of-sample assignment; identical to assign.
Labels predict(const PlaneModel& model, const Eigen::MatrixXd& x);

/// Moves the worst-fit sample of the largest cluster into each empty cluster.
///
/// `misfit(j)` scores sample j against its own cluster center.
Labels repair_empty_clusters(const Labels& labels, const Eigen::VectorXd& misfit);

struct PlaneFit {
  Plane plane;
  double objective = 0.0;
  bool warning = false;
};

/// Builds the center plane of one cluster. `previous` is the plane fitted for
/// that cluster in the preceding outer iteration, if any.
using PlaneBuilder =
    std::function<PlaneFit(const ClusterSplit& split, int cluster, const Plane* previous)>;

struct OuterResult {
  std::vector<Plane> planes;
  Labels labels;
  int iterations = 0;
  double objective = 0.0;
  bool oscillation_stop = false;
  bool reached_outer_max = false;
  bool warning = false;
};

/// The shared alternation of plane construction and reassignment.
///
/// Stops on exact label stability, on a two-step label cycle (keeping the
/// lower-objective planes), or after outer_max rounds.
OuterResult plane_clustering(const Eigen::MatrixXd& features, const Labels& init,
                             int outer_max, const PlaneBuilder& build);

struct FitOptions {
  int outer_max = 50;
  SolverOptions solver;
  KernelType kernel = KernelType::gaussian;
  /// Recorded in the model metadata only.
  Scaling scaling = Scaling::none;
  /// Called after every per-plane solve with (outer round, cluster, state).
  std::function<void(int, int, const CccpState&)> on_solve;
};

/// Initial labels on the features the planes act on: the samples themselves
/// in linear mode, the Gaussian Gram rows K(x, X) in kernel mode. Random
/// initialization ignores the features.
Labels initial_labels(const Eigen::MatrixXd& samples, int k, InitKind kind, std::uint64_t seed,
                      Mode mode, double mu);

/// RampTWSVC clustering of d's samples into k clusters starting from `init`.
PlaneModel fit(const Dataset& d, int k, const HyperParams& hp, Mode mode, const Labels& init,
               const FitOptions& options = {});

}  // namespace planeclust

#endif  // PLANECLUST_CLUSTER_HPP
