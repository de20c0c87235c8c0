#ifndef PLANECLUST_SOLVER_HPP
#define PLANECLUST_SOLVER_HPP

#include <functional>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "planeclust/data.hpp"
#include "planeclust/ramp.hpp"

namespace planeclust {

struct Indicators;

struct SolverOptions {
  /// Cap on alternating (indicator, plane) iterations per plane.
  int max_iter = 200;
  /// Gradient-norm target of the smoothed subproblem, relative to max(1, |u|).
  double subproblem_tol = 1e-8;
  /// Final Huber half-width used to smooth each hinge.
  double smoothing = 1e-6;
  /// The alternation stops once the objective decreases by no more than this.
  double objective_tol = 1e-10;
  /// Newton iterations allowed per smoothing level.
  int newton_max = 100;
  /// Optional observer, called after every indicator update with the plane
  /// the indicators were computed at.
  std::function<void(const Eigen::VectorXd& u, const Indicators& p)> on_update;

  void validate() const;
};

/// Linearization indicators of the concave part, entries in {-1, 0, 1}.
///
/// `within` has one entry per cluster sample, `others` one per remaining sample.
struct Indicators {
  std::vector<int> within;
  std::vector<int> others;

  Index nonzero_within() const;
  Index nonzero_others() const;

  friend bool operator==(const Indicators&, const Indicators&) = default;
};

/// Indicators at u. Strict inequalities: values exactly at a threshold map to 0.
Indicators update_indicators(const Eigen::VectorXd& u, const ClusterSplit& split,
                             double delta, double s);

/// The convex objective obtained for fixed indicators:
///
///   0.5|u|^2 + c1 sum[(delta-1 - t)_+ + (delta-1 + t)_+]
///            + c2 sum[(1+delta - t)_+ + (1+delta + t)_+]
///            + c1 p_within't_within + c2 p_others't_others
///
/// where t are the deviations z'u of the respective samples.
double linearized_objective(const Eigen::VectorXd& u, const ClusterSplit& split,
                            const Indicators& p, const HyperParams& hp);

struct SubproblemResult {
  Eigen::VectorXd u;
  int newton_iterations = 0;
  /// Gradient norm of the smoothed objective at `u`.
  double gradient_norm = 0.0;
  bool converged = false;
};

/// Minimizes the fixed-indicator objective with a smoothed damped Newton method.
///
/// Each hinge (a)_+ is replaced by a Huber quadratic of half-width h, h being
/// driven from 1e-1 down to `opts.smoothing`. Only samples inside the
/// quadratic band carry curvature, so the Newton system is solved through the
/// Woodbury identity when that band is small.
SubproblemResult solve_subproblem(const ClusterSplit& split, const Indicators& p,
                                  const HyperParams& hp, const SolverOptions& opts,
                                  const Eigen::VectorXd& u0);

struct CccpState {
  Eigen::VectorXd u;
  Indicators p;
  /// Ramp objective of every accepted iterate, starting with u0.
  std::vector<double> objective_trace;
  std::vector<Index> nnz_within_trace;
  std::vector<Index> nnz_others_trace;
  int iterations = 0;
  bool reached_max_iter = false;
  /// Some inner solve hit its iteration cap.
  bool subproblem_warning = false;
};

/// Alternates indicator updates and convex subproblem solves from u0.
///
/// Stops when the indicators repeat or the objective no longer decreases by
/// more than `opts.objective_tol`. The returned state always satisfies
/// update_indicators(state.u) == state.p.
CccpState solve_plane_cccp(const ClusterSplit& split, const HyperParams& hp,
                           const SolverOptions& opts, const Eigen::VectorXd& u0);

/// "iter,objective,nnz_p1,nnz_p2" rows for one solve.
void write_trace_csv(std::ostream& out, const CccpState& state);

}  // namespace planeclust

#endif  // PLANECLUST_SOLVER_HPP
