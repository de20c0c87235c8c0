#ifndef PLANECLUST_RAMP_HPP
#define PLANECLUST_RAMP_HPP

#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "planeclust/data.hpp"

namespace planeclust {

/// Model hyperparameters. `mu` is used in kernel mode only, `c` by PPC only.
struct HyperParams {
  double c1 = 1.0;
  double c2 = 1.0;
  double delta = 0.3;
  double s = -0.2;
  double mu = 1.0;
  double c = 1.0;

  /// Throws ConfigError naming the admissible range of the first bad field.
  void validate() const;
};

/// A cluster-center plane w'x + b = 0; in kernel mode w holds one
/// coefficient per training sample.
struct Plane {
  Eigen::VectorXd w;
  double b = 0.0;

  /// The stacked parameter vector (w; b).
  Eigen::VectorXd stacked() const;
  static Plane from_stacked(const Eigen::VectorXd& u);
};

/// Signed deviation w'x + b of an augmented sample z = (x; 1).
double deviation(const Plane& p, const Eigen::VectorXd& z);

/// Bounded within-cluster cost: 0 inside 1-delta, saturating at 1-s.
double ramp_within(double dev, double delta, double s);

/// Bounded between-cluster cost: 2+2delta near the plane, 1+delta-s far away.
double ramp_between(double dev, double delta, double s);

/// 0.5*|u|^2 + c1 * sum ramp_within over the cluster + c2 * sum ramp_between
/// over the other samples.
double plane_objective(const Plane& p, const ClusterSplit& split, const HyperParams& hp);
double plane_objective(const Eigen::VectorXd& u, const ClusterSplit& split,
                       const HyperParams& hp);

struct LossCurveRow {
  double dev;
  double r1;
  double r2;
  double quad;
  double abs;
  double twsvc_between;
};

/// Costs of the plane-based methods evaluated on a grid of deviations.
std::vector<LossCurveRow> loss_curves(const HyperParams& hp, std::span<const double> grid);

/// CSV with header "dev,r1,r2,quad,abs,twsvc_between".
void write_loss_curves(std::ostream& out, std::span<const LossCurveRow> rows);

}  // namespace planeclust

#endif  // PLANECLUST_RAMP_HPP
