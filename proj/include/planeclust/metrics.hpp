#ifndef PLANECLUST_METRICS_HPP
#define PLANECLUST_METRICS_HPP

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace planeclust {

/// Count table with one row per distinct truth label and one column per
/// distinct predicted label, both in order of first appearance.
Eigen::MatrixXd contingency(std::span<const int> truth, std::span<const int> pred);

/// Rand index in percent: share of unordered pairs on which both partitions
/// agree about co-membership.
double rand_accuracy(std::span<const int> truth, std::span<const int> pred);

/// Mutual information normalized by max(H(truth), H(pred)), in percent.
///
/// 100 when both partitions are a single cluster, 0 when exactly one is.
double nmi(std::span<const int> truth, std::span<const int> pred);

struct MetricReport {
  double ac_percent = 0.0;
  double mi_percent = 0.0;
  Eigen::MatrixXd contingency;
};

MetricReport evaluate(std::span<const int> truth, std::span<const int> pred);

}  // namespace planeclust

#endif  // PLANECLUST_METRICS_HPP
