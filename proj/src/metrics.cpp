#include "planeclust/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "planeclust/error.hpp"

namespace planeclust {

namespace {

void check_lengths(std::span<const int> truth, std::span<const int> pred) {
  if (truth.size() != pred.size()) {
    throw DimensionError("label length mismatch: truth has " + std::to_string(truth.size()) +
                         ", prediction has " + std::to_string(pred.size()));
  }
}

std::vector<int> dense_codes(std::span<const int> labels, int& count) {
  std::map<int, int> code;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int v : labels) {
    auto [it, inserted] = code.try_emplace(v, static_cast<int>(code.size()));
    out.push_back(it->second);
  }
  count = static_cast<int>(code.size());
  return out;
}

double entropy(const Eigen::VectorXd& counts, double total) {
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) h -= (c / total) * std::log(c / total);
  }
  return h;
}

}  // namespace

Eigen::MatrixXd contingency(std::span<const int> truth, std::span<const int> pred) {
  check_lengths(truth, pred);
  int rows = 0;
  int cols = 0;
  const auto t = dense_codes(truth, rows);
  const auto p = dense_codes(pred, cols);
  Eigen::MatrixXd table = Eigen::MatrixXd::Zero(rows, cols);
  for (std::size_t j = 0; j < t.size(); ++j) table(t[j], p[j]) += 1.0;
  return table;
}

double rand_accuracy(std::span<const int> truth, std::span<const int> pred) {
  check_lengths(truth, pred);
  if (truth.size() < 2) throw DimensionError("rand_accuracy needs at least 2 samples");
  const Eigen::MatrixXd table = contingency(truth, pred);
  auto pairs = [](double n) { return n * (n - 1.0) / 2.0; };
  const double m = static_cast<double>(truth.size());
  double both = 0.0;
  for (double c : table.reshaped()) both += pairs(c);
  double same_truth = 0.0;
  for (double c : table.rowwise().sum()) same_truth += pairs(c);
  double same_pred = 0.0;
  for (double c : table.colwise().sum()) same_pred += pairs(c);
  const double total = pairs(m);
  // Agreements: pairs together in both plus pairs apart in both.
  const double agree = total + 2.0 * both - same_truth - same_pred;
  return 100.0 * agree / total;
}

double nmi(std::span<const int> truth, std::span<const int> pred) {
  check_lengths(truth, pred);
  if (truth.empty()) throw DimensionError("nmi needs at least 1 sample");
  const Eigen::MatrixXd table = contingency(truth, pred);
  const double m = static_cast<double>(truth.size());
  const Eigen::VectorXd rows = table.rowwise().sum();
  const Eigen::VectorXd cols = table.colwise().sum().transpose();
  const double ht = entropy(rows, m);
  const double hp = entropy(cols, m);
  if (table.rows() == 1 && table.cols() == 1) return 100.0;
  if (table.rows() == 1 || table.cols() == 1) return 0.0;
  double mi = 0.0;
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    for (Eigen::Index j = 0; j < table.cols(); ++j) {
      const double c = table(i, j);
      if (c > 0.0) mi += (c / m) * std::log(c * m / (rows(i) * cols(j)));
    }
  }
  const double v = 100.0 * mi / std::max(ht, hp);
  return std::clamp(v, 0.0, 100.0);
}

MetricReport evaluate(std::span<const int> truth, std::span<const int> pred) {
  MetricReport r;
  r.contingency = contingency(truth, pred);
  r.ac_percent = rand_accuracy(truth, pred);
  r.mi_percent = nmi(truth, pred);
  return r;
}

}  // namespace planeclust
