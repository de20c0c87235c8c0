#ifndef PLANECLUST_DATA_HPP
#define PLANECLUST_DATA_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace planeclust {

using Index = Eigen::Index;

/// Cluster assignment of m samples into clusters 1..k.
class Labels {
 public:
  Labels() = default;
  /// Throws ConfigError unless every entry lies in [1, k].
  Labels(std::vector<int> assignment, int k);

  int k() const { return k_; }
  Index size() const { return static_cast<Index>(assignment_.size()); }
  int operator[](Index j) const { return assignment_[static_cast<std::size_t>(j)]; }
  std::span<const int> values() const { return assignment_; }

  /// Number of samples carrying each label; entry i-1 counts label i.
  std::vector<Index> counts() const;

  friend bool operator==(const Labels& a, const Labels& b) = default;

 private:
  std::vector<int> assignment_;
  int k_ = 0;
};

/// m samples in R^n stored as rows, plus optional ground truth.
struct Dataset {
  Eigen::MatrixXd samples;
  std::optional<Labels> truth;
  std::vector<std::string> feature_names;
  /// Original class names in code order (code i is class_names[i-1]).
  std::vector<std::string> class_names;

  Index size() const { return samples.rows(); }
  Index dim() const { return samples.cols(); }

  /// Throws DataError when the invariants (non-empty, finite, consistent truth) fail.
  void validate() const;
};

/// Samples of one cluster and all remaining samples, augmented with a trailing 1.
///
/// Columns are samples: `within` is (d+1) x m_i, `others` is (d+1) x (m - m_i).
/// The index vectors give the originating row of every column.
struct ClusterSplit {
  Eigen::MatrixXd within;
  Eigen::MatrixXd others;
  std::vector<Index> within_index;
  std::vector<Index> others_index;

  Index dim() const { return within.rows(); }
  Index within_count() const { return within.cols(); }
  Index others_count() const { return others.cols(); }
};

struct CsvOptions {
  /// Column holding ground truth, by 0-based index or header name.
  std::optional<std::string> label_column;
  /// Use the last column as ground truth when no column is named.
  bool has_truth = false;
};

Dataset read_csv(std::istream& in, const CsvOptions& options,
                 const std::string& source = "<stream>");
Dataset load_csv(const std::string& path, const CsvOptions& options);

/// Writes a header row and one row per sample (truth codes last when present),
/// 17 significant digits.
void write_csv(std::ostream& out, const Dataset& d);
void save_csv(const std::string& path, const Dataset& d);

/// Label file: optional "index,label" header, then one "index,label" row per
/// sample with 0-based indices in order.
void write_labels(std::ostream& out, const Labels& labels);
std::vector<int> read_labels(std::istream& in, const std::string& source = "<stream>");
std::vector<int> load_labels(const std::string& path);

enum class Scaling { minmax, zscore, none };

Scaling parse_scaling(const std::string& name);
std::string to_string(Scaling s);

/// Per-feature scaling; constant features map to 0 under minmax and zscore.
Dataset standardize(const Dataset& d, Scaling mode);

/// Splits the rows of `features` (m x d) by label i and appends the bias feature.
ClusterSplit split_cluster(const Eigen::MatrixXd& features, const Labels& labels,
                           int cluster);

enum class InitKind { nng, random };

InitKind parse_init(const std::string& name);
std::string to_string(InitKind k);

/// Nearest-neighbour-graph initialization.
///
/// Connected components of the undirected 1-NN graph (Euclidean, ties to the
/// smaller index) are merged by closest centroids, or the largest one is
/// split by seeded 2-means, until exactly k non-empty clusters remain.
Labels nng_init(const Eigen::MatrixXd& samples, int k, std::uint64_t seed);

/// Uniform random labels, repaired so every cluster is non-empty.
Labels random_init(Index m, int k, std::uint64_t seed);

}  // namespace planeclust

#endif  // PLANECLUST_DATA_HPP
