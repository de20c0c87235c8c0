#include "planeclust/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "planeclust/error.hpp"
#include "planeclust/format.hpp"

namespace planeclust {

Labels::Labels(std::vector<int> assignment, int k)
    : assignment_(std::move(assignment)), k_(k) {
  if (k_ < 1) throw ConfigError("cluster count must be >= 1, got " + std::to_string(k_));
  for (std::size_t j = 0; j < assignment_.size(); ++j) {
    if (assignment_[j] < 1 || assignment_[j] > k_) {
      throw ConfigError("label " + std::to_string(assignment_[j]) + " at position " +
                        std::to_string(j) + " outside [1, " + std::to_string(k_) + "]");
    }
  }
}

std::vector<Index> Labels::counts() const {
  std::vector<Index> c(static_cast<std::size_t>(k_), 0);
  for (int y : assignment_) ++c[static_cast<std::size_t>(y - 1)];
  return c;
}

void Dataset::validate() const {
  if (samples.rows() < 1) throw DataError("dataset has no samples");
  if (samples.cols() < 1) throw DataError("dataset has no features");
  if (!samples.allFinite()) throw DataError("dataset contains non-finite entries");
  if (truth) {
    if (truth->size() != samples.rows()) {
      throw DataError("truth has " + std::to_string(truth->size()) + " labels for " +
                      std::to_string(samples.rows()) + " samples");
    }
    for (Index c : truth->counts()) {
      if (c == 0) throw DataError("truth labels leave a class empty");
    }
  }
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.emplace_back(trim(std::string_view(line).substr(
        start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::optional<double> parse_real(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::optional<long> parse_integer(std::string_view s) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

Dataset read_csv(std::istream& in, const CsvOptions& options, const std::string& source) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    rows.push_back(split_fields(line));
    line_numbers.push_back(line_no);
  }
  if (in.bad()) throw DataError(source + ": read failure");
  if (rows.empty()) throw DataError(source + ": empty file");

  const std::size_t width = rows.front().size();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != width) {
      throw DataError(source + ": line " + std::to_string(line_numbers[r]) + " has " +
                      std::to_string(rows[r].size()) + " fields, expected " +
                      std::to_string(width));
    }
  }

  // Resolve the label column before header detection so a string label in the
  // first data row is not mistaken for a header.
  std::optional<std::size_t> label_col;
  bool label_by_name = false;
  if (options.label_column) {
    if (auto idx = parse_integer(*options.label_column)) {
      if (*idx < 0 || static_cast<std::size_t>(*idx) >= width) {
        throw DataError(source + ": label column " + *options.label_column +
                        " out of range for " + std::to_string(width) + " columns");
      }
      label_col = static_cast<std::size_t>(*idx);
    } else if (*options.label_column == "last") {
      label_col = width - 1;
    } else {
      label_by_name = true;
    }
  } else if (options.has_truth) {
    label_col = width - 1;
  }

  bool header = label_by_name;
  if (!header) {
    for (std::size_t c = 0; c < width; ++c) {
      if (label_col && c == *label_col) continue;
      if (!parse_real(rows.front()[c])) {
        header = true;
        break;
      }
    }
  }
  if (label_by_name) {
    const auto& names = rows.front();
    const auto it = std::find(names.begin(), names.end(), *options.label_column);
    if (it == names.end()) {
      throw DataError(source + ": no column named '" + *options.label_column + "'");
    }
    label_col = static_cast<std::size_t>(it - names.begin());
  }

  const std::size_t first = header ? 1 : 0;
  const std::size_t m = rows.size() - first;
  if (m == 0) throw DataError(source + ": empty file (header only)");
  const std::size_t n = width - (label_col ? 1 : 0);
  if (n == 0) throw DataError(source + ": no feature columns");

  Dataset d;
  d.samples.resize(static_cast<Index>(m), static_cast<Index>(n));
  for (std::size_t c = 0; c < width; ++c) {
    if (label_col && c == *label_col) continue;
    d.feature_names.push_back(header ? rows.front()[c] : "f" + std::to_string(c + 1));
  }

  std::vector<int> codes;
  std::map<std::string, int> code_of;
  for (std::size_t r = first; r < rows.size(); ++r) {
    const auto i = static_cast<Index>(r - first);
    Index f = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (label_col && c == *label_col) {
        const auto& token = rows[r][c];
        auto [it, inserted] = code_of.try_emplace(token, static_cast<int>(code_of.size()) + 1);
        if (inserted) d.class_names.push_back(token);
        codes.push_back(it->second);
        continue;
      }
      const auto v = parse_real(rows[r][c]);
      if (!v) {
        throw DataError(source + ": line " + std::to_string(line_numbers[r]) + ", column " +
                        std::to_string(c + 1) + ": non-numeric feature '" + rows[r][c] + "'");
      }
      d.samples(i, f++) = *v;
    }
  }
  if (label_col) d.truth = Labels(std::move(codes), static_cast<int>(code_of.size()));
  d.validate();
  return d;
}

Dataset load_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open file");
  return read_csv(in, options, path);
}

void write_csv(std::ostream& out, const Dataset& d) {
  for (Index c = 0; c < d.dim(); ++c) {
    if (c > 0) out << ',';
    out << (static_cast<std::size_t>(c) < d.feature_names.size()
                ? d.feature_names[static_cast<std::size_t>(c)]
                : "f" + std::to_string(c + 1));
  }
  if (d.truth) out << ",class";
  out << '\n';
  for (Index i = 0; i < d.size(); ++i) {
    for (Index c = 0; c < d.dim(); ++c) {
      if (c > 0) out << ',';
      out << format_real(d.samples(i, c));
    }
    if (d.truth) out << ',' << (*d.truth)[i];
    out << '\n';
  }
}

void save_csv(const std::string& path, const Dataset& d) {
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  write_csv(out, d);
}

void write_labels(std::ostream& out, const Labels& labels) {
  out << "index,label\n";
  for (Index j = 0; j < labels.size(); ++j) out << j << ',' << labels[j] << '\n';
}

std::vector<int> read_labels(std::istream& in, const std::string& source) {
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (labels.empty() && line_no == 1 && fields.size() == 2 && !parse_integer(fields[0])) {
      continue;  // header
    }
    if (fields.size() != 2) {
      throw DataError(source + ": line " + std::to_string(line_no) +
                      ": expected 'index,label', got " + std::to_string(fields.size()) +
                      " fields");
    }
    const auto index = parse_integer(fields[0]);
    const auto label = parse_integer(fields[1]);
    if (!index || !label) {
      throw DataError(source + ": line " + std::to_string(line_no) + ": non-integer entry");
    }
    if (*index != static_cast<long>(labels.size())) {
      throw DataError(source + ": line " + std::to_string(line_no) + ": index " +
                      std::to_string(*index) + " out of sequence");
    }
    labels.push_back(static_cast<int>(*label));
  }
  if (labels.empty()) throw DataError(source + ": empty label file");
  return labels;
}

std::vector<int> load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open file");
  return read_labels(in, path);
}

Scaling parse_scaling(const std::string& name) {
  if (name == "minmax") return Scaling::minmax;
  if (name == "zscore") return Scaling::zscore;
  if (name == "none") return Scaling::none;
  throw ConfigError("unknown scaling mode '" + name + "' (expected minmax, zscore or none)");
}

std::string to_string(Scaling s) {
  switch (s) {
    case Scaling::minmax: return "minmax";
    case Scaling::zscore: return "zscore";
    case Scaling::none: return "none";
  }
  return "none";
}

Dataset standardize(const Dataset& d, Scaling mode) {
  Dataset out = d;
  if (mode == Scaling::none) return out;
  for (Index c = 0; c < d.dim(); ++c) {
    auto col = out.samples.col(c);
    if (mode == Scaling::minmax) {
      const double lo = col.minCoeff();
      const double range = col.maxCoeff() - lo;
      if (range > 0.0) {
        col = ((col.array() - lo) / range).matrix();
        // Guard against rounding just outside the unit interval.
        col = col.cwiseMax(0.0).cwiseMin(1.0);
      } else {
        col.setZero();
      }
    } else {
      const double mean = col.mean();
      const double sd = std::sqrt((col.array() - mean).square().mean());
      if (sd > 0.0) {
        col = ((col.array() - mean) / sd).matrix();
      } else {
        col.setZero();
      }
    }
  }
  return out;
}

ClusterSplit split_cluster(const Eigen::MatrixXd& features, const Labels& labels, int cluster) {
  if (labels.size() != features.rows()) {
    throw DimensionError("split_cluster: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(features.rows()) + " samples");
  }
  if (cluster < 1 || cluster > labels.k()) {
    throw ConfigError("split_cluster: cluster " + std::to_string(cluster) + " outside [1, " +
                      std::to_string(labels.k()) + "]");
  }
  ClusterSplit split;
  for (Index j = 0; j < labels.size(); ++j) {
    (labels[j] == cluster ? split.within_index : split.others_index).push_back(j);
  }
  const Index d = features.cols();
  auto fill = [&](const std::vector<Index>& idx, Eigen::MatrixXd& z) {
    z.resize(d + 1, static_cast<Index>(idx.size()));
    for (Index c = 0; c < z.cols(); ++c) {
      z.col(c).head(d) = features.row(idx[static_cast<std::size_t>(c)]).transpose();
      z(d, c) = 1.0;
    }
  };
  fill(split.within_index, split.within);
  fill(split.others_index, split.others);
  return split;
}

namespace {

void check_count(Index m, int k) {
  if (k < 1) throw ConfigError("cluster count must be >= 1, got " + std::to_string(k));
  if (k > m) {
    throw ConfigError("cluster count k=" + std::to_string(k) + " exceeds sample count m=" +
                      std::to_string(m));
  }
}

// Disjoint-set forest over sample indices.
struct UnionFind {
  std::vector<Index> parent;
  explicit UnionFind(Index m) : parent(static_cast<std::size_t>(m)) {
    std::iota(parent.begin(), parent.end(), Index{0});
  }
  Index find(Index x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      auto& p = parent[static_cast<std::size_t>(x)];
      p = parent[static_cast<std::size_t>(p)];
      x = p;
    }
    return x;
  }
  void unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

// Splits `members` into two non-empty groups by seeded 2-means.
std::pair<std::vector<Index>, std::vector<Index>> bisect(const Eigen::MatrixXd& x,
                                                         const std::vector<Index>& members,
                                                         std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
  const Index a = members[pick(rng)];
  Index b = a;
  double far = -1.0;
  for (Index j : members) {
    const double dist = (x.row(j) - x.row(a)).squaredNorm();
    if (dist > far) {
      far = dist;
      b = j;
    }
  }
  Eigen::RowVectorXd ca = x.row(a);
  Eigen::RowVectorXd cb = x.row(b);
  std::vector<char> side(members.size(), 0);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (std::size_t t = 0; t < members.size(); ++t) {
      const auto row = x.row(members[t]);
      const char s = (row - cb).squaredNorm() < (row - ca).squaredNorm() ? 1 : 0;
      if (s != side[t]) changed = true;
      side[t] = s;
    }
    Eigen::RowVectorXd sa = Eigen::RowVectorXd::Zero(x.cols());
    Eigen::RowVectorXd sb = sa;
    Index na = 0;
    Index nb = 0;
    for (std::size_t t = 0; t < members.size(); ++t) {
      if (side[t]) {
        sb += x.row(members[t]);
        ++nb;
      } else {
        sa += x.row(members[t]);
        ++na;
      }
    }
    if (na > 0) ca = sa / static_cast<double>(na);
    if (nb > 0) cb = sb / static_cast<double>(nb);
    if (!changed && iter > 0) break;
  }
  std::pair<std::vector<Index>, std::vector<Index>> parts;
  for (std::size_t t = 0; t < members.size(); ++t) {
    (side[t] ? parts.second : parts.first).push_back(members[t]);
  }
  if (parts.first.empty() || parts.second.empty()) {
    // Coincident points: split by position.
    parts.first.assign(members.begin(), members.begin() + static_cast<long>(members.size() / 2));
    parts.second.assign(members.begin() + static_cast<long>(members.size() / 2), members.end());
  }
  return parts;
}

Labels labels_from_groups(std::vector<std::vector<Index>> groups, Index m) {
  for (auto& g : groups) std::sort(g.begin(), g.end());
  std::sort(groups.begin(), groups.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  std::vector<int> y(static_cast<std::size_t>(m), 0);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (Index j : groups[g]) y[static_cast<std::size_t>(j)] = static_cast<int>(g) + 1;
  }
  return Labels(std::move(y), static_cast<int>(groups.size()));
}

}  // namespace

InitKind parse_init(const std::string& name) {
  if (name == "nng") return InitKind::nng;
  if (name == "random") return InitKind::random;
  throw ConfigError("unknown init '" + name + "' (expected nng or random)");
}

std::string to_string(InitKind k) { return k == InitKind::nng ? "nng" : "random"; }

Labels nng_init(const Eigen::MatrixXd& x, int k, std::uint64_t seed) {
  const Index m = x.rows();
  check_count(m, k);
  UnionFind uf(m);
  for (Index j = 0; j < m; ++j) {
    Index nearest = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < m; ++i) {
      if (i == j) continue;
      const double dist = (x.row(i) - x.row(j)).squaredNorm();
      if (dist < best) {
        best = dist;
        nearest = i;
      }
    }
    if (nearest >= 0) uf.unite(j, nearest);
  }
  std::map<Index, std::vector<Index>> by_root;
  for (Index j = 0; j < m; ++j) by_root[uf.find(j)].push_back(j);
  std::vector<std::vector<Index>> groups;
  for (auto& [root, members] : by_root) groups.push_back(std::move(members));

  auto centroid = [&](const std::vector<Index>& g) {
    Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(x.cols());
    for (Index j : g) c += x.row(j);
    return Eigen::RowVectorXd(c / static_cast<double>(g.size()));
  };

  while (groups.size() > static_cast<std::size_t>(k)) {
    std::vector<Eigen::RowVectorXd> centers;
    for (const auto& g : groups) centers.push_back(centroid(g));
    std::size_t ba = 0;
    std::size_t bb = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < groups.size(); ++a) {
      for (std::size_t b = a + 1; b < groups.size(); ++b) {
        const double dist = (centers[a] - centers[b]).squaredNorm();
        if (dist < best) {
          best = dist;
          ba = a;
          bb = b;
        }
      }
    }
    groups[ba].insert(groups[ba].end(), groups[bb].begin(), groups[bb].end());
    std::sort(groups[ba].begin(), groups[ba].end());
    groups.erase(groups.begin() + static_cast<long>(bb));
  }

  std::mt19937_64 rng(seed);
  while (groups.size() < static_cast<std::size_t>(k)) {
    std::size_t largest = 0;
    for (std::size_t g = 1; g < groups.size(); ++g) {
      if (groups[g].size() > groups[largest].size()) largest = g;
    }
    auto [left, right] = bisect(x, groups[largest], rng);
    groups[largest] = std::move(left);
    groups.push_back(std::move(right));
  }
  return labels_from_groups(std::move(groups), m);
}

Labels random_init(Index m, int k, std::uint64_t seed) {
  check_count(m, k);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(1, k);
  std::vector<int> y(static_cast<std::size_t>(m));
  for (auto& v : y) v = pick(rng);

  std::vector<Index> counts(static_cast<std::size_t>(k), 0);
  for (int v : y) ++counts[static_cast<std::size_t>(v - 1)];
  for (int empty = 1; empty <= k; ++empty) {
    if (counts[static_cast<std::size_t>(empty - 1)] > 0) continue;
    const auto largest =
        static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin()) + 1;
    const auto donor = std::find(y.begin(), y.end(), largest);
    *donor = empty;
    --counts[static_cast<std::size_t>(largest - 1)];
    ++counts[static_cast<std::size_t>(empty - 1)];
  }
  return Labels(std::move(y), k);
}

}  // namespace planeclust
