#include "planeclust/model_io.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "planeclust/error.hpp"
#include "planeclust/format.hpp"

namespace planeclust {

namespace {

constexpr const char* kMagic = "planeclust-model";

std::string plane_tag(const PlaneModel& model) {
  if (model.meta.method == "ramptwsvc" || model.meta.method.empty()) {
    return model.is_kernel() ? "kernel" : "linear";
  }
  return model.meta.method;
}

void write_header(std::ostream& out, const std::string& tag, int k, Index n,
                  const std::optional<KernelMap>& kernel) {
  out << kMagic << " v1 mode=" << tag << " k=" << k << " n=" << n;
  if (kernel) out << " m=" << kernel->support.rows() << " mu=" << format_real(kernel->mu);
  out << '\n';
}

void write_row(std::ostream& out, const Eigen::VectorXd& v) {
  for (Index i = 0; i < v.size(); ++i) {
    if (i > 0) out << ' ';
    out << format_real(v(i));
  }
  out << '\n';
}

void write_support(std::ostream& out, const std::optional<KernelMap>& kernel) {
  if (!kernel) return;
  for (Index i = 0; i < kernel->support.rows(); ++i) {
    write_row(out, kernel->support.row(i).transpose());
  }
}

Eigen::VectorXd read_row(std::istream& in, Index expected, const std::string& source,
                         const std::string& what) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(source + ": truncated model, missing " + what);
  std::istringstream fields(line);
  std::vector<double> values;
  std::string token;
  while (fields >> token) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw DataError(source + ": bad number '" + token + "' in " + what);
    }
  }
  if (static_cast<Index>(values.size()) != expected) {
    throw DataError(source + ": " + what + " has " + std::to_string(values.size()) +
                    " values, expected " + std::to_string(expected));
  }
  return Eigen::Map<Eigen::VectorXd>(values.data(), expected);
}

}  // namespace

void write_model(std::ostream& out, const PlaneModel& model) {
  write_header(out, plane_tag(model), model.k(), model.input_dim, model.kernel);
  for (const Plane& p : model.planes) write_row(out, p.stacked());
  write_support(out, model.kernel);
}

void write_model(std::ostream& out, const CentroidModel& model) {
  write_header(out, "kmeans", model.k(), model.input_dim, model.kernel);
  for (Index i = 0; i < model.centers.rows(); ++i) {
    write_row(out, model.centers.row(i).transpose());
  }
  write_support(out, model.kernel);
}

AnyModel read_model(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(source + ": empty model file");
  std::istringstream header(line);
  std::string magic;
  std::string version;
  header >> magic >> version;
  if (magic != kMagic || version != "v1") {
    throw DataError(source + ": not a planeclust-model v1 file");
  }
  std::map<std::string, std::string> fields;
  std::string token;
  while (header >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw DataError(source + ": bad header field '" + token + "'");
    fields[token.substr(0, eq)] = token.substr(eq + 1);
  }
  auto field = [&](const std::string& key) -> const std::string& {
    const auto it = fields.find(key);
    if (it == fields.end()) throw DataError(source + ": header lacks " + key + "=");
    return it->second;
  };
  const std::string tag = field("mode");
  int k = 0;
  Index n = 0;
  try {
    k = std::stoi(field("k"));
    n = std::stol(field("n"));
  } catch (const std::invalid_argument&) {
    throw DataError(source + ": bad k or n in header");
  }
  if (k < 1 || n < 1) throw DataError(source + ": k and n must be positive");

  std::optional<KernelMap> kernel;
  Index m = 0;
  if (fields.count("m")) {
    kernel = KernelMap{};
    try {
      m = std::stol(field("m"));
      kernel->mu = std::stod(field("mu"));
    } catch (const std::invalid_argument&) {
      throw DataError(source + ": bad m or mu in header");
    }
    if (m < 1) throw DataError(source + ": m must be positive");
  } else if (tag == "kernel") {
    throw DataError(source + ": kernel model header lacks m= and mu=");
  }
  const Index width = kernel ? m : n;

  std::vector<Eigen::VectorXd> rows;
  const bool centroid = tag == "kmeans";
  if (!centroid && tag != "linear" && tag != "kernel" && tag != "kpc" && tag != "ppc") {
    throw DataError(source + ": unknown mode '" + tag + "'");
  }
  for (int i = 0; i < k; ++i) {
    rows.push_back(read_row(in, centroid ? width : width + 1, source,
                            (centroid ? "center " : "plane ") + std::to_string(i + 1)));
  }
  if (kernel) {
    kernel->support.resize(m, n);
    for (Index r = 0; r < m; ++r) {
      kernel->support.row(r) =
          read_row(in, n, source, "support row " + std::to_string(r + 1)).transpose();
    }
  }

  if (centroid) {
    CentroidModel model;
    model.centers.resize(k, width);
    for (int i = 0; i < k; ++i) model.centers.row(i) = rows[static_cast<std::size_t>(i)];
    model.kernel = std::move(kernel);
    model.input_dim = n;
    model.meta.method = "kmeans";
    return model;
  }
  PlaneModel model;
  for (const auto& u : rows) model.planes.push_back(Plane::from_stacked(u));
  model.kernel = std::move(kernel);
  model.input_dim = n;
  model.meta.method = (tag == "linear" || tag == "kernel") ? "ramptwsvc" : tag;
  return model;
}

void save_model(const std::string& path, const AnyModel& model) {
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  std::visit([&](const auto& m) { write_model(out, m); }, model);
}

AnyModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open file");
  return read_model(in, path);
}

Labels assign(const AnyModel& model, const Eigen::MatrixXd& x) {
  return std::visit([&](const auto& m) { return planeclust::assign(m, x); }, model);
}

}  // namespace planeclust
