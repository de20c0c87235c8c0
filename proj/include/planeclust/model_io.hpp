#ifndef PLANECLUST_MODEL_IO_HPP
#define PLANECLUST_MODEL_IO_HPP

#include <iosfwd>
#include <string>
#include <variant>

#include "planeclust/baselines.hpp"
#include "planeclust/cluster.hpp"

namespace planeclust {

// Plain-text model format, version 1:
//
//   planeclust-model v1 mode=<tag> k=<k> n=<n> [m=<m> mu=<mu>]
//   <one line per plane: w_1 ... w_d b>      (kmeans: one line per center)
//   <kernel models: the m support rows>
//
// The tag is linear|kernel for RampTWSVC and kmeans|kpc|ppc for the baselines;
// m and mu appear exactly when the model lives in the kernel-generated space.

using AnyModel = std::variant<PlaneModel, CentroidModel>;

void write_model(std::ostream& out, const PlaneModel& model);
void write_model(std::ostream& out, const CentroidModel& model);
AnyModel read_model(std::istream& in, const std::string& source = "<stream>");

void save_model(const std::string& path, const AnyModel& model);
AnyModel load_model(const std::string& path);

/// Labels of raw samples under either model kind.
Labels assign(const AnyModel& model, const Eigen::MatrixXd& x);

}  // namespace planeclust

#endif  // PLANECLUST_MODEL_IO_HPP
