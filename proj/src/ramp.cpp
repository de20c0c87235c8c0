#include "planeclust/ramp.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "planeclust/error.hpp"
#include "planeclust/format.hpp"

namespace planeclust {

void HyperParams::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(std::isfinite(c1) && c1 > 0.0, "c1=" + format_real(c1) + " must lie in (0, inf)");
  require(std::isfinite(c2) && c2 > 0.0, "c2=" + format_real(c2) + " must lie in (0, inf)");
  require(delta >= 0.0 && delta < 1.0, "delta=" + format_real(delta) + " must lie in [0,1)");
  require(s > -1.0 && s <= 0.0, "s=" + format_real(s) + " must lie in (-1,0]");
  require(std::isfinite(mu) && mu > 0.0, "mu=" + format_real(mu) + " must lie in (0, inf)");
  require(std::isfinite(c) && c > 0.0, "c=" + format_real(c) + " must lie in (0, inf)");
}

Eigen::VectorXd Plane::stacked() const {
  Eigen::VectorXd u(w.size() + 1);
  u << w, b;
  return u;
}

Plane Plane::from_stacked(const Eigen::VectorXd& u) {
  return Plane{u.head(u.size() - 1), u(u.size() - 1)};
}

double deviation(const Plane& p, const Eigen::VectorXd& z) {
  if (z.size() != p.w.size() + 1) {
    throw DimensionError("deviation: sample has " + std::to_string(z.size()) +
                         " entries, plane expects " + std::to_string(p.w.size() + 1));
  }
  return p.w.dot(z.head(p.w.size())) + p.b * z(p.w.size());
}

double ramp_within(double dev, double delta, double s) {
  const double a = std::abs(dev);
  if (a <= 1.0 - delta) return 0.0;
  if (a >= 2.0 - delta - s) return 1.0 - s;
  return a - 1.0 + delta;
}

double ramp_between(double dev, double delta, double s) {
  const double a = std::abs(dev);
  if (a <= -s) return 2.0 + 2.0 * delta;
  if (a >= 1.0 + delta) return 1.0 + delta - s;
  return -a + 2.0 + 2.0 * delta - s;
}

double plane_objective(const Eigen::VectorXd& u, const ClusterSplit& split,
                       const HyperParams& hp) {
  if (u.size() != split.dim()) {
    throw DimensionError("plane_objective: plane has " + std::to_string(u.size()) +
                         " parameters, split has dimension " + std::to_string(split.dim()));
  }
  double within = 0.0;
  if (split.within_count() > 0) {
    const Eigen::VectorXd t = split.within.transpose() * u;
    for (double v : t) within += ramp_within(v, hp.delta, hp.s);
  }
  double between = 0.0;
  if (split.others_count() > 0) {
    const Eigen::VectorXd t = split.others.transpose() * u;
    for (double v : t) between += ramp_between(v, hp.delta, hp.s);
  }
  return 0.5 * u.squaredNorm() + hp.c1 * within + hp.c2 * between;
}

double plane_objective(const Plane& p, const ClusterSplit& split, const HyperParams& hp) {
  return plane_objective(p.stacked(), split, hp);
}

std::vector<LossCurveRow> loss_curves(const HyperParams& hp, std::span<const double> grid) {
  std::vector<LossCurveRow> rows;
  rows.reserve(grid.size());
  for (double dev : grid) {
    rows.push_back({dev, ramp_within(dev, hp.delta, hp.s), ramp_between(dev, hp.delta, hp.s),
                    dev * dev, std::abs(dev), std::max(0.0, 1.0 - std::abs(dev))});
  }
  return rows;
}

void write_loss_curves(std::ostream& out, std::span<const LossCurveRow> rows) {
  out << "dev,r1,r2,quad,abs,twsvc_between\n";
  for (const auto& r : rows) {
    out << format_real(r.dev) << ',' << format_real(r.r1) << ',' << format_real(r.r2) << ','
        << format_real(r.quad) << ',' << format_real(r.abs) << ','
        << format_real(r.twsvc_between) << '\n';
  }
}

}  // namespace planeclust
