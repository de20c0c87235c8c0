#include "planeclust/solver.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "planeclust/error.hpp"
#include "planeclust/format.hpp"

namespace planeclust {

void SolverOptions::validate() const {
  if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (!(subproblem_tol > 0.0)) throw ConfigError("subproblem_tol must be > 0");
  if (!(smoothing > 0.0)) throw ConfigError("smoothing must be > 0");
  if (!(objective_tol >= 0.0)) throw ConfigError("objective_tol must be >= 0");
  if (newton_max < 1) throw ConfigError("newton_max must be >= 1");
}

Index Indicators::nonzero_within() const {
  return std::count_if(within.begin(), within.end(), [](int v) { return v != 0; });
}

Index Indicators::nonzero_others() const {
  return std::count_if(others.begin(), others.end(), [](int v) { return v != 0; });
}

namespace {

void check_dim(const Eigen::VectorXd& u, const ClusterSplit& split, const char* what) {
  if (u.size() != split.dim()) {
    throw DimensionError(std::string(what) + ": plane has " + std::to_string(u.size()) +
                         " parameters, split has dimension " + std::to_string(split.dim()));
  }
}

double hinge(double a) { return a > 0.0 ? a : 0.0; }

// Huber-smoothed (a)_+ with half-width h, and its first two derivatives.
struct Smoothed {
  double value;
  double slope;
  double curvature;
};

Smoothed smooth_hinge(double a, double h) {
  if (a <= -h) return {0.0, 0.0, 0.0};
  if (a >= h) return {a, 1.0, 0.0};
  const double r = a + h;
  return {r * r / (4.0 * h), r / (2.0 * h), 1.0 / (2.0 * h)};
}

// Fixed-indicator objective in smoothed form. Every sample contributes
// weight * [phi(offset - t) + phi(offset + t)].
class SmoothedObjective {
 public:
  SmoothedObjective(const ClusterSplit& split, const Indicators& p, const HyperParams& hp)
      : split_(split), hp_(hp) {
    linear_ = Eigen::VectorXd::Zero(split.dim());
    for (Index j = 0; j < split.within_count(); ++j) {
      const int v = p.within[static_cast<std::size_t>(j)];
      if (v != 0) linear_ += (hp.c1 * v) * split.within.col(j);
    }
    for (Index j = 0; j < split.others_count(); ++j) {
      const int v = p.others[static_cast<std::size_t>(j)];
      if (v != 0) linear_ += (hp.c2 * v) * split.others.col(j);
    }
  }

  double value(const Eigen::VectorXd& u, double h) const {
    double f = 0.5 * u.squaredNorm() + linear_.dot(u);
    f += block_value(split_.within, u, hp_.c1, hp_.delta - 1.0, h);
    f += block_value(split_.others, u, hp_.c2, 1.0 + hp_.delta, h);
    return f;
  }

  // Gradient plus the band samples (columns, curvature) of the Hessian.
  double gradient(const Eigen::VectorXd& u, double h, Eigen::VectorXd& g,
                  std::vector<std::pair<const Eigen::MatrixXd*, Index>>& band,
                  std::vector<double>& curvature) const {
    g = u + linear_;
    band.clear();
    curvature.clear();
    double f = 0.5 * u.squaredNorm() + linear_.dot(u);
    f += block_gradient(split_.within, u, hp_.c1, hp_.delta - 1.0, h, g, band, curvature);
    f += block_gradient(split_.others, u, hp_.c2, 1.0 + hp_.delta, h, g, band, curvature);
    return f;
  }

 private:
  static double block_value(const Eigen::MatrixXd& z, const Eigen::VectorXd& u, double weight,
                            double offset, double h) {
    if (z.cols() == 0) return 0.0;
    const Eigen::VectorXd t = z.transpose() * u;
    double f = 0.0;
    for (double v : t) {
      f += smooth_hinge(offset - v, h).value + smooth_hinge(offset + v, h).value;
    }
    return weight * f;
  }

  static double block_gradient(const Eigen::MatrixXd& z, const Eigen::VectorXd& u,
                               double weight, double offset, double h, Eigen::VectorXd& g,
                               std::vector<std::pair<const Eigen::MatrixXd*, Index>>& band,
                               std::vector<double>& curvature) {
    if (z.cols() == 0) return 0.0;
    const Eigen::VectorXd t = z.transpose() * u;
    Eigen::VectorXd coef(z.cols());
    double f = 0.0;
    for (Index j = 0; j < z.cols(); ++j) {
      const Smoothed minus = smooth_hinge(offset - t(j), h);
      const Smoothed plus = smooth_hinge(offset + t(j), h);
      f += minus.value + plus.value;
      coef(j) = weight * (plus.slope - minus.slope);
      const double k = weight * (plus.curvature + minus.curvature);
      if (k > 0.0) {
        band.emplace_back(&z, j);
        curvature.push_back(k);
      }
    }
    g.noalias() += z * coef;
    return weight * f;
  }

  const ClusterSplit& split_;
  const HyperParams& hp_;
  Eigen::VectorXd linear_;
};

// Solves (I + A diag(k) A') x = rhs where A holds the band columns.
Eigen::VectorXd newton_solve(const std::vector<std::pair<const Eigen::MatrixXd*, Index>>& band,
                             const std::vector<double>& curvature, const Eigen::VectorXd& rhs) {
  const Index r = static_cast<Index>(band.size());
  if (r == 0) return rhs;
  const Index d = rhs.size();
  Eigen::MatrixXd a(d, r);
  for (Index j = 0; j < r; ++j) {
    const auto& [mat, col] = band[static_cast<std::size_t>(j)];
    a.col(j) = mat->col(col);
  }
  if (r < d) {
    Eigen::MatrixXd small = a.transpose() * a;
    for (Index j = 0; j < r; ++j) small(j, j) += 1.0 / curvature[static_cast<std::size_t>(j)];
    const Eigen::VectorXd y = small.ldlt().solve(a.transpose() * rhs);
    return rhs - a * y;
  }
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(d, d);
  const Eigen::Map<const Eigen::VectorXd> k(curvature.data(), r);
  h.noalias() += a * k.asDiagonal() * a.transpose();
  return h.ldlt().solve(rhs);
}

}  // namespace

Indicators update_indicators(const Eigen::VectorXd& u, const ClusterSplit& split, double delta,
                             double s) {
  check_dim(u, split, "update_indicators");
  Indicators p;
  const double within_threshold = 2.0 - delta - s;
  p.within.resize(static_cast<std::size_t>(split.within_count()));
  if (split.within_count() > 0) {
    const Eigen::VectorXd t = split.within.transpose() * u;
    for (Index j = 0; j < t.size(); ++j) {
      p.within[static_cast<std::size_t>(j)] =
          t(j) > within_threshold ? -1 : (t(j) < -within_threshold ? 1 : 0);
    }
  }
  p.others.resize(static_cast<std::size_t>(split.others_count()));
  if (split.others_count() > 0) {
    const Eigen::VectorXd t = split.others.transpose() * u;
    for (Index j = 0; j < t.size(); ++j) {
      p.others[static_cast<std::size_t>(j)] = t(j) > -s ? -1 : (t(j) < s ? 1 : 0);
    }
  }
  return p;
}

double linearized_objective(const Eigen::VectorXd& u, const ClusterSplit& split,
                            const Indicators& p, const HyperParams& hp) {
  check_dim(u, split, "linearized_objective");
  if (p.within.size() != static_cast<std::size_t>(split.within_count()) ||
      p.others.size() != static_cast<std::size_t>(split.others_count())) {
    throw DimensionError("linearized_objective: indicator sizes do not match the split");
  }
  double f = 0.5 * u.squaredNorm();
  if (split.within_count() > 0) {
    const Eigen::VectorXd t = split.within.transpose() * u;
    const double off = hp.delta - 1.0;
    for (Index j = 0; j < t.size(); ++j) {
      f += hp.c1 * (hinge(off - t(j)) + hinge(off + t(j)) +
                    p.within[static_cast<std::size_t>(j)] * t(j));
    }
  }
  if (split.others_count() > 0) {
    const Eigen::VectorXd t = split.others.transpose() * u;
    const double off = 1.0 + hp.delta;
    for (Index j = 0; j < t.size(); ++j) {
      f += hp.c2 * (hinge(off - t(j)) + hinge(off + t(j)) +
                    p.others[static_cast<std::size_t>(j)] * t(j));
    }
  }
  return f;
}

SubproblemResult solve_subproblem(const ClusterSplit& split, const Indicators& p,
                                  const HyperParams& hp, const SolverOptions& opts,
                                  const Eigen::VectorXd& u0) {
  check_dim(u0, split, "solve_subproblem");
  if (p.within.size() != static_cast<std::size_t>(split.within_count()) ||
      p.others.size() != static_cast<std::size_t>(split.others_count())) {
    throw DimensionError("solve_subproblem: indicator sizes do not match the split");
  }
  const SmoothedObjective objective(split, p, hp);

  std::vector<double> levels;
  for (double h = 1e-1; h > opts.smoothing; h *= 1e-1) levels.push_back(h);
  levels.push_back(opts.smoothing);

  SubproblemResult result;
  result.u = u0;
  result.converged = true;
  Eigen::VectorXd g;
  std::vector<std::pair<const Eigen::MatrixXd*, Index>> band;
  std::vector<double> curvature;

  for (std::size_t level = 0; level < levels.size(); ++level) {
    const double h = levels[level];
    const bool last = level + 1 == levels.size();
    const double tol = last ? opts.subproblem_tol : std::max(opts.subproblem_tol, 1e-6);
    bool level_converged = false;
    for (int it = 0; it < opts.newton_max; ++it) {
      const double f = objective.gradient(result.u, h, g, band, curvature);
      const double gnorm = g.norm();
      result.gradient_norm = gnorm;
      if (gnorm <= tol * std::max(1.0, result.u.norm())) {
        level_converged = true;
        break;
      }
      const Eigen::VectorXd step = -newton_solve(band, curvature, g);
      const double slope = g.dot(step);
      double alpha = 1.0;
      bool accepted = false;
      while (alpha > 1e-12) {
        const Eigen::VectorXd trial = result.u + alpha * step;
        if (objective.value(trial, h) <= f + 1e-4 * alpha * slope) {
          result.u = trial;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      ++result.newton_iterations;
      if (!accepted) {
        // No representable decrease left along the Newton direction.
        level_converged = gnorm <= std::sqrt(tol) * std::max(1.0, result.u.norm());
        break;
      }
    }
    if (last && !level_converged) {
      objective.gradient(result.u, h, g, band, curvature);
      result.gradient_norm = g.norm();
      result.converged = result.gradient_norm <= tol * std::max(1.0, result.u.norm());
    }
  }
  return result;
}

CccpState solve_plane_cccp(const ClusterSplit& split, const HyperParams& hp,
                           const SolverOptions& opts, const Eigen::VectorXd& u0) {
  check_dim(u0, split, "solve_plane_cccp");
  if (!u0.allFinite()) throw ConfigError("solve_plane_cccp: initial plane is not finite");
  CccpState state;
  state.u = u0;
  state.p = update_indicators(state.u, split, hp.delta, hp.s);
  if (opts.on_update) opts.on_update(state.u, state.p);
  double current = plane_objective(state.u, split, hp);
  auto record = [&](double value) {
    state.objective_trace.push_back(value);
    state.nnz_within_trace.push_back(state.p.nonzero_within());
    state.nnz_others_trace.push_back(state.p.nonzero_others());
  };
  record(current);

  bool settled = false;
  while (state.iterations < opts.max_iter) {
    const SubproblemResult sub = solve_subproblem(split, state.p, hp, opts, state.u);
    ++state.iterations;
    if (!sub.converged) state.subproblem_warning = true;
    const double next = plane_objective(sub.u, split, hp);
    if (!(next <= current)) {
      // The inexact inner solve did not improve on the current iterate.
      settled = true;
      break;
    }
    Indicators p_next = update_indicators(sub.u, split, hp.delta, hp.s);
    if (opts.on_update) opts.on_update(sub.u, p_next);
    const bool repeated = p_next == state.p;
    const double decrease = current - next;
    state.u = sub.u;
    state.p = std::move(p_next);
    current = next;
    record(current);
    if (repeated || decrease <= opts.objective_tol) {
      settled = true;
      break;
    }
  }
  state.reached_max_iter = !settled;
  return state;
}

void write_trace_csv(std::ostream& out, const CccpState& state) {
  out << "iter,objective,nnz_p1,nnz_p2\n";
  for (std::size_t t = 0; t < state.objective_trace.size(); ++t) {
    out << t << ',' << format_real(state.objective_trace[t]) << ','
        << state.nnz_within_trace[t] << ',' << state.nnz_others_trace[t] << '\n';
  }
}

}  // namespace planeclust
