#pragma once

// Nonlinear controller: online inversion of the identified model over the
// saturated input box.

#include <limits>
#include <numbers>

#include "d2ibc/dataset.hpp"
#include "d2ibc/sysid.hpp"

namespace d2ibc {

struct InversionConfig {
  Vector zeta;    // n_y tracking priorities in [0, 1]
  Vector mu;      // n_u magnitude penalties
  Vector lambda;  // n_u rate penalties
  NormConstants norm;
  int grid_points = 33;
  int refine_iters = 60;
  double tol_u = 1e-8;
  double budget = 1e6;  // max grid_points^n_u

  static InversionConfig tracking_only(int n_y, int n_u) {
    return {Vector::Ones(n_y), Vector::Zero(n_u), Vector::Zero(n_u), NormConstants::unit(n_y, n_u)};
  }

  void validate(int n_y, int n_u) const {
    require(zeta.size() == n_y && norm.rho_y.size() == n_y, ErrorCode::Shape, "zeta/rho_y must have n_y entries");
    require(mu.size() == n_u && lambda.size() == n_u && norm.rho_u.size() == n_u, ErrorCode::Shape,
            "mu/lambda/rho_u must have n_u entries");
    require((zeta.array() >= 0.0).all() && (zeta.array() <= 1.0).all(), ErrorCode::Config, "zeta must lie in [0,1]");
    require((mu.array() >= 0.0).all() && (lambda.array() >= 0.0).all(), ErrorCode::Config,
            "mu and lambda must be non-negative");
    require((norm.rho_y.array() > 0.0).all() && (norm.rho_u.array() > 0.0).all(), ErrorCode::Config,
            "normalization constants must be positive");
    require(grid_points >= 3 && grid_points % 2 == 1, ErrorCode::Config, "grid_points must be odd and >= 3");
    require(refine_iters >= 0 && tol_u > 0.0, ErrorCode::Config, "refine_iters >= 0 and tol_u > 0 required");
  }
};

struct InversionResult {
  Vector u_nl;
  double j_value = 0.0;
  long evaluations = 0;
};

/// Tracking-plus-effort cost of a candidate input: weighted squared tracking
/// error per output plus magnitude and rate penalties per input.
inline double objective_j(const PolyModel& f, const RegressorWindow& q, const Eigen::Ref<const Vector>& r_next,
                          const Eigen::Ref<const Vector>& u_prev, const InversionConfig& cfg,
                          const Eigen::Ref<const Vector>& u_cand) {
  Vector y_hat = predict(f, q, u_cand);
  double j = 0.0;
  for (int i = 0; i < f.n_y; ++i) {
    const double err = r_next[i] - y_hat[i];
    j += cfg.zeta[i] / cfg.norm.rho_y[i] * err * err;
  }
  for (int k = 0; k < f.n_u; ++k) {
    const double du = u_cand[k] - u_prev[k];
    j += cfg.mu[k] / cfg.norm.rho_u[k] * u_cand[k] * u_cand[k];
    j += cfg.lambda[k] / cfg.norm.rho_u[k] * du * du;
  }
  return j;
}

/// Grid search over [-u_bar, u_bar]^n_u followed by coordinate-wise
/// golden-section sweeps from the best grid point. Deterministic; ties on the
/// grid go to the lexicographically smallest input.
inline InversionResult solve_inversion(const PolyModel& f, const RegressorWindow& q,
                                       const Eigen::Ref<const Vector>& r_next, const Eigen::Ref<const Vector>& u_prev,
                                       double u_bar, const InversionConfig& cfg) {
  cfg.validate(f.n_y, f.n_u);
  require(r_next.size() == f.n_y && u_prev.size() == f.n_u, ErrorCode::Shape, "r_next/u_prev dimension mismatch");
  require(u_bar >= 0.0, ErrorCode::Bound, "u_bar must be non-negative");
  const int nu = f.n_u;
  const double total = std::pow(static_cast<double>(cfg.grid_points), nu);
  require(total <= cfg.budget, ErrorCode::Budget,
          "grid of " + std::to_string(cfg.grid_points) + "^" + std::to_string(nu) +
              " points exceeds the evaluation budget; lower grid_points");

  InversionResult res;
  auto cost = [&](const Vector& u) {
    ++res.evaluations;
    return objective_j(f, q, r_next, u_prev, cfg, u);
  };
  auto grid_value = [&](int idx) {
    if (u_bar == 0.0) return 0.0;
    return -u_bar + 2.0 * u_bar * idx / (cfg.grid_points - 1);
  };

  // Odometer over the grid, first coordinate most significant.
  std::vector<int> idx(nu, 0);
  Vector u(nu), best(nu);
  double best_j = std::numeric_limits<double>::infinity();
  for (long long count = 0; count < static_cast<long long>(total); ++count) {
    for (int k = 0; k < nu; ++k) u[k] = grid_value(idx[k]);
    const double j = cost(u);
    if (j < best_j) {
      best_j = j;
      best = u;
    }
    for (int k = nu - 1; k >= 0; --k) {
      if (++idx[k] < cfg.grid_points) break;
      idx[k] = 0;
    }
  }

  const double h = u_bar == 0.0 ? 0.0 : 2.0 * u_bar / (cfg.grid_points - 1);
  constexpr double inv_phi = 0.6180339887498949;  // 1/golden ratio
  for (int sweep = 0; sweep < cfg.refine_iters && h > 0.0; ++sweep) {
    bool improved = false;
    for (int k = 0; k < nu; ++k) {
      double lo = std::max(-u_bar, best[k] - h);
      double hi = std::min(u_bar, best[k] + h);
      Vector trial = best;
      auto at = [&](double v) {
        trial[k] = v;
        return cost(trial);
      };
      double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
      double f1 = at(x1), f2 = at(x2);
      while (hi - lo > cfg.tol_u) {
        if (f1 <= f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - inv_phi * (hi - lo);
          f1 = at(x1);
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + inv_phi * (hi - lo);
          f2 = at(x2);
        }
      }
      const double cand = f1 <= f2 ? x1 : x2;
      const double cand_j = f1 <= f2 ? f1 : f2;
      if (cand_j < best_j) {
        best_j = cand_j;
        best[k] = cand;
        improved = true;
      }
    }
    if (!improved) break;
  }
  res.u_nl = best;
  res.j_value = best_j;
  return res;
}

/// Model-predicted tracking error r_{t+1} - f(q_t, u_t) for the applied input.
inline Vector predicted_error(const PolyModel& f, const RegressorWindow& q, const Eigen::Ref<const Vector>& r_next,
                              const Eigen::Ref<const Vector>& u_total) {
  return r_next - predict(f, q, u_total);
}

}  // namespace d2ibc
