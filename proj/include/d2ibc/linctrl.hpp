#pragma once

// Linear controller: incremental (extended) centralized PID and its tuning by
// virtual reference feedback tuning.

#include <utility>
#include <vector>

#include <json.hpp>

#include "d2ibc/common.hpp"

namespace d2ibc {

/// u_lin_t = u_lin_{t-1} + sum_{i=0}^{n_theta} B_i e_{t-i}
struct PidGains {
  int n_theta = 0;
  std::vector<Matrix> B;  // n_theta + 1 matrices, each n_u x n_y

  static PidGains zero(int n_u, int n_y, int n_theta) {
    return {n_theta, std::vector<Matrix>(static_cast<std::size_t>(n_theta + 1), Matrix::Zero(n_u, n_y))};
  }

  int n_u() const { return static_cast<int>(B.front().rows()); }
  int n_y() const { return static_cast<int>(B.front().cols()); }

  void validate() const {
    require(n_theta >= 0 && B.size() == static_cast<std::size_t>(n_theta + 1), ErrorCode::Shape,
            "PID needs n_theta + 1 gain matrices");
    for (const auto& b : B)
      require(b.rows() == B.front().rows() && b.cols() == B.front().cols() && b.size() > 0, ErrorCode::Shape,
              "PID gain matrices must share one non-empty shape");
  }

  // Row-major by matrix index, then row, then column.
  Vector theta() const {
    Vector th(static_cast<Eigen::Index>(B.size()) * n_u() * n_y());
    Eigen::Index k = 0;
    for (const auto& b : B)
      for (Eigen::Index r = 0; r < b.rows(); ++r)
        for (Eigen::Index c = 0; c < b.cols(); ++c) th[k++] = b(r, c);
    return th;
  }

  static PidGains from_theta(const Eigen::Ref<const Vector>& th, int n_u, int n_y, int n_theta) {
    require(th.size() == static_cast<Eigen::Index>(n_u) * n_y * (n_theta + 1), ErrorCode::Shape,
            "theta length must be n_u*n_y*(n_theta+1)");
    PidGains g = zero(n_u, n_y, n_theta);
    Eigen::Index k = 0;
    for (auto& b : g.B)
      for (Eigen::Index r = 0; r < n_u; ++r)
        for (Eigen::Index c = 0; c < n_y; ++c) b(r, c) = th[k++];
    return g;
  }
};

struct PidState {
  Vector u_lin_prev;
  std::vector<Vector> e_hist;  // e_t .. e_{t-n_theta}, most recent first

  static PidState zero(int n_u, int n_y, int n_theta) {
    return {Vector::Zero(n_u), std::vector<Vector>(static_cast<std::size_t>(n_theta + 1), Vector::Zero(n_y))};
  }
};

inline std::pair<Vector, PidState> pid_step(const PidGains& g, const PidState& s, const Eigen::Ref<const Vector>& e_t) {
  require(e_t.size() == g.n_y(), ErrorCode::Shape, "error vector must have n_y entries");
  require(s.e_hist.size() == g.B.size(), ErrorCode::Shape, "PID history length must be n_theta + 1");
  PidState next;
  next.e_hist.reserve(s.e_hist.size());
  next.e_hist.push_back(e_t);
  for (std::size_t i = 0; i + 1 < s.e_hist.size(); ++i) next.e_hist.push_back(s.e_hist[i]);
  Vector u = s.u_lin_prev;
  for (std::size_t i = 0; i < g.B.size(); ++i) u += g.B[i] * next.e_hist[i];
  next.u_lin_prev = u;
  return {std::move(u), std::move(next)};
}

/// Diagonal first-order reference model, M_i(z) = (1-a_i) z^-1 / (1 - a_i z^-1).
struct ReferenceModel {
  Vector poles;

  void validate() const {
    require(poles.size() >= 1, ErrorCode::Shape, "reference model needs at least one pole");
    require((poles.array().abs() < 1.0).all(), ErrorCode::Config, "reference model poles must satisfy |a| < 1");
  }
};

inline Matrix simulate_reference_model(const ReferenceModel& M, const Matrix& r) {
  M.validate();
  require(r.rows() >= 1 && r.cols() == M.poles.size(), ErrorCode::Shape, "reference must be T x n_y with T >= 1");
  Matrix y = Matrix::Zero(r.rows(), r.cols());
  for (Eigen::Index t = 0; t + 1 < r.rows(); ++t)
    for (Eigen::Index i = 0; i < r.cols(); ++i) {
      const double a = M.poles[i];
      y(t + 1, i) = a * y(t, i) + (1.0 - a) * r(t, i);
    }
  return y;
}

/// Off-line inverse of the reference model; the last sample has no successor
/// and is dropped, so the result has y.rows() - 1 rows.
inline Matrix virtual_reference(const ReferenceModel& M, const Matrix& y) {
  M.validate();
  require(y.rows() >= 2, ErrorCode::InsufficientData, "virtual reference needs at least 2 output samples");
  require(y.cols() == M.poles.size(), ErrorCode::Shape, "output channels must match reference model");
  Matrix rv(y.rows() - 1, y.cols());
  for (Eigen::Index t = 0; t < rv.rows(); ++t)
    for (Eigen::Index i = 0; i < y.cols(); ++i) {
      const double a = M.poles[i];
      rv(t, i) = (y(t + 1, i) - a * y(t, i)) / (1.0 - a);
    }
  return rv;
}

struct VrftResult {
  PidGains gains;
  double j_vr = 0.0;  // residual sum of squares of the increment fit
  int rows = 0;
};

/// Least-squares fit of the increment u_lin_t - u_lin_{t-1} on the virtual
/// errors e^v_t .. e^v_{t-n_theta}. Rows t = max(n_theta, 1) .. L-2 are used,
/// so only complete histories enter the fit and the final input sample is
/// unused.
inline VrftResult vrft_fit(const ReferenceModel& M, const Matrix& u_lin, const Matrix& y, int n_theta) {
  require(n_theta >= 0, ErrorCode::Config, "n_theta must be >= 0");
  require(u_lin.rows() == y.rows(), ErrorCode::Shape, "u_lin and y must be aligned");
  require(y.rows() >= n_theta + 2, ErrorCode::InsufficientData,
          "need at least n_theta + 2 samples for VRFT (have " + std::to_string(y.rows()) + ")");
  const Matrix rv = virtual_reference(M, y);
  const Matrix ev = rv - y.topRows(rv.rows());
  const int n_u = static_cast<int>(u_lin.cols()), n_y = static_cast<int>(y.cols());
  const int first = std::max(n_theta, 1);
  const int last = static_cast<int>(y.rows()) - 2;
  const int rows = last - first + 1;
  const int p = n_y * (n_theta + 1);
  require(rows >= 1, ErrorCode::InsufficientData, "no complete VRFT rows in the data");
  Matrix E(rows, p), dU(rows, n_u);
  for (int r = 0; r < rows; ++r) {
    const int t = first + r;
    for (int i = 0; i <= n_theta; ++i) E.block(r, i * n_y, 1, n_y) = ev.row(t - i);
    dU.row(r) = u_lin.row(t) - u_lin.row(t - 1);
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(E);
  require(qr.rank() == p, ErrorCode::SingularFit,
          "virtual-error regressor is rank deficient (rank " + std::to_string(qr.rank()) + " of " +
              std::to_string(p) + "); use richer data or a smaller n_theta");
  const Matrix X = qr.solve(dU);  // p x n_u; column j holds the j-th rows of B_0..B_n
  VrftResult res;
  res.gains = PidGains::zero(n_u, n_y, n_theta);
  for (int i = 0; i <= n_theta; ++i) res.gains.B[i] = X.block(i * n_y, 0, n_y, n_u).transpose();
  res.j_vr = (dU - E * X).squaredNorm();
  res.rows = rows;
  return res;
}

inline nlohmann::json to_json(const PidGains& g) {
  nlohmann::json B = nlohmann::json::array();
  for (const auto& b : g.B) {
    nlohmann::json m = nlohmann::json::array();
    for (Eigen::Index r = 0; r < b.rows(); ++r) {
      std::vector<double> row(b.cols());
      for (Eigen::Index c = 0; c < b.cols(); ++c) row[c] = b(r, c);
      m.push_back(row);
    }
    B.push_back(m);
  }
  return {{"n_theta", g.n_theta}, {"B", B}};
}

inline PidGains pid_from_json(const nlohmann::json& j) {
  try {
    PidGains g;
    g.n_theta = j.at("n_theta").get<int>();
    for (const auto& m : j.at("B")) {
      auto rows = m.get<std::vector<std::vector<double>>>();
      require(!rows.empty() && !rows.front().empty(), ErrorCode::Schema, "empty gain matrix");
      Matrix b(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        require(rows[r].size() == rows.front().size(), ErrorCode::Schema, "ragged gain matrix");
        for (std::size_t c = 0; c < rows[r].size(); ++c) b(r, c) = rows[r][c];
      }
      g.B.push_back(std::move(b));
    }
    g.validate();
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Schema, std::string("PID JSON: ") + e.what());
  }
}

}  // namespace d2ibc
