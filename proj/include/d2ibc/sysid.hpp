#pragma once

// Polynomial NARX one-step predictor: basis enumeration, least-squares fit,
// prediction and JSON serialization.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "d2ibc/dataset.hpp"

namespace d2ibc {

using Exponent = std::vector<int>;

/// Monomials of total degree <= degree in m variables, graded and
/// descending-lexicographic within each degree (x1^2, x1 x2, x2^2, ...).
struct PolyBasis {
  int m = 0;
  int degree = 0;
  std::vector<Exponent> exponents;

  int size() const { return static_cast<int>(exponents.size()); }
};

inline constexpr long long kDefaultBasisCap = 20000;

namespace detail {

// C(m + d, d), saturating at cap + 1.
inline long long basis_count(int m, int d, long long cap) {
  long double c = 1.0L;
  for (int k = 1; k <= d; ++k) {
    c = c * static_cast<long double>(m + k) / static_cast<long double>(k);
    if (c > static_cast<long double>(cap)) return cap + 1;
  }
  return static_cast<long long>(c + 0.5L);
}

inline void enumerate_exact(int pos, int remaining, Exponent& cur, std::vector<Exponent>& out) {
  const int m = static_cast<int>(cur.size());
  if (pos == m - 1) {
    cur[pos] = remaining;
    out.push_back(cur);
    cur[pos] = 0;
    return;
  }
  for (int k = remaining; k >= 0; --k) {
    cur[pos] = k;
    enumerate_exact(pos + 1, remaining - k, cur, out);
  }
  cur[pos] = 0;
}

}  // namespace detail

inline PolyBasis enumerate_monomials(int m, int degree, long long cap = kDefaultBasisCap) {
  require(m >= 1 && degree >= 0, ErrorCode::Shape, "need m >= 1 and degree >= 0");
  long long count = detail::basis_count(m, degree, cap);
  require(count <= cap, ErrorCode::BasisTooLarge,
          "C(m+d,d) exceeds the basis cap of " + std::to_string(cap) + " (m=" + std::to_string(m) +
              ", d=" + std::to_string(degree) + ")");
  PolyBasis b{m, degree, {}};
  b.exponents.reserve(static_cast<std::size_t>(count));
  Exponent cur(m, 0);
  for (int d = 0; d <= degree; ++d) detail::enumerate_exact(0, d, cur, b.exponents);
  return b;
}

/// Past outputs y_t..y_{t-n+1} (rows of y_hist, most recent first) and past
/// inputs u_{t-1}..u_{t-n+1} (rows of u_hist).
struct RegressorWindow {
  Matrix y_hist;
  Matrix u_hist;

  static RegressorWindow zeros(int n, int n_y, int n_u) {
    return {Matrix::Zero(n, n_y), Matrix::Zero(n - 1, n_u)};
  }
};

/// Flattened model argument (y_t..y_{t-n+1}, u_{t-1}..u_{t-n+1}, u_t).
inline Vector flatten_argument(const RegressorWindow& q, const Eigen::Ref<const Vector>& u) {
  const auto ny = q.y_hist.cols(), nu = u.size();
  Vector x(q.y_hist.size() + q.u_hist.rows() * nu + nu);
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < q.y_hist.rows(); ++r)
    for (Eigen::Index c = 0; c < ny; ++c) x[k++] = q.y_hist(r, c);
  for (Eigen::Index r = 0; r < q.u_hist.rows(); ++r)
    for (Eigen::Index c = 0; c < q.u_hist.cols(); ++c) x[k++] = q.u_hist(r, c);
  for (Eigen::Index c = 0; c < nu; ++c) x[k++] = u[c];
  return x;
}

inline Vector eval_basis_flat(const PolyBasis& b, const Eigen::Ref<const Vector>& x) {
  require(x.size() == b.m, ErrorCode::Shape,
          "argument has " + std::to_string(x.size()) + " entries, basis expects " + std::to_string(b.m));
  // powers(i, k) = x_i^k, with 0^0 = 1
  Matrix powers(b.m, b.degree + 1);
  for (int i = 0; i < b.m; ++i) {
    powers(i, 0) = 1.0;
    for (int k = 1; k <= b.degree; ++k) powers(i, k) = powers(i, k - 1) * x[i];
  }
  Vector phi(b.size());
  for (int k = 0; k < b.size(); ++k) {
    double v = 1.0;
    const auto& e = b.exponents[k];
    for (int i = 0; i < b.m; ++i)
      if (e[i] != 0) v *= powers(i, e[i]);
    phi[k] = v;
  }
  return phi;
}

inline Vector eval_basis(const PolyBasis& b, const RegressorWindow& q, const Eigen::Ref<const Vector>& u) {
  return eval_basis_flat(b, flatten_argument(q, u));
}

struct PolyModel {
  int n = 1;
  int n_u = 1;
  int n_y = 1;
  PolyBasis basis;
  Matrix alpha;  // N x n_y, column i predicts output i
  double ridge = 0.0;

  int degree() const { return basis.degree; }

  void validate() const {
    require(n >= 1 && n_u >= 1 && n_y >= 1, ErrorCode::Shape, "model dimensions must be positive");
    require(basis.m == n * n_y + n * n_u, ErrorCode::Shape, "basis dimension does not match n*(n_y+n_u)");
    require(alpha.rows() == basis.size() && alpha.cols() == n_y, ErrorCode::Shape,
            "alpha must be N x n_y");
    require(alpha.allFinite(), ErrorCode::NumericRange, "alpha has non-finite entries");
  }
};

inline void check_window(const PolyModel& f, const RegressorWindow& q, Eigen::Index u_size) {
  require(q.y_hist.rows() == f.n && q.y_hist.cols() == f.n_y, ErrorCode::Shape, "y window must be n x n_y");
  require(q.u_hist.rows() == f.n - 1 && (f.n == 1 || q.u_hist.cols() == f.n_u), ErrorCode::Shape,
          "u window must be (n-1) x n_u");
  require(u_size == f.n_u, ErrorCode::Shape, "input must have n_u entries");
}

inline Vector predict(const PolyModel& f, const RegressorWindow& q, const Eigen::Ref<const Vector>& u) {
  check_window(f, q, u.size());
  Vector phi = eval_basis(f.basis, q, u);
  require(phi.allFinite(), ErrorCode::NumericRange, "basis evaluation overflowed");
  Vector y = f.alpha.transpose() * phi;
  require(y.allFinite(), ErrorCode::NumericRange, "prediction is not finite");
  return y;
}

/// Window ending at record t of a dataset (t >= n-1).
inline RegressorWindow window_at(const DataSet& d, int t, int n) {
  RegressorWindow q{Matrix(n, d.n_y()), Matrix(n - 1, d.n_u())};
  for (int k = 0; k < n; ++k) q.y_hist.row(k) = d.y().row(t - k);
  for (int k = 0; k < n - 1; ++k) q.u_hist.row(k) = d.u().row(t - 1 - k);
  return q;
}

struct ModelFit {
  PolyModel model;
  Vector rms_residual;  // per output channel, one-step on the training rows
  /// |R_11| / |R_kk| of the pivoted QR of the regressor matrix (k = rank);
  /// infinite when rank deficient. A large value flags poor excitation.
  double regressor_condition = 0.0;
};

inline ModelFit fit_model(const DataSet& d, int n, int degree, double ridge,
                          long long basis_cap = kDefaultBasisCap) {
  require(n >= 1, ErrorCode::Shape, "model order n must be >= 1");
  require(ridge >= 0.0, ErrorCode::Bound, "ridge must be >= 0");
  require(d.L() > n, ErrorCode::InsufficientData,
          "need L > n records (L=" + std::to_string(d.L()) + ", n=" + std::to_string(n) + ")");
  const int m = n * d.n_y() + n * d.n_u();
  PolyModel f{n, d.n_u(), d.n_y(), enumerate_monomials(m, degree, basis_cap), Matrix(), ridge};
  const int N = f.basis.size();
  const int rows = d.L() - n;
  Matrix phi(rows, N), target(rows, d.n_y());
  for (int r = 0; r < rows; ++r) {
    const int t = n - 1 + r;
    phi.row(r) = eval_basis(f.basis, window_at(d, t, n), d.u().row(t).transpose()).transpose();
    target.row(r) = d.y().row(t + 1);
  }
  require(phi.allFinite(), ErrorCode::NumericRange, "regressor matrix is not finite");
  Eigen::ColPivHouseholderQR<Matrix> qr(phi);
  const auto rank = qr.rank();
  const double cond = rank == N ? std::abs(qr.matrixR()(0, 0)) / std::abs(qr.matrixR()(rank - 1, rank - 1))
                                : std::numeric_limits<double>::infinity();
  if (ridge > 0.0) {
    Matrix normal = phi.transpose() * phi;
    normal.diagonal().array() += ridge;
    Eigen::LLT<Matrix> llt(normal);
    require(llt.info() == Eigen::Success, ErrorCode::SingularFit, "normal matrix is not positive definite");
    f.alpha = llt.solve(phi.transpose() * target);
  } else {
    require(rows >= N && rank == N, ErrorCode::SingularFit,
            "regressor matrix is rank deficient (rank " + std::to_string(rank) + " of " + std::to_string(N) +
                "); use ridge > 0 or richer excitation");
    f.alpha = qr.solve(target);
  }
  require(f.alpha.allFinite(), ErrorCode::NumericRange, "fitted coefficients are not finite");
  Matrix resid = target - phi * f.alpha;
  Vector rms = (resid.colwise().squaredNorm() / static_cast<double>(rows)).cwiseSqrt().transpose();
  return {std::move(f), std::move(rms), cond};
}

inline nlohmann::json to_json(const PolyModel& f) {
  nlohmann::json exps = nlohmann::json::array();
  for (const auto& e : f.basis.exponents) exps.push_back(e);
  nlohmann::json alpha = nlohmann::json::array();
  for (Eigen::Index k = 0; k < f.alpha.rows(); ++k) {
    std::vector<double> row(f.alpha.cols());
    for (Eigen::Index i = 0; i < f.alpha.cols(); ++i) row[i] = f.alpha(k, i);
    alpha.push_back(row);
  }
  return {{"n", f.n},          {"n_u", f.n_u}, {"n_y", f.n_y},         {"degree", f.basis.degree},
          {"exponents", exps}, {"alpha", alpha}, {"ridge", f.ridge}};
}

inline PolyModel model_from_json(const nlohmann::json& j) {
  try {
    PolyModel f;
    f.n = j.at("n").get<int>();
    f.n_u = j.at("n_u").get<int>();
    f.n_y = j.at("n_y").get<int>();
    f.ridge = j.at("ridge").get<double>();
    f.basis.degree = j.at("degree").get<int>();
    f.basis.m = f.n * (f.n_y + f.n_u);
    for (const auto& e : j.at("exponents")) {
      auto ex = e.get<Exponent>();
      require(static_cast<int>(ex.size()) == f.basis.m, ErrorCode::Schema, "exponent length != m");
      f.basis.exponents.push_back(std::move(ex));
    }
    const auto& a = j.at("alpha");
    f.alpha.resize(static_cast<Eigen::Index>(a.size()), f.n_y);
    for (std::size_t k = 0; k < a.size(); ++k) {
      require(a[k].size() == static_cast<std::size_t>(f.n_y), ErrorCode::Schema, "alpha row length != n_y");
      for (int i = 0; i < f.n_y; ++i) f.alpha(static_cast<Eigen::Index>(k), i) = a[k][i].get<double>();
    }
    f.validate();
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Schema, std::string("model JSON: ") + e.what());
  }
}

}  // namespace d2ibc
