#pragma once

// Empirical finite-gain stability certificate for the closed loop: sampled
// Lipschitz and gain constants, the tracking error bound e_bar, assumption
// checks, and verification of traces against the bound.

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "d2ibc/invctrl.hpp"
#include "d2ibc/linctrl.hpp"
#include "d2ibc/simloop.hpp"
#include "d2ibc/simplex.hpp"

namespace d2ibc {

/// Symmetric box [-bound, bound]^dim.
struct Box {
  int dim = 1;
  double bound = 1.0;
};

struct GridSpec {
  int points = 33;                 // per dimension
  std::uint64_t seed = 0;          // used only when a grid has to be subsampled
  long long budget = 20'000'000;   // max difference quotients / evaluations
};

namespace detail {

inline double grid_coord(int idx, int points, double bound) {
  if (points <= 1 || bound == 0.0) return 0.0;
  return -bound + 2.0 * bound * idx / (points - 1);
}

inline long long ipow(long long base, int e, long long cap) {
  long long r = 1;
  for (int k = 0; k < e; ++k) {
    if (r > cap / std::max(base, 1LL)) return cap + 1;
    r *= base;
  }
  return r;
}

inline Vector grid_point(long long linear, int dim, int points, double bound) {
  Vector x(dim);
  for (int k = dim - 1; k >= 0; --k) {
    x[k] = grid_coord(static_cast<int>(linear % points), points, bound);
    linear /= points;
  }
  return x;
}

// Grid points of a box, or a seeded subsample of them when there are more than `cap`.
inline std::vector<Vector> box_points(const Box& box, int points, long long cap, Rng& rng) {
  const int p = box.bound == 0.0 ? 1 : points;
  const long long total = ipow(p, box.dim, std::numeric_limits<long long>::max() / 4);
  std::vector<Vector> out;
  if (total <= cap) {
    out.reserve(static_cast<std::size_t>(total));
    for (long long i = 0; i < total; ++i) out.push_back(grid_point(i, box.dim, p, box.bound));
    return out;
  }
  out.reserve(static_cast<std::size_t>(cap));
  for (long long i = 0; i < cap; ++i) {
    Vector x(box.dim);
    for (int k = 0; k < box.dim; ++k) x[k] = grid_coord(static_cast<int>(rng.below(p)), p, box.bound);
    out.push_back(std::move(x));
  }
  return out;
}

inline Matrix unflatten(const Eigen::Ref<const Vector>& flat, int rows, int cols) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = flat[r * cols + c];
  return m;
}

}  // namespace detail

/// Sampled Lipschitz constant of delta in its first (output window)
/// argument, inflated by safety_factor. Pairs are taken along every grid
/// direction in {-1,0,1}^dim at power-of-two strides, so grids with
/// 2^k + 1 points per dimension nest under refinement.
template <class Residue>
double estimate_gamma_y(const Residue& delta, const Box& y_box, const Box& u_box, const GridSpec& grid,
                        double safety_factor = 1.2) {
  require(y_box.dim >= 1 && y_box.bound > 0.0, ErrorCode::DegenerateDomain, "output box has zero volume");
  require(grid.points >= 2, ErrorCode::Config, "Lipschitz grid needs >= 2 points per dimension");
  require(safety_factor >= 1.0, ErrorCode::Config, "safety_factor must be >= 1");
  const int dy = y_box.dim, p = grid.points;
  const long long gy = detail::ipow(p, dy, 2'000'000);
  require(gy <= 2'000'000, ErrorCode::Budget, "output grid too large; lower the grid density");

  // Half of the stencil {-1,0,1}^dy \ {0}: first non-zero entry positive.
  std::vector<std::vector<int>> dirs;
  const long long n_dirs = detail::ipow(3, dy, 1'000'000);
  for (long long code = 0; code < n_dirs; ++code) {
    std::vector<int> d(dy);
    long long c = code;
    for (int k = dy - 1; k >= 0; --k) {
      d[k] = static_cast<int>(c % 3) - 1;
      c /= 3;
    }
    int first = 0;
    for (int v : d)
      if (v != 0) {
        first = v;
        break;
      }
    if (first > 0) dirs.push_back(std::move(d));
  }
  std::vector<int> strides;
  for (int s = 1; s < p; s *= 2) strides.push_back(s);

  const long long per_u = gy * static_cast<long long>(dirs.size() * strides.size());
  Rng rng(grid.seed);
  const auto u_points = detail::box_points(u_box, p, std::max(1LL, grid.budget / std::max(per_u, 1LL)), rng);
  const double h = 2.0 * y_box.bound / (p - 1);

  std::vector<Vector> ys(static_cast<std::size_t>(gy));
  for (long long i = 0; i < gy; ++i) ys[i] = detail::grid_point(i, dy, p, y_box.bound);

  double best = 0.0;
  std::vector<Vector> values(static_cast<std::size_t>(gy));
  std::vector<int> idx(dy);
  for (const auto& u : u_points) {
    for (long long i = 0; i < gy; ++i) values[i] = delta(ys[i], u);
    for (long long i = 0; i < gy; ++i) {
      long long c = i;
      for (int k = dy - 1; k >= 0; --k) {
        idx[k] = static_cast<int>(c % p);
        c /= p;
      }
      for (int s : strides)
        for (const auto& d : dirs) {
          long long j = 0;
          bool inside = true;
          for (int k = 0; k < dy && inside; ++k) {
            const int v = idx[k] + s * d[k];
            inside = v >= 0 && v < p;
            j = j * p + v;
          }
          if (!inside) continue;
          const double q = inf_norm(values[i] - values[j]) / (s * h);
          best = std::max(best, q);
        }
    }
  }
  return safety_factor * best;
}

/// max over the input grid of ||delta(0, u)||_inf.
template <class Residue>
double estimate_delta_bar(const Residue& delta, int y_dim, const Box& u_box, const GridSpec& grid) {
  Rng rng(grid.seed);
  const Vector zero = Vector::Zero(y_dim);
  double best = 0.0;
  for (const auto& u : detail::box_points(u_box, grid.points, grid.budget, rng))
    best = std::max(best, inf_norm(delta(zero, u)));
  return best;
}

/// Sampled disturbance gain max ||g(y,u,xi) - g(y,u,0)|| / ||xi|| over the
/// plant's boxes, inflated by safety_factor.
inline double estimate_gamma_xi(const PlantSpec& p, double y_bar, const GridSpec& grid, double safety_factor = 1.2) {
  p.validate();
  if (p.xi_bar == 0.0 || p.n_xi == 0) return 0.0;
  require(safety_factor >= 1.0, ErrorCode::Config, "safety_factor must be >= 1");
  const int dy = p.n * p.n_y, du = p.n * p.n_u, dx = p.n * p.n_xi;
  Rng rng(grid.seed);
  const long long cap = std::max(1LL, std::min(grid.budget, 200'000LL));
  const auto pts = detail::box_points({dy + du + dx, 1.0}, grid.points, cap, rng);
  const Matrix zero_xi = Matrix::Zero(p.n, p.n_xi);
  double best = 0.0;
  for (const auto& z : pts) {
    const Vector y = z.head(dy) * y_bar, u = z.segment(dy, du) * p.u_bar, xi = z.tail(dx) * p.xi_bar;
    const double nxi = inf_norm(xi);
    if (nxi == 0.0) continue;
    const Matrix yw = detail::unflatten(y, p.n, p.n_y), uw = detail::unflatten(u, p.n, p.n_u);
    const Vector g1 = plant_step(p, yw, uw, detail::unflatten(xi, p.n, p.n_xi));
    const Vector g0 = plant_step(p, yw, uw, zero_xi);
    best = std::max(best, inf_norm(g1 - g0) / nxi);
  }
  return safety_factor * best;
}

/// Residue Delta(y, u) = g(y, u, 0) - f(y, u) on flattened windows (most
/// recent sample first). Plant and model must share the order n.
inline auto make_residue(const PlantSpec& p, const PolyModel& f) {
  require(p.n == f.n && p.n_y == f.n_y && p.n_u == f.n_u, ErrorCode::Shape,
          "certification needs plant and model with the same order and dimensions");
  return [&p, &f](const Vector& y_flat, const Vector& u_flat) -> Vector {
    const Matrix yw = detail::unflatten(y_flat, p.n, p.n_y);
    const Matrix uw = detail::unflatten(u_flat, p.n, p.n_u);
    const Vector g = plant_step(p, yw, uw, Matrix::Zero(p.n, p.n_xi));
    RegressorWindow q{yw, uw.bottomRows(p.n - 1)};
    return g - predict(f, q, uw.row(0).transpose());
  };
}

/// Operating points (y window, r window, r_{t+1}, past controller outputs)
/// for fitting the predicted-error bound.
struct OperatingPointSampler {
  double y_bar = 1.0;
  double r_bar = 1.0;
  double u_bar = 1.0;
  double ulin_bar = -1.0;  // bound on past linear commands; negative means u_bar
  int samples = 2000;
  std::uint64_t seed = 0;
  int max_corner_dims = 12;  // enumerate all box corners up to this dimension
};

struct InversionConstants {
  double Gamma_y = 0.0;
  double Gamma_s = 0.0;
  double Lambda_e = 0.0;
  int samples = 0;
  double max_e_hat = 0.0;
};

inline InversionConstants estimate_inversion_constants(const PolyModel& f, const InversionConfig& cfg_inv,
                                                       const PidGains& g_pid, const OperatingPointSampler& s) {
  g_pid.validate();
  require(s.samples >= 0, ErrorCode::Config, "sample count must be >= 0");
  require(g_pid.n_u() == f.n_u && g_pid.n_y() == f.n_y, ErrorCode::Shape, "PID and model dimensions disagree");
  const int ny = f.n_y, nu = f.n_u;
  const int Lw = std::max(f.n, g_pid.n_theta + 1);
  const int Hu = std::max(f.n - 1, 1);
  const double ulin_bar = s.ulin_bar < 0.0 ? s.u_bar : s.ulin_bar;
  const int dims = 2 * Lw * ny + ny + 2 * Hu * nu;

  // Unit-box coordinates: [y window | r window | r_next | u_nl hist | u_lin hist].
  auto evaluate = [&](const Vector& z, double& a, double& b, double& h) {
    Eigen::Index k = 0;
    Matrix yw(Lw, ny), rw(Lw, ny), unl(Hu, nu), ulin(Hu, nu);
    for (int r = 0; r < Lw; ++r)
      for (int c = 0; c < ny; ++c) yw(r, c) = s.y_bar * z[k++];
    for (int r = 0; r < Lw; ++r)
      for (int c = 0; c < ny; ++c) rw(r, c) = s.r_bar * z[k++];
    Vector r_next(ny);
    for (int c = 0; c < ny; ++c) r_next[c] = s.r_bar * z[k++];
    for (int r = 0; r < Hu; ++r)
      for (int c = 0; c < nu; ++c) unl(r, c) = s.u_bar * z[k++];
    for (int r = 0; r < Hu; ++r)
      for (int c = 0; c < nu; ++c) ulin(r, c) = ulin_bar * z[k++];
    Matrix u_past(Hu, nu);
    for (int r = 0; r < Hu; ++r) u_past.row(r) = saturate((unl.row(r) + ulin.row(r)).transpose(), s.u_bar).transpose();

    RegressorWindow q{yw.topRows(f.n), u_past.topRows(f.n - 1)};
    const Vector u_prev = u_past.row(0).transpose();
    const Vector u_nl = solve_inversion(f, q, r_next, u_prev, s.u_bar, cfg_inv).u_nl;
    PidState st = PidState::zero(nu, ny, g_pid.n_theta);
    st.u_lin_prev = ulin.row(0).transpose();
    for (int i = 0; i < g_pid.n_theta; ++i) st.e_hist[i] = (rw.row(i + 1) - yw.row(i + 1)).transpose();
    const Vector e_t = (rw.row(0) - yw.row(0)).transpose();
    const Vector u_lin = pid_step(g_pid, st, e_t).first;
    const Vector u_t = saturate(u_nl + u_lin, s.u_bar);
    a = inf_norm(yw);
    b = std::max(inf_norm(rw), inf_norm(r_next));
    h = inf_norm(predicted_error(f, q, r_next, u_t));
  };

  std::vector<Vector> points;
  Rng rng(s.seed);
  points.push_back(Vector::Zero(dims));
  if (dims <= s.max_corner_dims) {
    for (long long c = 0; c < (1LL << dims); ++c) {
      Vector z(dims);
      for (int k = 0; k < dims; ++k) z[k] = (c >> k) & 1 ? 1.0 : -1.0;
      points.push_back(std::move(z));
    }
  } else {
    for (int i = 0; i < s.samples / 4; ++i) {
      Vector z(dims);
      for (int k = 0; k < dims; ++k) z[k] = rng.below(2) ? 1.0 : -1.0;
      points.push_back(std::move(z));
    }
  }
  for (int i = 0; i < s.samples; ++i) {
    Vector z(dims);
    for (int k = 0; k < dims; ++k) z[k] = rng.uniform(-1.0, 1.0);
    points.push_back(std::move(z));
  }
  require(!points.empty(), ErrorCode::EmptySamples, "no operating points to sample");

  const int K = static_cast<int>(points.size());
  Vector a(K), b(K), h(K);
  for (int k = 0; k < K; ++k) evaluate(points[k], a[k], b[k], h[k]);

  // min w'x s.t. a_k G_y + b_k G_s + L_e >= h_k, x >= 0, solved through its
  // dual (3 rows, K columns); the primal is read off the dual multipliers.
  const Vector w = (Vector(3) << 1.0, s.r_bar > 0.0 ? 0.1 / s.r_bar : 0.1, 0.01).finished();
  LinearProgram dual;
  dual.A.resize(3, K);
  dual.A.row(0) = a.transpose();
  dual.A.row(1) = b.transpose();
  dual.A.row(2).setOnes();
  dual.b = w;
  dual.sense.assign(3, Sense::LessEqual);
  dual.c = -h;
  const LpSolution sol = solve_lp(dual);
  require(sol.status == LpStatus::Optimal, ErrorCode::EmptySamples, "inversion-constant LP did not solve");
  Vector x(3);
  for (int i = 0; i < 3; ++i) x[i] = -sol.duals[i] > 0.0 ? -sol.duals[i] : 0.0;
  const double violation = (h - a * x[0] - b * x[1] - Vector::Constant(K, x[2])).maxCoeff();
  if (violation > 0.0) x[2] += violation;

  InversionConstants out;
  out.Gamma_y = x[0];
  out.Gamma_s = x[1];
  out.Lambda_e = x[2];
  out.samples = K;
  out.max_e_hat = h.maxCoeff();
  return out;
}

struct StabilityConstants {
  // primaries
  double gamma_y = 0.0;
  double gamma_xi = 0.0;
  double delta_bar = 0.0;
  double Gamma_y = 0.0;
  double Gamma_s = 0.0;
  double Lambda_e = 0.0;
  double r_bar = 0.0;
  double xi_bar = 0.0;
  double safety_factor = 1.2;
  // derived
  double lambda_y = 0.0;
  double lambda_r = 0.0;
  double Lambda_g = 0.0;
  double w = 0.0;
  double e_bar = 0.0;
  double Gamma_r = 0.0;
  double Gamma_xi = 0.0;
  double Lambda = 0.0;
};

/// Fills the derived constants and returns e_bar. Throws when
/// lambda_y = Gamma_y + gamma_y >= 1 (model accuracy / effective inversion).
inline double compute_error_bound(StabilityConstants& c, double r_bar, double xi_bar) {
  c.r_bar = r_bar;
  c.xi_bar = xi_bar;
  c.lambda_y = c.Gamma_y + c.gamma_y;
  c.lambda_r = c.lambda_y + c.Gamma_s;
  c.Lambda_g = c.Lambda_e + c.delta_bar;
  c.w = c.lambda_r * r_bar + c.gamma_xi * xi_bar + c.Lambda_g;
  if (!(c.lambda_y < 1.0)) {
    c.e_bar = c.Gamma_r = c.Gamma_xi = c.Lambda = std::numeric_limits<double>::infinity();
    throw Error(ErrorCode::AssumptionViolation,
                "lambda_y = Gamma_y + gamma_y >= 1; model accuracy (gamma_y < 1) or effective inversion "
                "(Gamma_y <= 1 - gamma_y) fails");
  }
  const double inv = 1.0 / (1.0 - c.lambda_y);
  c.e_bar = inv * (c.lambda_r * r_bar + c.gamma_xi * xi_bar + c.Lambda_g);
  c.Gamma_r = 1.0 + c.lambda_r * inv;
  c.Gamma_xi = c.gamma_xi * inv;
  c.Lambda = c.Lambda_g * inv;
  return c.e_bar;
}

enum class LipschitzVerdict { HoldsByConstruction, SampledFinite };

struct AssumptionReport {
  LipschitzVerdict a1 = LipschitzVerdict::HoldsByConstruction;
  bool a2 = false;
  double a2_margin = 0.0;  // 1 - gamma_y
  bool a3 = false;
  double a3_margin = 0.0;  // (1 - gamma_y) - Gamma_y
  bool a4 = false;
  double a4_margin = 0.0;  // y_bar - (r_bar + e_bar)
  bool verdict = false;
};

inline AssumptionReport check_assumptions(const StabilityConstants& c, double y_bar, double r_bar,
                                          LipschitzVerdict a1 = LipschitzVerdict::HoldsByConstruction) {
  AssumptionReport rep;
  rep.a1 = a1;
  rep.a2_margin = 1.0 - c.gamma_y;
  rep.a2 = c.gamma_y < 1.0;
  rep.a3_margin = (1.0 - c.gamma_y) - c.Gamma_y;
  rep.a3 = c.Gamma_y <= 1.0 - c.gamma_y;
  rep.a4_margin = y_bar - (r_bar + c.e_bar);
  rep.a4 = std::isfinite(c.e_bar) && y_bar >= r_bar + c.e_bar;
  rep.verdict = rep.a2 && rep.a3 && rep.a4;
  return rep;
}

struct BoundCheck {
  std::string trace_id;
  double max_error = 0.0;
  double e_bar = 0.0;
  bool satisfied = false;
};

inline BoundCheck verify_tracking_bound(const SimulationTrace& tr, double e_bar, std::string trace_id = "trace") {
  require(tr.T() >= 1, ErrorCode::EmptyDataset, "trace is empty");
  BoundCheck bc{std::move(trace_id), tr.e_inf(), e_bar, false};
  bc.satisfied = bc.max_error <= e_bar;
  return bc;
}

enum class RecursionFlag { Holds, Violated, NotApplicable };

/// For t = 0..T-2: does ||e_{t+1}|| <= lambda_y * max_{k<n} ||e_{t-k}|| + w
/// hold? Steps whose output window leaves [-y_bar, y_bar] are not applicable.
/// Errors before t = 0 are zero since the reference window starts at y_0.
inline std::vector<RecursionFlag> check_error_recursion(const SimulationTrace& tr, double lambda_y, double w, int n,
                                                        double y_bar) {
  require(n >= 1, ErrorCode::Config, "window length n must be >= 1");
  const int T = tr.T();
  const int H = static_cast<int>(tr.y_init.rows());
  std::vector<RecursionFlag> flags;
  flags.reserve(static_cast<std::size_t>(std::max(T - 1, 0)));
  for (int t = 0; t + 1 < T; ++t) {
    bool inside = true;
    double e_win = 0.0;
    for (int k = 0; k < n; ++k) {
      const int s = t - k;
      const double y_norm = s >= 0 ? inf_norm(tr.y.row(s)) : inf_norm(tr.y_init.row(std::min(-s, H - 1)));
      inside = inside && y_norm <= y_bar;
      if (s >= 0) e_win = std::max(e_win, inf_norm(tr.e.row(s)));
    }
    if (!inside) {
      flags.push_back(RecursionFlag::NotApplicable);
      continue;
    }
    flags.push_back(inf_norm(tr.e.row(t + 1)) <= lambda_y * e_win + w ? RecursionFlag::Holds : RecursionFlag::Violated);
  }
  return flags;
}

struct FiniteGainCheck {
  double y_norm = 0.0;
  double bound = 0.0;
  bool holds = false;
};

/// ||y|| <= Gamma_r ||r|| + Gamma_xi ||xi|| + Lambda on a trace.
inline FiniteGainCheck check_finite_gain(const SimulationTrace& tr, const StabilityConstants& c) {
  FiniteGainCheck fg;
  fg.y_norm = std::max(inf_norm(tr.y), inf_norm(tr.y_init));
  fg.bound = c.Gamma_r * std::max(inf_norm(tr.r), inf_norm(tr.y_init)) + c.Gamma_xi * inf_norm(tr.xi) + c.Lambda;
  fg.holds = fg.y_norm <= fg.bound;
  return fg;
}

struct CertifyOptions {
  double safety_factor = 1.2;
  int lipschitz_grid = 33;
  int xi_grid = 9;
  int lp_samples = 2000;
  double ulin_bar = -1.0;  // negative: u_bar
  std::uint64_t seed = 0;
};

struct StabilityCertificate {
  StabilityConstants constants;
  AssumptionReport report;
  std::optional<BoundCheck> bound_check;
  CertifyOptions provenance;
  double y_bar = 0.0;
  int lp_samples_used = 0;
  std::string soundness_note =
      "Constants are sampled estimates, not formal bounds: Lipschitz and disturbance gains are grid maxima "
      "inflated by safety_factor, and the predicted-error bound is fitted on sampled operating points. The "
      "certificate is empirical.";
};

/// End-to-end certificate for a plant/model/controller triple on the boxes
/// Y = [-y_bar, y_bar], R = [-r_bar, r_bar], Xi = [-xi_bar, xi_bar].
inline StabilityCertificate certify(const PlantSpec& p, const PolyModel& f, const InversionConfig& cfg_inv,
                                    const PidGains& g_pid, double y_bar, double r_bar, double xi_bar,
                                    const CertifyOptions& opt = {}, const SimulationTrace* trace = nullptr) {
  p.validate();
  f.validate();
  require(r_bar >= 0.0 && r_bar <= y_bar, ErrorCode::Bound, "need 0 <= r_bar <= y_bar");
  require(xi_bar >= 0.0 && xi_bar <= p.xi_bar, ErrorCode::Bound, "xi_bar must lie in [0, plant xi_bar]");
  StabilityCertificate cert;
  cert.provenance = opt;
  cert.y_bar = y_bar;
  auto& c = cert.constants;
  c.safety_factor = opt.safety_factor;

  const auto delta = make_residue(p, f);
  const Box y_box{p.n * p.n_y, y_bar}, u_box{p.n * p.n_u, p.u_bar};
  const GridSpec lip{opt.lipschitz_grid, derive_seed(opt.seed, "gamma_y")};
  c.gamma_y = estimate_gamma_y(delta, y_box, u_box, lip, opt.safety_factor);
  PlantSpec disturbed = p;
  disturbed.xi_bar = xi_bar;
  c.gamma_xi = estimate_gamma_xi(disturbed, y_bar, {opt.xi_grid, derive_seed(opt.seed, "gamma_xi")}, opt.safety_factor);
  c.delta_bar = estimate_delta_bar(delta, y_box.dim, u_box, {opt.lipschitz_grid, derive_seed(opt.seed, "delta_bar")});

  OperatingPointSampler sampler;
  sampler.y_bar = y_bar;
  sampler.r_bar = r_bar;
  sampler.u_bar = p.u_bar;
  sampler.ulin_bar = opt.ulin_bar;
  sampler.samples = opt.lp_samples;
  sampler.seed = derive_seed(opt.seed, "operating_points");
  const auto inv = estimate_inversion_constants(f, cfg_inv, g_pid, sampler);
  c.Gamma_y = inv.Gamma_y;
  c.Gamma_s = inv.Gamma_s;
  c.Lambda_e = inv.Lambda_e;
  cert.lp_samples_used = inv.samples;

  try {
    compute_error_bound(c, r_bar, xi_bar);
  } catch (const Error& e) {
    log(LogLevel::Warn, e.what());
  }
  cert.report = check_assumptions(c, y_bar, r_bar,
                                   p.polynomial() ? LipschitzVerdict::HoldsByConstruction : LipschitzVerdict::SampledFinite);
  if (trace) cert.bound_check = verify_tracking_bound(*trace, c.e_bar);
  return cert;
}

namespace detail {
inline nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }
}  // namespace detail

inline nlohmann::json to_json(const StabilityCertificate& cert) {
  using detail::finite_or_null;
  const auto& c = cert.constants;
  const auto& r = cert.report;
  nlohmann::json j;
  j["schema_version"] = 1;
  j["constants"] = {{"gamma_y", c.gamma_y},   {"gamma_xi", c.gamma_xi},
                    {"delta_bar", c.delta_bar}, {"Gamma_y", c.Gamma_y},
                    {"Gamma_s", c.Gamma_s},   {"Lambda_e", c.Lambda_e},
                    {"lambda_y", c.lambda_y}, {"lambda_r", c.lambda_r},
                    {"Lambda_g", c.Lambda_g}, {"w", c.w},
                    {"e_bar", finite_or_null(c.e_bar)}, {"Gamma_r", finite_or_null(c.Gamma_r)},
                    {"Gamma_xi", finite_or_null(c.Gamma_xi)}, {"Lambda", finite_or_null(c.Lambda)},
                    {"r_bar", c.r_bar},       {"xi_bar", c.xi_bar},
                    {"y_bar", cert.y_bar},    {"safety_factor", c.safety_factor}};
  j["assumptions"] = {
      {"a1_lipschitz", r.a1 == LipschitzVerdict::HoldsByConstruction ? "holds-by-construction" : "sampled-finite"},
      {"a2_model_accuracy", {{"holds", r.a2}, {"margin", r.a2_margin}}},
      {"a3_inversion", {{"holds", r.a3}, {"margin", r.a3_margin}}},
      {"a4_domain", {{"holds", r.a4}, {"margin", finite_or_null(r.a4_margin)}}},
      {"verdict", r.verdict}};
  if (cert.bound_check) {
    const auto& b = *cert.bound_check;
    j["bound_check"] = {{"trace_id", b.trace_id},
                        {"max_error", b.max_error},
                        {"e_bar", finite_or_null(b.e_bar)},
                        {"satisfied", b.satisfied}};
  } else {
    j["bound_check"] = nullptr;
  }
  const auto& p = cert.provenance;
  j["provenance"] = {{"lipschitz_grid", p.lipschitz_grid}, {"xi_grid", p.xi_grid},
                     {"lp_samples", p.lp_samples},         {"lp_points", cert.lp_samples_used},
                     {"ulin_bar", p.ulin_bar},             {"seed", p.seed},
                     {"safety_factor", p.safety_factor}};
  j["soundness_note"] = cert.soundness_note;
  return j;
}

}  // namespace d2ibc
