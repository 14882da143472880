#pragma once

// Plants in regression form, a registry of synthetic test plants, open-loop
// data collection and the closed loop with both controllers in parallel.

#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "d2ibc/dataset.hpp"
#include "d2ibc/invctrl.hpp"
#include "d2ibc/linctrl.hpp"
#include "d2ibc/sysid.hpp"

namespace d2ibc {

/// coef * prod_k z_k^exps[k], contributing to output channel `out`.
struct PolyTerm {
  int out = 0;
  double coef = 0.0;
  Exponent exps;
};

namespace detail {

inline void add_terms(const std::vector<PolyTerm>& terms, const Vector& z, Vector& y) {
  for (const auto& term : terms) {
    double v = term.coef;
    for (std::size_t k = 0; k < term.exps.size(); ++k)
      if (term.exps[k] != 0) v *= std::pow(z[static_cast<Eigen::Index>(k)], term.exps[k]);
    y[term.out] += v;
  }
}

inline void append_rows(const Eigen::Ref<const Matrix>& m, Vector& z, Eigen::Index& k) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) z[k++] = m(r, c);
}

}  // namespace detail

/// Polynomial map over z = (y_t..y_{t-n+1}, u_t..u_{t-n+1}, xi_t..xi_{t-n+1}).
struct PolyNarx {
  std::vector<PolyTerm> terms;
};

/// g = f + Delta + G_xi xi_t, with Delta a polynomial over
/// z = (y_t..y_{t-n+1}, u_t..u_{t-n+1}).
struct ModelPlusResidue {
  PolyModel base;
  std::vector<PolyTerm> residue;
  Matrix xi_gain;  // n_y x n_xi
};

/// y_{t+1,i} = T_i(y_{t,i}) + (B u_t)_i + (G_xi xi_t)_i with T_i piecewise
/// linear through the knots (linear extrapolation outside).
struct CustomTable {
  Vector knots;      // strictly increasing
  Matrix values;     // knots x n_y
  Matrix input_gain; // n_y x n_u
  Matrix xi_gain;    // n_y x n_xi
};

enum class PlantKind { PolyNarx, ModelPlusResidue, CustomTable };

struct PlantSpec {
  std::string name;
  int n = 1;
  int n_u = 1;
  int n_y = 1;
  int n_xi = 1;
  double u_bar = 1.0;
  double xi_bar = 0.0;
  std::variant<PolyNarx, ModelPlusResidue, CustomTable> dynamics;

  PlantKind kind() const { return static_cast<PlantKind>(dynamics.index()); }
  bool polynomial() const { return kind() != PlantKind::CustomTable; }

  void validate() const {
    require(n >= 1 && n_u >= 1 && n_y >= 1 && n_xi >= 0, ErrorCode::Shape, "plant dimensions must be positive");
    require(u_bar >= 0.0 && xi_bar >= 0.0, ErrorCode::Bound, "u_bar and xi_bar must be non-negative");
    const int zy = n * n_y, zu = n * n_u, zx = n * n_xi;
    auto check_terms = [&](const std::vector<PolyTerm>& ts, int width) {
      for (const auto& t : ts)
        require(t.out >= 0 && t.out < n_y && static_cast<int>(t.exps.size()) == width, ErrorCode::Shape,
                "polynomial term has wrong output index or exponent length");
    };
    if (const auto* p = std::get_if<PolyNarx>(&dynamics)) {
      check_terms(p->terms, zy + zu + zx);
    } else if (const auto* m = std::get_if<ModelPlusResidue>(&dynamics)) {
      m->base.validate();
      require(m->base.n == n && m->base.n_u == n_u && m->base.n_y == n_y, ErrorCode::Shape,
              "base model dimensions must match the plant");
      check_terms(m->residue, zy + zu);
      require(m->xi_gain.rows() == n_y && m->xi_gain.cols() == n_xi, ErrorCode::Shape, "xi_gain must be n_y x n_xi");
    } else {
      const auto& c = std::get<CustomTable>(dynamics);
      require(c.knots.size() >= 2 && c.values.rows() == c.knots.size() && c.values.cols() == n_y, ErrorCode::Shape,
              "table needs >= 2 knots and knots x n_y values");
      for (Eigen::Index k = 1; k < c.knots.size(); ++k)
        require(c.knots[k] > c.knots[k - 1], ErrorCode::Config, "table knots must be strictly increasing");
      require(c.input_gain.rows() == n_y && c.input_gain.cols() == n_u, ErrorCode::Shape, "input_gain must be n_y x n_u");
      require(c.xi_gain.rows() == n_y && c.xi_gain.cols() == n_xi, ErrorCode::Shape, "xi_gain must be n_y x n_xi");
    }
  }
};

namespace detail {

inline double interp(const Vector& x, const Eigen::Ref<const Vector>& v, double q) {
  const Eigen::Index last = x.size() - 1;
  Eigen::Index k = 0;
  if (q >= x[last - 1]) {
    k = last - 1;
  } else {
    while (k + 1 < last && q >= x[k + 1]) ++k;
  }
  const double s = (q - x[k]) / (x[k + 1] - x[k]);
  return v[k] + s * (v[k + 1] - v[k]);
}

}  // namespace detail

/// One plant update. Windows are n x dim with the most recent sample first.
inline Vector plant_step(const PlantSpec& p, const Eigen::Ref<const Matrix>& y_win, const Eigen::Ref<const Matrix>& u_win,
                         const Eigen::Ref<const Matrix>& xi_win, int t = -1) {
  require(y_win.rows() == p.n && y_win.cols() == p.n_y && u_win.rows() == p.n && u_win.cols() == p.n_u &&
              xi_win.rows() == p.n && xi_win.cols() == p.n_xi,
          ErrorCode::Shape, "plant windows must be n x dim");
  Vector y = Vector::Zero(p.n_y);
  if (const auto* narx = std::get_if<PolyNarx>(&p.dynamics)) {
    Vector z(y_win.size() + u_win.size() + xi_win.size());
    Eigen::Index k = 0;
    detail::append_rows(y_win, z, k);
    detail::append_rows(u_win, z, k);
    detail::append_rows(xi_win, z, k);
    detail::add_terms(narx->terms, z, y);
  } else if (const auto* mr = std::get_if<ModelPlusResidue>(&p.dynamics)) {
    RegressorWindow q{y_win, u_win.bottomRows(p.n - 1)};
    y = predict(mr->base, q, u_win.row(0).transpose());
    Vector z(y_win.size() + u_win.size());
    Eigen::Index k = 0;
    detail::append_rows(y_win, z, k);
    detail::append_rows(u_win, z, k);
    detail::add_terms(mr->residue, z, y);
    if (p.n_xi > 0) y += mr->xi_gain * xi_win.row(0).transpose();
  } else {
    const auto& c = std::get<CustomTable>(p.dynamics);
    for (int i = 0; i < p.n_y; ++i) y[i] = detail::interp(c.knots, c.values.col(i), y_win(0, i));
    y += c.input_gain * u_win.row(0).transpose();
    if (p.n_xi > 0) y += c.xi_gain * xi_win.row(0).transpose();
  }
  if (!y.allFinite())
    throw Error(ErrorCode::PlantDivergence,
                "plant output is not finite" + (t >= 0 ? " at t=" + std::to_string(t) : std::string()));
  return y;
}

inline Vector saturate(const Eigen::Ref<const Vector>& u, double u_bar) {
  return u.cwiseMax(-u_bar).cwiseMin(u_bar);
}

// ---------------------------------------------------------------- registry

inline PolyModel linear_scalar_model(double a, double b) {
  PolyModel f{1, 1, 1, enumerate_monomials(2, 1), Matrix(3, 1), 0.0};
  f.alpha << 0.0, a, b;  // basis {1, y_t, u_t}
  return f;
}

/// y_{t+1} = 0.5 y_t + 0.3 u_t + 0.1 xi_t
inline PlantSpec scalar_linear_plant(double u_bar = 1.0, double xi_bar = 0.0) {
  PolyNarx g{{{0, 0.5, {1, 0, 0}}, {0, 0.3, {0, 1, 0}}, {0, 0.1, {0, 0, 1}}}};
  return {"scalar-linear", 1, 1, 1, 1, u_bar, xi_bar, g};
}

/// Two-input two-output quadratic NARX with cross couplings; z = (y1, y2, u1, u2, xi1, xi2).
inline PlantSpec mimo_poly_plant(double u_bar = 1.0, double xi_bar = 0.0) {
  PolyNarx g{{
      {0, 0.4, {1, 0, 0, 0, 0, 0}},
      {0, 0.1, {0, 1, 0, 0, 0, 0}},
      {0, 0.5, {0, 0, 1, 0, 0, 0}},
      {0, 0.1, {0, 0, 1, 1, 0, 0}},
      {0, 0.05, {1, 0, 0, 1, 0, 0}},
      {0, 0.05, {0, 0, 0, 0, 1, 0}},
      {1, -0.2, {1, 0, 0, 0, 0, 0}},
      {1, 0.3, {0, 1, 0, 0, 0, 0}},
      {1, 0.4, {0, 0, 0, 1, 0, 0}},
      {1, 0.1, {0, 0, 2, 0, 0, 0}},
      {1, -0.05, {1, 1, 0, 0, 0, 0}},
      {1, 0.05, {0, 0, 0, 0, 0, 1}},
  }};
  return {"mimo-poly", 1, 2, 2, 2, u_bar, xi_bar, g};
}

struct ResidueParams {
  double a = 0.5;     // base model pole
  double b = 1.0;     // base model input gain
  double c_y = 0.2;   // residue slope in y_t, the analytic gamma_y
  double c_0 = 0.0;   // residue offset
  double c_xi = 1.0;  // disturbance gain
};

/// Scalar plant g = f + c_y y_t + c_0 + c_xi xi_t around the exact base model
/// f = a y_t + b u_t.
inline PlantSpec model_plus_residue_plant(const ResidueParams& prm = {}, double u_bar = 1.0, double xi_bar = 0.0) {
  ModelPlusResidue g{linear_scalar_model(prm.a, prm.b), {}, Matrix::Constant(1, 1, prm.c_xi)};
  if (prm.c_y != 0.0) g.residue.push_back({0, prm.c_y, {1, 0}});
  if (prm.c_0 != 0.0) g.residue.push_back({0, prm.c_0, {0, 0}});
  return {"model-plus-residue", 1, 1, 1, 1, u_bar, xi_bar, g};
}

/// Registry lookup; `params` overrides numeric parameters of the entry.
inline PlantSpec registry_plant(const std::string& name, const std::map<std::string, double>& params = {}) {
  auto get = [&](const char* key, double def) {
    auto it = params.find(key);
    return it == params.end() ? def : it->second;
  };
  const double u_bar = get("u_bar", 1.0), xi_bar = get("xi_bar", 0.0);
  for (const auto& [key, _] : params) {
    static const char* allowed[] = {"u_bar", "xi_bar", "a", "b", "c_y", "c_0", "c_xi"};
    bool ok = std::any_of(std::begin(allowed), std::end(allowed), [&](const char* k) { return key == k; });
    require(ok, ErrorCode::Config, "unknown registry parameter '" + key + "'");
  }
  if (name == "scalar-linear") return scalar_linear_plant(u_bar, xi_bar);
  if (name == "mimo-poly") return mimo_poly_plant(u_bar, xi_bar);
  if (name == "model-plus-residue") {
    ResidueParams prm;
    prm.a = get("a", prm.a);
    prm.b = get("b", prm.b);
    prm.c_y = get("c_y", prm.c_y);
    prm.c_0 = get("c_0", prm.c_0);
    prm.c_xi = get("c_xi", prm.c_xi);
    return model_plus_residue_plant(prm, u_bar, xi_bar);
  }
  throw Error(ErrorCode::Config, "unknown registry plant '" + name + "'");
}

// ---------------------------------------------------------- data collection

inline DataSet collect_open_loop(const PlantSpec& p, const ExcitationSpec& e,
                                 std::optional<std::uint64_t> noise_seed = std::nullopt,
                                 double abort_bound = 1e6) {
  p.validate();
  const Matrix u = generate_excitation(e, p.n_u, p.u_bar);
  const int L = static_cast<int>(u.rows());
  Matrix y = Matrix::Zero(L, p.n_y);
  Matrix yw = Matrix::Zero(p.n, p.n_y), uw = Matrix::Zero(p.n, p.n_u), xw = Matrix::Zero(p.n, p.n_xi);
  std::optional<Rng> rng;
  if (noise_seed) rng.emplace(*noise_seed);
  auto shift_in = [](Matrix& w, const Eigen::Ref<const Eigen::RowVectorXd>& row) {
    for (Eigen::Index k = w.rows() - 1; k > 0; --k) w.row(k) = w.row(k - 1);
    if (w.rows() > 0) w.row(0) = row;
  };
  for (int t = 0; t + 1 < L; ++t) {
    shift_in(uw, u.row(t));
    Eigen::RowVectorXd xi = Eigen::RowVectorXd::Zero(p.n_xi);
    if (rng)
      for (int k = 0; k < p.n_xi; ++k) xi[k] = rng->uniform(-p.xi_bar, p.xi_bar);
    shift_in(xw, xi);
    Vector next = plant_step(p, yw, uw, xw, t);
    require(inf_norm(next) <= abort_bound, ErrorCode::PlantDivergence,
            "output diverged during data collection at t=" + std::to_string(t + 1));
    y.row(t + 1) = next.transpose();
    shift_in(yw, next.transpose());
  }
  return DataSet(u, y, p.u_bar, p.n);
}

// -------------------------------------------------------------- closed loop

enum class ReferenceKind { Step, Sinusoid, Table };

struct ReferenceSpec {
  ReferenceKind kind = ReferenceKind::Step;
  Vector amplitude;  // per output channel
  int period = 50;   // sinusoid
  std::vector<std::pair<int, Vector>> table;  // (start time, value), zero-order hold

  Vector at(int t, int n_y) const {
    Vector a = amplitude.size() == n_y ? amplitude : Vector::Constant(n_y, amplitude.size() ? amplitude[0] : 0.0);
    switch (kind) {
      case ReferenceKind::Step: return a;
      case ReferenceKind::Sinusoid: return a * std::sin(2.0 * std::numbers::pi * t / period);
      case ReferenceKind::Table: {
        Vector v = Vector::Zero(n_y);
        for (const auto& [start, value] : table)
          if (start <= t) v = value;
        return v;
      }
    }
    return Vector::Zero(n_y);
  }
};

struct SimConfig {
  int T = 200;
  Matrix y0_window;  // rows y_0, y_{-1}, ...; a single row is repeated
  ReferenceSpec reference;
  double r_bar = 0.0;
  double xi_bar = 0.0;
  std::uint64_t seed = 0;
  double abort_bound = 1e3;
};

struct SimulationTrace {
  Matrix r, y, u_nl, u_lin, u, xi, e;  // one row per step t = 0..T-1
  Matrix y_init;                       // y_0, y_{-1}, ... (initial window)

  int T() const { return static_cast<int>(y.rows()); }
  double e_inf() const { return T() > 1 ? inf_norm(e.bottomRows(T() - 1)) : 0.0; }
  double y_inf() const { return inf_norm(y); }
  int saturation_count(double u_bar) const {
    int c = 0;
    for (Eigen::Index t = 0; t < u.rows(); ++t)
      if ((u.row(t).array().abs() >= u_bar).any()) ++c;
    return c;
  }
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, SimulationTrace partial)
      : Error(ErrorCode::PlantDivergence, what), partial_(std::move(partial)) {}
  const SimulationTrace& partial() const { return partial_; }

 private:
  SimulationTrace partial_;
};

inline SimulationTrace run_closed_loop(const PlantSpec& p, const PolyModel& f, const InversionConfig& cfg_inv,
                                       const PidGains& g_pid, const SimConfig& sim) {
  p.validate();
  f.validate();
  g_pid.validate();
  cfg_inv.validate(f.n_y, f.n_u);
  require(f.n_y == p.n_y && f.n_u == p.n_u && g_pid.n_y() == p.n_y && g_pid.n_u() == p.n_u, ErrorCode::Shape,
          "plant, model and PID dimensions disagree");
  require(sim.T >= 1, ErrorCode::Config, "horizon T must be >= 1");
  require(sim.y0_window.cols() == p.n_y && sim.y0_window.rows() >= 1, ErrorCode::Shape, "y0 window must have n_y columns");
  require(sim.xi_bar >= 0.0 && sim.xi_bar <= p.xi_bar, ErrorCode::Bound,
          "disturbance bound must lie in [0, plant xi_bar]");

  const int H = std::max(p.n, f.n);
  Matrix yh(H, p.n_y);
  for (int k = 0; k < H; ++k) yh.row(k) = sim.y0_window.row(std::min<Eigen::Index>(k, sim.y0_window.rows() - 1));
  require(inf_norm(yh) <= sim.r_bar, ErrorCode::Bound, "initial output window must lie in [-r_bar, r_bar]");
  Matrix uh = Matrix::Zero(H, p.n_u), xih = Matrix::Zero(H, p.n_xi);

  const int ny = p.n_y, nu = p.n_u, nx = p.n_xi;
  SimulationTrace tr;
  tr.y_init = yh;
  tr.r.resize(sim.T, ny);
  tr.y.resize(sim.T, ny);
  tr.u_nl.resize(sim.T, nu);
  tr.u_lin.resize(sim.T, nu);
  tr.u.resize(sim.T, nu);
  tr.xi.resize(sim.T, nx);
  tr.e.resize(sim.T, ny);

  auto reference = [&](int t) -> Vector {
    if (t == 0) return yh.row(0).transpose();
    Vector r = sim.reference.at(t, ny);
    require(inf_norm(r) <= sim.r_bar, ErrorCode::Bound, "reference exceeds r_bar at t=" + std::to_string(t));
    return r;
  };
  auto shift_in = [](Matrix& w, const Eigen::Ref<const Vector>& v) {
    for (Eigen::Index k = w.rows() - 1; k > 0; --k) w.row(k) = w.row(k - 1);
    if (w.rows() > 0) w.row(0) = v.transpose();
  };

  Rng rng(sim.seed);
  PidState pid = PidState::zero(nu, ny, g_pid.n_theta);
  Vector r_t = reference(0);
  for (int t = 0; t < sim.T; ++t) {
    const Vector y_t = yh.row(0).transpose();
    const Vector r_next = reference(t + 1);
    const Vector e_t = r_t - y_t;

    RegressorWindow q{yh.topRows(f.n), uh.topRows(f.n - 1)};
    const Vector u_prev = uh.row(0).transpose();
    const Vector u_nl = solve_inversion(f, q, r_next, u_prev, p.u_bar, cfg_inv).u_nl;
    auto [u_lin, pid_next] = pid_step(g_pid, pid, e_t);
    pid = std::move(pid_next);
    const Vector u_t = saturate(u_nl + u_lin, p.u_bar);
    Vector xi_t(nx);
    for (int k = 0; k < nx; ++k) xi_t[k] = sim.xi_bar > 0.0 ? rng.uniform(-sim.xi_bar, sim.xi_bar) : 0.0;

    tr.r.row(t) = r_t.transpose();
    tr.y.row(t) = y_t.transpose();
    tr.u_nl.row(t) = u_nl.transpose();
    tr.u_lin.row(t) = u_lin.transpose();
    tr.u.row(t) = u_t.transpose();
    tr.xi.row(t) = xi_t.transpose();
    tr.e.row(t) = e_t.transpose();

    shift_in(uh, u_t);
    shift_in(xih, xi_t);
    Vector y_next;
    try {
      y_next = plant_step(p, yh.topRows(p.n), uh.topRows(p.n), xih.topRows(p.n), t);
    } catch (const Error& err) {
      SimulationTrace partial = tr;
      for (Matrix* m : {&partial.r, &partial.y, &partial.u_nl, &partial.u_lin, &partial.u, &partial.xi, &partial.e})
        m->conservativeResize(t + 1, Eigen::NoChange);
      throw DivergenceError(err.what(), std::move(partial));
    }
    if (inf_norm(y_next) > sim.abort_bound) {
      SimulationTrace partial = tr;
      for (Matrix* m : {&partial.r, &partial.y, &partial.u_nl, &partial.u_lin, &partial.u, &partial.xi, &partial.e})
        m->conservativeResize(t + 1, Eigen::NoChange);
      throw DivergenceError("output exceeded abort bound at t=" + std::to_string(t + 1), std::move(partial));
    }
    shift_in(yh, y_next);
    r_t = r_next;
  }
  return tr;
}

/// Max deviation between stored outputs and a replay of the plant on the
/// stored inputs and disturbances.
inline double replay_deviation(const PlantSpec& p, const SimulationTrace& tr) {
  const int H = static_cast<int>(tr.y_init.rows());
  double worst = 0.0;
  auto past = [&](const Matrix& m, int t, const Matrix* init) -> Eigen::RowVectorXd {
    if (t >= 0) return m.row(t);
    if (init) return init->row(std::min(-t, H - 1));
    return Eigen::RowVectorXd::Zero(m.cols());
  };
  for (int t = 0; t + 1 < tr.T(); ++t) {
    Matrix yw(p.n, p.n_y), uw(p.n, p.n_u), xw(p.n, p.n_xi);
    for (int k = 0; k < p.n; ++k) {
      yw.row(k) = past(tr.y, t - k, &tr.y_init);
      uw.row(k) = past(tr.u, t - k, nullptr);
      xw.row(k) = past(tr.xi, t - k, nullptr);
    }
    Vector y = plant_step(p, yw, uw, xw, t);
    worst = std::max(worst, inf_norm(y.transpose() - tr.y.row(t + 1)));
  }
  return worst;
}

inline std::string trace_to_csv(const SimulationTrace& tr) {
  std::string out = "t";
  auto head = [&](const char* prefix, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) out += std::string(",") + prefix + std::to_string(i + 1);
  };
  head("r", tr.r.cols());
  head("y", tr.y.cols());
  head("unl", tr.u_nl.cols());
  head("ulin", tr.u_lin.cols());
  head("u", tr.u.cols());
  head("xi", tr.xi.cols());
  head("e", tr.e.cols());
  out += "\n";
  for (int t = 0; t < tr.T(); ++t) {
    out += std::to_string(t);
    for (const Matrix* m : {&tr.r, &tr.y, &tr.u_nl, &tr.u_lin, &tr.u, &tr.xi, &tr.e})
      for (Eigen::Index i = 0; i < m->cols(); ++i) out += "," + detail::format_double((*m)(t, i));
    out += "\n";
  }
  return out;
}

/// Reads a trace CSV; the initial window is taken as y_0 repeated `history`
/// times.
inline SimulationTrace trace_from_csv(std::istream& in, int history = 1) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::EmptyDataset, "empty trace file");
  auto header = detail::split(detail::trim(line), ',');
  std::map<std::string, int> count;
  for (std::size_t k = 1; k < header.size(); ++k) {
    std::string h = header[k];
    std::size_t p = h.find_first_of("0123456789");
    require(p != std::string::npos, ErrorCode::Schema, "bad trace column '" + h + "'");
    count[h.substr(0, p)]++;
  }
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    auto cells = detail::split(detail::trim(line), ',');
    require(cells.size() == header.size(), ErrorCode::Schema, "trace line " + std::to_string(lineno) + ": column count");
    std::vector<double> row;
    for (auto& c : cells) {
      auto v = detail::parse_double(c);
      require(v.has_value(), ErrorCode::Parse, "trace line " + std::to_string(lineno) + ": non-numeric cell");
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), ErrorCode::EmptyDataset, "trace has no rows");
  SimulationTrace tr;
  const auto T = static_cast<Eigen::Index>(rows.size());
  std::size_t col = 1;
  auto take = [&](const char* prefix, Matrix& m) {
    const int n = count[prefix];
    m.resize(T, n);
    for (Eigen::Index t = 0; t < T; ++t)
      for (int i = 0; i < n; ++i) m(t, i) = rows[t][col + i];
    col += n;
  };
  take("r", tr.r);
  take("y", tr.y);
  take("unl", tr.u_nl);
  take("ulin", tr.u_lin);
  take("u", tr.u);
  take("xi", tr.xi);
  take("e", tr.e);
  tr.y_init = tr.y.row(0).replicate(std::max(history, 1), 1);
  return tr;
}

}  // namespace d2ibc
