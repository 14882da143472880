#include <gtest/gtest.h>

#include "d2ibc/d2ibc.hpp"

using namespace d2ibc;

namespace {

ReferenceModel model_of(std::initializer_list<double> poles) {
  ReferenceModel M;
  M.poles = Vector(static_cast<Eigen::Index>(poles.size()));
  Eigen::Index k = 0;
  for (double a : poles) M.poles[k++] = a;
  return M;
}

// u_lin produced by running the PID `g` on the virtual error of `y`, so that
// g is the exact VRFT solution.
Matrix drive_with(const PidGains& g, const ReferenceModel& M, const Matrix& y) {
  const Matrix ev = virtual_reference(M, y) - y.topRows(y.rows() - 1);
  Matrix u(y.rows(), g.n_u());
  PidState s = PidState::zero(g.n_u(), g.n_y(), g.n_theta);
  for (Eigen::Index t = 0; t < y.rows(); ++t) {
    Vector e = t < ev.rows() ? Vector(ev.row(t).transpose()) : Vector::Zero(g.n_y());
    auto [ul, next] = pid_step(g, s, e);
    s = next;
    u.row(t) = ul.transpose();
  }
  return u;
}

Matrix random_matrix(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
  return m;
}

}  // namespace

TEST(PidStep, MatchesOracleSequence) {
  PidGains g = PidGains::zero(1, 1, 2);
  g.B[0](0, 0) = 0.4;
  g.B[1](0, 0) = -0.1;
  g.B[2](0, 0) = 0.05;
  PidState s = PidState::zero(1, 1, 2);
  s.u_lin_prev[0] = 0.3;
  // oracle: tests/oracle/oracles.py, "pid"
  const double want[] = {0.7, 0.7999999999999999, 0.7, 1.55};
  const double errs[] = {1.0, 0.5, -0.25, 2.0};
  for (int k = 0; k < 4; ++k) {
    auto [u, next] = pid_step(g, s, Vector::Constant(1, errs[k]));
    EXPECT_NEAR(u[0], want[k], 1e-15) << k;
    s = next;
  }
  EXPECT_EQ(s.e_hist[0][0], 2.0);
  EXPECT_EQ(s.e_hist[2][0], 0.5);
}

TEST(PidStep, LinearInHistory) {
  PidGains g = PidGains::from_theta(random_matrix(12, 1, 4).col(0), 2, 2, 2);
  PidState s = PidState::zero(2, 2, 2);
  s.u_lin_prev << 0.3, -0.1;
  s.e_hist = {Vector::Constant(2, 0.2), Vector::Constant(2, -0.5), Vector::Constant(2, 1.0)};
  PidState d = s;
  d.u_lin_prev *= 2.0;
  for (auto& e : d.e_hist) e *= 2.0;
  Vector e_t(2);
  e_t << 0.7, -0.2;
  auto a = pid_step(g, s, e_t).first;
  auto b = pid_step(g, d, 2.0 * e_t).first;
  EXPECT_LT(inf_norm(b - 2.0 * a), 1e-15);
}

TEST(PidGains, ThetaRoundTripAndJson) {
  Vector th = random_matrix(8, 1, 9).col(0);
  PidGains g = PidGains::from_theta(th, 2, 2, 1);
  EXPECT_EQ(g.theta(), th);
  EXPECT_EQ(g.B[0](0, 1), th[1]);
  EXPECT_EQ(g.B[1](1, 0), th[6]);
  PidGains back = pid_from_json(nlohmann::json::parse(to_json(g).dump()));
  EXPECT_EQ(back.theta(), th);
  EXPECT_THROW(PidGains::from_theta(th, 2, 2, 2), Error);
  EXPECT_THROW(pid_from_json(nlohmann::json::parse(R"({"n_theta": 1, "B": [[[1.0]]]})")), Error);
}

TEST(ReferenceModel, Recursion) {
  // oracle: tests/oracle/oracles.py, "reference model"
  Matrix y = simulate_reference_model(model_of({0.5}), Matrix::Ones(6, 1));
  const double want[] = {0.0, 0.5, 0.75, 0.875, 0.9375, 0.96875};
  for (int t = 0; t < 6; ++t) EXPECT_DOUBLE_EQ(y(t, 0), want[t]);

  Matrix r = random_matrix(10, 1, 2);
  Matrix d = simulate_reference_model(model_of({0.0}), r);
  for (int t = 1; t < 10; ++t) EXPECT_EQ(d(t, 0), r(t - 1, 0));
  EXPECT_EQ(simulate_reference_model(model_of({0.9}), Matrix::Zero(5, 1)), Matrix::Zero(5, 1));
  EXPECT_THROW(model_of({1.0}).validate(), Error);
}

TEST(VirtualReference, HandCasesAndInverse) {
  Matrix y(3, 1);
  y << 0.0, 1.0, 1.0;
  Matrix rv = virtual_reference(model_of({0.5}), y);
  ASSERT_EQ(rv.rows(), 2);
  EXPECT_DOUBLE_EQ(rv(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(rv(1, 0), 1.0);

  Matrix yr = random_matrix(6, 1, 3);
  Matrix r0 = virtual_reference(model_of({0.0}), yr);
  for (int t = 0; t < 5; ++t) EXPECT_EQ(r0(t, 0), yr(t + 1, 0));

  ReferenceModel M = model_of({0.3, -0.6});
  Matrix r = random_matrix(50, 2, 8);
  Matrix back = virtual_reference(M, simulate_reference_model(M, r));
  EXPECT_LE(inf_norm(back - r.topRows(49)), 1e-12);

  try {
    virtual_reference(M, Matrix::Zero(1, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientData);
  }
}

TEST(VrftFit, RecoversGeneratingController) {
  ReferenceModel M = model_of({0.6});
  PidGains star = PidGains::zero(1, 1, 2);
  star.B[0](0, 0) = 0.8;
  star.B[1](0, 0) = -0.5;
  star.B[2](0, 0) = 0.1;
  Matrix y = random_matrix(120, 1, 21);
  VrftResult res = vrft_fit(M, drive_with(star, M, y), y, 2);
  EXPECT_LE((res.gains.theta() - star.theta()).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE(res.j_vr, 1e-10);
}

TEST(VrftFit, RecoversMimoController) {
  ReferenceModel M = model_of({0.5, 0.2});
  PidGains star = PidGains::from_theta(random_matrix(8, 1, 5).col(0), 2, 2, 1);
  Matrix y = random_matrix(200, 2, 6);
  VrftResult res = vrft_fit(M, drive_with(star, M, y), y, 1);
  EXPECT_LE((res.gains.theta() - star.theta()).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE(res.j_vr, 1e-10);
}

TEST(VrftFit, ZeroInputGivesZeroGains) {
  Matrix y = random_matrix(40, 1, 1);
  VrftResult res = vrft_fit(model_of({0.5}), Matrix::Zero(40, 1), y, 1);
  EXPECT_LE(inf_norm(res.gains.theta()), 1e-14);
}

TEST(VrftFit, OneParameterByHand) {
  // a = 0 and y_t = t give e^v = 1; input increments are 0.3
  Matrix y(6, 1);
  for (int t = 0; t < 6; ++t) y(t, 0) = t;
  Matrix u(6, 1);
  for (int t = 0; t < 6; ++t) u(t, 0) = 0.3 * t;
  VrftResult res = vrft_fit(model_of({0.0}), u, y, 0);
  EXPECT_NEAR(res.gains.B[0](0, 0), 0.3, 1e-12);
}

TEST(VrftFit, Errors) {
  EXPECT_THROW(vrft_fit(model_of({0.5}), Matrix::Zero(3, 1), Matrix::Zero(3, 1), 2), Error);
  try {
    vrft_fit(model_of({0.5}), Matrix::Ones(30, 1), Matrix::Zero(30, 1), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularFit);
  }
}

TEST(LinearInputData, RawAndReplayModes) {
  PlantSpec p = model_plus_residue_plant();
  ExcitationSpec e;
  e.length = 60;
  DataSet d = collect_open_loop(p, e);
  ReferenceModel M = model_of({0.5});
  LinearInputData raw = linear_input_data(d, LinearInputMode::Raw, M);
  EXPECT_EQ(raw.u_lin, d.u());

  PolyModel f = std::get<ModelPlusResidue>(p.dynamics).base;
  InversionConfig inv = InversionConfig::tracking_only(1, 1);
  LinearInputData rep = linear_input_data(d, LinearInputMode::Replay, M, &f, &inv);
  EXPECT_EQ(rep.first, 1);
  EXPECT_EQ(rep.u_lin.rows(), d.L() - 3);
  const Matrix rv = virtual_reference(M, d.y());
  for (int t = rep.first; t < rep.first + 5; ++t) {
    const Vector u_nl = solve_inversion(f, window_at(d, t, 1), rv.row(t + 1).transpose(),
                                        d.u().row(t - 1).transpose(), 1.0, inv)
                            .u_nl;
    EXPECT_EQ(rep.u_lin(t - rep.first, 0), d.u()(t, 0) - u_nl[0]);
  }
  EXPECT_THROW(linear_input_data(d, LinearInputMode::Replay, M), Error);
}
