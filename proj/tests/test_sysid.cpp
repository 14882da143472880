#include <gtest/gtest.h>

#include "d2ibc/d2ibc.hpp"

using namespace d2ibc;

namespace {

DataSet from_recursion(int L, const std::function<double(double, double)>& g, std::uint64_t seed = 5) {
  ExcitationSpec e;
  e.length = L;
  e.seed = seed;
  Matrix u = generate_excitation(e, 1, 1.0);
  Matrix y = Matrix::Zero(L, 1);
  for (int t = 0; t + 1 < L; ++t) y(t + 1, 0) = g(y(t, 0), u(t, 0));
  return DataSet(u, y, 1.0);
}

}  // namespace

TEST(Monomials, SmallCases) {
  PolyBasis b = enumerate_monomials(1, 1);
  ASSERT_EQ(b.size(), 2);
  EXPECT_EQ(b.exponents[0], Exponent({0}));
  EXPECT_EQ(b.exponents[1], Exponent({1}));
  EXPECT_EQ(enumerate_monomials(3, 0).size(), 1);
}

TEST(Monomials, OrderMatchesExhaustiveOracle) {
  // oracle: tests/oracle/oracles.py, "monomials"
  PolyBasis b = enumerate_monomials(2, 2);
  std::vector<Exponent> want = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  EXPECT_EQ(b.exponents, want);
  b = enumerate_monomials(3, 2);
  std::vector<Exponent> want3 = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {2, 0, 0},
                                 {1, 1, 0}, {1, 0, 1}, {0, 2, 0}, {0, 1, 1}, {0, 0, 2}};
  EXPECT_EQ(b.exponents, want3);
  EXPECT_EQ(enumerate_monomials(2, 3).size(), 10);
}

TEST(Monomials, CountIsBinomialAndCapped) {
  for (int m = 1; m <= 5; ++m)
    for (int d = 0; d <= 4; ++d) {
      long long c = 1;
      for (int k = 1; k <= d; ++k) c = c * (m + k) / k;
      EXPECT_EQ(enumerate_monomials(m, d).size(), c) << m << "," << d;
    }
  try {
    enumerate_monomials(30, 6);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BasisTooLarge);
  }
}

TEST(EvalBasis, HandValues) {
  PolyBasis b = enumerate_monomials(2, 2);
  // n = 1, n_y = n_u = 1: flattened argument (y_t, u_t)
  RegressorWindow q{Matrix::Constant(1, 1, 2.0), Matrix(0, 1)};
  Vector phi = eval_basis(b, q, Vector::Constant(1, 3.0));
  EXPECT_EQ(phi, (Vector(6) << 1, 2, 3, 4, 6, 9).finished());

  // oracle: tests/oracle/oracles.py, "eval (1,-2,0.5) d=2"
  Vector phi3 = eval_basis_flat(enumerate_monomials(3, 2), (Vector(3) << 1.0, -2.0, 0.5).finished());
  EXPECT_EQ(phi3, (Vector(10) << 1.0, 1.0, -2.0, 0.5, 1.0, -2.0, 0.5, 4.0, -1.0, 0.25).finished());

  Vector zero = eval_basis(b, RegressorWindow{Matrix::Zero(1, 1), Matrix(0, 1)}, Vector::Zero(1));
  EXPECT_EQ(zero, (Vector(6) << 1, 0, 0, 0, 0, 0).finished());
  EXPECT_EQ(eval_basis(enumerate_monomials(2, 0), q, Vector::Constant(1, 3.0)), Vector::Ones(1));
  EXPECT_THROW(eval_basis(b, q, Vector::Zero(2)), Error);
}

TEST(EvalBasis, FlatteningOrder) {
  // n = 2, n_y = 1, n_u = 1: (y_t, y_{t-1}, u_{t-1}, u_t)
  RegressorWindow q{(Matrix(2, 1) << 1.0, 2.0).finished(), Matrix::Constant(1, 1, 3.0)};
  EXPECT_EQ(flatten_argument(q, Vector::Constant(1, 4.0)), (Vector(4) << 1, 2, 3, 4).finished());
}

TEST(EvalBasis, ScalingPerMonomial) {
  PolyBasis b = enumerate_monomials(3, 3);
  Vector x(3);
  x << 0.3, -1.2, 0.7;
  const double s = 1.7;
  Vector a = eval_basis_flat(b, x), c = eval_basis_flat(b, s * x);
  for (int k = 0; k < b.size(); ++k) {
    int deg = 0;
    for (int e : b.exponents[k]) deg += e;
    EXPECT_NEAR(c[k], std::pow(s, deg) * a[k], 1e-12) << k;
  }
}

TEST(FitModel, RecoversLinearPlant) {
  DataSet d = from_recursion(200, [](double y, double u) { return 0.5 * y + 0.3 * u; });
  ModelFit fit = fit_model(d, 1, 1, 0.0);
  EXPECT_NEAR(fit.model.alpha(0, 0), 0.0, 1e-6);
  EXPECT_NEAR(fit.model.alpha(1, 0), 0.5, 1e-6);
  EXPECT_NEAR(fit.model.alpha(2, 0), 0.3, 1e-6);
  EXPECT_LT(fit.rms_residual[0], 1e-10);
  EXPECT_GE(fit.regressor_condition, 1.0);
  EXPECT_TRUE(std::isfinite(fit.regressor_condition));
  RegressorWindow q{Matrix::Ones(1, 1), Matrix(0, 1)};
  EXPECT_NEAR(predict(fit.model, q, Vector::Ones(1))[0], 0.8, 1e-6);
}

TEST(FitModel, RecoversQuadraticPlant) {
  DataSet d = from_recursion(200, [](double y, double u) { return 0.2 * y * y + u; });
  ModelFit fit = fit_model(d, 1, 2, 0.0);
  // basis {1, y, u, y^2, y u, u^2}
  Vector want(6);
  want << 0, 0, 1, 0.2, 0, 0;
  for (int k = 0; k < 6; ++k) EXPECT_NEAR(fit.model.alpha(k, 0), want[k], 1e-6) << k;
}

TEST(FitModel, ZeroOutputsWithRidge) {
  ExcitationSpec e;
  DataSet d(generate_excitation(e, 1, 1.0), Matrix::Zero(200, 1), 1.0);
  ModelFit fit = fit_model(d, 2, 2, 1e-6);
  EXPECT_LT(inf_norm(fit.model.alpha), 1e-9);
  EXPECT_TRUE(std::isinf(fit.regressor_condition));  // y columns carry no excitation
}

TEST(FitModel, SingularWithoutRidge) {
  DataSet d(Matrix::Zero(50, 1), Matrix::Zero(50, 1), 1.0);
  try {
    fit_model(d, 1, 1, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularFit);
    EXPECT_NE(std::string(e.what()).find("ridge"), std::string::npos);
  }
  EXPECT_NO_THROW(fit_model(d, 1, 1, 1e-3));
  EXPECT_THROW(fit_model(DataSet(Matrix::Zero(2, 1), Matrix::Zero(2, 1), 1.0), 2, 1, 0.0), Error);
}

TEST(FitModel, ResidualNonIncreasingInDegree) {
  DataSet d = from_recursion(300, [](double y, double u) { return 0.6 * std::tanh(y) + 0.4 * std::sin(2 * u); });
  double prev = std::numeric_limits<double>::infinity();
  for (int deg = 1; deg <= 4; ++deg) {
    double rms = fit_model(d, 1, deg, 0.0).rms_residual[0];
    EXPECT_LE(rms, prev + 1e-12) << deg;
    prev = rms;
  }
}

TEST(Predict, ConstantAndZeroModels) {
  PolyModel f{1, 1, 1, enumerate_monomials(2, 1), Matrix::Zero(3, 1), 0.0};
  RegressorWindow q{Matrix::Constant(1, 1, 0.7), Matrix(0, 1)};
  EXPECT_EQ(predict(f, q, Vector::Constant(1, -0.3))[0], 0.0);
  f.alpha(0, 0) = 2.5;
  EXPECT_EQ(predict(f, q, Vector::Constant(1, -0.3))[0], 2.5);
  EXPECT_THROW(predict(f, RegressorWindow{Matrix::Zero(2, 1), Matrix::Zero(1, 1)}, Vector::Zero(1)), Error);
}

TEST(Predict, OverflowIsNumericRange) {
  PolyModel f{1, 1, 1, enumerate_monomials(2, 3), Matrix::Ones(10, 1), 0.0};
  RegressorWindow q{Matrix::Constant(1, 1, 1e120), Matrix(0, 1)};
  try {
    predict(f, q, Vector::Zero(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NumericRange);
  }
}

TEST(ModelJson, RoundTrip) {
  DataSet d = from_recursion(120, [](double y, double u) { return 0.3 * y + 0.1 * y * u + u; });
  PolyModel f = fit_model(d, 2, 2, 1e-4).model;
  PolyModel g = model_from_json(nlohmann::json::parse(to_json(f).dump()));
  EXPECT_EQ(g.alpha, f.alpha);
  EXPECT_EQ(g.basis.exponents, f.basis.exponents);
  EXPECT_EQ(to_json(g).dump(), to_json(f).dump());
  EXPECT_THROW(model_from_json(nlohmann::json::parse(R"({"n": 1})")), Error);
}
