#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "d2ibc/d2ibc.hpp"

using namespace d2ibc;

namespace {

DataSet parse(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in, "test.csv");
}

ErrorCode parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected a parse failure";
  return ErrorCode::Config;
}

}  // namespace

TEST(LoadCsv, TwoRowsScalar) {
  DataSet d = parse("t,u1,y1\n0,0.5,1\n1,-0.5,-1\n");
  EXPECT_EQ(d.L(), 2);
  EXPECT_EQ(d.n_u(), 1);
  EXPECT_EQ(d.n_y(), 1);
  EXPECT_DOUBLE_EQ(d.y_bar(), 1.0);
  EXPECT_DOUBLE_EQ(d.u_bar(), 0.5);  // no directive: max |u|
}

TEST(LoadCsv, DirectivesSetBoundAndOrder) {
  DataSet d = parse("# u_bar=2\n# n=3\nt,u1,u2,y1\n0,0.5,1,1\n1,-0.5,0,3\n");
  EXPECT_DOUBLE_EQ(d.u_bar(), 2.0);
  ASSERT_TRUE(d.order_hint().has_value());
  EXPECT_EQ(*d.order_hint(), 3);
  EXPECT_EQ(d.n_u(), 2);
  EXPECT_DOUBLE_EQ(d.y_bar(), 3.0);
}

TEST(LoadCsv, NonNumericCellNamesLine) {
  try {
    parse("t,u1,y1\n0,0.5,1\n1,abc,-1\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Parse);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(LoadCsv, ContractErrors) {
  EXPECT_EQ(parse_error(""), ErrorCode::EmptyDataset);
  EXPECT_EQ(parse_error("t,u1,y1\n"), ErrorCode::EmptyDataset);
  EXPECT_EQ(parse_error("t,u1,y1\n0,0.5\n"), ErrorCode::Schema);
  EXPECT_EQ(parse_error("t,u1,y1\n1,0,0\n1,0,0\n"), ErrorCode::Schema);  // t not increasing
  EXPECT_EQ(parse_error("t,y1,u1\n0,0,0\n"), ErrorCode::Schema);
  EXPECT_EQ(parse_error("# u_bar=0.1\nt,u1,y1\n0,0.5,0\n"), ErrorCode::Schema);
}

TEST(LoadCsv, RoundTripIsBitExactAndCanonical) {
  ExcitationSpec e;
  e.length = 100;
  e.seed = 11;
  DataSet d = collect_open_loop(mimo_poly_plant(), e);
  const std::string first = to_csv(d);
  DataSet back = parse(first);
  EXPECT_EQ(back.u(), d.u());
  EXPECT_EQ(back.y(), d.y());
  EXPECT_EQ(back.u_bar(), d.u_bar());
  EXPECT_EQ(to_csv(back), first);
}

TEST(LoadCsv, FileRoundTrip) {
  DataSet d(Matrix::Constant(3, 1, 0.25), (Matrix(3, 1) << 0.1, -0.2, 1.0 / 3.0).finished(), 1.0, 1);
  save_csv(d, "dataset_roundtrip.csv");
  DataSet back = load_csv("dataset_roundtrip.csv");
  EXPECT_EQ(back.y(), d.y());
  EXPECT_THROW(load_csv("does_not_exist.csv"), Error);
}

TEST(NormConstants, HandValues) {
  DataSet d(Matrix::Zero(2, 1), (Matrix(2, 1) << 1.0, -1.0).finished(), 1.0);
  NormConstants c = compute_norm_constants(d);
  EXPECT_DOUBLE_EQ(c.rho_y[0], 1.0);
  EXPECT_DOUBLE_EQ(c.rho_u[0], 1e-9);  // clamped zero channel
  EXPECT_TRUE(c.clamped);

  DataSet d4(Matrix::Constant(4, 1, 0.5), (Matrix(4, 1) << 2, 0, 0, 0).finished(), 1.0);
  c = compute_norm_constants(d4);
  EXPECT_DOUBLE_EQ(c.rho_y[0], 1.0);
  EXPECT_DOUBLE_EQ(c.rho_u[0], 0.25);
  EXPECT_FALSE(c.clamped);

  // oracle: tests/oracle/oracles.py, "norm constants"
  DataSet d3(Matrix::Zero(3, 1), (Matrix(3, 1) << 0.3, -0.7, 1.1).finished(), 1.0);
  EXPECT_NEAR(compute_norm_constants(d3).rho_y[0], 0.5966666666666667, 1e-15);
}

TEST(NormConstants, PermutationInvariant) {
  Matrix y(5, 2);
  y << 0.1, 3.0, -2.5, 1e-3, 7.25, -0.4, 1e-8, 2.0, -0.3, 0.3;
  Matrix y_perm = y;
  y_perm.row(0).swap(y_perm.row(3));
  y_perm.row(1).swap(y_perm.row(4));
  NormConstants a = compute_norm_constants(DataSet(Matrix::Zero(5, 1), y, 1.0));
  NormConstants b = compute_norm_constants(DataSet(Matrix::Zero(5, 1), y_perm, 1.0));
  EXPECT_EQ(a.rho_y, b.rho_y);
}

TEST(Excitation, MultilevelHoldsLevels) {
  ExcitationSpec e;
  e.hold = 5;
  e.length = 10;
  Matrix u = generate_excitation(e, 1, 1.0);
  std::set<double> levels(u.data(), u.data() + u.size());
  EXPECT_EQ(levels.size(), 2u);
  for (int t = 1; t < 10; ++t) {
    if (t % 5 != 0) {
      EXPECT_EQ(u(t, 0), u(t - 1, 0));
    }
  }
}

TEST(Excitation, DeterministicAndBounded) {
  ExcitationSpec e;
  e.seed = 99;
  e.amplitude = 0.7;
  e.length = 64;
  EXPECT_EQ(generate_excitation(e, 2, 1.0), generate_excitation(e, 2, 1.0));
  e.kind = ExcitationKind::Multisine;
  Matrix u = generate_excitation(e, 2, 1.0);
  EXPECT_EQ(u.rows(), 64);
  for (Eigen::Index i = 0; i < u.size(); ++i) EXPECT_LE(std::abs(u.data()[i]), 0.7);
}

TEST(Excitation, AmplitudeAboveSaturationIsBoundError) {
  ExcitationSpec e;
  e.amplitude = 1.5;
  try {
    generate_excitation(e, 1, 1.0);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::Bound);
  }
}
