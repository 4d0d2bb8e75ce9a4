#include <gtest/gtest.h>

#include "bcplab/opnorm.hpp"
#include "oracles.hpp"

using namespace bcplab;

namespace {

Matrix random_matrix(int m, int n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  Matrix a(m, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = gaussian(rng);
  return a;
}

}  // namespace

TEST(OperatorNorm, Corners) {
  Matrix d(2, 2);
  d << 3, 0, 0, 1;
  EXPECT_NEAR(operator_norm(d, 2.0, 2.0).value, 3.0, 1e-14);
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  EXPECT_EQ(operator_norm(a, 1.0, 1.0).value, 6.0);
  EXPECT_EQ(operator_norm(a, kInf, kInf).value, 7.0);
  EXPECT_EQ(operator_norm(a, 1.0, 1.0).method, "column");
  EXPECT_EQ(operator_norm(a, kInf, kInf).method, "row");
}

TEST(OperatorNorm, ArgmaxAttainsValue) {
  for (auto [q, p] : {std::pair{1.0, 2.0}, std::pair{2.0, kInf}, std::pair{kInf, 1.5}, std::pair{3.0, 1.0},
                      std::pair{1.5, 2.5}, std::pair{2.0, 2.0}}) {
    const Matrix a = random_matrix(3, 4, 11);
    const auto r = operator_norm(a, q, p);
    EXPECT_NEAR(lp_norm(r.argmax, q), 1.0, 1e-12) << q << " " << p;
    EXPECT_NEAR(lp_norm(a * r.argmax, p), r.value, 1e-10 * r.value) << q << " " << p << " " << r.method;
  }
}

TEST(OperatorNorm, VertexCornersMatchOracle) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Matrix a = random_matrix(3, 4, s);
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
      EXPECT_NEAR(operator_norm(a, kInf, p).value, oracle::sign_vertex_norm(a, p), 1e-12);
    }
    // ||A||_{q->1} = ||A^T||_{inf->q'}
    EXPECT_NEAR(operator_norm(a, 2.0, 1.0).value, oracle::sign_vertex_norm(a.transpose(), 2.0), 1e-12);
  }
}

TEST(OperatorNorm, AscentAgreesWithSvd) {
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const Matrix a = random_matrix(3, 3, 1000 + s);
    worst = std::max(worst, std::abs(ascent_norm(a, 2.0, 2.0).value - spectral_norm(a).value));
  }
  EXPECT_LE(worst, 1e-8);
}

TEST(OperatorNorm, AscentAgreesWithNetOracle) {
  for (double p : {1.5, 2.5}) {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const Matrix a = random_matrix(3, 3, 7000 + s);
      const double asc = operator_norm(a, p, p).value;
      const double net = oracle::net_norm(a, p, p, 0.01);
      EXPECT_NEAR(asc, net, 1e-3) << p << " " << s;
      EXPECT_GE(asc, net - 1e-12);
    }
  }
}

TEST(OperatorNorm, ClosedFormTwoByTwo) {
  for (std::uint64_t s = 0; s < 500; ++s) {
    const Matrix a = random_matrix(2, 2, s);
    EXPECT_NEAR(operator_norm_value(a, 2.0, 2.0), spectral_norm(a).value, 1e-13);
  }
}

TEST(OperatorNorm, DualVector) {
  Vector y(3);
  y << 3, -4, 0;
  for (double p : {1.0, 1.5, 2.0, 4.0, kInf}) {
    const Vector z = dual_vector(y, p);
    EXPECT_NEAR(lp_norm(z, conjugate_exponent(p)), 1.0, 1e-14) << p;
    EXPECT_NEAR(z.dot(y), lp_norm(y, p), 1e-13) << p;
  }
  EXPECT_TRUE(dual_vector(Vector::Zero(3), 2.0).isZero());
}

TEST(OperatorNorm, Json) {
  Matrix a(2, 3);
  a << 1, 2, 3, 4, 5, 6;
  const Operator t(a, kInf, 1.5);
  const auto j = to_json(t);
  EXPECT_EQ(j["q"], "inf");
  EXPECT_EQ(j["rows"], 2);
  const auto back = operator_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back.matrix, a);
  EXPECT_EQ(back.q, kInf);
  EXPECT_EQ(back.p, 1.5);
  auto bad = j;
  bad["matrix"][1] = {1, 2};
  EXPECT_THROW(operator_from_json(bad), DimensionError);
  Matrix nan = a;
  nan(0, 0) = std::nan("");
  EXPECT_THROW(Operator(nan, 2.0, 2.0), Error);
  EXPECT_THROW(Operator(a, 0.5, 2.0), Error);
}
