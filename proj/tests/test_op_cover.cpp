#include <gtest/gtest.h>

#include "bcplab/op_cover.hpp"
#include "oracles.hpp"

using namespace bcplab;
using namespace bcplab::op;

namespace {

Matrix unit_operator(int m, int n, double q, double p, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  Matrix a(m, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = gaussian(rng);
  return a / operator_norm(a, q, p).value;
}

DualNet default_net(int n, double p, double lambda, int k_max) {
  const auto k = LpConstants::make(p, lambda);
  return DualNet(n, conjugate_exponent(p), (1.0 - k.c) / (6.0 * k_max));
}

}  // namespace

TEST(LpConstants, MatchFormulas) {
  for (double p : {1.5, 2.0, 3.0}) {
    for (double lambda : {1.05, 1.1, 1.3}) {
      const auto k = LpConstants::make(p, lambda);
      const oracle::LpFormulas f(p, lambda);
      EXPECT_NEAR(k.c, f.c, 1e-15);
      EXPECT_NEAR(k.eps, f.eps, 1e-15);
      EXPECT_NEAR(k.threshold, f.threshold, 1e-15);
      EXPECT_NEAR(k.window_lo, f.lo, 1e-15);
      EXPECT_NEAR(k.window_hi, f.hi, 1e-15);
      EXPECT_NEAR(k.radius, f.radius, 1e-15);
      EXPECT_NEAR(k.distance_bound, f.dist, 1e-15);
      EXPECT_NEAR(k.gap_bound, f.gap, 1e-15);
      EXPECT_LT(k.distance_bound, k.radius);
      EXPECT_LT(k.radius, lambda * k.window_lo);
    }
  }
}

TEST(LpConstants, FrozenValues) {
  const auto k = LpConstants::make(2.0, 1.1);
  EXPECT_NEAR(k.c, 0.890724, 1e-6);
  EXPECT_NEAR(k.window_lo, 0.963575, 1e-6);
  EXPECT_NEAR(k.window_hi, 1.036425, 1e-6);
  EXPECT_NEAR(k.radius, 1.039898, 1e-6);
  EXPECT_NEAR(k.gap_bound, 0.020034, 1e-6);
  EXPECT_NEAR(1.1 - k.radius, 0.060102, 1e-6);
  EXPECT_THROW(LpConstants::make(1.0, 1.1), ConfigError);
  EXPECT_THROW(LpConstants::make(2.0, 1.0), ConfigError);
  EXPECT_THROW(LpConstants::make(2.0, 1.1, (1.0 - k.c) / 2.0), ConfigError);
}

TEST(DualNet, NearestStaysInBallWithinDelta) {
  for (double s : {1.5, 2.0, 3.0, kInf}) {
    const DualNet net(3, s, 0.05);
    const auto X = SpaceModel::lp(3, s);
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
      Vector v = sample_sphere(X, seed) * (seed % 3 == 0 ? 1.0 : 0.7);
      const auto pt = net.nearest(v);
      ASSERT_LE(lp_norm(pt.value, s), 1.0);
      ASSERT_LE(lp_norm(pt.value - v, s), 0.05 + 1e-12);
    }
    for (int i = 0; i < 3; ++i) {
      EXPECT_EQ(net.nearest(Vector::Unit(3, i)).value, Vector::Unit(3, i));
      EXPECT_EQ(net.nearest(-Vector::Unit(3, i)).value, -Vector::Unit(3, i));
    }
  }
}

TEST(EnumerateCenters, WindowMembership) {
  const DualNet net(2, 2.0, 0.5);
  const auto cands = enumerate_lp_centers(net, 1.1, 2.0, 1, 2);
  const auto k = LpConstants::make(2.0, 1.1);
  bool saw_e1 = false;
  for (const auto& c : cands) {
    EXPECT_GT(c.prescale_norm, k.window_lo);
    EXPECT_LT(c.prescale_norm, k.window_hi);
    EXPECT_NE(c.prescale_norm, 0.5);
    if (c.rows.size() == 1 && c.prescale.row(0) == Vector::Unit(2, 0).transpose()) {
      saw_e1 = true;
      Matrix expect = Matrix::Zero(2, 2);
      expect(0, 0) = 1.1;
      EXPECT_TRUE(c.center().isApprox(expect));
    }
  }
  EXPECT_TRUE(saw_e1);
  // rows of norm 1/2 sit below the window
  for (const auto& c : cands) EXPECT_GT(c.prescale.row(0).norm(), 0.9);
  EXPECT_THROW(enumerate_lp_centers(net, 1.1, 2.0, 3, 2), ConfigError);
}

TEST(CertifyLp, RankOneExample) {
  Matrix t = Matrix::Zero(2, 2);
  t(0, 0) = 1.0;
  const auto net = default_net(2, 2.0, 1.1, 2);
  const auto cert = certify_lp_operator(Operator(t, 2.0, 2.0), 1.1, net);
  Matrix expect = Matrix::Zero(2, 2);
  expect(0, 0) = 1.1;
  EXPECT_TRUE(cert.center.center().isApprox(expect, 1e-15));
  EXPECT_NEAR(cert.distance, 0.1, 1e-12);
  EXPECT_NEAR(cert.radius, 1.039898, 1e-6);
  EXPECT_NEAR(cert.gap, 0.060102, 1e-6);
  EXPECT_GE(cert.gap, cert.constants.gap_bound);
  EXPECT_EQ(cert.t0, 1);
}

TEST(CertifyLp, IdentityNeedsFullTruncation) {
  // With t0 = 1 the truncated identity loses the second row and the distance reaches 1.
  const Matrix t = Matrix::Identity(2, 2);
  const auto net = default_net(2, 2.0, 1.05, 2);
  const auto cert = certify_lp_operator(Operator(t, 2.0, 2.0), 1.05, net);
  EXPECT_EQ(cert.t0_smallest, 1);
  EXPECT_EQ(cert.t0, 2);
  EXPECT_LE(cert.distance, cert.constants.distance_bound);
  EXPECT_NEAR(cert.distance, 0.05, 1e-12);
}

TEST(CertifyLp, MonteCarlo) {
  for (double p : {1.5, 2.0, 3.0}) {
    for (double lambda : {1.05, 1.1}) {
      const int n = 3;
      const auto net = default_net(n, p, lambda, n);
      for (std::uint64_t s = 0; s < 60; ++s) {
        const Matrix t = unit_operator(n, n, p, p, s);
        const auto cert = certify_lp_operator(Operator(t, p, p), lambda, net);
        ASSERT_GT(cert.distance_slack(), kStrictSlack);
        ASSERT_GT(cert.radius_slack(), kStrictSlack);
        ASSERT_GT(cert.center_slack(), kStrictSlack);
        ASSERT_GT(cert.gap_slack(), kStrictSlack);
        ASSERT_GT(cert.theta, cert.constants.threshold);
        for (double e : cert.row_errors) ASSERT_LT(e, cert.row_tolerance);
      }
    }
  }
}

TEST(CertifyLp, Preconditions) {
  const auto net = default_net(2, 2.0, 1.1, 2);
  EXPECT_THROW(certify_lp_operator(Operator(2.0 * Matrix::Identity(2, 2), 2.0, 2.0), 1.1, net), Error);
  const DualNet coarse(2, 2.0, 1.0);
  Matrix t(2, 2);
  t << 0.6, 0.3, -0.2, 0.5;
  t /= spectral_norm(t).value;
  EXPECT_THROW(certify_lp_operator(Operator(t, 2.0, 2.0), 1.1, coarse), NetTooCoarse);
  try {
    certify_lp_operator(Operator(t, 2.0, 2.0), 1.1, coarse);
  } catch (const NetTooCoarse& e) {
    EXPECT_GT(e.required_delta(), 0.0);
  }
  EXPECT_THROW(certify_lp_operator(Operator(t, 2.0, 2.0), 1.1, DualNet(2, 3.0, 0.01)), ConfigError);
}

TEST(CertifyLp, ZeroPatternSubspace) {
  // operators vanishing on the last basis vector: every center keeps the zero column
  const int n = 3;
  for (double p : {1.5, 2.0}) {
    const auto net = default_net(n, p, 1.1, n);
    for (std::uint64_t s = 0; s < 100; ++s) {
      Rng rng = make_rng(s);
      Matrix a = Matrix::Zero(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j + 1 < n; ++j) a(i, j) = gaussian(rng);
      a /= operator_norm(a, p, p).value;
      const auto cert = certify_lp_operator(Operator(a, p, p), 1.1, net);
      ASSERT_TRUE(cert.center.center().col(n - 1).isZero(0.0));
      ASSERT_GT(cert.radius_slack(), kStrictSlack);
    }
  }
}

TEST(Hilbert, Examples) {
  const SphereNet net(2, 0.05);
  Matrix e11 = Matrix::Zero(2, 2);
  e11(0, 0) = 1.0;
  auto c = hilbert_rank_one_certify(e11, 1.5, net);
  EXPECT_NEAR(c.distance, 0.5, 1e-12);
  EXPECT_EQ(c.radius, 1.25);
  EXPECT_EQ(c.gap, 0.25);

  c = hilbert_rank_one_certify(Matrix::Identity(2, 2), 1.5, net);
  EXPECT_NEAR(c.distance, 1.0, 1e-12);
  EXPECT_LE(c.distance, c.radius);

  EXPECT_THROW(hilbert_rank_one_certify(e11, 1.5, SphereNet(2, 0.06)), ConfigError);
  EXPECT_THROW(hilbert_rank_one_certify(e11, 2.0, net), ConfigError);
  EXPECT_THROW(hilbert_rank_one_certify(2.0 * e11, 1.5, net), Error);
}

TEST(Hilbert, MonteCarlo) {
  const SphereNet net(4, 0.05);
  for (std::uint64_t s = 0; s < 300; ++s) {
    const Matrix a = unit_operator(4, 4, 2.0, 2.0, s);
    const auto c = hilbert_rank_one_certify(a, 1.5, net);
    ASSERT_LE(c.distance, c.bound);
    ASSERT_LE(c.bound, c.radius + 1e-15);
    ASSERT_LT(c.radius, 1.5);
  }
}

class Transfer : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const auto net = default_net(2, 2.0, 1.1, 2);
    fin_ = new FiniteLpCovering(finite_lp_covering(2, 2, 2.0, 1.1, net, 3));
    tr_ = new OperatorTransfer(operator_cover_transfer(fin_->covering));
  }
  static void TearDownTestSuite() {
    delete tr_;
    delete fin_;
  }
  static FiniteLpCovering* fin_;
  static OperatorTransfer* tr_;
};

FiniteLpCovering* Transfer::fin_ = nullptr;
OperatorTransfer* Transfer::tr_ = nullptr;

TEST_F(Transfer, OperatorCoveringIsSound) {
  EXPECT_EQ(fin_->grid_points, 1776u);
  EXPECT_LE(fin_->worst_distance + fin_->eta, LpConstants::make(2.0, 1.1).radius);
  EXPECT_TRUE(classify_covering(fin_->covering).uniform);
  for (std::uint64_t s = 0; s < 300; ++s)
    ASSERT_TRUE(find_cover(fin_->covering, sample_sphere(fin_->covering.space, s)));
}

TEST_F(Transfer, DerivedCoveringsAdmissibleAndCovering) {
  for (std::size_t k = 0; k < tr_->y_cover.size(); ++k) {
    ASSERT_LT(tr_->y_cover.balls[k].radius, tr_->y_cover.center_norms[k]);
    ASSERT_LT(tr_->dual_cover.balls[k].radius, tr_->dual_cover.center_norms[k]);
  }
  EXPECT_GE(tr_->g_separation, 1e-3);
  EXPECT_GE(tr_->y_separation, 1e-3);
  for (std::uint64_t s = 0; s < 500; ++s) {
    ASSERT_TRUE(find_cover(tr_->y_cover, sample_sphere(tr_->y_cover.space, s)));
    ASSERT_TRUE(find_cover(tr_->dual_cover, sample_sphere(tr_->dual_cover.space, s)));
  }
}

TEST_F(Transfer, RankOneTrace) {
  const auto& c = fin_->covering;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const Vector y = sample_sphere(SpaceModel::lp(2, 2.0), s);
    const Matrix R = y * tr_->g.transpose();
    const auto hit = find_cover(c, flatten(R));
    ASSERT_TRUE(hit);
    const auto n0 = hit->ball_index;
    const Matrix T = as_matrix(c.space, c.balls[n0].center);
    const double gx = tr_->g.dot(tr_->x[n0]);
    ASSERT_LE((y - T * tr_->x[n0] / gx).norm(), c.balls[n0].radius / std::abs(gx) + 1e-12);
  }
}

TEST(TransferErrors, NormingFailure) {
  const BallCovering c(SpaceModel::op(2, 2, 2.0, 2.0), {{flatten(Matrix::Identity(2, 2)), 1.0}});
  EXPECT_THROW(operator_cover_transfer(c), NormingFailure);
}

TEST(TransferErrors, SeparationFailure) {
  // |g(x_n)| = 1 would need g = +-x_n exactly
  const BallCovering c(SpaceModel::op(2, 2, 2.0, 2.0),
                       {{flatten(2.0 * Matrix::Identity(2, 2)), 1.0}, {flatten(Matrix::Identity(2, 2) * -2.0), 1.0}});
  TransferOptions o;
  o.separation = 1.0;
  o.search = 5;
  EXPECT_THROW(operator_cover_transfer(c, o), SeparationFailure);
}

TEST(LinfSum, CoversAndPreservesGap) {
  const auto block = axis_cover(2, 2.0);
  const auto sum = linf_sum_cover({block, block});
  EXPECT_EQ(sum.size(), 2 * block.size());
  EXPECT_NEAR(sum.origin_gap, block.origin_gap, 1e-12);
  for (std::uint64_t s = 0; s < 1000; ++s) ASSERT_TRUE(find_cover(sum, sample_sphere(sum.space, s)));
  const BallCovering bad(SpaceModel::lp(2, 2.0), {{Vector::Unit(2, 0), 1.5}});
  EXPECT_THROW(linf_sum_cover({block, bad}), Error);
}

TEST(LinfSum, Identifications) {
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  const auto cols = SpaceModel::linf_power(SpaceModel::lp(2, 1.0), 2);
  EXPECT_EQ(norm_of(cols, columns_as_sum(a)), 6.0);
  EXPECT_EQ(operator_norm(a, 1.0, 1.0).value, 6.0);
  EXPECT_EQ(norm_of(cols, rows_as_sum(a)), 7.0);
  EXPECT_EQ(operator_norm(a, kInf, kInf).value, 7.0);
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const Matrix b = unit_operator(3, 4, 2.0, 2.0, s) * 3.0;
    ASSERT_EQ(operator_norm(b, 1.0, 1.0).value,
              norm_of(SpaceModel::linf_power(SpaceModel::lp(3, 1.0), 4), columns_as_sum(b)));
    ASSERT_EQ(operator_norm(b, kInf, kInf).value,
              norm_of(SpaceModel::linf_power(SpaceModel::lp(4, 1.0), 3), rows_as_sum(b)));
    ASSERT_NEAR(operator_norm(b, kInf, kInf).value, oracle::sign_vertex_norm(b, kInf), 1e-12);
  }
}

TEST(LinfSum, OperatorSpheres) {
  // B(l_1^2, l_1^2) and B(l_inf^2, l_inf^2) as l_inf-sums of l_1^2 blocks covered by sign balls
  const auto block = sign_cover(2, 1.0);
  const auto sum = linf_sum_cover({block, block});
  for (std::uint64_t s = 0; s < 500; ++s) {
    const Matrix a = unit_operator(2, 2, 1.0, 1.0, s);
    ASSERT_TRUE(find_cover(sum, columns_as_sum(a)));
    const Matrix b = unit_operator(2, 2, kInf, kInf, s);
    ASSERT_TRUE(find_cover(sum, rows_as_sum(b)));
  }
}

TEST(OpJson, CertificateCarriesConstants) {
  const auto net = default_net(2, 2.0, 1.1, 2);
  const Matrix t = unit_operator(2, 2, 2.0, 2.0, 4);
  const auto j = to_json(certify_lp_operator(Operator(t, 2.0, 2.0), 1.1, net));
  for (const char* key : {"t0", "theta", "constants", "net_choices", "distance", "radius", "gap"}) EXPECT_TRUE(j.contains(key)) << key;
  for (const char* key : {"c", "eps", "window", "threshold"}) EXPECT_TRUE(j["constants"].contains(key)) << key;
}
