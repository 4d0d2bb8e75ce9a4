#include <gtest/gtest.h>

#include "bcplab/ck_cover.hpp"

using namespace bcplab;
using namespace bcplab::ck;

namespace {

CkCover discrete_cover(int nodes, double lambda = 1.2) {
  CkCoverConfig cfg;
  cfg.lambda = lambda;
  cfg.pibasis = singleton_basis(nodes);
  return build_ck_cover(SpaceModel::sup_grid(nodes), cfg);
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST(CkCover, Constants) {
  for (double lambda : {1.05, 1.2, 1.5}) {
    const auto c = discrete_cover(4, lambda);
    const auto cls = classify_covering(c.covering);
    EXPECT_EQ(cls.radius_bound, 1.0);
    EXPECT_EQ(cls.origin_gap, std::min(0.5, lambda - 1.0));
    EXPECT_TRUE(cls.uniform);
    EXPECT_EQ(c.covering.size(), 8u);
  }
  EXPECT_NEAR(discrete_cover(4).covering.origin_gap, 0.2, 1e-15);
  CkCoverConfig bad;
  bad.pibasis = singleton_basis(4);
  for (double lambda : {0.9, 1.0, 1.6}) {
    bad.lambda = lambda;
    EXPECT_THROW(build_ck_cover(SpaceModel::sup_grid(4), bad), ConfigError);
  }
}

TEST(CkCover, WorkedExamples) {
  const auto c = discrete_cover(4);
  auto cert = certify_ck_point(c, vec({1, 0, 0, 0}));
  ASSERT_TRUE(cert);
  EXPECT_EQ(cert->cert.ball_index, 0u);
  EXPECT_NEAR(cert->cert.distance, 0.2, 1e-15);

  cert = certify_ck_point(c, vec({1, 1, 1, 1}));
  ASSERT_TRUE(cert);
  EXPECT_EQ(cert->cert.ball_index, 0u);
  EXPECT_EQ(cert->cert.distance, 1.0);
  EXPECT_EQ(cert->cert.margin, 0.0);

  cert = certify_ck_point(c, c.bumps[0] / 1.2);
  ASSERT_TRUE(cert);
  EXPECT_NEAR(cert->cert.distance, 0.2, 1e-15);

  cert = certify_ck_point(c, vec({0.3, -1, 0.9, 0}));
  ASSERT_TRUE(cert);
  EXPECT_EQ(cert->sign, -1);
  EXPECT_EQ(cert->cert.ball_index, 3u);
}

TEST(CkCover, OriginNeverCovered) {
  const auto c = discrete_cover(6);
  EXPECT_FALSE(find_cover(c.covering, Vector::Zero(6)));
}

TEST(CkCover, DiscreteSamplesAllCertified) {
  for (int nodes : {8, 64}) {
    const auto c = discrete_cover(nodes);
    for (std::uint64_t s = 0; s < 2000; ++s) {
      const auto g = sample_sphere(c.covering.space, trial_seed(7, s));
      const auto cert = certify_ck_point(c, g);
      ASSERT_TRUE(cert);
      ASSERT_GT(cert->cert.margin, 0.0);
      ASSERT_LE(cert->cert.distance, 1.0);
    }
  }
}

TEST(CkCover, LipschitzHatBumps) {
  const int nodes = 33;
  const auto K = SpaceModel::lipschitz_grid(nodes, 4.0);
  CkCoverConfig cfg;
  cfg.pibasis = dyadic_basis(nodes, 4.0);
  cfg.shape = BumpShape::hat;
  const auto c = build_ck_cover(K, cfg);
  for (const auto& f : c.bumps) {
    EXPECT_NEAR(lp_norm(f, kInf), 1.2, 1e-15);
    EXPECT_GE(f.minCoeff(), 0.0);
  }
  int certified = 0, outside = 0;
  for (std::uint64_t s = 0; s < 2000; ++s) {
    const auto g = sample_sphere(K, s);
    if (auto cert = certify_ck_point(c, g)) {
      ++certified;
      ASSERT_GE(cert->cert.margin, 0.0);
    } else {
      ++outside;
    }
  }
  EXPECT_GT(certified, 0);
  EXPECT_EQ(certified + outside, 2000);
}

TEST(CkCover, DyadicBasis) {
  const auto b = dyadic_basis(9, 1.0);  // N = 8, intervals of length >= 1/2
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b[0], (NodeSet{0, 1, 2, 3, 4, 5, 6, 7, 8}));
  EXPECT_EQ(b[1], (NodeSet{0, 1, 2, 3, 4}));
  EXPECT_THROW(dyadic_basis(10, 1.0), ConfigError);
}

TEST(CkCover, LevelSetsNest) {
  const auto c = discrete_cover(5);
  for (const auto& b : c.covering.balls) {
    for (int k = 1; k < 6; ++k) EXPECT_TRUE(subset_of(level_set(b.center, k + 1), level_set(b.center, k)));
  }
}

TEST(CkCover, WitnessSearchOnGenuineBasis) {
  const auto c = discrete_cover(4);
  const auto v = pibasis_witness_search(c.covering, singleton_basis(4), 5);
  EXPECT_FALSE(v.witness_found);
  for (std::size_t n = 0; n < c.covering.size(); ++n) {
    EXPECT_EQ(level_set(c.covering.balls[n].center, 1), (NodeSet{static_cast<int>(n / 2)}));
  }
}

TEST(CkCover, WitnessSearchFindsCommonZero) {
  CkCoverConfig cfg;
  cfg.pibasis = {{0}, {1}, {2}};
  const auto c = build_ck_cover(SpaceModel::sup_grid(4), cfg);
  const auto v = pibasis_witness_search(c.covering, singleton_basis(4), 5);
  ASSERT_TRUE(v.witness_found);
  EXPECT_EQ(v.open, (NodeSet{3}));
  EXPECT_EQ(v.bump, vec({0, 0, 0, 1}));
  for (std::size_t n = 0; n < c.covering.size(); ++n)
    EXPECT_GE(lp_norm(v.bump - c.covering.balls[n].center, kInf), c.covering.center_norms[n]);
  EXPECT_TRUE(v.uncovered);
}

TEST(CkCover, WitnessSearchNeedsLargeCenters) {
  const BallCovering c(SpaceModel::sup_grid(2), {{vec({1, 0}), 0.5}});
  EXPECT_THROW(pibasis_witness_search(c, singleton_basis(2), 3), Error);
}

TEST(CkxCover, WorkedExample) {
  const BallCovering x(SpaceModel::lp(2, 2.0), {{vec({2, 0}), 1.2}});
  const auto c = build_ckx_cover(2, x, singleton_basis(2));
  EXPECT_EQ(c.covering.balls[0].radius, 1.6);
  const Vector g = vec({1, 0, 1, 0});
  const auto cert = certify_ckx_point(c, g);
  ASSERT_TRUE(cert);
  EXPECT_LE(cert->cert.distance, 1.6);
  const Vector h = vec({1, 0, 0, 0});  // f_1 x_t / ||x_t||
  const auto hc = certify_ckx_point(c, h);
  ASSERT_TRUE(hc);
  EXPECT_LE(hc->cert.distance, c.covering.balls[hc->cert.ball_index].radius);
}

TEST(CkxCover, RejectsUnscaledX) {
  const BallCovering x(SpaceModel::lp(2, 2.0), {{vec({2, 0}), 0.9}});
  EXPECT_THROW(build_ckx_cover(2, x, singleton_basis(2)), Error);
}

TEST(CkxCover, MonteCarloBothForms) {
  const auto base = axis_cover(2, 2.0);
  const auto bcp = build_ckx_cover(4, base, singleton_basis(4));
  const auto ubcp = build_ckx_cover(4, rescale_covering(base, base.origin_gap), singleton_basis(4), RadiusForm::ubcp);
  EXPECT_NEAR(ubcp.r_star, base.origin_gap, 1e-12);
  EXPECT_TRUE(classify_covering(ubcp.covering).uniform);
  for (const auto* c : {&bcp, &ubcp}) {
    EXPECT_TRUE(classify_covering(c->covering).admissible);
    for (std::uint64_t s = 0; s < 1000; ++s) {
      const auto g = sample_sphere(c->covering.space, s);
      const auto cert = certify_ckx_point(*c, g);
      ASSERT_TRUE(cert);
      ASSERT_GT(cert->cert.margin, 0.0);
    }
  }
}

TEST(CkxTransfer, RoundTrip) {
  const auto X = SpaceModel::lp(2, 2.0);
  const auto c = build_ckx_cover(4, axis_cover(2, 2.0), singleton_basis(4));
  const auto tr = ckx_transfer(c.covering, X, 50);
  EXPECT_TRUE(classify_covering(tr.x_cover).admissible);
  for (std::size_t n = 0; n < tr.x_cover.size(); ++n) EXPECT_LT(tr.x_cover.balls[n].radius, tr.x_cover.center_norms[n]);
  for (std::uint64_t s = 0; s < 1000; ++s) {
    ASSERT_TRUE(find_cover(tr.x_cover, sample_sphere(X, s)));
    const auto f = sample_sphere(SpaceModel::sup_grid(4), s + 5000);
    const auto cert = certify_scalar(tr, c.covering, f);
    ASSERT_GT(cert.cert.margin, 0.0);
    ASSERT_LE(cert.m, 50);
  }
}

TEST(CkxTransfer, ConstantFunctionChain) {
  const auto X = SpaceModel::lp(2, 2.0);
  const auto c = build_ckx_cover(3, axis_cover(2, 2.0), singleton_basis(3));
  const auto tr = ckx_transfer(c.covering, X, 8);
  const Vector x = sample_sphere(X, 3);
  Vector Fx(6);
  Fx << x, x, x;
  const auto src = find_cover(c.covering, Fx);
  ASSERT_TRUE(src);
  const auto n0 = src->ball_index;
  EXPECT_LE(lp_norm(x - tr.x_cover.balls[n0].center, 2.0), tr.x_cover.balls[n0].radius + 1e-12);
}

TEST(CkxTransfer, ExhaustionIsReported) {
  // one ball around F = (3 e1, 2 e1): f = (1, -1) lifts inside it but needs m = 2
  const auto X = SpaceModel::lp(2, 2.0);
  Vector center(4);
  center << 3, 0, 2, 0;
  const BallCovering c(SpaceModel::linf_power(X, 2), {{center, 2.5}});
  Vector f(2);
  f << 1, -1;
  const auto tight = ckx_transfer(c, X, 1);
  try {
    certify_scalar(tight, c, f);
    FAIL() << "m_max = 1 should not suffice";
  } catch (const ScalarTransferExhausted& e) {
    EXPECT_EQ(e.m_max(), 1);
    EXPECT_EQ(e.sample(), f);
  }
  const auto cert = certify_scalar(ckx_transfer(c, X, 2), c, f);
  EXPECT_EQ(cert.m, 2);
  EXPECT_DOUBLE_EQ(cert.cert.distance, 5.0);
}

TEST(Complementation, ConvergentModelOntoCube) {
  const auto cm = topology::convergent_model(4, 2);
  auto K = std::make_shared<const topology::FiniteSpace>(cm.space);
  auto L = std::make_shared<const topology::FiniteSpace>(topology::discrete_cube(2));
  const auto c = complementation_pair(topology::projection_to_cube(cm, K, L), topology::base_section(cm, L, K));
  EXPECT_TRUE(c.left_inverse);
  EXPECT_TRUE(c.idempotent);
  EXPECT_EQ(c.norm_alpha, 1);
  EXPECT_EQ(c.norm_beta, 1);
  EXPECT_EQ(c.t_beta * c.t_alpha, Eigen::MatrixXi::Identity(4, 4));
  Eigen::VectorXi h = Eigen::VectorXi::Ones(4);
  EXPECT_EQ((c.t_alpha * h).cwiseAbs().maxCoeff(), 1);
  Eigen::VectorXi g(8);
  g << 3, -1, 4, 1, -5, 9, 2, -6;
  EXPECT_EQ(c.projection * (c.projection * g), c.projection * g);
}

TEST(Complementation, RejectsBadPairs) {
  auto S = std::make_shared<const topology::FiniteSpace>(topology::sierpinski());
  const topology::PointMap swap(S, S, {1, 0});
  const topology::PointMap id(S, S, {0, 1});
  EXPECT_THROW(complementation_pair(swap, swap), Error);
  const topology::PointMap collapse(S, S, {0, 0});
  EXPECT_THROW(complementation_pair(collapse, id), Error);  // collapse o id is not the identity
  EXPECT_NO_THROW(complementation_pair(id, id));
}
