#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "bcplab/core.hpp"
#include "bcplab/spaces.hpp"
#include "bcplab/topology.hpp"

namespace bcplab::ck {

// Grid nodes of a sup-grid model; a pi-basis member is a nonempty node set.
using NodeSet = std::vector<int>;

enum class BumpShape { indicator, hat };

struct CkCoverConfig {
  double lambda = 1.2;
  std::vector<NodeSet> pibasis;
  BumpShape shape = BumpShape::indicator;
};

inline std::vector<NodeSet> singleton_basis(int nodes) {
  std::vector<NodeSet> b;
  for (int i = 0; i < nodes; ++i) b.push_back({i});
  return b;
}

// All dyadic node intervals [k N / 2^j, (k+1) N / 2^j] of length >= 1/(2 Lambda) that span
// at least two grid steps; N = nodes - 1 must be a power of two.
inline std::vector<NodeSet> dyadic_basis(int nodes, double lambda_slope) {
  const int N = nodes - 1;
  if (N < 2 || (N & (N - 1)) != 0) throw ConfigError("dyadic basis needs nodes - 1 a power of two >= 2");
  std::vector<NodeSet> b;
  for (int parts = 1; parts <= N / 2; parts *= 2) {
    if (1.0 / parts < 1.0 / (2.0 * lambda_slope) - 1e-15) break;
    const int span = N / parts;
    for (int k = 0; k < parts; ++k) {
      NodeSet s;
      for (int i = k * span; i <= (k + 1) * span; ++i) s.push_back(i);
      b.push_back(std::move(s));
    }
  }
  return b;
}

// Nonnegative function of sup norm `height` supported inside the member: an indicator, or a tent
// peaking at the member's midpoint and vanishing at its end nodes.
inline Vector make_bump(int nodes, const NodeSet& member, double height, BumpShape shape) {
  Vector f = Vector::Zero(nodes);
  if (shape == BumpShape::indicator || member.size() == 1) {
    for (int i : member) f[i] = height;
    return f;
  }
  const int a = member.front(), b = member.back();
  if ((b - a) % 2 != 0 || b - a < 2) throw ConfigError("hat bump needs an interval with an interior midpoint");
  const int mid = (a + b) / 2;
  const double half = (b - a) / 2.0;
  for (int i : member) f[i] = height * (1.0 - std::abs(i - mid) / half);
  return f;
}

struct CkCover {
  BallCovering covering;
  std::vector<NodeSet> basis;
  std::vector<Vector> bumps;  // f_n with ||f_n|| = lambda
  double lambda = 0.0;
};

inline void validate_basis(int nodes, const std::vector<NodeSet>& basis) {
  if (basis.empty()) throw ConfigError("pi-basis must be nonempty");
  for (const auto& m : basis) {
    if (m.empty()) throw ConfigError("pi-basis member is empty");
    for (int i : m)
      if (i < 0 || i >= nodes) throw ConfigError("pi-basis member names a node outside the grid");
  }
}

// Centers +-f_n for every basis member, radius max(lambda - 1/2, 1).
inline CkCover build_ck_cover(const SpaceModel& K, const CkCoverConfig& cfg) {
  if (K.kind != SpaceModel::Kind::sup_grid) throw ConfigError("build_ck_cover needs a sup-grid model");
  if (!(cfg.lambda > 1.0 && cfg.lambda <= 1.5)) throw ConfigError("lambda must lie in (1, 3/2]");
  validate_basis(K.n, cfg.pibasis);
  CkCover out;
  out.basis = cfg.pibasis;
  out.lambda = cfg.lambda;
  const double radius = std::max(cfg.lambda - 0.5, 1.0);
  std::vector<Ball> balls;
  for (const auto& member : cfg.pibasis) {
    Vector f = make_bump(K.n, member, cfg.lambda, cfg.shape);
    balls.push_back({f, radius});
    balls.push_back({-f, radius});
    out.bumps.push_back(std::move(f));
  }
  out.covering = BallCovering(K, std::move(balls));
  return out;
}

struct CkCertificate {
  CoverCertificate cert;
  std::size_t member = 0;
  int sign = 1;
};

// Follows the covering argument: with s the sign of the peak of g, pick a basis member inside
// {s g > 1/2} (best margin, peak-containing members first) and use the ball around s f_n.
// Empty when no member fits in the superlevel set, i.e. the basis hypothesis fails for g.
inline std::optional<CkCertificate> certify_ck_point(const CkCover& c, const Vector& g) {
  Eigen::Index peak;
  g.cwiseAbs().maxCoeff(&peak);
  const int s = g[peak] >= 0 ? 1 : -1;
  std::optional<CkCertificate> best;
  bool best_has_peak = false;
  for (std::size_t n = 0; n < c.basis.size(); ++n) {
    const auto& member = c.basis[n];
    bool inside = true;
    bool has_peak = false;
    for (int i : member) {
      if (!(s * g[i] > 0.5)) inside = false;
      if (i == peak) has_peak = true;
    }
    if (!inside) continue;
    const std::size_t k = 2 * n + (s < 0 ? 1 : 0);
    const double d = lp_norm(g - c.covering.balls[k].center, kInf);
    const double margin = c.covering.balls[k].radius - d;
    const bool better = !best || (has_peak && !best_has_peak) ||
                        (has_peak == best_has_peak && margin > best->cert.margin);
    if (better) {
      best = CkCertificate{CoverCertificate{g, k, d, margin}, n, s};
      best_has_peak = has_peak;
    }
  }
  return best;
}

// A_{n,k} = { tau : |g_n(tau)| > ||g_n|| - 1/k }
inline NodeSet level_set(const Vector& center, int k) {
  const double top = lp_norm(center, kInf);
  NodeSet out;
  for (Eigen::Index i = 0; i < center.size(); ++i)
    if (std::abs(center[i]) > top - 1.0 / k) out.push_back(static_cast<int>(i));
  return out;
}

struct WitnessVerdict {
  bool witness_found = false;
  std::optional<std::size_t> open_index;  // candidate open U containing no A_{n,k}
  NodeSet open;
  Vector bump;                            // f supported in U with ||f|| = 1
  std::vector<double> excess;             // ||f - g_n|| - ||g_n|| >= 0 for every center
  bool uncovered = false;                 // f also fails certify_point against the covering
};

inline bool subset_of(const NodeSet& a, const NodeSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// Searches the candidate opens for one that contains no level set A_{n,k}, k = 1..k_max. For such a U
// every center attains its norm off U, so a unit bump inside U sits at distance >= ||g_n|| from g_n.
inline WitnessVerdict pibasis_witness_search(const BallCovering& c, const std::vector<NodeSet>& candidate_opens,
                                             int k_max, BumpShape shape = BumpShape::indicator) {
  if (c.space.kind != SpaceModel::Kind::sup_grid) throw ConfigError("witness search needs a C(K) covering");
  if (k_max < 1) throw ConfigError("k_max must be >= 1");
  for (std::size_t n = 0; n < c.balls.size(); ++n)
    if (!(c.center_norms[n] > 1.0)) throw Error("witness search needs every center of norm > 1");
  std::vector<std::vector<NodeSet>> levels(c.balls.size());
  for (std::size_t n = 0; n < c.balls.size(); ++n)
    for (int k = 1; k <= k_max; ++k) levels[n].push_back(level_set(c.balls[n].center, k));

  WitnessVerdict out;
  for (std::size_t u = 0; u < candidate_opens.size(); ++u) {
    NodeSet open = candidate_opens[u];
    std::sort(open.begin(), open.end());
    bool contains_level = false;
    for (const auto& per_center : levels) {
      for (const auto& a : per_center)
        if (subset_of(a, open)) contains_level = true;
      if (contains_level) break;
    }
    if (contains_level) continue;
    Vector f = make_bump(c.space.n, open, 1.0, shape);
    std::vector<double> excess;
    bool all = true;
    for (std::size_t n = 0; n < c.balls.size(); ++n) {
      const double e = lp_norm(f - c.balls[n].center, kInf) - c.center_norms[n];
      excess.push_back(e);
      if (e < 0.0) all = false;
    }
    if (!all) continue;
    out.witness_found = true;
    out.open_index = u;
    out.open = open;
    out.excess = std::move(excess);
    out.uncovered = !find_cover(c, f).has_value();
    out.bump = std::move(f);
    return out;
  }
  return out;
}

// ---- C(K, X) for a discrete K ----

enum class RadiusForm { bcp, ubcp };

struct CkxCover {
  BallCovering covering;  // over linf_power(X, nodes)
  SpaceModel x_space;
  int nodes = 0;
  std::vector<NodeSet> basis;
  BallCovering x_cover;
  RadiusForm form = RadiusForm::bcp;
  double r_star = 0.0;       // ubcp form only
  double r_double_star = 0.0;

  std::size_t ball_index(std::size_t member, std::size_t t) const { return member * x_cover.size() + t; }
};

inline Vector block(const SpaceModel& x, const Vector& v, int tau) {
  return v.segment(static_cast<Eigen::Index>(tau) * x.dim(), x.dim());
}

// Centers f_n x_t for unit indicator bumps f_n. BCP radius max((||x_t|| + r_t)/2, 1) needs
// 1 < r_t < ||x_t||; the UBCP radius r** - r*/2 needs every ||x_t|| = r** and r_t = r** - r*.
inline CkxCover build_ckx_cover(int nodes, const BallCovering& x_cov, std::vector<NodeSet> basis,
                                RadiusForm form = RadiusForm::bcp) {
  if (nodes < 1) throw ConfigError("C(K,X) needs at least one node");
  validate_basis(nodes, basis);
  CkxCover out;
  out.x_space = x_cov.space;
  out.nodes = nodes;
  out.basis = std::move(basis);
  out.x_cover = x_cov;
  out.form = form;
  const auto dx = x_cov.space.dim();
  if (form == RadiusForm::bcp) {
    for (std::size_t t = 0; t < x_cov.size(); ++t) {
      const double r = x_cov.balls[t].radius;
      if (!(r > 1.0 && r < x_cov.center_norms[t]))
        throw Error("X covering must satisfy 1 < r_t < ||x_t|| (rescale it first)");
    }
  } else {
    out.r_double_star = x_cov.center_norms.front();
    out.r_star = out.r_double_star - x_cov.balls.front().radius;
    for (std::size_t t = 0; t < x_cov.size(); ++t) {
      if (std::abs(x_cov.center_norms[t] - out.r_double_star) > 1e-9 * out.r_double_star ||
          std::abs(x_cov.balls[t].radius - x_cov.balls.front().radius) > 1e-12)
        throw Error("UBCP form needs X centers of common norm r** and common radius r** - r*");
    }
    if (!(out.r_star > 0.0)) throw Error("UBCP form needs r* > 0");
  }
  std::vector<Ball> balls;
  for (const auto& member : out.basis) {
    for (std::size_t t = 0; t < x_cov.size(); ++t) {
      Vector center = Vector::Zero(dx * nodes);
      for (int tau : member) center.segment(static_cast<Eigen::Index>(tau) * dx, dx) = x_cov.balls[t].center;
      const double radius = form == RadiusForm::bcp
                                ? std::max((x_cov.center_norms[t] + x_cov.balls[t].radius) / 2.0, 1.0)
                                : out.r_double_star - out.r_star / 2.0;
      balls.push_back({std::move(center), radius});
    }
  }
  out.covering = BallCovering(SpaceModel::linf_power(x_cov.space, nodes), std::move(balls));
  return out;
}

struct CkxCertificate {
  CoverCertificate cert;
  int peak_node = 0;        // tau_0 with ||g(tau_0)|| = 1
  std::size_t x_ball = 0;   // t with ||x_t - x_g|| <= r_t
  std::size_t member = 0;   // U_m inside g^{-1}(B(x_g, rho))
  double rho = 0.0;
};

// Constructive certificate: x_g = g(tau_0) of norm 1, an X-ball t holding x_g, and a basis member
// inside g^{-1}(B(x_g, rho)) with rho = (||x_t|| - r_t)/2 (BCP) or r*/2 (UBCP).
inline std::optional<CkxCertificate> certify_ckx_point(const CkxCover& c, const Vector& g) {
  const auto& X = c.x_space;
  int peak = 0;
  double top = -1.0;
  for (int tau = 0; tau < c.nodes; ++tau) {
    const double v = norm_of(X, block(X, g, tau));
    if (v > top) {
      top = v;
      peak = tau;
    }
  }
  const Vector xg = block(X, g, peak);
  auto xcert = find_cover(c.x_cover, xg);
  if (!xcert) return std::nullopt;
  const std::size_t t = xcert->ball_index;
  const double rho = c.form == RadiusForm::bcp ? (c.x_cover.center_norms[t] - c.x_cover.balls[t].radius) / 2.0
                                               : c.r_star / 2.0;
  std::optional<CkxCertificate> best;
  bool best_has_peak = false;
  for (std::size_t m = 0; m < c.basis.size(); ++m) {
    bool inside = true, has_peak = false;
    for (int tau : c.basis[m]) {
      if (!(norm_of(X, block(X, g, tau) - xg) < rho)) inside = false;
      if (tau == peak) has_peak = true;
    }
    if (!inside) continue;
    const std::size_t k = c.ball_index(m, t);
    const double d = norm_of(c.covering.space, g - c.covering.balls[k].center);
    const double margin = c.covering.balls[k].radius - d;
    if (!best || (has_peak && !best_has_peak) || (has_peak == best_has_peak && margin > best->cert.margin)) {
      best = CkxCertificate{CoverCertificate{g, k, d, margin}, peak, t, m, rho};
      best_has_peak = has_peak;
    }
  }
  return best;
}

class ScalarTransferExhausted : public Error {
 public:
  ScalarTransferExhausted(Vector sample, int m_max)
      : Error("scalar transfer needs m > " + std::to_string(m_max)), sample_(std::move(sample)), m_max_(m_max) {}
  const Vector& sample() const { return sample_; }
  int m_max() const { return m_max_; }

 private:
  Vector sample_;
  int m_max_;
};

struct CkxTransfer {
  BallCovering x_cover;       // B(F_n(tau_n), r_n)
  BallCovering scalar_cover;  // open balls B(+-m ||F_n(.)||, m ||F_n||), m = 1..m_max
  std::vector<int> tau;       // norm-attaining node of each F_n
  std::vector<Vector> profiles;  // tau -> ||F_n(tau)||
  int m_max = 0;
  Vector probe;               // the fixed x in S_X used for f^+ x

  std::size_t scalar_index(std::size_t n, int m, int sign) const {
    return (n * static_cast<std::size_t>(m_max) + static_cast<std::size_t>(m - 1)) * 2 + (sign < 0 ? 1 : 0);
  }
};

// From a covering of S_{C(K,X)} (discrete K) build the X covering {B(F_n(tau_n), r_n)} and the
// scalar family {+-m ||F_n(.)||}.
inline CkxTransfer ckx_transfer(const BallCovering& c, const SpaceModel& x_space, int m_max,
                                std::optional<Vector> probe = {}) {
  if (m_max < 1) throw ConfigError("m_max must be >= 1");
  if (c.space.kind != SpaceModel::Kind::linf_sum) throw ConfigError("ckx_transfer needs a C(K,X) covering");
  for (const auto& b : c.space.blocks)
    if (!(b == x_space)) throw ConfigError("C(K,X) blocks must all equal the X model");
  if (!classify_covering(c).admissible) throw Error("ckx_transfer needs an admissible covering");
  const int nodes = static_cast<int>(c.space.blocks.size());
  CkxTransfer out;
  out.m_max = m_max;
  out.probe = probe.value_or(Vector::Unit(x_space.dim(), 0) / norm_of(x_space, Vector::Unit(x_space.dim(), 0)));
  std::vector<Ball> xb, sb;
  for (std::size_t n = 0; n < c.size(); ++n) {
    Vector prof(nodes);
    for (int tau = 0; tau < nodes; ++tau) prof[tau] = norm_of(x_space, block(x_space, c.balls[n].center, tau));
    Eigen::Index arg;
    prof.maxCoeff(&arg);
    out.tau.push_back(static_cast<int>(arg));
    xb.push_back({block(x_space, c.balls[n].center, static_cast<int>(arg)), c.balls[n].radius});
    const double top = prof[arg];
    for (int m = 1; m <= m_max; ++m) {
      sb.push_back({prof * m, m * top});
      sb.push_back({-prof * m, m * top});
    }
    out.profiles.push_back(std::move(prof));
  }
  out.x_cover = BallCovering(x_space, std::move(xb));
  out.scalar_cover = BallCovering(SpaceModel::sup_grid(nodes), std::move(sb), /*open=*/true);
  return out;
}

struct ScalarCertificate {
  CoverCertificate cert;
  std::size_t source_ball = 0;  // n_0 covering f^+ x
  int m = 0;
  int sign = 1;
};

// For f in S_{C(K)}: flip to make max f = 1, cover f^+ x by some F_{n0}, then find the first m with
// || f - m ||F_{n0}(.)|| || < m ||F_{n0}||. Throws ScalarTransferExhausted when m_max is not enough.
inline ScalarCertificate certify_scalar(const CkxTransfer& tr, const BallCovering& source, const Vector& f) {
  const int nodes = static_cast<int>(f.size());
  const int sign = f.maxCoeff() >= -f.minCoeff() ? 1 : -1;
  const Vector h = sign * f;
  const auto& X = tr.x_cover.space;
  Vector lifted = Vector::Zero(source.space.dim());
  for (int tau = 0; tau < nodes; ++tau)
    lifted.segment(static_cast<Eigen::Index>(tau) * X.dim(), X.dim()) = std::max(h[tau], 0.0) * tr.probe;
  const auto src = find_cover(source, lifted);
  if (!src) throw NotCovered(kInf);
  const std::size_t n0 = src->ball_index;
  for (int m = 1; m <= tr.m_max; ++m) {
    const std::size_t k = tr.scalar_index(n0, m, sign);
    const auto& ball = tr.scalar_cover.balls[k];
    const double d = lp_norm(f - ball.center, kInf);
    if (d < ball.radius) return {CoverCertificate{f, k, d, ball.radius - d}, n0, m, sign};
  }
  throw ScalarTransferExhausted(f, tr.m_max);
}

// ---- composition operators for a point map pair ----

struct Complementation {
  Eigen::MatrixXi t_alpha;  // C(L) -> C(K), h -> h o alpha
  Eigen::MatrixXi t_beta;   // C(K) -> C(L), g -> g o beta
  Eigen::MatrixXi projection;  // T_alpha T_beta on C(K)
  int norm_alpha = 0;
  int norm_beta = 0;
  bool left_inverse = false;   // T_beta T_alpha = id
  bool idempotent = false;     // P^2 = P
};

inline Eigen::MatrixXi composition_matrix(const topology::PointMap& map) {
  Eigen::MatrixXi t = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(map.source->size()),
                                            static_cast<Eigen::Index>(map.target->size()));
  for (std::size_t x = 0; x < map.source->size(); ++x) t(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(map(x))) = 1;
  return t;
}

inline int sup_operator_norm(const Eigen::MatrixXi& t) {
  return t.rows() == 0 ? 0 : t.cwiseAbs().rowwise().sum().maxCoeff();
}

// alpha : K -> L, beta : L -> K continuous with alpha o beta = id_L.
inline Complementation complementation_pair(const topology::PointMap& alpha, const topology::PointMap& beta) {
  if (!(*alpha.source == *beta.target) || !(*alpha.target == *beta.source))
    throw Error("alpha and beta must run between the same two spaces in opposite directions");
  if (!topology::is_continuous_map(alpha).holds) throw Error("alpha is not continuous");
  if (!topology::is_continuous_map(beta).holds) throw Error("beta is not continuous");
  if (!topology::is_identity(topology::compose(beta, alpha))) throw Error("alpha o beta is not the identity on L");
  Complementation out;
  out.t_alpha = composition_matrix(alpha);
  out.t_beta = composition_matrix(beta);
  const Eigen::MatrixXi id = Eigen::MatrixXi::Identity(out.t_beta.rows(), out.t_beta.rows());
  out.left_inverse = (out.t_beta * out.t_alpha) == id;
  out.projection = out.t_alpha * out.t_beta;
  out.idempotent = (out.projection * out.projection) == out.projection;
  out.norm_alpha = sup_operator_norm(out.t_alpha);
  out.norm_beta = sup_operator_norm(out.t_beta);
  return out;
}

}  // namespace bcplab::ck
