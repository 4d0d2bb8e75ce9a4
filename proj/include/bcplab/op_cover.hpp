#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include "bcplab/core.hpp"
#include "bcplab/opnorm.hpp"
#include "bcplab/spaces.hpp"

namespace bcplab::op {

class NetTooCoarse : public Error {
 public:
  NetTooCoarse(double required, double achieved)
      : Error("net too coarse: need a point within " + std::to_string(required) + ", nearest is " +
              std::to_string(achieved)),
        required_(required) {}
  double required_delta() const { return required_; }

 private:
  double required_;
};

class WindowMiss : public Error {
 public:
  explicit WindowMiss(double measured)
      : Error("candidate norm " + std::to_string(measured) + " falls outside the window"), measured_(measured) {}
  double measured() const { return measured_; }

 private:
  double measured_;
};

class EmptyWindow : public Error {
 public:
  using Error::Error;
};

class BoundViolation : public Error {
 public:
  using Error::Error;
};

class NormingFailure : public Error {
 public:
  using Error::Error;
};

class SeparationFailure : public Error {
 public:
  SeparationFailure(const std::string& what, double best) : Error(what + "; best separation " + std::to_string(best)), best_(best) {}
  double best() const { return best_; }

 private:
  double best_;
};

// Constants of the rank-k covering of B(X, l_p).
struct LpConstants {
  double p = 2.0;
  double lambda = 1.1;
  double c = 0.0;           // (1 - (2 lambda)^-p)^(1/p)
  double eps = 0.0;         // default (1 - c)/4
  double threshold = 0.0;   // max(1/2, lambda^(1-p))
  double window_lo = 0.0;   // (2 + c)/3
  double window_hi = 0.0;   // (4 - c)/3
  double radius = 0.0;      // lambda (1 + c)/2
  double distance_bound = 0.0;  // lambda (c + eps)
  double gap_bound = 0.0;       // lambda (1 - c)/6

  static LpConstants make(double p, double lambda, std::optional<double> eps = {}) {
    if (!(p > 1.0) || std::isinf(p)) throw ConfigError("p must lie in (1, inf)");
    if (!(lambda > 1.0)) throw ConfigError("lambda must exceed 1");
    LpConstants k;
    k.p = p;
    k.lambda = lambda;
    k.c = std::pow(1.0 - std::pow(2.0 * lambda, -p), 1.0 / p);
    k.eps = eps.value_or((1.0 - k.c) / 4.0);
    if (!(k.eps > 0.0 && k.eps < (1.0 - k.c) / 2.0)) throw ConfigError("eps must lie in (0, (1 - c)/2)");
    k.threshold = std::max(0.5, std::pow(lambda, 1.0 - p));
    k.window_lo = (2.0 + k.c) / 3.0;
    k.window_hi = (4.0 - k.c) / 3.0;
    k.radius = lambda * (1.0 + k.c) / 2.0;
    k.distance_bound = lambda * (k.c + k.eps);
    k.gap_bound = lambda * (1.0 - k.c) / 6.0;
    return k;
  }

  // Row tolerance min(eps/t0, (1 - c)/(3 t0)).
  double row_tolerance(int t0) const { return std::min(eps / t0, (1.0 - c) / (3.0 * t0)); }
};

// Lattice net h Z^n of the closed unit ball of l_s^n with h = 1/ceil(n^(1/s)/delta). Every point of
// the ball is within delta (in l_s) of a lattice point inside the ball, and +-e_i belong to it.
class DualNet {
 public:
  DualNet(int n, double s, double delta) : n_(n), s_(s), delta_(delta) {
    if (n < 1) throw ConfigError("net dimension must be >= 1");
    require_exponent(s);
    if (!(delta > 0.0 && delta <= 1.0)) throw ConfigError("net delta must lie in (0, 1]");
    const double spread = std::isinf(s) ? 1.0 : std::pow(static_cast<double>(n), 1.0 / s);
    steps_ = static_cast<long>(std::ceil(spread / delta - 1e-12));
    h_ = 1.0 / static_cast<double>(steps_);
  }

  int dim() const { return n_; }
  double exponent() const { return s_; }
  double delta() const { return delta_; }
  double step() const { return h_; }

  struct Point {
    std::vector<long> index;
    Vector value;
  };

  Point point(const std::vector<long>& index) const {
    Vector v(n_);
    for (int i = 0; i < n_; ++i) v[i] = static_cast<double>(index[static_cast<std::size_t>(i)]) * h_;
    return {index, v};
  }

  // Rounds to the nearest lattice point, falling back to truncation toward zero when rounding
  // leaves the ball.
  Point nearest(const Vector& target) const {
    if (target.size() != n_) throw DimensionError("net point dimension mismatch");
    std::vector<long> idx(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) idx[static_cast<std::size_t>(i)] = std::lround(target[i] / h_);
    Point pt = point(idx);
    if (lp_norm(pt.value, s_) > 1.0) {
      for (int i = 0; i < n_; ++i) idx[static_cast<std::size_t>(i)] = static_cast<long>(std::trunc(target[i] / h_));
      pt = point(idx);
    }
    return pt;
  }

  // Every lattice point of the ball; refuses beyond `limit` candidates.
  std::vector<Point> enumerate(std::size_t limit = 2'000'000) const {
    const double total = std::pow(2.0 * static_cast<double>(steps_) + 1.0, n_);
    if (total > static_cast<double>(limit)) throw ConfigError("net too large to enumerate");
    std::vector<Point> out;
    std::vector<long> idx(static_cast<std::size_t>(n_), -steps_);
    for (;;) {
      Point pt = point(idx);
      if (lp_norm(pt.value, s_) <= 1.0) out.push_back(std::move(pt));
      int k = 0;
      while (k < n_ && idx[static_cast<std::size_t>(k)] == steps_) idx[static_cast<std::size_t>(k++)] = -steps_;
      if (k == n_) break;
      ++idx[static_cast<std::size_t>(k)];
    }
    return out;
  }

 private:
  int n_;
  double s_;
  double delta_;
  long steps_ = 1;
  double h_ = 1.0;
};

struct LpCenterCandidate {
  std::vector<std::vector<long>> rows;  // net indices m_1..m_k
  Matrix prescale;                      // sum x*_{m_i} (x) e_i, padded to the codomain dimension
  double prescale_norm = 0.0;
  double lambda = 0.0;
  double c = 0.0;

  Matrix center() const { return lambda * prescale; }
};

inline Matrix stack_rows(const std::vector<Vector>& rows, int m, int n) {
  Matrix a = Matrix::Zero(m, n);
  for (std::size_t i = 0; i < rows.size(); ++i) a.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return a;
}

// All rank-k candidates (k <= k_max) over the enumerated net whose prescale norm lies strictly
// inside the window. Operators act l_q^n -> l_p^m with q the conjugate of the net exponent.
inline std::vector<LpCenterCandidate> enumerate_lp_centers(const DualNet& net, double lambda, double p, int k_max,
                                                           int m, std::size_t limit = 2'000'000) {
  const auto k = LpConstants::make(p, lambda);
  if (k_max < 1 || k_max > m) throw ConfigError("k_max must lie in [1, m]");
  const double q = conjugate_exponent(net.exponent());
  const auto pts = net.enumerate();
  double combos = 0.0;
  for (int r = 1; r <= k_max; ++r) combos += std::pow(static_cast<double>(pts.size()), r);
  if (combos > static_cast<double>(limit)) throw ConfigError("too many candidate tuples to enumerate");
  std::vector<LpCenterCandidate> out;
  for (int rank = 1; rank <= k_max; ++rank) {
    std::vector<std::size_t> pick(static_cast<std::size_t>(rank), 0);
    for (;;) {
      std::vector<Vector> rows;
      for (auto i : pick) rows.push_back(pts[i].value);
      Matrix pre = stack_rows(rows, m, net.dim());
      const double nrm = operator_norm(pre, q, p).value;
      if (nrm > k.window_lo && nrm < k.window_hi) {
        LpCenterCandidate cand;
        for (auto i : pick) cand.rows.push_back(pts[i].index);
        cand.prescale = std::move(pre);
        cand.prescale_norm = nrm;
        cand.lambda = lambda;
        cand.c = k.c;
        out.push_back(std::move(cand));
      }
      int d = 0;
      while (d < rank && pick[static_cast<std::size_t>(d)] + 1 == pts.size()) pick[static_cast<std::size_t>(d++)] = 0;
      if (d == rank) break;
      ++pick[static_cast<std::size_t>(d)];
    }
  }
  if (out.empty()) throw EmptyWindow("no candidate of rank <= k_max falls in the window");
  return out;
}

enum class TruncationPolicy {
  smallest,  // smallest t0 above the threshold, moving up only if the distance bound fails
  full       // t0 = m (theta = 1)
};

struct LpCertificate {
  int t0 = 0;
  int t0_smallest = 0;
  double theta = 0.0;
  LpConstants constants;
  double row_tolerance = 0.0;
  std::vector<std::vector<long>> net_choices;
  std::vector<double> row_errors;
  LpCenterCandidate center;
  double center_norm = 0.0;
  double distance = 0.0;
  double radius = 0.0;
  double gap = 0.0;  // ||center|| - radius

  double distance_slack() const { return constants.distance_bound - distance; }
  double radius_slack() const { return radius - distance; }
  double center_slack() const { return center_norm - radius; }
  double gap_slack() const { return gap - constants.gap_bound; }
};

// Truncate T to its first t0 rows, renormalize by theta, snap each row to the net, scale by lambda.
inline LpCertificate certify_lp_operator(const Operator& T, double lambda, const DualNet& net,
                                         TruncationPolicy policy = TruncationPolicy::smallest,
                                         const AscentOptions& opt = {}) {
  const auto k = LpConstants::make(T.p, lambda);
  const auto m = static_cast<int>(T.rows());
  const auto n = static_cast<int>(T.cols());
  if (net.dim() != n) throw DimensionError("net dimension differs from the operator's domain");
  if (std::abs(net.exponent() - conjugate_exponent(T.q)) > 1e-12 &&
      !(std::isinf(net.exponent()) && std::isinf(conjugate_exponent(T.q))))
    throw ConfigError("net must live in the dual of the domain");
  const double tnorm = operator_norm(T, opt).value;
  if (std::abs(tnorm - 1.0) > kSphereTol) throw Error("certify_lp_operator needs ||T|| = 1, got " + std::to_string(tnorm));

  std::vector<double> theta(static_cast<std::size_t>(m) + 1, 0.0);
  int t_smallest = 0;
  for (int t = 1; t <= m; ++t) {
    theta[static_cast<std::size_t>(t)] = t == m ? tnorm : operator_norm(T.matrix.topRows(t), T.q, T.p, opt).value;
    if (!t_smallest && theta[static_cast<std::size_t>(t)] > k.threshold) t_smallest = t;
  }
  if (!t_smallest) throw Error("no truncation exceeds the threshold");

  std::string last_failure;
  const int first = policy == TruncationPolicy::full ? m : t_smallest;
  for (int t0 = first; t0 <= m; ++t0) {
    const double th = theta[static_cast<std::size_t>(t0)];
    if (!(th > k.threshold)) continue;
    LpCertificate cert;
    cert.t0 = t0;
    cert.t0_smallest = t_smallest;
    cert.theta = th;
    cert.constants = k;
    cert.row_tolerance = k.row_tolerance(t0);
    std::vector<Vector> rows;
    for (int i = 0; i < t0; ++i) {
      const Vector target = T.matrix.row(i).transpose() / th;
      auto pt = net.nearest(target);
      const double err = lp_norm(pt.value - target, net.exponent());
      if (!(err < cert.row_tolerance)) throw NetTooCoarse(cert.row_tolerance, err);
      cert.net_choices.push_back(pt.index);
      cert.row_errors.push_back(err);
      rows.push_back(std::move(pt.value));
    }
    LpCenterCandidate cand;
    cand.rows = cert.net_choices;
    cand.prescale = stack_rows(rows, m, n);
    cand.prescale_norm = operator_norm(cand.prescale, T.q, T.p, opt).value;
    cand.lambda = lambda;
    cand.c = k.c;
    if (!(cand.prescale_norm > k.window_lo && cand.prescale_norm < k.window_hi)) {
      if (t0 == m) throw WindowMiss(cand.prescale_norm);
      last_failure = "t0=" + std::to_string(t0) + " window miss " + std::to_string(cand.prescale_norm);
      continue;
    }
    cert.center_norm = lambda * cand.prescale_norm;
    cert.distance = operator_norm(T.matrix - cand.center(), T.q, T.p, opt).value;
    cert.radius = k.radius;
    cert.gap = cert.center_norm - cert.radius;
    cert.center = std::move(cand);
    if (cert.distance <= k.distance_bound) return cert;
    last_failure = "t0=" + std::to_string(t0) + " distance " + std::to_string(cert.distance);
  }
  throw BoundViolation("no truncation meets the distance bound (" + last_failure + ")");
}

// ---- Hilbert space rank-one covering ----

// Directions g/||g|| for g on the lattice h Z^n, h = 1/ceil(sqrt(n)/delta): within delta of every unit vector.
class SphereNet {
 public:
  SphereNet(int n, double delta) : n_(n), delta_(delta) {
    if (n < 1) throw ConfigError("sphere net dimension must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("sphere net delta must lie in (0, 1)");
    steps_ = static_cast<long>(std::ceil(std::sqrt(static_cast<double>(n)) / delta - 1e-12));
    h_ = 1.0 / static_cast<double>(steps_);
  }

  double delta() const { return delta_; }

  std::pair<std::vector<long>, Vector> nearest(const Vector& u) const {
    std::vector<long> idx(static_cast<std::size_t>(n_));
    Vector g(n_);
    for (int i = 0; i < n_; ++i) {
      idx[static_cast<std::size_t>(i)] = std::lround(u[i] / h_);
      g[i] = static_cast<double>(idx[static_cast<std::size_t>(i)]) * h_;
    }
    return {idx, g / g.norm()};
  }

 private:
  int n_;
  double delta_;
  long steps_;
  double h_;
};

struct HilbertCertificate {
  double lambda = 0.0;
  double delta = 0.0;
  Vector left, right;        // top singular pair of A
  Vector b_left, b_right;    // net points
  std::vector<long> left_index, right_index;
  double sigma1 = 0.0, sigma2 = 0.0;
  Matrix center;             // lambda b_n b_m^T
  double distance = 0.0;
  double bound = 0.0;        // 1 + (2 lambda + 2) delta
  double radius = 0.0;       // (1 + lambda)/2
  double gap = 0.0;          // lambda - radius
};

inline HilbertCertificate hilbert_rank_one_certify(const Matrix& A, double lambda, const SphereNet& net) {
  if (!(lambda > 1.0 && lambda < 2.0)) throw ConfigError("lambda must lie in (1, 2)");
  if (net.delta() > (lambda - 1.0) / (4.0 * lambda + 4.0) + 1e-15)
    throw ConfigError("net delta must not exceed (lambda - 1)/(4 lambda + 4)");
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (std::abs(sv(0) - 1.0) > kSphereTol) throw Error("hilbert_rank_one_certify needs ||A|| = 1");
  HilbertCertificate c;
  c.lambda = lambda;
  c.delta = net.delta();
  c.sigma1 = sv(0);
  c.sigma2 = sv.size() > 1 ? sv(1) : 0.0;
  c.left = svd.matrixU().col(0);
  c.right = svd.matrixV().col(0);
  auto [li, bl] = net.nearest(c.left);
  auto [ri, br] = net.nearest(c.right);
  const double el = (bl - c.left).norm(), er = (br - c.right).norm();
  if (el > net.delta()) throw NetTooCoarse(net.delta(), el);
  if (er > net.delta()) throw NetTooCoarse(net.delta(), er);
  c.left_index = std::move(li);
  c.right_index = std::move(ri);
  c.b_left = std::move(bl);
  c.b_right = std::move(br);
  c.center = lambda * c.b_left * c.b_right.transpose();
  c.distance = operator_norm_value(A - c.center, 2.0, 2.0);
  c.bound = 1.0 + (2.0 * lambda + 2.0) * net.delta();
  c.radius = (1.0 + lambda) / 2.0;
  c.gap = lambda - c.radius;
  return c;
}

// ---- a finite covering of the unit sphere of B(l_p^n, l_p^m) ----

struct FiniteLpCovering {
  BallCovering covering;
  double eta = 0.0;            // every unit operator lies within eta of some grid operator
  std::size_t grid_points = 0;
  std::size_t pool = 0;        // distinct candidate centers before selection
  double worst_distance = 0.0; // max over grid operators of the distance to their selected center
};

// Grid operators G/||G|| with G on the h-lattice of the max-entry cube surface form an eta-net of the
// sphere (eta = sqrt(mn) h for p = 2, mn h otherwise). Each grid operator is certified with the
// full truncation; a greedy cover keeps centers so every grid operator sits within radius - eta of
// one of them, which puts every unit operator inside a kept ball.
inline FiniteLpCovering finite_lp_covering(int m, int n, double p, double lambda, const DualNet& net, int grid_steps,
                                           const AscentOptions& opt = {}) {
  if (grid_steps < 1) throw ConfigError("grid_steps must be >= 1");
  const auto k = LpConstants::make(p, lambda);
  const int d = m * n;
  const double h = 1.0 / grid_steps;
  FiniteLpCovering out;
  out.eta = (p == 2.0 ? std::sqrt(static_cast<double>(d)) : static_cast<double>(d)) * h;
  if (!(out.eta < k.radius)) throw ConfigError("grid too coarse for the covering radius");

  const int side = 2 * grid_steps + 1;
  const double total = std::pow(static_cast<double>(side), d);
  if (total > 5e6) throw ConfigError("operator grid too large");
  std::vector<Matrix> grid;
  std::vector<int> idx(static_cast<std::size_t>(d), -grid_steps);
  for (;;) {
    bool on_surface = false;
    for (int v : idx) on_surface |= (v == grid_steps || v == -grid_steps);
    if (on_surface) {
      Matrix g(m, n);
      for (int i = 0; i < d; ++i) g(i / n, i % n) = idx[static_cast<std::size_t>(i)] * h;
      grid.push_back(g / operator_norm_value(g, p, p, opt));
    }
    int j = 0;
    while (j < d && idx[static_cast<std::size_t>(j)] == grid_steps) idx[static_cast<std::size_t>(j++)] = -grid_steps;
    if (j == d) break;
    ++idx[static_cast<std::size_t>(j)];
  }
  out.grid_points = grid.size();

  std::map<std::vector<std::vector<long>>, std::size_t> seen;
  std::vector<Matrix> pool;
  for (const auto& g : grid) {
    const auto cert = certify_lp_operator(Operator(g, p, p), lambda, net, TruncationPolicy::full, opt);
    if (seen.emplace(cert.net_choices, pool.size()).second) pool.push_back(cert.center.center());
  }
  out.pool = pool.size();

  const double reach = k.radius - out.eta;
  std::vector<std::vector<std::size_t>> covers(pool.size());
  for (std::size_t j = 0; j < pool.size(); ++j)
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (operator_norm_value(grid[i] - pool[j], p, p, opt) <= reach) covers[j].push_back(i);

  std::vector<bool> done(grid.size(), false);
  std::size_t remaining = grid.size();
  std::vector<std::size_t> chosen;
  while (remaining > 0) {
    std::size_t best = pool.size(), gain = 0;
    for (std::size_t j = 0; j < pool.size(); ++j) {
      std::size_t g = 0;
      for (auto i : covers[j]) g += !done[i];
      if (g > gain) {
        gain = g;
        best = j;
      }
    }
    if (best == pool.size()) throw Error("grid operator left uncovered by every candidate center");
    chosen.push_back(best);
    for (auto i : covers[best]) {
      if (!done[i]) {
        done[i] = true;
        --remaining;
      }
    }
  }
  std::vector<Ball> balls;
  for (auto j : chosen) balls.push_back({flatten(pool[j]), k.radius});
  for (const auto& g : grid) {
    double best = kInf;
    for (auto j : chosen) best = std::min(best, operator_norm_value(g - pool[j], p, p, opt));
    out.worst_distance = std::max(out.worst_distance, best);
  }
  out.covering = BallCovering(SpaceModel::op(m, n, p, p), std::move(balls), false, opt);
  return out;
}

// ---- coverings of Y and X* induced by a covering of the sphere of B(X, Y) ----

struct TransferOptions {
  double separation = 1e-3;
  int search = 10'000;
  std::uint64_t seed = 0x7a5fULL;
};

struct OperatorTransfer {
  BallCovering y_cover;      // B(T_n x_n / g(x_n), r_n / |g(x_n)|)
  BallCovering dual_cover;   // B(T_n^* g_n / g_n(y), r_n / |g_n(y)|)
  std::vector<Vector> x;     // x_n in S_X with ||T_n x_n|| > r_n
  std::vector<Vector> g_n;   // g_n in S_{Y*} with ||T_n^* g_n|| > r_n
  Vector g;                  // g in S_{X*} off every x_n^perp
  Vector y;                  // y in S_Y off every ker g_n
  double g_separation = 0.0; // min_n |g(x_n)|
  double y_separation = 0.0; // min_n |g_n(y)|
};

namespace detail {

template <class Eval>
inline Vector separating_search(const SpaceModel& s, const TransferOptions& o, std::uint64_t salt, Eval eval,
                                double& best) {
  best = -1.0;
  Vector arg;
  for (int i = 0; i < o.search; ++i) {
    Vector v = sample_sphere(s, trial_seed(o.seed ^ salt, static_cast<std::uint64_t>(i)));
    const double val = eval(v);
    if (val > best) {
      best = val;
      arg = std::move(v);
    }
  }
  return arg;
}

}  // namespace detail

inline OperatorTransfer operator_cover_transfer(const BallCovering& c, const TransferOptions& o = {},
                                                const AscentOptions& opt = {}) {
  if (c.space.kind != SpaceModel::Kind::op) throw ConfigError("operator_cover_transfer needs an operator covering");
  if (c.open_balls) throw ConfigError("operator_cover_transfer expects closed balls");
  const int m = c.space.rows, n = c.space.cols;
  const double q = c.space.q, p = c.space.p;
  const double qd = conjugate_exponent(q), pd = conjugate_exponent(p);
  OperatorTransfer out;
  std::vector<Matrix> T;
  for (std::size_t k = 0; k < c.size(); ++k) {
    T.push_back(as_matrix(c.space, c.balls[k].center));
    const double r = c.balls[k].radius;
    if (!(c.center_norms[k] - r > kStrictSlack))
      throw NormingFailure("ball " + std::to_string(k) + " has radius not below its center norm");
    const auto nr = operator_norm(T.back(), q, p, opt);
    Vector x = nr.argmax;
    x /= lp_norm(x, q);
    const Vector tx = T.back() * x;
    if (!(lp_norm(tx, p) - r > kStrictSlack)) throw NormingFailure("no norming vector beats r_" + std::to_string(k));
    Vector gn = dual_vector(tx, p);
    gn /= lp_norm(gn, pd);
    if (!(lp_norm(T.back().transpose() * gn, qd) - r > kStrictSlack))
      throw NormingFailure("no norming functional beats r_" + std::to_string(k));
    out.x.push_back(std::move(x));
    out.g_n.push_back(std::move(gn));
  }

  out.g = detail::separating_search(SpaceModel::lp(n, qd), o, 0x1ULL, [&](const Vector& g) {
    double worst = kInf;
    for (const auto& x : out.x) worst = std::min(worst, std::abs(g.dot(x)));
    return worst;
  }, out.g_separation);
  if (out.g_separation < o.separation) throw SeparationFailure("no functional separates the x_n", out.g_separation);

  out.y = detail::separating_search(SpaceModel::lp(m, p), o, 0x2ULL, [&](const Vector& y) {
    double worst = kInf;
    for (const auto& gn : out.g_n) worst = std::min(worst, std::abs(gn.dot(y)));
    return worst;
  }, out.y_separation);
  if (out.y_separation < o.separation) throw SeparationFailure("no vector separates the g_n", out.y_separation);

  std::vector<Ball> yb, xb;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double r = c.balls[k].radius;
    const double gx = out.g.dot(out.x[k]);
    yb.push_back({T[k] * out.x[k] / gx, r / std::abs(gx)});
    const double gy = out.g_n[k].dot(out.y);
    xb.push_back({T[k].transpose() * out.g_n[k] / gy, r / std::abs(gy)});
  }
  out.y_cover = BallCovering(SpaceModel::lp(m, p), std::move(yb));
  out.dual_cover = BallCovering(SpaceModel::lp(n, qd), std::move(xb));
  return out;
}

// ---- l_inf-sums ----

// Each block ball (c, r) with margin mu = ||c|| - r becomes the ball around (0, .., t c, .., 0),
// t = max(1, (1 + mu)/||c||), of radius ||t c|| - mu.
inline BallCovering linf_sum_cover(const std::vector<BallCovering>& covs) {
  if (covs.empty()) throw ConfigError("linf_sum_cover needs at least one block covering");
  std::vector<SpaceModel> blocks;
  for (const auto& c : covs) {
    if (!classify_covering(c).admissible || c.open_balls) throw Error("linf_sum_cover needs admissible closed coverings");
    blocks.push_back(c.space);
  }
  const auto sum = SpaceModel::linf_sum(blocks);
  const auto off = sum.block_offsets();
  std::vector<Ball> balls;
  for (std::size_t b = 0; b < covs.size(); ++b) {
    for (std::size_t k = 0; k < covs[b].size(); ++k) {
      const double cn = covs[b].center_norms[k];
      const double mu = cn - covs[b].balls[k].radius;
      const double t = std::max(1.0, (1.0 + mu) / cn);
      Vector center = Vector::Zero(sum.dim());
      center.segment(off[b], off[b + 1] - off[b]) = t * covs[b].balls[k].center;
      balls.push_back({std::move(center), t * cn - mu});
    }
  }
  return BallCovering(sum, std::move(balls));
}

// B(l_1^n, Y) = (sum_n Y)_inf through T -> (T e_j)_j.
inline Vector columns_as_sum(const Matrix& a) {
  Vector v(a.size());
  for (Eigen::Index j = 0; j < a.cols(); ++j) v.segment(j * a.rows(), a.rows()) = a.col(j);
  return v;
}

// B(X, l_inf^m) = (sum_m X*)_inf through T -> (e_i^* T)_i.
inline Vector rows_as_sum(const Matrix& a) {
  Vector v(a.size());
  for (Eigen::Index i = 0; i < a.rows(); ++i) v.segment(i * a.cols(), a.cols()) = a.row(i).transpose();
  return v;
}

// ---- JSON ----

inline nlohmann::json to_json(const LpConstants& k) {
  return {{"p", k.p},           {"lambda", k.lambda},       {"c", k.c},
          {"eps", k.eps},       {"threshold", k.threshold}, {"window", {k.window_lo, k.window_hi}},
          {"radius", k.radius}, {"distance_bound", k.distance_bound}, {"gap_bound", k.gap_bound}};
}

inline nlohmann::json to_json(const LpCertificate& c) {
  return {{"t0", c.t0},
          {"t0_smallest", c.t0_smallest},
          {"theta", c.theta},
          {"constants", to_json(c.constants)},
          {"row_tolerance", c.row_tolerance},
          {"net_choices", c.net_choices},
          {"row_errors", c.row_errors},
          {"center", matrix_to_json(c.center.center())},
          {"center_norm", c.center_norm},
          {"distance", c.distance},
          {"radius", c.radius},
          {"gap", c.gap}};
}

inline nlohmann::json to_json(const HilbertCertificate& c) {
  return {{"lambda", c.lambda},   {"delta", c.delta},     {"sigma", {c.sigma1, c.sigma2}},
          {"left_index", c.left_index}, {"right_index", c.right_index},
          {"distance", c.distance}, {"bound", c.bound}, {"radius", c.radius}, {"gap", c.gap}};
}

}  // namespace bcplab::op
