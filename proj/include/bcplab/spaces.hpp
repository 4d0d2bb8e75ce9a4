#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "bcplab/core.hpp"
#include "bcplab/opnorm.hpp"

namespace bcplab {

enum class GridMode { discrete, lipschitz };

// Finite-dimensional normed space. Vectors are flat; an operator space stores its matrix row-major
// and an l_inf-sum concatenates its blocks.
struct SpaceModel {
  enum class Kind { lp, sup_grid, linf_sum, op };

  Kind kind = Kind::lp;
  int n = 1;         // lp dimension or number of grid nodes
  double p = 2.0;    // lp exponent, codomain exponent for operators
  GridMode mode = GridMode::discrete;
  double slope = 0.0;  // Lipschitz bound (Lambda) in lipschitz mode
  std::vector<SpaceModel> blocks;
  int rows = 0, cols = 0;
  double q = 2.0;    // domain exponent for operators

  static SpaceModel lp(int dim, double exponent) {
    if (dim < 1) throw ConfigError("lp space needs n >= 1");
    require_exponent(exponent);
    SpaceModel s;
    s.kind = Kind::lp;
    s.n = dim;
    s.p = exponent;
    return s;
  }

  static SpaceModel sup_grid(int nodes) {
    if (nodes < 1) throw ConfigError("sup grid needs at least one node");
    SpaceModel s;
    s.kind = Kind::sup_grid;
    s.n = nodes;
    s.p = kInf;
    return s;
  }

  // Piecewise-linear functions on the equispaced grid of [0,1] with N = nodes - 1 intervals.
  static SpaceModel lipschitz_grid(int nodes, double lambda) {
    if (nodes < 2) throw ConfigError("lipschitz grid needs at least two nodes");
    if (!(lambda > 0.0)) throw ConfigError("lipschitz bound must be positive");
    SpaceModel s = sup_grid(nodes);
    s.mode = GridMode::lipschitz;
    s.slope = lambda;
    return s;
  }

  static SpaceModel linf_sum(std::vector<SpaceModel> parts) {
    if (parts.empty()) throw ConfigError("l_inf-sum needs at least one block");
    SpaceModel s;
    s.kind = Kind::linf_sum;
    s.p = kInf;
    s.blocks = std::move(parts);
    return s;
  }

  // C(K, X) for a discrete K with `nodes` points.
  static SpaceModel linf_power(const SpaceModel& block, int count) {
    if (count < 1) throw ConfigError("l_inf-power needs count >= 1");
    return linf_sum(std::vector<SpaceModel>(static_cast<std::size_t>(count), block));
  }

  static SpaceModel op(int m, int dom, double domain_exp, double codomain_exp) {
    if (m < 1 || dom < 1) throw ConfigError("operator space needs positive dimensions");
    require_exponent(domain_exp);
    require_exponent(codomain_exp);
    SpaceModel s;
    s.kind = Kind::op;
    s.rows = m;
    s.cols = dom;
    s.q = domain_exp;
    s.p = codomain_exp;
    return s;
  }

  Eigen::Index dim() const {
    switch (kind) {
      case Kind::lp:
      case Kind::sup_grid: return n;
      case Kind::op: return static_cast<Eigen::Index>(rows) * cols;
      case Kind::linf_sum: {
        Eigen::Index d = 0;
        for (const auto& b : blocks) d += b.dim();
        return d;
      }
    }
    return 0;
  }

  std::vector<Eigen::Index> block_offsets() const {
    std::vector<Eigen::Index> off{0};
    for (const auto& b : blocks) off.push_back(off.back() + b.dim());
    return off;
  }

  bool operator==(const SpaceModel& o) const {
    return kind == o.kind && n == o.n && (p == o.p) && mode == o.mode && slope == o.slope && blocks == o.blocks &&
           rows == o.rows && cols == o.cols && q == o.q;
  }
};

inline Matrix as_matrix(const SpaceModel& s, const Vector& v) {
  Matrix a(s.rows, s.cols);
  for (int i = 0; i < s.rows; ++i)
    for (int j = 0; j < s.cols; ++j) a(i, j) = v[static_cast<Eigen::Index>(i) * s.cols + j];
  return a;
}

inline Vector flatten(const Matrix& a) {
  Vector v(a.size());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) v[i * a.cols() + j] = a(i, j);
  return v;
}

inline double norm_of(const SpaceModel& s, const Vector& v, const AscentOptions& opt = {}) {
  if (v.size() != s.dim())
    throw DimensionError("vector of size " + std::to_string(v.size()) + " in a space of dimension " +
                         std::to_string(s.dim()));
  switch (s.kind) {
    case SpaceModel::Kind::lp: return lp_norm(v, s.p);
    case SpaceModel::Kind::sup_grid: return lp_norm(v, kInf);
    case SpaceModel::Kind::op: return operator_norm_value(as_matrix(s, v), s.q, s.p, opt);
    case SpaceModel::Kind::linf_sum: {
      double best = 0.0;
      const auto off = s.block_offsets();
      for (std::size_t k = 0; k < s.blocks.size(); ++k)
        best = std::max(best, norm_of(s.blocks[k], v.segment(off[k], off[k + 1] - off[k]), opt));
      return best;
    }
  }
  return 0.0;
}

// Largest |v[i+1] - v[i]| * N over the grid, N = nodes - 1.
inline double realized_slope(const SpaceModel& s, const Vector& v) {
  if (s.kind != SpaceModel::Kind::sup_grid || s.n < 2) return 0.0;
  double m = 0.0;
  for (Eigen::Index i = 0; i + 1 < v.size(); ++i) m = std::max(m, std::abs(v[i + 1] - v[i]));
  return m * (s.n - 1);
}

namespace detail {

inline Vector sample_raw(const SpaceModel& s, Rng& rng) {
  switch (s.kind) {
    case SpaceModel::Kind::lp: {
      Vector v(s.n);
      if (std::isinf(s.p)) {
        for (auto& x : v) x = uniform(rng, -1.0, 1.0);
      } else {
        // generalized-exponential coordinates, density ~ exp(-|x|^p)
        std::gamma_distribution<double> gam(1.0 / s.p, 1.0);
        for (auto& x : v) {
          const double mag = std::pow(gam(rng), 1.0 / s.p);
          x = uniform(rng, 0.0, 1.0) < 0.5 ? -mag : mag;
        }
      }
      return v;
    }
    case SpaceModel::Kind::sup_grid: {
      Vector v(s.n);
      if (s.mode == GridMode::discrete) {
        for (auto& x : v) x = uniform(rng, -1.0, 1.0);
        return v;
      }
      // start with |v0| >= 1/2 so the normalizing divisor is at least 1/2
      const double step = s.slope / (s.n - 1);
      v[0] = uniform(rng, 0.5, 1.0) * (uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0);
      for (int i = 1; i < s.n; ++i) v[i] = v[i - 1] + uniform(rng, -step, step);
      return v;
    }
    case SpaceModel::Kind::op: {
      Vector v(static_cast<Eigen::Index>(s.rows) * s.cols);
      for (auto& x : v) x = gaussian(rng);
      return v;
    }
    case SpaceModel::Kind::linf_sum: {
      const auto off = s.block_offsets();
      Vector v(s.dim());
      const auto k = std::uniform_int_distribution<std::size_t>(0, s.blocks.size() - 1)(rng);
      for (std::size_t b = 0; b < s.blocks.size(); ++b) {
        Vector part = sample_raw(s.blocks[b], rng);
        part /= norm_of(s.blocks[b], part);
        if (b != k) part *= uniform(rng, 0.0, 1.0);
        v.segment(off[b], off[b + 1] - off[b]) = part;
      }
      return v;
    }
  }
  return {};
}

}  // namespace detail

// Deterministic point of the unit sphere for a given seed.
inline Vector sample_sphere(const SpaceModel& s, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  for (;;) {
    Vector v = detail::sample_raw(s, rng);
    const double nv = norm_of(s, v);
    if (nv > 0.0 && std::isfinite(nv)) return v / nv;
  }
}

struct Ball {
  Vector center;
  double radius = 0.0;
};

class NotCovered : public Error {
 public:
  explicit NotCovered(double min_excess)
      : Error("point not covered; minimum excess distance " + std::to_string(min_excess)), min_excess_(min_excess) {}
  double min_excess() const { return min_excess_; }

 private:
  double min_excess_;
};

struct BallCovering {
  SpaceModel space;
  std::vector<Ball> balls;
  std::vector<double> center_norms;
  double radius_bound = 0.0;  // M
  double origin_gap = 0.0;    // r* = min(||c|| - r)
  // Open balls B(c, r) with strict containment; used when the natural radius is the center norm.
  bool open_balls = false;

  BallCovering() = default;
  BallCovering(SpaceModel s, std::vector<Ball> b, bool open = false, const AscentOptions& opt = {})
      : space(std::move(s)), balls(std::move(b)), open_balls(open) {
    if (balls.empty()) throw Error("covering needs at least one ball");
    origin_gap = kInf;
    for (const auto& ball : balls) {
      if (!(ball.radius > 0.0)) throw Error("ball radius must be positive");
      const double cn = norm_of(space, ball.center, opt);
      center_norms.push_back(cn);
      radius_bound = std::max(radius_bound, ball.radius);
      origin_gap = std::min(origin_gap, cn - ball.radius);
    }
  }

  std::size_t size() const { return balls.size(); }
};

struct Classification {
  double radius_bound = 0.0;
  double origin_gap = 0.0;
  bool admissible = false;  // every ball misses the origin
  bool strong = false;      // radii bounded (always at finite scale)
  bool uniform = false;     // admissible with a positive uniform gap
  Slack gap_slack = Slack::violated;
};

inline Classification classify_covering(const BallCovering& c) {
  Classification out;
  out.radius_bound = c.radius_bound;
  out.origin_gap = c.origin_gap;
  out.strong = std::isfinite(c.radius_bound);
  if (c.open_balls) {
    // an open ball of radius ||c|| still misses the origin
    out.admissible = c.origin_gap >= 0.0;
    out.gap_slack = classify_slack(c.origin_gap);
    out.uniform = out.gap_slack == Slack::verified;
    return out;
  }
  out.gap_slack = classify_slack(c.origin_gap);
  out.admissible = out.gap_slack == Slack::verified;
  out.uniform = out.admissible;
  return out;
}

struct CoverCertificate {
  Vector point;
  std::size_t ball_index = 0;
  double distance = 0.0;
  double margin = 0.0;  // radius - distance
};

inline bool ball_contains(const BallCovering& c, std::size_t k, double distance) {
  return c.open_balls ? distance < c.balls[k].radius : distance <= c.balls[k].radius + kContainTol;
}

// First ball in list order containing v, or nothing; min_excess receives min(distance - radius).
inline std::optional<CoverCertificate> find_cover(const BallCovering& c, const Vector& v, double* min_excess = nullptr,
                                                  const AscentOptions& opt = {}) {
  double excess = kInf;
  for (std::size_t k = 0; k < c.balls.size(); ++k) {
    const double d = norm_of(c.space, v - c.balls[k].center, opt);
    if (ball_contains(c, k, d)) return CoverCertificate{v, k, d, c.balls[k].radius - d};
    excess = std::min(excess, d - c.balls[k].radius);
  }
  if (min_excess) *min_excess = excess;
  return std::nullopt;
}

inline CoverCertificate certify_point(const BallCovering& c, const Vector& v, const AscentOptions& opt = {}) {
  double excess = kInf;
  if (auto cert = find_cover(c, v, &excess, opt)) return *cert;
  throw NotCovered(excess);
}

// (||s x|| - ||y - s x||, ||t x|| - ||y - t x||); the first never exceeds the second.
inline std::pair<double, double> scaling_margin(const Vector& x, const Vector& y, double s, double t,
                                                const SpaceModel& space) {
  if (!(s > 0.0) || !(s < t)) throw Error("scaling_margin needs 0 < s < t");
  const double nx = norm_of(space, x);
  if (nx == 0.0) throw Error("scaling_margin needs x != 0");
  return {s * nx - norm_of(space, y - s * x), t * nx - norm_of(space, y - t * x)};
}

// Pushes every center out to the common norm r** (default 2 + 2M + 1) with radius r** - r_star.
inline BallCovering rescale_covering(const BallCovering& c, double r_star, std::optional<double> r_double_star = {}) {
  if (c.open_balls) throw Error("rescale_covering expects closed balls");
  if (!(r_star >= 0.0)) throw Error("r_star must be nonnegative");
  if (r_star > c.origin_gap + kContainTol)
    throw Error("r_star " + std::to_string(r_star) + " exceeds the origin gap " + std::to_string(c.origin_gap));
  if (!(c.origin_gap > 0.0)) throw Error("rescale_covering needs an admissible covering");
  const double target = r_double_star.value_or(2.0 + 2.0 * c.radius_bound + 1.0);
  if (!(target > r_star)) throw Error("r** must exceed r_star");
  std::vector<Ball> out;
  out.reserve(c.balls.size());
  for (std::size_t k = 0; k < c.balls.size(); ++k) {
    const double cn = c.center_norms[k];
    Vector center = (cn == target) ? c.balls[k].center : Vector(c.balls[k].center * (target / cn));
    out.push_back({std::move(center), target - r_star});
  }
  return BallCovering(c.space, std::move(out));
}

// Centers +-a e_i with the radius sup over the sphere of the distance to the nearest axis center,
// ((a - mu)^p + 1 - mu^p)^(1/p) with mu = n^(-1/p), padded a quarter of the way toward a.
inline BallCovering axis_cover(int n, double p, double a = 2.0) {
  require_exponent(p);
  double bound;
  if (std::isinf(p)) {
    bound = std::max(1.0, a - 1.0);
  } else {
    const double mu = std::pow(static_cast<double>(n), -1.0 / p);
    bound = std::pow(std::pow(a - mu, p) + 1.0 - std::pow(mu, p), 1.0 / p);
  }
  if (!(bound < a)) throw ConfigError("axis centers of norm " + std::to_string(a) + " cannot cover this sphere");
  const double radius = bound + (a - bound) / 4.0;
  std::vector<Ball> balls;
  for (int i = 0; i < n; ++i) {
    for (double s : {1.0, -1.0}) balls.push_back({Vector::Unit(n, i) * (s * a), radius});
  }
  return BallCovering(SpaceModel::lp(n, p), std::move(balls));
}

// Centers at the sign vectors s in {-1,1}^n with radius (n-1)^(1/p) < ||s||_p = n^(1/p), p finite.
inline BallCovering sign_cover(int n, double p) {
  require_exponent(p);
  if (std::isinf(p)) throw ConfigError("sign_cover needs a finite exponent");
  if (n < 2 || n > 16) throw ConfigError("sign_cover needs 2 <= n <= 16");
  const double radius = std::pow(static_cast<double>(n - 1), 1.0 / p);
  std::vector<Ball> balls;
  for (std::uint32_t bits = 0; bits < (1u << n); ++bits) {
    Vector c(n);
    for (int i = 0; i < n; ++i) c[i] = (bits & (1u << i)) ? -1.0 : 1.0;
    balls.push_back({std::move(c), radius});
  }
  return BallCovering(SpaceModel::lp(n, p), std::move(balls));
}

// ---- JSON ----

inline nlohmann::json to_json(const SpaceModel& s) {
  using K = SpaceModel::Kind;
  switch (s.kind) {
    case K::lp: return {{"kind", "lp"}, {"n", s.n}, {"p", exponent_to_json(s.p)}};
    case K::sup_grid:
      if (s.mode == GridMode::discrete) return {{"kind", "sup_grid"}, {"nodes", s.n}, {"mode", "discrete"}};
      return {{"kind", "sup_grid"}, {"nodes", s.n}, {"mode", "lipschitz"}, {"lipschitz", s.slope}};
    case K::op:
      return {{"kind", "operator"}, {"rows", s.rows}, {"cols", s.cols}, {"q", exponent_to_json(s.q)},
              {"p", exponent_to_json(s.p)}};
    case K::linf_sum: {
      nlohmann::json b = nlohmann::json::array();
      for (const auto& x : s.blocks) b.push_back(to_json(x));
      return {{"kind", "linf_sum"}, {"blocks", b}};
    }
  }
  return {};
}

inline SpaceModel space_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "lp") return SpaceModel::lp(j.at("n").get<int>(), exponent_from_json(j.at("p")));
  if (kind == "sup_grid") {
    const auto mode = j.value("mode", std::string("discrete"));
    if (mode == "discrete") return SpaceModel::sup_grid(j.at("nodes").get<int>());
    if (mode == "lipschitz") return SpaceModel::lipschitz_grid(j.at("nodes").get<int>(), j.at("lipschitz").get<double>());
    throw ConfigError("unknown sup_grid mode '" + mode + "'");
  }
  if (kind == "operator")
    return SpaceModel::op(j.at("rows").get<int>(), j.at("cols").get<int>(), exponent_from_json(j.at("q")),
                          exponent_from_json(j.at("p")));
  if (kind == "linf_sum") {
    std::vector<SpaceModel> blocks;
    for (const auto& b : j.at("blocks")) blocks.push_back(space_from_json(b));
    return SpaceModel::linf_sum(std::move(blocks));
  }
  throw ConfigError("unknown space kind '" + kind + "'");
}

inline nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json a = nlohmann::json::array();
  for (auto x : v) a.push_back(x);
  return a;
}

inline Vector vector_from_json(const nlohmann::json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

inline nlohmann::json to_json(const BallCovering& c) {
  nlohmann::json balls = nlohmann::json::array();
  for (const auto& b : c.balls) balls.push_back({{"center", vector_to_json(b.center)}, {"radius", b.radius}});
  nlohmann::json out = {{"space", to_json(c.space)},
                        {"balls", balls},
                        {"radius_bound", c.radius_bound},
                        {"origin_gap", c.origin_gap}};
  if (c.open_balls) out["open_balls"] = true;
  return out;
}

inline BallCovering covering_from_json(const nlohmann::json& j) {
  std::vector<Ball> balls;
  for (const auto& b : j.at("balls")) balls.push_back({vector_from_json(b.at("center")), b.at("radius").get<double>()});
  return BallCovering(space_from_json(j.at("space")), std::move(balls), j.value("open_balls", false));
}

inline nlohmann::json to_json(const CoverCertificate& c) {
  return {{"ball_index", c.ball_index}, {"distance", c.distance}, {"margin", c.margin}};
}

}  // namespace bcplab
