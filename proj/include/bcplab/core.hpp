#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace bcplab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// A strict inequality counts as verified only when its slack exceeds this.
inline constexpr double kStrictSlack = 1e-9;
// Closed-ball containment and sphere membership are checked to this absolute tolerance.
inline constexpr double kContainTol = 1e-12;
inline constexpr double kSphereTol = 1e-9;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

enum class Slack { verified, degenerate, violated };

inline Slack classify_slack(double slack) {
  if (slack > kStrictSlack) return Slack::verified;
  if (slack > 0.0) return Slack::degenerate;
  return Slack::violated;
}

inline const char* to_string(Slack s) {
  switch (s) {
    case Slack::verified: return "verified";
    case Slack::degenerate: return "degenerate";
    case Slack::violated: return "violated";
  }
  return "?";
}

// SplitMix64 finalizer; per-trial seeds are splitmix64(seed + trial).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) {
  return splitmix64(seed + trial);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double gaussian(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

// Hoelder conjugate: 1 <-> inf, otherwise p/(p-1).
inline double conjugate_exponent(double p) {
  if (p == 1.0) return kInf;
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

inline void require_exponent(double p) {
  if (!(p >= 1.0)) throw ConfigError("exponent must lie in [1, inf], got " + std::to_string(p));
}

inline double lp_norm(const Eigen::Ref<const Vector>& v, double p) {
  if (std::isinf(p)) return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
  if (p == 1.0) return v.cwiseAbs().sum();
  if (p == 2.0) return v.norm();
  // Scale by the max entry so |x|^p neither underflows nor overflows.
  const double scale = v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) acc += std::pow(std::abs(v[i]) / scale, p);
  return scale * std::pow(acc, 1.0 / p);
}

}  // namespace bcplab
