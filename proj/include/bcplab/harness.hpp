#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "bcplab/ck_cover.hpp"
#include "bcplab/core.hpp"
#include "bcplab/op_cover.hpp"
#include "bcplab/opnorm.hpp"
#include "bcplab/spaces.hpp"
#include "bcplab/topology.hpp"

namespace bcplab::harness {

using json = nlohmann::json;

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {"topology",   "ck_cover",      "ckx_cover", "ck_falsify",
                                                 "lp_operator", "hilbert",      "transfer_op", "transfer_ckx",
                                                 "linf_sum",   "lemma_scaling", "rescale",   "complementation"};
  return names;
}

struct ScenarioConfig {
  std::string scenario;
  json params = json::object();
  std::uint64_t seed = 0;
};

inline ScenarioConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ScenarioConfig c;
  try {
    c.scenario = j.at("scenario").get<std::string>();
    if (j.contains("params")) c.params = j.at("params");
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  for (const auto& [key, value] : j.items())
    if (key != "scenario" && key != "params" && key != "seed") throw ConfigError("unknown config field '" + key + "'");
  if (!c.params.is_object()) throw ConfigError("params must be a JSON object");
  const auto& names = scenario_names();
  if (std::find(names.begin(), names.end(), c.scenario) == names.end())
    throw ConfigError("unknown scenario '" + c.scenario + "'");
  return c;
}

enum class Verdict { pass, falsified, degenerate, error };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::falsified: return "falsified";
    case Verdict::degenerate: return "degenerate";
    case Verdict::error: return "error";
  }
  return "?";
}

inline int exit_code(Verdict v) {
  switch (v) {
    case Verdict::pass:
    case Verdict::degenerate: return 0;
    case Verdict::falsified: return 1;
    case Verdict::error: return 3;
  }
  return 3;
}

// status: verified | degenerate | violated | outside_hypothesis | error
struct TrialRecord {
  std::size_t trial = 0;
  std::string status;
  std::optional<std::size_t> ball_index;
  std::optional<double> distance, radius, margin, gap;
  double slack = std::numeric_limits<double>::quiet_NaN();
  json detail = json::object();
};

struct Report {
  ScenarioConfig config;
  json resolved = json::object();  // params with defaults filled in
  json summary = json::object();
  std::vector<TrialRecord> trials;
  std::size_t successes = 0;
  std::optional<double> min_margin, min_gap;
  double wall_time = 0.0;
  Verdict verdict = Verdict::pass;
  std::string message;
};

// Reads scenario parameters, recording every value used and rejecting unknown keys.
class Params {
 public:
  explicit Params(const json& j) : src_(j) {}

  template <class T>
  T get(const std::string& key, T fallback) {
    used_.insert(key);
    T v = fallback;
    if (src_.contains(key)) {
      try {
        v = src_.at(key).get<T>();
      } catch (const json::exception&) {
        throw ConfigError("parameter '" + key + "' has the wrong type");
      }
    }
    resolved_[key] = v;
    return v;
  }

  int integer(const std::string& key, int fallback, int lo, int hi) {
    const int v = get<int>(key, fallback);
    if (v < lo || v > hi)
      throw ConfigError("parameter '" + key + "' must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
  }

  double real(const std::string& key, double fallback, double lo, double hi, bool open_lo = false, bool open_hi = false) {
    const double v = get<double>(key, fallback);
    const bool ok = std::isfinite(v) && (open_lo ? v > lo : v >= lo) && (open_hi ? v < hi : v <= hi);
    if (!ok) throw ConfigError("parameter '" + key + "' out of range");
    return v;
  }

  double exponent(const std::string& key, double fallback) {
    used_.insert(key);
    double v = fallback;
    if (src_.contains(key)) {
      try {
        v = exponent_from_json(src_.at(key));
      } catch (const json::exception&) {
        throw ConfigError("parameter '" + key + "' must be a number or \"inf\"");
      } catch (const Error& e) {
        throw ConfigError("parameter '" + key + "': " + e.what());
      }
    }
    require_exponent(v);
    resolved_[key] = exponent_to_json(v);
    return v;
  }

  std::string choice(const std::string& key, const std::string& fallback, const std::vector<std::string>& allowed) {
    auto v = get<std::string>(key, fallback);
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end())
      throw ConfigError("parameter '" + key + "' has unsupported value '" + v + "'");
    return v;
  }

  SpaceModel space(const std::string& key, const json& fallback) {
    used_.insert(key);
    const json& j = src_.contains(key) ? src_.at(key) : fallback;
    try {
      auto s = space_from_json(j);
      resolved_[key] = to_json(s);
      return s;
    } catch (const json::exception&) {
      throw ConfigError("parameter '" + key + "' is not a valid space");
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError("parameter '" + key + "': " + e.what());
    }
  }

  void finish() const {
    for (const auto& [key, value] : src_.items())
      if (!used_.count(key)) throw ConfigError("unknown parameter '" + key + "'");
  }

  const json& resolved() const { return resolved_; }

 private:
  const json& src_;
  std::set<std::string> used_;
  json resolved_ = json::object();
};

namespace detail {

using TrialFn = std::function<TrialRecord(std::size_t, std::uint64_t)>;

struct Plan {
  json summary = json::object();
  std::size_t trials = 0;
  TrialFn trial;
  std::optional<Verdict> fixed;  // scenarios decided without sampling
  std::string message;
};

inline std::string status_of(double slack) {
  switch (classify_slack(slack)) {
    case Slack::verified: return "verified";
    case Slack::degenerate: return "degenerate";
    case Slack::violated: return "violated";
  }
  return "violated";
}

inline TrialRecord covered(std::size_t i, const CoverCertificate& c, double radius) {
  TrialRecord r;
  r.trial = i;
  r.ball_index = c.ball_index;
  r.distance = c.distance;
  r.radius = radius;
  r.margin = c.margin;
  r.slack = c.margin;
  // closed balls: a point on the boundary is covered, just without room to spare
  r.status = c.margin > kStrictSlack ? "verified" : c.margin >= -kContainTol ? "degenerate" : "violated";
  return r;
}

inline TrialRecord uncovered(std::size_t i, const BallCovering& c, const Vector& v) {
  TrialRecord r;
  r.trial = i;
  double excess = kInf;
  find_cover(c, v, &excess);
  r.status = "violated";
  r.slack = -excess;
  r.detail["min_excess"] = excess;
  r.detail["point"] = vector_to_json(v);
  return r;
}

// Closed-ball certificate by first containing ball, or an uncovered record.
inline TrialRecord check_point(std::size_t i, const BallCovering& c, const Vector& v) {
  if (auto cert = find_cover(c, v)) {
    auto r = covered(i, *cert, c.balls[cert->ball_index].radius);
    if (c.open_balls) r.status = status_of(cert->margin);
    return r;
  }
  return uncovered(i, c, v);
}

inline json hex_family(const std::vector<topology::PointSet>& f) {
  json a = json::array();
  for (const auto& s : f) a.push_back(topology::to_hex(s));
  return a;
}

inline json covering_summary(const BallCovering& c) {
  const auto cls = classify_covering(c);
  return {{"space", to_json(c.space)},
          {"balls", c.size()},
          {"radius_bound", c.radius_bound},
          {"origin_gap", c.origin_gap},
          {"admissible", cls.admissible},
          {"uniform", cls.uniform}};
}

inline BallCovering x_covering(const std::string& kind, const SpaceModel& x) {
  if (x.kind != SpaceModel::Kind::lp) throw ConfigError("X must be an lp space");
  if (kind == "axis") return axis_cover(x.n, x.p);
  return sign_cover(x.n, x.p);
}

inline Plan plan_topology(Params& P) {
  Plan plan;
  const auto kind = P.choice("space", "discrete_cube", {"discrete_cube", "convergent_model", "sierpinski"});
  std::map<std::string, int> args;
  if (kind != "sierpinski") args["m"] = P.integer("m", 3, 1, topology::kMaxCubeDim);
  if (kind == "convergent_model") args["N"] = P.integer("N", 4, 1, 4096);
  const auto family_json = P.get<std::vector<std::string>>("family", {});
  const auto space = topology::build_finite_space(kind, args);
  const auto mins = topology::minimal_open_sets(space);
  const auto self = topology::is_pibasis(space, mins.family);
  plan.summary["points"] = space.size();
  plan.summary["materialized"] = space.materialized();
  if (space.materialized()) plan.summary["opens"] = space.opens().size();
  plan.summary["pi_weight"] = mins.pi_weight;
  plan.summary["minimal_opens"] = hex_family(mins.family);
  plan.summary["minimal_family_is_pibasis"] = self.holds;
  // dropping any minimal open breaks the basis
  bool all_needed = true;
  for (std::size_t k = 0; k < mins.family.size(); ++k) {
    auto rest = mins.family;
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(k));
    if (!rest.empty() && topology::is_pibasis(space, rest).holds) all_needed = false;
  }
  plan.summary["every_minimal_open_needed"] = all_needed;
  plan.fixed = self.holds && all_needed ? Verdict::pass : Verdict::falsified;
  if (!family_json.empty()) {
    std::vector<topology::PointSet> family;
    for (const auto& h : family_json) family.push_back(topology::from_hex(h, space.size()));
    const auto v = topology::is_pibasis(space, family);
    plan.summary["family_is_pibasis"] = v.holds;
    if (v.witness) plan.summary["witness"] = topology::to_hex(*v.witness);
    if (!v.holds) {
      plan.fixed = Verdict::falsified;
      plan.message = "family misses the open set " + topology::to_hex(*v.witness);
    }
  }
  return plan;
}

inline Plan plan_ck_cover(Params& P) {
  Plan plan;
  const int nodes = P.integer("nodes", 8, 2, 1 << 16);
  const double lambda = P.real("lambda", 1.2, 1.0, 1.5, true, false);
  const auto mode = P.choice("mode", "discrete", {"discrete", "lipschitz"});
  const SpaceModel K = mode == "discrete" ? SpaceModel::sup_grid(nodes)
                                          : SpaceModel::lipschitz_grid(nodes, P.real("slope", 8.0, 0.0, 1e6, true));
  const auto basis_kind = P.choice("basis", mode == "discrete" ? "singleton" : "dyadic", {"singleton", "dyadic"});
  const auto shape = P.choice("shape", "indicator", {"indicator", "hat"});
  plan.trials = static_cast<std::size_t>(P.integer("trials", 1000, 1, 10'000'000));
  ck::CkCoverConfig cfg;
  cfg.lambda = lambda;
  cfg.shape = shape == "hat" ? ck::BumpShape::hat : ck::BumpShape::indicator;
  cfg.pibasis = basis_kind == "singleton" ? ck::singleton_basis(nodes) : ck::dyadic_basis(nodes, K.slope);
  auto cover = std::make_shared<const ck::CkCover>(ck::build_ck_cover(K, cfg));
  plan.summary["covering"] = covering_summary(cover->covering);
  plan.summary["basis_size"] = cover->basis.size();
  const bool singleton = basis_kind == "singleton";
  plan.trial = [cover, K, singleton](std::size_t i, std::uint64_t seed) {
    const Vector g = sample_sphere(K, seed);
    if (auto c = ck::certify_ck_point(*cover, g)) {
      auto r = covered(i, c->cert, cover->covering.balls[c->cert.ball_index].radius);
      r.detail["member"] = c->member;
      r.detail["sign"] = c->sign;
      return r;
    }
    // no basis member fits inside the superlevel set: the covering hypothesis is not met by g
    auto r = check_point(i, cover->covering, g);
    if (r.status == "violated" && singleton) return r;
    r.detail["covered"] = r.status != "violated";
    r.status = "outside_hypothesis";
    return r;
  };
  return plan;
}

inline Plan plan_ckx_cover(Params& P) {
  Plan plan;
  const int nodes = P.integer("nodes", 4, 1, 4096);
  const auto X = P.space("x", {{"kind", "lp"}, {"n", 2}, {"p", 2}});
  const auto xk = P.choice("x_cover", "axis", {"axis", "sign"});
  const auto form = P.choice("form", "bcp", {"bcp", "ubcp"});
  plan.trials = static_cast<std::size_t>(P.integer("trials", 1000, 1, 10'000'000));
  auto base = x_covering(xk, X);
  if (form == "ubcp") base = rescale_covering(base, base.origin_gap);
  auto cover = std::make_shared<const ck::CkxCover>(
      ck::build_ckx_cover(nodes, base, ck::singleton_basis(nodes), form == "bcp" ? ck::RadiusForm::bcp : ck::RadiusForm::ubcp));
  plan.summary["x_covering"] = covering_summary(cover->x_cover);
  plan.summary["covering"] = covering_summary(cover->covering);
  plan.trial = [cover](std::size_t i, std::uint64_t seed) {
    const Vector g = sample_sphere(cover->covering.space, seed);
    if (auto c = ck::certify_ckx_point(*cover, g)) {
      auto r = covered(i, c->cert, cover->covering.balls[c->cert.ball_index].radius);
      r.detail["peak_node"] = c->peak_node;
      r.detail["x_ball"] = c->x_ball;
      r.detail["rho"] = c->rho;
      return r;
    }
    return check_point(i, cover->covering, g);
  };
  return plan;
}

inline Plan plan_ck_falsify(Params& P) {
  Plan plan;
  const int nodes = P.integer("nodes", 8, 2, 1 << 16);
  const double lambda = P.real("lambda", 1.2, 1.0, 1.5, true, false);
  const int zero = P.integer("zero_node", 0, 0, nodes - 1);
  const int k_max = P.integer("k_max", 4, 1, 1 << 20);
  std::vector<ck::NodeSet> basis;
  for (int i = 0; i < nodes; ++i)
    if (i != zero) basis.push_back({i});
  ck::CkCoverConfig cfg;
  cfg.lambda = lambda;
  cfg.pibasis = basis;
  const auto cover = ck::build_ck_cover(SpaceModel::sup_grid(nodes), cfg);
  plan.summary["covering"] = covering_summary(cover.covering);
  const auto w = ck::pibasis_witness_search(cover.covering, ck::singleton_basis(nodes), k_max);
  plan.summary["witness_found"] = w.witness_found;
  if (w.witness_found) {
    plan.summary["witness"] = {{"open", w.open},
                               {"bump", vector_to_json(w.bump)},
                               {"min_excess", *std::min_element(w.excess.begin(), w.excess.end())},
                               {"uncovered", w.uncovered}};
    plan.fixed = Verdict::falsified;
    plan.message = "witness bump supported in an open set containing no level set";
  } else {
    plan.fixed = Verdict::pass;
  }
  return plan;
}

inline Plan plan_lp_operator(Params& P) {
  Plan plan;
  const int m = P.integer("m", 4, 1, 64);
  const int n = P.integer("n", m, 1, 64);
  const double p = P.real("p", 2.0, 1.0, 1e6, true, false);
  const double q = P.exponent("q", p);
  const double lambda = P.real("lambda", 1.1, 1.0, 1e6, true, false);
  const int k_max = P.integer("k_max", m, 1, m);
  const auto k = op::LpConstants::make(p, lambda);
  const double delta = P.real("delta", (1.0 - k.c) / (6.0 * k_max), 0.0, 1.0, true, false);
  const auto policy = P.choice("policy", "smallest", {"smallest", "full"});
  plan.trials = static_cast<std::size_t>(P.integer("trials", 1000, 1, 10'000'000));
  auto net = std::make_shared<const op::DualNet>(n, conjugate_exponent(q), delta);
  plan.summary["constants"] = op::to_json(k);
  plan.summary["net_step"] = net->step();
  const auto pol = policy == "full" ? op::TruncationPolicy::full : op::TruncationPolicy::smallest;
  plan.trial = [=](std::size_t i, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    Matrix a(m, n);
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      for (Eigen::Index c = 0; c < a.cols(); ++c) a(r, c) = gaussian(rng);
    a /= operator_norm(a, q, p).value;
    TrialRecord r;
    r.trial = i;
    try {
      const auto cert = op::certify_lp_operator(Operator(a, q, p), lambda, *net, pol);
      r.distance = cert.distance;
      r.radius = cert.radius;
      r.margin = cert.radius - cert.distance;
      r.gap = cert.gap;
      r.slack = std::min({cert.distance_slack(), cert.radius_slack(), cert.center_slack(), cert.gap_slack()});
      r.status = status_of(r.slack);
      r.detail = {{"t0", cert.t0}, {"t0_smallest", cert.t0_smallest}, {"theta", cert.theta},
                  {"net_choices", cert.net_choices}, {"center_norm", cert.center_norm}};
    } catch (const op::BoundViolation& e) {
      r.status = "violated";
      r.detail["error"] = e.what();
    } catch (const Error& e) {
      r.status = "error";
      r.detail["error"] = e.what();
    }
    return r;
  };
  return plan;
}

inline Plan plan_hilbert(Params& P) {
  Plan plan;
  const int n = P.integer("n", 4, 1, 256);
  const double lambda = P.real("lambda", 1.5, 1.0, 2.0, true, true);
  const double delta = P.real("delta", (lambda - 1.0) / (4.0 * lambda + 4.0), 0.0, 1.0, true, true);
  plan.trials = static_cast<std::size_t>(P.integer("trials", 1000, 1, 10'000'000));
  auto net = std::make_shared<const op::SphereNet>(n, delta);
  plan.summary["radius"] = (1.0 + lambda) / 2.0;
  plan.summary["bound"] = 1.0 + (2.0 * lambda + 2.0) * delta;
  plan.summary["gap"] = (lambda - 1.0) / 2.0;
  plan.trial = [=](std::size_t i, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    Matrix a(n, n);
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      for (Eigen::Index c = 0; c < a.cols(); ++c) a(r, c) = gaussian(rng);
    a /= spectral_norm(a).value;
    TrialRecord r;
    r.trial = i;
    try {
      const auto cert = op::hilbert_rank_one_certify(a, lambda, *net);
      r.distance = cert.distance;
      r.radius = cert.radius;
      r.margin = cert.radius - cert.distance;
      r.gap = cert.gap;
      r.slack = std::min(cert.bound - cert.distance, cert.radius - cert.distance);
      r.status = status_of(r.slack);
      r.detail = {{"bound", cert.bound}, {"sigma", {cert.sigma1, cert.sigma2}}};
    } catch (const Error& e) {
      r.status = "error";
      r.detail["error"] = e.what();
    }
    return r;
  };
  return plan;
}

inline Plan plan_transfer_op(Params& P) {
  Plan plan;
  const int m = P.integer("m", 2, 1, 3);
  const int n = P.integer("n", 2, 1, 3);
  const double p = P.real("p", 2.0, 1.0, 1e6, true, false);
  const double lambda = P.real("lambda", 1.1, 1.0, 1e6, true, false);
  const int steps = P.integer("grid_steps", 3, 1, 16);
  op::TransferOptions to;
  to.separation = P.real("separation", 1e-3, 0.0, 1.0, true);
  to.search = P.integer("search", 10'000, 1, 10'000'000);
  const int per_part = P.integer("trials", 1000, 1, 10'000'000);
  plan.trials = 2 * static_cast<std::size_t>(per_part);
  const auto k = op::LpConstants::make(p, lambda);
  const op::DualNet net(n, conjugate_exponent(p), (1.0 - k.c) / (6.0 * m));
  const auto fin = op::finite_lp_covering(m, n, p, lambda, net, steps);
  auto tr = std::make_shared<const op::OperatorTransfer>(op::operator_cover_transfer(fin.covering, to));
  plan.summary["operator_covering"] = covering_summary(fin.covering);
  plan.summary["eta"] = fin.eta;
  plan.summary["grid_points"] = fin.grid_points;
  plan.summary["worst_grid_distance"] = fin.worst_distance;
  plan.summary["g_separation"] = tr->g_separation;
  plan.summary["y_separation"] = tr->y_separation;
  plan.summary["y_covering"] = covering_summary(tr->y_cover);
  plan.summary["dual_covering"] = covering_summary(tr->dual_cover);
  const auto per = static_cast<std::size_t>(per_part);
  plan.trial = [tr, per](std::size_t i, std::uint64_t seed) {
    const bool y_part = i < per;
    const auto& c = y_part ? tr->y_cover : tr->dual_cover;
    auto r = check_point(i, c, sample_sphere(c.space, seed));
    r.detail["part"] = y_part ? "Y" : "X*";
    return r;
  };
  const auto ycls = classify_covering(tr->y_cover);
  const auto dcls = classify_covering(tr->dual_cover);
  if (!ycls.admissible || !dcls.admissible) {
    plan.fixed = Verdict::falsified;
    plan.message = "derived covering is not admissible";
  }
  return plan;
}

inline Plan plan_transfer_ckx(Params& P) {
  Plan plan;
  const int nodes = P.integer("nodes", 4, 1, 4096);
  const auto X = P.space("x", {{"kind", "lp"}, {"n", 2}, {"p", 2}});
  const auto xk = P.choice("x_cover", "axis", {"axis", "sign"});
  const int m_max = P.integer("m_max", 64, 1, 1 << 20);
  const int per_part = P.integer("trials", 1000, 1, 10'000'000);
  plan.trials = 2 * static_cast<std::size_t>(per_part);
  const auto ckx = std::make_shared<const ck::CkxCover>(ck::build_ckx_cover(nodes, x_covering(xk, X), ck::singleton_basis(nodes)));
  auto tr = std::make_shared<const ck::CkxTransfer>(ck::ckx_transfer(ckx->covering, X, m_max));
  plan.summary["source_covering"] = covering_summary(ckx->covering);
  plan.summary["x_covering"] = covering_summary(tr->x_cover);
  plan.summary["scalar_covering"] = covering_summary(tr->scalar_cover);
  const auto per = static_cast<std::size_t>(per_part);
  const auto K = SpaceModel::sup_grid(nodes);
  plan.trial = [tr, ckx, per, K](std::size_t i, std::uint64_t seed) {
    if (i < per) {
      auto r = check_point(i, tr->x_cover, sample_sphere(tr->x_cover.space, seed));
      r.detail["part"] = "X";
      return r;
    }
    const Vector f = sample_sphere(K, seed);
    TrialRecord r;
    try {
      const auto c = ck::certify_scalar(*tr, ckx->covering, f);
      r = covered(i, c.cert, tr->scalar_cover.balls[c.cert.ball_index].radius);
      r.detail["source_ball"] = c.source_ball;
      r.detail["m"] = c.m;
    } catch (const NotCovered&) {
      r = uncovered(i, tr->scalar_cover, f);
    } catch (const ck::ScalarTransferExhausted& e) {
      r.trial = i;
      r.status = "error";
      r.detail["error"] = e.what();
    }
    r.detail["part"] = "C(K)";
    return r;
  };
  return plan;
}

inline Plan plan_linf_sum(Params& P) {
  Plan plan;
  const int blocks = P.integer("blocks", 2, 1, 64);
  const auto X = P.space("x", {{"kind", "lp"}, {"n", 2}, {"p", 2}});
  const auto xk = P.choice("x_cover", "axis", {"axis", "sign"});
  plan.trials = static_cast<std::size_t>(P.integer("trials", 1000, 1, 10'000'000));
  const int id_trials = P.integer("identification_trials", 1000, 0, 10'000'000);
  const int rows = P.integer("rows", 3, 1, 16);
  const int cols = P.integer("cols", 3, 1, 16);
  const std::vector<BallCovering> covs(static_cast<std::size_t>(blocks), x_covering(xk, X));
  auto sum = std::make_shared<const BallCovering>(op::linf_sum_cover(covs));
  plan.summary["covering"] = covering_summary(*sum);
  plan.summary["block_origin_gap"] = covs.front().origin_gap;

  // ||A||_{1->1} against the l_inf-sum of columns in l_1^rows, ||A||_{inf->inf} against rows in l_1^cols
  const auto col_space = SpaceModel::linf_power(SpaceModel::lp(rows, 1.0), cols);
  const auto row_space = SpaceModel::linf_power(SpaceModel::lp(cols, 1.0), rows);
  std::size_t col_exact = 0, row_exact = 0;
  double worst_vertex = 0.0;
  for (int t = 0; t < id_trials; ++t) {
    Rng rng = make_rng(trial_seed(0x1d ^ 0xa5a5a5a5ULL, static_cast<std::uint64_t>(t)));
    Matrix a(rows, cols);
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      for (Eigen::Index c = 0; c < a.cols(); ++c) a(r, c) = gaussian(rng);
    const double n11 = operator_norm(a, 1.0, 1.0).value;
    const double ninf = operator_norm(a, kInf, kInf).value;
    col_exact += n11 == norm_of(col_space, op::columns_as_sum(a));
    row_exact += ninf == norm_of(row_space, op::rows_as_sum(a));
    const double v = ::bcplab::detail::vertex_norm(a, kInf).value;
    worst_vertex = std::max(worst_vertex, std::abs(v - ninf) / ninf);
  }
  plan.summary["identification"] = {{"trials", id_trials},
                                    {"column_exact", col_exact},
                                    {"row_exact", row_exact},
                                    {"vertex_relative_gap", worst_vertex}};
  if (col_exact != static_cast<std::size_t>(id_trials) || row_exact != static_cast<std::size_t>(id_trials)) {
    plan.fixed = Verdict::falsified;
    plan.message = "norm identification failed";
  }
  plan.trial = [sum](std::size_t i, std::uint64_t seed) { return check_point(i, *sum, sample_sphere(sum->space, seed)); };
  return plan;
}

inline Plan plan_lemma_scaling(Params& P) {
  Plan plan;
  const int n = P.integer("n", 4, 1, 1024);
  const double p = P.exponent("p", 2.0);
  plan.trials = static_cast<std::size_t>(P.integer("trials", 1000, 1, 100'000'000));
  const auto X = SpaceModel::lp(n, p);
  plan.trial = [X](std::size_t i, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    Vector x(X.n), y(X.n);
    for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = gaussian(rng);
    for (Eigen::Index k = 0; k < y.size(); ++k) y[k] = 2.0 * gaussian(rng);
    const double s = uniform(rng, 1e-3, 2.0);
    const double t = s + uniform(rng, 1e-3, 2.0);
    const auto [lo, hi] = scaling_margin(x, y, s, t, X);
    TrialRecord r;
    r.trial = i;
    r.slack = hi - lo;
    r.margin = hi - lo;
    // a non-strict inequality: equality up to rounding is a pass
    r.status = r.slack < -1e-12 ? "violated" : "verified";
    r.detail = {{"s", s}, {"t", t}, {"margin_s", lo}, {"margin_t", hi}};
    return r;
  };
  return plan;
}

inline Plan plan_rescale(Params& P) {
  Plan plan;
  const auto X = P.space("x", {{"kind", "lp"}, {"n", 2}, {"p", 2}});
  const auto xk = P.choice("x_cover", "axis", {"axis", "sign"});
  plan.trials = static_cast<std::size_t>(P.integer("trials", 1000, 1, 10'000'000));
  auto base = std::make_shared<const BallCovering>(x_covering(xk, X));
  const double r_star = P.real("r_star", base->origin_gap, 0.0, base->origin_gap);
  auto out = std::make_shared<const BallCovering>(rescale_covering(*base, r_star));
  const double target = 2.0 + 2.0 * base->radius_bound + 1.0;
  double dev = 0.0;
  for (double cn : out->center_norms) dev = std::max(dev, std::abs(cn - target));
  plan.summary["target_norm"] = target;
  plan.summary["max_center_norm_deviation"] = dev;
  plan.summary["covering"] = covering_summary(*out);
  if (dev != 0.0) {
    plan.fixed = Verdict::falsified;
    plan.message = "rescaled center norms differ from 2 + 2M + 1";
  }
  plan.trial = [base, out](std::size_t i, std::uint64_t seed) {
    const Vector v = sample_sphere(base->space, seed);
    const auto before = find_cover(*base, v);
    if (!before) return uncovered(i, *base, v);
    // the same ball, pushed outward, must still hold v
    const std::size_t k = before->ball_index;
    const double d = norm_of(out->space, v - out->balls[k].center);
    auto r = covered(i, CoverCertificate{v, k, d, out->balls[k].radius - d}, out->balls[k].radius);
    r.detail["original_margin"] = before->margin;
    return r;
  };
  return plan;
}

inline Plan plan_complementation(Params& P) {
  Plan plan;
  const int N = P.integer("N", 4, 1, 4096);
  const int m = P.integer("m", 2, 1, 12);
  const auto cm = topology::convergent_model(N, m);
  auto K = std::make_shared<const topology::FiniteSpace>(cm.space);
  auto L = std::make_shared<const topology::FiniteSpace>(topology::discrete_cube(m));
  const auto alpha = topology::projection_to_cube(cm, K, L);
  const auto beta = topology::base_section(cm, L, K);
  const auto c = ck::complementation_pair(alpha, beta);
  plan.summary = {{"left_inverse", c.left_inverse},
                  {"idempotent", c.idempotent},
                  {"norm_alpha", c.norm_alpha},
                  {"norm_beta", c.norm_beta},
                  {"rank", c.t_beta.rows()}};
  const bool ok = c.left_inverse && c.idempotent && c.norm_alpha == 1 && c.norm_beta == 1;
  plan.fixed = ok ? Verdict::pass : Verdict::falsified;
  return plan;
}

inline Plan make_plan(const std::string& scenario, Params& P) {
  if (scenario == "topology") return plan_topology(P);
  if (scenario == "ck_cover") return plan_ck_cover(P);
  if (scenario == "ckx_cover") return plan_ckx_cover(P);
  if (scenario == "ck_falsify") return plan_ck_falsify(P);
  if (scenario == "lp_operator") return plan_lp_operator(P);
  if (scenario == "hilbert") return plan_hilbert(P);
  if (scenario == "transfer_op") return plan_transfer_op(P);
  if (scenario == "transfer_ckx") return plan_transfer_ckx(P);
  if (scenario == "linf_sum") return plan_linf_sum(P);
  if (scenario == "lemma_scaling") return plan_lemma_scaling(P);
  if (scenario == "rescale") return plan_rescale(P);
  if (scenario == "complementation") return plan_complementation(P);
  throw ConfigError("unknown scenario '" + scenario + "'");
}

inline void run_trials(const Plan& plan, std::uint64_t seed, unsigned jobs, std::vector<TrialRecord>& out) {
  out.assign(plan.trials, {});
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  auto worker = [&] {
    try {
      for (std::size_t i = next++; i < plan.trials; i = next++) out[i] = plan.trial(i, trial_seed(seed, i));
    } catch (...) {
      std::lock_guard lock(failure_lock);
      if (!failure) failure = std::current_exception();
      next = plan.trials;
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(plan.trials, 1))));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

// Throws ConfigError for invalid configs; every other failure becomes an error verdict.
inline Report run_scenario(const ScenarioConfig& cfg, unsigned jobs = 1) {
  const auto start = std::chrono::steady_clock::now();
  Report rep;
  rep.config = cfg;
  Params P(cfg.params);
  detail::Plan plan;
  try {
    plan = detail::make_plan(cfg.scenario, P);
    P.finish();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    rep.resolved = P.resolved();
    rep.verdict = Verdict::error;
    rep.message = e.what();
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
  }
  rep.resolved = P.resolved();
  rep.summary = std::move(plan.summary);
  rep.message = plan.message;
  if (plan.trials > 0) {
    try {
      detail::run_trials(plan, cfg.seed, jobs, rep.trials);
    } catch (const std::exception& e) {
      rep.trials.clear();
      rep.verdict = Verdict::error;
      rep.message = e.what();
      rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      return rep;
    }
  }
  bool violated = false, error = false, degenerate = false;
  for (const auto& t : rep.trials) {
    if (t.status == "verified" || t.status == "degenerate") ++rep.successes;
    violated |= t.status == "violated";
    error |= t.status == "error";
    degenerate |= t.status == "degenerate";
    if (t.margin) rep.min_margin = std::min(rep.min_margin.value_or(kInf), *t.margin);
    if (t.gap) rep.min_gap = std::min(rep.min_gap.value_or(kInf), *t.gap);
  }
  if (!rep.min_gap && rep.summary.contains("covering")) rep.min_gap = rep.summary["covering"]["origin_gap"].get<double>();
  if (plan.fixed && *plan.fixed != Verdict::pass) rep.verdict = *plan.fixed;
  else if (violated) rep.verdict = Verdict::falsified;
  else if (error) rep.verdict = Verdict::error;
  else if (degenerate) rep.verdict = Verdict::degenerate;
  else rep.verdict = Verdict::pass;
  if (rep.message.empty() && rep.verdict == Verdict::falsified) rep.message = "uncovered or violating trial found";
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

inline json to_json(const TrialRecord& t) {
  json j = {{"trial", t.trial}, {"status", t.status}};
  if (t.ball_index) j["ball_index"] = *t.ball_index;
  if (t.distance) j["distance"] = *t.distance;
  if (t.radius) j["radius"] = *t.radius;
  if (t.margin) j["margin"] = *t.margin;
  if (t.gap) j["gap"] = *t.gap;
  if (std::isfinite(t.slack)) j["slack"] = t.slack;
  if (!t.detail.empty()) j["detail"] = t.detail;
  return j;
}

inline json to_json(const Report& r, bool include_wall_time = true) {
  json trials = json::array();
  for (const auto& t : r.trials) trials.push_back(to_json(t));
  json agg = {{"trials", r.trials.size()}, {"successes", r.successes}};
  agg["min_margin"] = r.min_margin ? json(*r.min_margin) : json(nullptr);
  agg["min_gap"] = r.min_gap ? json(*r.min_gap) : json(nullptr);
  if (include_wall_time) agg["wall_time"] = r.wall_time;
  json out = {{"config", {{"scenario", r.config.scenario}, {"params", r.resolved}, {"seed", r.config.seed}}},
              {"seed_derivation", "splitmix64(seed + trial)"},
              {"summary", r.summary},
              {"trials", trials},
              {"aggregates", agg},
              {"verdict", to_string(r.verdict)}};
  if (!r.message.empty()) out["message"] = r.message;
  return out;
}

inline std::string to_csv(const Report& r) {
  std::ostringstream os;
  os.precision(17);
  os << "trial,ball_index,distance,radius,margin\n";
  auto opt = [&](const std::optional<double>& v) {
    if (v) os << *v;
  };
  for (const auto& t : r.trials) {
    os << t.trial << ',';
    if (t.ball_index) os << *t.ball_index;
    os << ',';
    opt(t.distance);
    os << ',';
    opt(t.radius);
    os << ',';
    opt(t.margin);
    os << '\n';
  }
  return os.str();
}

// Configs behind the CLI shortcuts.
inline ScenarioConfig preset(const std::string& name) {
  if (name == "topology") return {"topology", {{"space", "convergent_model"}, {"N", 8}, {"m", 3}}, 1};
  if (name == "ck") return {"ck_cover", {{"nodes", 8}, {"lambda", 1.2}, {"trials", 10000}}, 7};
  if (name == "op") return {"lp_operator", {{"m", 4}, {"p", 2}, {"lambda", 1.1}, {"trials", 1000}}, 11};
  if (name == "transfer") return {"transfer_op", {{"m", 2}, {"n", 2}, {"p", 2}, {"lambda", 1.1}, {"trials", 1000}}, 13};
  throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace bcplab::harness
