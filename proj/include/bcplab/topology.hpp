#pragma once

#include <algorithm>
#include <cstddef>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "bcplab/core.hpp"

namespace bcplab::topology {

using PointSet = boost::dynamic_bitset<>;

// Largest open-set family that is ever materialized.
inline constexpr std::size_t kMaxOpens = std::size_t{1} << 16;
inline constexpr int kMaxCubeDim = 16;

// Orders point sets as unsigned integers with bit i standing for point i.
struct MaskLess {
  bool operator()(const PointSet& a, const PointSet& b) const {
    for (std::size_t i = a.size(); i-- > 0;) {
      if (a[i] != b[i]) return b[i];
    }
    return false;
  }
};

inline std::string to_hex(const PointSet& s) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  const std::size_t nibbles = std::max<std::size_t>(1, (s.size() + 3) / 4);
  for (std::size_t k = nibbles; k-- > 0;) {
    unsigned v = 0;
    for (unsigned b = 0; b < 4; ++b) {
      const std::size_t i = 4 * k + b;
      if (i < s.size() && s[i]) v |= 1u << b;
    }
    out.push_back(digits[v]);
  }
  // strip leading zeros but keep one digit
  const auto first = out.find_first_not_of('0');
  return first == std::string::npos ? std::string("0") : out.substr(first);
}

inline PointSet from_hex(std::string text, std::size_t n) {
  if (text.rfind("0x", 0) == 0 || text.rfind("0X", 0) == 0) text = text.substr(2);
  if (text.empty()) throw Error("empty hex mask");
  PointSet s(n);
  std::size_t bit = 0;
  for (auto it = text.rbegin(); it != text.rend(); ++it, bit += 4) {
    const char c = *it;
    unsigned v;
    if (c >= '0' && c <= '9') v = static_cast<unsigned>(c - '0');
    else if (c >= 'a' && c <= 'f') v = static_cast<unsigned>(c - 'a' + 10);
    else if (c >= 'A' && c <= 'F') v = static_cast<unsigned>(c - 'A' + 10);
    else throw Error(std::string("invalid hex digit '") + c + "'");
    for (unsigned b = 0; b < 4; ++b) {
      if (!(v & (1u << b))) continue;
      if (bit + b >= n) throw Error("hex mask " + text + " names a point beyond " + std::to_string(n));
      s.set(bit + b);
    }
  }
  return s;
}

inline PointSet singleton(std::size_t n, std::size_t i) {
  PointSet s(n);
  s.set(i);
  return s;
}

inline PointSet mask_of(std::size_t n, std::uint64_t bits) {
  PointSet s(n);
  for (std::size_t i = 0; i < n && i < 64; ++i)
    if (bits & (std::uint64_t{1} << i)) s.set(i);
  return s;
}

class FiniteSpace {
 public:
  // A finite family is a topology iff it holds the empty and full sets, each point's smallest
  // containing member U_x is itself a member, and the family equals the set of unions of the U_x.
  static FiniteSpace from_opens(std::vector<std::string> labels, std::vector<PointSet> opens) {
    const std::size_t n = labels.size();
    if (n == 0) throw ConfigError("a finite space needs at least one point");
    if (opens.size() > kMaxOpens) throw ConfigError("open-set family exceeds 2^16 members");
    std::set<PointSet, MaskLess> uniq;
    for (auto& o : opens) {
      if (o.size() != n) throw DimensionError("open set mask width differs from point count");
      uniq.insert(o);
    }
    PointSet empty(n), full(n);
    full.set();
    if (!uniq.count(empty)) throw Error("open-set family lacks the empty set");
    if (!uniq.count(full)) throw Error("open-set family lacks the full point set");
    FiniteSpace sp;
    sp.labels_ = std::move(labels);
    sp.opens_.assign(uniq.begin(), uniq.end());
    sp.materialized_ = true;
    sp.compute_neighborhoods();
    for (const auto& u : sp.neighborhoods_)
      if (!uniq.count(u)) throw Error("open-set family is not closed under intersection");
    const auto generated = from_neighborhoods(sp.labels_, sp.neighborhoods_);
    if (generated.opens_ != sp.opens_) throw Error("open-set family is not closed under union");
    return sp;
  }

  // Topology generated by a minimal-neighborhood assignment: opens are the unions of the given sets.
  // Each point must lie in its own neighborhood and neighborhoods must be nested consistently.
  static FiniteSpace from_neighborhoods(std::vector<std::string> labels, std::vector<PointSet> nbhd) {
    const std::size_t n = labels.size();
    if (nbhd.size() != n) throw DimensionError("one neighborhood per point required");
    for (std::size_t x = 0; x < n; ++x) {
      if (nbhd[x].size() != n || !nbhd[x][x]) throw Error("point outside its own neighborhood");
      for (std::size_t y = nbhd[x].find_first(); y != PointSet::npos; y = nbhd[x].find_next(y))
        if (!nbhd[y].is_subset_of(nbhd[x])) throw Error("neighborhood family is not transitive");
    }
    std::set<PointSet, MaskLess> opens;
    std::vector<PointSet> frontier{PointSet(n)};
    opens.insert(frontier.front());
    while (!frontier.empty()) {
      std::vector<PointSet> next;
      for (const auto& o : frontier) {
        for (std::size_t x = 0; x < n; ++x) {
          if (o[x]) continue;
          PointSet u = o | nbhd[x];
          if (opens.insert(u).second) {
            if (opens.size() > kMaxOpens) throw ConfigError("topology has more than 2^16 open sets");
            next.push_back(std::move(u));
          }
        }
      }
      frontier = std::move(next);
    }
    FiniteSpace sp;
    sp.labels_ = std::move(labels);
    sp.opens_.assign(opens.begin(), opens.end());
    sp.materialized_ = true;
    sp.neighborhoods_ = std::move(nbhd);
    return sp;
  }

  // Discrete topology; opens are only listed when there are at most 2^16 of them.
  static FiniteSpace discrete(std::vector<std::string> labels) {
    const std::size_t n = labels.size();
    if (n == 0) throw ConfigError("a finite space needs at least one point");
    FiniteSpace sp;
    sp.labels_ = std::move(labels);
    sp.neighborhoods_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) sp.neighborhoods_.push_back(singleton(n, i));
    if (n <= 16) {
      sp.opens_.reserve(std::size_t{1} << n);
      for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) sp.opens_.push_back(mask_of(n, bits));
      sp.materialized_ = true;
    }
    sp.discrete_ = true;
    return sp;
  }

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  bool materialized() const { return materialized_; }
  bool is_discrete() const { return discrete_; }

  const std::vector<PointSet>& opens() const {
    if (!materialized_) throw Error("open-set family of this space is not materialized");
    return opens_;
  }

  bool is_open(const PointSet& s) const {
    if (s.size() != size()) throw DimensionError("mask width differs from point count");
    if (discrete_) return true;
    return std::binary_search(opens_.begin(), opens_.end(), s, MaskLess{});
  }

  // Smallest open set containing the point.
  const PointSet& neighborhood(std::size_t x) const { return neighborhoods_.at(x); }

  PointSet empty_set() const { return PointSet(size()); }
  PointSet full_set() const {
    PointSet s(size());
    s.set();
    return s;
  }

  bool operator==(const FiniteSpace& o) const {
    return labels_ == o.labels_ && discrete_ == o.discrete_ && opens_ == o.opens_;
  }

 private:
  void compute_neighborhoods() {
    neighborhoods_.assign(size(), full_set());
    for (const auto& o : opens_)
      for (std::size_t x = o.find_first(); x != PointSet::npos; x = o.find_next(x)) neighborhoods_[x] &= o;
  }

  std::vector<std::string> labels_;
  std::vector<PointSet> opens_;  // ascending in MaskLess order
  std::vector<PointSet> neighborhoods_;
  bool materialized_ = false;
  bool discrete_ = false;
};

inline std::string bit_label(std::uint64_t v, int m) {
  std::string s(static_cast<std::size_t>(m), '0');
  for (int k = 0; k < m; ++k)
    if (v & (std::uint64_t{1} << (m - 1 - k))) s[static_cast<std::size_t>(k)] = '1';
  return s;
}

inline FiniteSpace discrete_cube(int m) {
  if (m < 1) throw ConfigError("discrete_cube needs m >= 1");
  if (m > kMaxCubeDim) throw ConfigError("discrete_cube rejects m > 16");
  std::vector<std::string> labels;
  const std::uint64_t n = std::uint64_t{1} << m;
  labels.reserve(n);
  for (std::uint64_t f = 0; f < n; ++f) labels.push_back(bit_label(f, m));
  return FiniteSpace::discrete(std::move(labels));
}

inline FiniteSpace sierpinski() {
  const std::size_t n = 2;
  return FiniteSpace::from_opens({"a", "b"}, {mask_of(n, 0), mask_of(n, 1), mask_of(n, 3)});
}

// Finite shadow of K = L x {0} u {(h_i, 1/i)} with L = {0,1}^m.
// Points 0..N-1 are the isolated points (h_i, 1/i); points N..N+2^m-1 are the base points (f, 0).
// h_i is the (i-1 mod 2^m)-th word of {0,1}^m in binary order. A base point's neighborhoods are
// cylinders on the low k = min(m, floor(log2 N)) coordinates together with a tail of the isolated
// points in that cylinder, so every neighborhood of a base point contains an isolated point.
struct ConvergentModel {
  int isolated = 0;
  int m = 0;
  int cylinder_bits = 0;
  std::vector<std::uint64_t> h;  // h[i-1] for i = 1..N
  FiniteSpace space;

  std::size_t isolated_index(int i) const { return static_cast<std::size_t>(i - 1); }
  std::size_t base_index(std::uint64_t f) const { return static_cast<std::size_t>(isolated) + f; }
};

inline ConvergentModel convergent_model(int N, int m) {
  if (N < 1) throw ConfigError("convergent_model needs N >= 1");
  if (m < 1) throw ConfigError("convergent_model needs m >= 1");
  if (m > kMaxCubeDim) throw ConfigError("convergent_model rejects m > 16");
  ConvergentModel cm;
  cm.isolated = N;
  cm.m = m;
  int k = 0;
  while (k < m && (std::int64_t{1} << (k + 1)) <= N) ++k;
  cm.cylinder_bits = k;
  const std::uint64_t cube = std::uint64_t{1} << m;
  const std::uint64_t cyl_mask = (std::uint64_t{1} << k) - 1;
  for (int i = 1; i <= N; ++i) cm.h.push_back(static_cast<std::uint64_t>(i - 1) % cube);

  const std::size_t n = static_cast<std::size_t>(N) + cube;
  std::vector<std::string> labels;
  labels.reserve(n);
  for (int i = 1; i <= N; ++i)
    labels.push_back("(" + bit_label(cm.h[static_cast<std::size_t>(i - 1)], m) + ",1/" + std::to_string(i) + ")");
  for (std::uint64_t f = 0; f < cube; ++f) labels.push_back("(" + bit_label(f, m) + ",0)");

  std::vector<PointSet> nbhd;
  nbhd.reserve(n);
  for (int i = 1; i <= N; ++i) nbhd.push_back(singleton(n, static_cast<std::size_t>(i - 1)));
  // last isolated index in each cylinder class; N >= 2^k guarantees every class is hit
  std::vector<int> last(std::size_t{1} << k, 0);
  for (int i = 1; i <= N; ++i) last[cm.h[static_cast<std::size_t>(i - 1)] & cyl_mask] = i;
  for (std::uint64_t f = 0; f < cube; ++f) {
    PointSet u(n);
    for (std::uint64_t g = 0; g < cube; ++g)
      if ((g & cyl_mask) == (f & cyl_mask)) u.set(cm.base_index(g));
    u.set(cm.isolated_index(last[f & cyl_mask]));
    nbhd.push_back(std::move(u));
  }
  cm.space = FiniteSpace::from_neighborhoods(std::move(labels), std::move(nbhd));
  return cm;
}

// Dispatcher over the builder tags: discrete_cube(m), sierpinski, convergent_model(N, m).
inline FiniteSpace build_finite_space(const std::string& kind, const std::map<std::string, int>& params = {}) {
  auto get = [&](const char* key) {
    auto it = params.find(key);
    if (it == params.end()) throw ConfigError(kind + " requires parameter '" + key + "'");
    return it->second;
  };
  if (kind == "discrete_cube") return discrete_cube(get("m"));
  if (kind == "sierpinski") return sierpinski();
  if (kind == "convergent_model") return convergent_model(get("N"), get("m")).space;
  throw ConfigError("unknown finite space kind '" + kind + "'");
}

inline FiniteSpace product_space(const FiniteSpace& a, const FiniteSpace& b) {
  std::vector<std::string> labels;
  labels.reserve(a.size() * b.size());
  for (const auto& la : a.labels())
    for (const auto& lb : b.labels()) labels.push_back("(" + la + "," + lb + ")");
  if (a.is_discrete() && b.is_discrete()) return FiniteSpace::discrete(std::move(labels));
  const std::size_t n = labels.size();
  std::vector<PointSet> nbhd;
  nbhd.reserve(n);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      PointSet u(n);
      const auto& ua = a.neighborhood(i);
      const auto& ub = b.neighborhood(j);
      for (std::size_t x = ua.find_first(); x != PointSet::npos; x = ua.find_next(x))
        for (std::size_t y = ub.find_first(); y != PointSet::npos; y = ub.find_next(y)) u.set(x * b.size() + y);
      nbhd.push_back(std::move(u));
    }
  }
  return FiniteSpace::from_neighborhoods(std::move(labels), std::move(nbhd));
}

// Rectangles U x V for every pair of members.
inline std::vector<PointSet> product_family(const FiniteSpace& a, const std::vector<PointSet>& fa,
                                            const FiniteSpace& b, const std::vector<PointSet>& fb) {
  std::vector<PointSet> out;
  const std::size_t n = a.size() * b.size();
  for (const auto& u : fa) {
    for (const auto& v : fb) {
      PointSet r(n);
      for (std::size_t x = u.find_first(); x != PointSet::npos; x = u.find_next(x))
        for (std::size_t y = v.find_first(); y != PointSet::npos; y = v.find_next(y)) r.set(x * b.size() + y);
      out.push_back(std::move(r));
    }
  }
  return out;
}

struct PiBasisVerdict {
  bool holds = false;
  std::optional<PointSet> witness;  // a nonempty open set containing no member
};

inline void validate_family(const FiniteSpace& space, const std::vector<PointSet>& family) {
  for (const auto& m : family) {
    if (m.size() != space.size()) throw DimensionError("family member mask width differs from point count");
    if (m.none()) throw Error("family member is empty");
    if (!space.is_open(m)) throw Error("family member " + to_hex(m) + " is not open");
  }
}

inline PiBasisVerdict is_pibasis(const FiniteSpace& space, const std::vector<PointSet>& family) {
  validate_family(space, family);
  auto contains_member = [&](const PointSet& open) {
    return std::any_of(family.begin(), family.end(), [&](const PointSet& m) { return m.is_subset_of(open); });
  };
  if (space.materialized()) {
    for (const auto& open : space.opens()) {
      if (open.none()) continue;
      if (!contains_member(open)) return {false, open};
    }
    return {true, std::nullopt};
  }
  // Discrete, not materialized: the first failing mask in ascending order is a singleton.
  for (std::size_t x = 0; x < space.size(); ++x) {
    PointSet s = singleton(space.size(), x);
    if (!contains_member(s)) return {false, s};
  }
  return {true, std::nullopt};
}

struct MinimalOpens {
  std::vector<PointSet> family;  // ascending mask order
  std::size_t pi_weight = 0;
};

// Minimal nonempty opens are exactly the point neighborhoods that contain no smaller neighborhood.
inline MinimalOpens minimal_open_sets(const FiniteSpace& space) {
  std::set<PointSet, MaskLess> found;
  for (std::size_t x = 0; x < space.size(); ++x) {
    const auto& u = space.neighborhood(x);
    bool minimal = true;
    for (std::size_t y = u.find_first(); y != PointSet::npos && minimal; y = u.find_next(y))
      if (space.neighborhood(y) != u) minimal = false;
    if (minimal) found.insert(u);
  }
  MinimalOpens out;
  out.family.assign(found.begin(), found.end());
  out.pi_weight = out.family.size();
  return out;
}

struct PointMap {
  std::shared_ptr<const FiniteSpace> source;
  std::shared_ptr<const FiniteSpace> target;
  std::vector<std::size_t> assignment;

  PointMap(std::shared_ptr<const FiniteSpace> src, std::shared_ptr<const FiniteSpace> dst, std::vector<std::size_t> a)
      : source(std::move(src)), target(std::move(dst)), assignment(std::move(a)) {
    if (!source || !target) throw Error("point map needs both spaces");
    if (assignment.size() != source->size()) throw DimensionError("point map must assign every source point");
    for (auto y : assignment)
      if (y >= target->size()) throw DimensionError("point map image outside target");
  }

  std::size_t operator()(std::size_t x) const { return assignment.at(x); }

  PointSet preimage(const PointSet& v) const {
    PointSet out(source->size());
    for (std::size_t x = 0; x < assignment.size(); ++x)
      if (v[assignment[x]]) out.set(x);
    return out;
  }
};

struct ContinuityVerdict {
  bool holds = false;
  std::optional<PointSet> witness;  // target open set whose preimage is not open
};

inline ContinuityVerdict is_continuous_map(const PointMap& map) {
  const auto& tgt = *map.target;
  if (tgt.materialized()) {
    for (const auto& v : tgt.opens())
      if (!map.source->is_open(map.preimage(v))) return {false, v};
    return {true, std::nullopt};
  }
  for (std::size_t y = 0; y < tgt.size(); ++y) {
    PointSet v = singleton(tgt.size(), y);
    if (!map.source->is_open(map.preimage(v))) return {false, v};
  }
  return {true, std::nullopt};
}

// second after first
inline PointMap compose(const PointMap& first, const PointMap& second) {
  if (!(*first.target == *second.source)) throw Error("composition needs matching intermediate space");
  std::vector<std::size_t> a(first.assignment.size());
  for (std::size_t x = 0; x < a.size(); ++x) a[x] = second(first(x));
  return PointMap(first.source, second.target, std::move(a));
}

inline bool is_identity(const PointMap& map) {
  if (!(*map.source == *map.target)) return false;
  for (std::size_t x = 0; x < map.assignment.size(); ++x)
    if (map.assignment[x] != x) return false;
  return true;
}

// Projection (f, x) -> f of the convergent model onto its cube, and the section f -> (f, 0).
inline PointMap projection_to_cube(const ConvergentModel& cm, std::shared_ptr<const FiniteSpace> K,
                                   std::shared_ptr<const FiniteSpace> L) {
  std::vector<std::size_t> a;
  for (int i = 1; i <= cm.isolated; ++i) a.push_back(static_cast<std::size_t>(cm.h[static_cast<std::size_t>(i - 1)]));
  for (std::uint64_t f = 0; f < (std::uint64_t{1} << cm.m); ++f) a.push_back(static_cast<std::size_t>(f));
  return PointMap(std::move(K), std::move(L), std::move(a));
}

inline PointMap base_section(const ConvergentModel& cm, std::shared_ptr<const FiniteSpace> L,
                             std::shared_ptr<const FiniteSpace> K) {
  std::vector<std::size_t> a;
  for (std::uint64_t f = 0; f < (std::uint64_t{1} << cm.m); ++f) a.push_back(cm.base_index(f));
  return PointMap(std::move(L), std::move(K), std::move(a));
}

// Text format: "points: <n>" then one open set per line as a hex bit mask (bit i = point i).
inline void write_space(std::ostream& os, const FiniteSpace& space) {
  os << "points: " << space.size() << '\n';
  for (const auto& o : space.opens()) os << to_hex(o) << '\n';
}

inline FiniteSpace read_space(std::istream& is) {
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream head(line);
    std::string tag;
    head >> tag >> n;
    if (tag != "points:" || head.fail() || n == 0) throw Error("expected 'points: <n>' header");
    break;
  }
  if (n == 0) throw Error("missing 'points:' header");
  std::vector<PointSet> opens;
  while (std::getline(is, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t\r");
    opens.push_back(from_hex(line.substr(b, e - b + 1), n));
  }
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  return FiniteSpace::from_opens(std::move(labels), std::move(opens));
}

}  // namespace bcplab::topology
