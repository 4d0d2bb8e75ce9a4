// Builds the C(K) covering for an 8-node grid, certifies a few sphere points and prints the
// certificates, then certifies one normalized 3x3 operator on l_2.

#include <iostream>

#include "bcplab/ck_cover.hpp"
#include "bcplab/op_cover.hpp"

int main() {
  using namespace bcplab;
  const auto K = SpaceModel::sup_grid(8);
  ck::CkCoverConfig cfg;
  cfg.lambda = 1.2;
  cfg.pibasis = ck::singleton_basis(8);
  const auto cover = ck::build_ck_cover(K, cfg);
  std::cout << "C(K) covering: " << cover.covering.size() << " balls, origin gap " << cover.covering.origin_gap << "\n";
  for (std::uint64_t i = 0; i < 4; ++i) {
    const Vector g = sample_sphere(K, trial_seed(42, i));
    const auto c = ck::certify_ck_point(cover, g);
    std::cout << "  sample " << i << ": ball " << c->cert.ball_index << ", distance " << c->cert.distance
              << ", margin " << c->cert.margin << "\n";
  }

  Matrix a(3, 3);
  a << 1, 2, 0, -1, 0.5, 3, 0, 1, -2;
  a /= spectral_norm(a).value;
  const auto k = op::LpConstants::make(2.0, 1.1);
  const op::DualNet net(3, 2.0, (1.0 - k.c) / 18.0);
  const auto cert = op::certify_lp_operator(Operator(a, 2.0, 2.0), 1.1, net);
  std::cout << "operator certificate:\n" << op::to_json(cert).dump(2) << "\n";
}
