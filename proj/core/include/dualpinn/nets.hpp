#pragma once

#include <optional>
#include <span>

#include "dualpinn/diffnet.hpp"

namespace dualpinn {

/// The dual-network ansatz u = u_D + u_B. One-net mode leaves the boundary
/// network unset, in which case u = u_D.
struct DualNets {
  MlpParams domain;
  std::optional<MlpParams> boundary;
};

inline double nets_value(const DualNets& nets, std::span<const double> x) {
  double v = forward_value(nets.domain, x);
  if (nets.boundary) v += forward_value(*nets.boundary, x);
  return v;
}

inline Jet2 nets_jet(const DualNets& nets, std::span<const double> x) {
  Jet2 jet = forward_jet(nets.domain, x);
  if (nets.boundary) {
    const Jet2 jb = forward_jet(*nets.boundary, x);
    jet.value += jb.value;
    for (std::size_t i = 0; i < jet.grad.size(); ++i) {
      jet.grad[i] += jb.grad[i];
      jet.hess_diag[i] += jb.hess_diag[i];
    }
  }
  return jet;
}

}  // namespace dualpinn
