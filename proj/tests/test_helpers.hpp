#pragma once

#include <cmath>
#include <cstdlib>
#include <vector>

#include "dualpinn/diffnet.hpp"
#include "dualpinn/rng.hpp"

namespace dptest {

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

// Central finite differences of the network's own value channel.
inline double fd_first(const dualpinn::MlpParams& net, std::vector<double> x, std::size_t i,
                       double h) {
  x[i] += h;
  const double fp = dualpinn::forward_jet(net, x).value;
  x[i] -= 2.0 * h;
  const double fm = dualpinn::forward_jet(net, x).value;
  return (fp - fm) / (2.0 * h);
}

inline double fd_second(const dualpinn::MlpParams& net, std::vector<double> x, std::size_t i,
                        double h) {
  const double f0 = dualpinn::forward_jet(net, x).value;
  x[i] += h;
  const double fp = dualpinn::forward_jet(net, x).value;
  x[i] -= 2.0 * h;
  const double fm = dualpinn::forward_jet(net, x).value;
  return (fp - 2.0 * f0 + fm) / (h * h);
}

// The scalar backprop_jets differentiates: sum over the batch of
// d_value*u + <d_grad, du/dx> + <d_hess, d2u/dx2>.
inline double adjoint_scalar(const dualpinn::MlpParams& net, std::span<const double> points,
                             std::span<const dualpinn::JetCotangent> cots) {
  const std::size_t d = static_cast<std::size_t>(net.input_dim);
  double s = 0.0;
  for (std::size_t p = 0; p < cots.size(); ++p) {
    const dualpinn::Jet2 jet = dualpinn::forward_jet(net, points.subspan(p * d, d));
    s += cots[p].d_value * jet.value;
    for (std::size_t i = 0; i < d; ++i) {
      if (!cots[p].d_grad.empty()) s += cots[p].d_grad[i] * jet.grad[i];
      if (!cots[p].d_hess_diag.empty()) s += cots[p].d_hess_diag[i] * jet.hess_diag[i];
    }
  }
  return s;
}

// Flat views over parameters for FD probing.
inline std::size_t param_count(const dualpinn::MlpParams& net) { return net.parameter_count(); }

inline double* param_at(dualpinn::MlpParams& net, std::size_t index) {
  for (auto& l : net.layers) {
    if (index < l.weights.size()) return &l.weights[index];
    index -= l.weights.size();
    if (index < l.biases.size()) return &l.biases[index];
    index -= l.biases.size();
  }
  return nullptr;
}

inline double grad_at(const dualpinn::ParamGrads& grads, std::size_t index) {
  for (const auto& l : grads.layers) {
    if (index < l.weights.size()) return l.weights[index];
    index -= l.weights.size();
    if (index < l.biases.size()) return l.biases[index];
    index -= l.biases.size();
  }
  return 0.0;
}

inline std::vector<double> random_points(std::size_t n, int dim, std::uint64_t seed, double lo = -1.0,
                                         double hi = 1.0) {
  dualpinn::RngStream rng(seed);
  std::vector<double> pts(n * static_cast<std::size_t>(dim));
  for (auto& v : pts) v = rng.uniform(lo, hi);
  return pts;
}

}  // namespace dptest
