#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dualpinn {

/// Elementwise activation of one layer. Sine carries its frequency scale;
/// the output layer of every network is Linear.
struct ActivationKind {
  enum class Kind { Tanh, Sine, Linear };

  Kind kind = Kind::Tanh;
  double omega0 = 0.0;  // Sine only, > 0

  static ActivationKind tanh() { return {Kind::Tanh, 0.0}; }
  static ActivationKind sine(double omega0);
  static ActivationKind linear() { return {Kind::Linear, 0.0}; }

  bool operator==(const ActivationKind&) const = default;
};

struct Layer {
  int in = 0;
  int out = 0;
  std::vector<double> weights;  // out x in, row-major
  std::vector<double> biases;   // out
  ActivationKind activation;
};

/// Dense feed-forward network with scalar output.
struct MlpParams {
  int input_dim = 0;
  std::vector<Layer> layers;

  std::size_t parameter_count() const;
};

/// Value, gradient and pure (diagonal) second derivatives of the network
/// output at one point. No mixed partials are carried; problems needing them
/// are out of contract.
struct Jet2 {
  double value = 0.0;
  std::vector<double> grad;       // du/dx_i, length input_dim
  std::vector<double> hess_diag;  // d2u/dx_i^2, length input_dim
};

/// Adjoint seed for one point: the partial derivatives of a scalar loss with
/// respect to the Jet2 channels at that point.
struct JetCotangent {
  double d_value = 0.0;
  std::vector<double> d_grad;
  std::vector<double> d_hess_diag;
};

struct LayerGrads {
  std::vector<double> weights;
  std::vector<double> biases;
};

/// Gradient container, shape-identical to the MlpParams it was built for.
struct ParamGrads {
  std::vector<LayerGrads> layers;
};

/// Xavier-uniform weights U[-sqrt(6/(fan_in+fan_out)), +...], zero biases;
/// hidden layers get `hidden_activation`, the last layer is Linear.
MlpParams init_xavier(const std::vector<int>& layer_dims, ActivationKind hidden_activation,
                      std::uint64_t seed);

/// SIREN init: first layer U[-1/fan_in, 1/fan_in], deeper layers
/// U[-sqrt(6/fan_in)/omega0, +...]; hidden activations Sine(omega0).
MlpParams init_siren(const std::vector<int>& layer_dims, double omega0, std::uint64_t seed);

/// Network output value only.
double forward_value(const MlpParams& params, std::span<const double> x);

/// Exact value, gradient and diagonal second derivatives at x. The input jet
/// is seeded with grad = identity, hess_diag = 0.
Jet2 forward_jet(const MlpParams& params, std::span<const double> x);

/// Jets for a flat batch of n points (n * input_dim coordinates). Threaded
/// over fixed chunks; results identical for any thread count.
std::vector<Jet2> forward_jets(const MlpParams& params, std::span<const double> points);

/// Values for a flat batch of points.
std::vector<double> forward_values(const MlpParams& params, std::span<const double> points);

/// Reverse mode through the jet computation: gradient w.r.t. every parameter
/// of  sum_batch [ d_value*u + <d_grad, du/dx> + <d_hess, d2u/dx2> ].
/// The batch sum is accumulated in a fixed chunk order, so repeated calls are
/// bitwise identical regardless of thread count.
ParamGrads backprop_jets(const MlpParams& params, std::span<const double> points,
                         std::span<const JetCotangent> cotangents);

/// Specialized reverse mode for value-only cotangents (classic backprop):
/// gradient of sum_batch d_value_i * u(x_i).
ParamGrads backprop_values(const MlpParams& params, std::span<const double> points,
                           std::span<const double> d_values);

ParamGrads zeros_like(const MlpParams& params);
void accumulate(ParamGrads& into, const ParamGrads& from);

}  // namespace dualpinn
