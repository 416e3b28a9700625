#include "dualpinn/diffnet.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "dualpinn/errors.hpp"
#include "dualpinn/parallel.hpp"
#include "dualpinn/rng.hpp"

namespace dualpinn {

namespace {

struct ActEval {
  double v, s1, s2, s3;  // sigma(z) and its first three derivatives
};

inline ActEval activate(const ActivationKind& act, double z) {
  switch (act.kind) {
    case ActivationKind::Kind::Tanh: {
      const double v = std::tanh(z);
      const double s1 = 1.0 - v * v;
      return {v, s1, -2.0 * v * s1, s1 * (6.0 * v * v - 2.0)};
    }
    case ActivationKind::Kind::Sine: {
      const double w = act.omega0;
      const double s = std::sin(w * z);
      const double c = std::cos(w * z);
      return {s, w * c, -w * w * s, -w * w * w * c};
    }
    case ActivationKind::Kind::Linear:
    default:
      return {z, 1.0, 0.0, 0.0};
  }
}

inline double activate_value(const ActivationKind& act, double z) {
  switch (act.kind) {
    case ActivationKind::Kind::Tanh:
      return std::tanh(z);
    case ActivationKind::Kind::Sine:
      return std::sin(act.omega0 * z);
    case ActivationKind::Kind::Linear:
    default:
      return z;
  }
}

void check_point_dim(const MlpParams& params, std::size_t x_size) {
  if (static_cast<int>(x_size) != params.input_dim)
    throw ContractViolation("forward: point dimension " + std::to_string(x_size) +
                            " does not match network input_dim " +
                            std::to_string(params.input_dim));
}

void check_structure(const MlpParams& params) {
  if (params.layers.empty()) throw ContractViolation("network has no layers");
}

int max_width(const MlpParams& params) {
  int m = params.input_dim;
  for (const auto& l : params.layers) m = std::max(m, l.out);
  return m;
}

// Forward tape for one point: everything the reverse pass needs.
struct Tape {
  struct Entry {
    std::vector<double> vin;              // layer input values (in)
    std::vector<double> gin, hin;         // layer input jets (in x d)
    std::vector<double> gz, hz;           // pre-activation jets (out x d)
    std::vector<double> s1, s2, s3;       // activation derivatives (out)
  };
  std::vector<Entry> layers;
  std::vector<double> vout;  // final post-activation values (out of last layer)

  void resize(const MlpParams& p) {
    const std::size_t d = static_cast<std::size_t>(p.input_dim);
    layers.resize(p.layers.size());
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
      const auto& lay = p.layers[l];
      auto& e = layers[l];
      e.vin.resize(static_cast<std::size_t>(lay.in));
      e.gin.resize(static_cast<std::size_t>(lay.in) * d);
      e.hin.resize(static_cast<std::size_t>(lay.in) * d);
      e.gz.resize(static_cast<std::size_t>(lay.out) * d);
      e.hz.resize(static_cast<std::size_t>(lay.out) * d);
      e.s1.resize(static_cast<std::size_t>(lay.out));
      e.s2.resize(static_cast<std::size_t>(lay.out));
      e.s3.resize(static_cast<std::size_t>(lay.out));
    }
    vout.resize(static_cast<std::size_t>(p.layers.back().out));
  }
};

// Runs the jet forward pass storing intermediates; returns the output jet of
// the (scalar) last layer via jet_out when non-null.
void forward_store(const MlpParams& params, std::span<const double> x, Tape& tape,
                   Jet2* jet_out) {
  const std::size_t d = static_cast<std::size_t>(params.input_dim);

  // Seed: values = x, grad = identity, hess = 0.
  {
    auto& e0 = tape.layers[0];
    for (std::size_t k = 0; k < d; ++k) e0.vin[k] = x[k];
    std::fill(e0.gin.begin(), e0.gin.end(), 0.0);
    std::fill(e0.hin.begin(), e0.hin.end(), 0.0);
    for (std::size_t k = 0; k < d; ++k) e0.gin[k * d + k] = 1.0;
  }

  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& lay = params.layers[l];
    auto& e = tape.layers[l];
    const std::size_t in = static_cast<std::size_t>(lay.in);
    const std::size_t out = static_cast<std::size_t>(lay.out);
    std::vector<double>& vnext =
        (l + 1 < params.layers.size()) ? tape.layers[l + 1].vin : tape.vout;
    std::vector<double>* gnext = (l + 1 < params.layers.size()) ? &tape.layers[l + 1].gin : nullptr;
    std::vector<double>* hnext = (l + 1 < params.layers.size()) ? &tape.layers[l + 1].hin : nullptr;

    std::vector<double> gout_local, hout_local;
    if (!gnext) {
      gout_local.resize(out * d);
      hout_local.resize(out * d);
      gnext = &gout_local;
      hnext = &hout_local;
    }

    for (std::size_t j = 0; j < out; ++j) {
      double z = lay.biases[j];
      double* gz = &e.gz[j * d];
      double* hz = &e.hz[j * d];
      for (std::size_t i = 0; i < d; ++i) {
        gz[i] = 0.0;
        hz[i] = 0.0;
      }
      const double* wrow = &lay.weights[j * in];
      for (std::size_t k = 0; k < in; ++k) {
        const double w = wrow[k];
        z += w * e.vin[k];
        const double* gk = &e.gin[k * d];
        const double* hk = &e.hin[k * d];
        for (std::size_t i = 0; i < d; ++i) {
          gz[i] += w * gk[i];
          hz[i] += w * hk[i];
        }
      }
      const ActEval a = activate(lay.activation, z);
      e.s1[j] = a.s1;
      e.s2[j] = a.s2;
      e.s3[j] = a.s3;
      vnext[j] = a.v;
      double* gv = &(*gnext)[j * d];
      double* hv = &(*hnext)[j * d];
      for (std::size_t i = 0; i < d; ++i) {
        gv[i] = a.s1 * gz[i];
        hv[i] = a.s2 * gz[i] * gz[i] + a.s1 * hz[i];
      }
    }

    if (jet_out && l + 1 == params.layers.size()) {
      jet_out->value = vnext[0];
      jet_out->grad.assign(gnext->begin(), gnext->begin() + static_cast<long>(d));
      jet_out->hess_diag.assign(hnext->begin(), hnext->begin() + static_cast<long>(d));
    }
  }
}

// Reverse pass over a stored tape, accumulating parameter gradients.
void reverse_from_tape(const MlpParams& params, const Tape& tape, const JetCotangent& cot,
                       ParamGrads& grads) {
  const std::size_t d = static_cast<std::size_t>(params.input_dim);
  const std::size_t nl = params.layers.size();
  const std::size_t mw = static_cast<std::size_t>(max_width(params));

  // Adjoints w.r.t. the current layer's post-activation outputs.
  std::vector<double> vbar(mw, 0.0), gbar(mw * d, 0.0), hbar(mw * d, 0.0);
  std::vector<double> vprev(mw, 0.0), gprev(mw * d, 0.0), hprev(mw * d, 0.0);
  std::vector<double> zbar(mw), gzbar(mw * d), hzbar(mw * d);

  vbar[0] = cot.d_value;
  for (std::size_t i = 0; i < d; ++i) {
    gbar[i] = cot.d_grad.empty() ? 0.0 : cot.d_grad[i];
    hbar[i] = cot.d_hess_diag.empty() ? 0.0 : cot.d_hess_diag[i];
  }

  for (std::size_t li = nl; li-- > 0;) {
    const auto& lay = params.layers[li];
    const auto& e = tape.layers[li];
    auto& lg = grads.layers[li];
    const std::size_t in = static_cast<std::size_t>(lay.in);
    const std::size_t out = static_cast<std::size_t>(lay.out);

    // Activation reverse: adjoints w.r.t. (z, gz, hz).
    for (std::size_t j = 0; j < out; ++j) {
      const double s1 = e.s1[j], s2 = e.s2[j], s3 = e.s3[j];
      const double* gz = &e.gz[j * d];
      const double* hz = &e.hz[j * d];
      double zb = vbar[j] * s1;
      double* gzb = &gzbar[j * d];
      double* hzb = &hzbar[j * d];
      for (std::size_t i = 0; i < d; ++i) {
        const double gb = gbar[j * d + i];
        const double hb = hbar[j * d + i];
        zb += gb * s2 * gz[i] + hb * (s3 * gz[i] * gz[i] + s2 * hz[i]);
        gzb[i] = gb * s1 + 2.0 * s2 * gz[i] * hb;
        hzb[i] = hb * s1;
      }
      zbar[j] = zb;
    }

    // Affine reverse: parameter gradients and input adjoints.
    if (li > 0) {
      std::fill(vprev.begin(), vprev.begin() + static_cast<long>(in), 0.0);
      std::fill(gprev.begin(), gprev.begin() + static_cast<long>(in * d), 0.0);
      std::fill(hprev.begin(), hprev.begin() + static_cast<long>(in * d), 0.0);
    }
    for (std::size_t j = 0; j < out; ++j) {
      const double zb = zbar[j];
      lg.biases[j] += zb;
      const double* gzb = &gzbar[j * d];
      const double* hzb = &hzbar[j * d];
      double* wg = &lg.weights[j * in];
      const double* wrow = &lay.weights[j * in];
      for (std::size_t k = 0; k < in; ++k) {
        double acc = zb * e.vin[k];
        const double* gk = &e.gin[k * d];
        const double* hk = &e.hin[k * d];
        for (std::size_t i = 0; i < d; ++i) acc += gzb[i] * gk[i] + hzb[i] * hk[i];
        wg[k] += acc;
        if (li > 0) {
          const double w = wrow[k];
          vprev[k] += w * zb;
          double* gp = &gprev[k * d];
          double* hp = &hprev[k * d];
          for (std::size_t i = 0; i < d; ++i) {
            gp[i] += w * gzb[i];
            hp[i] += w * hzb[i];
          }
        }
      }
    }
    if (li > 0) {
      std::swap(vbar, vprev);
      std::swap(gbar, gprev);
      std::swap(hbar, hprev);
    }
  }
}

}  // namespace

ActivationKind ActivationKind::sine(double omega0) {
  if (!(omega0 > 0.0)) throw ConfigError("Sine activation requires omega0 > 0");
  return {Kind::Sine, omega0};
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.biases.size();
  return n;
}

namespace {

MlpParams init_common(const std::vector<int>& dims, std::uint64_t seed,
                      ActivationKind hidden_act,
                      const std::function<double(std::size_t, int, int)>& bound) {
  if (dims.size() < 2) throw ConfigError("init: need at least input and output dims");
  for (int w : dims)
    if (w <= 0) throw ConfigError("init: layer dims must be positive");
  if (dims.back() != 1) throw ConfigError("init: output dim must be 1");

  RngStream rng(seed);
  MlpParams p;
  p.input_dim = dims[0];
  p.layers.resize(dims.size() - 1);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Layer& lay = p.layers[l];
    lay.in = dims[l];
    lay.out = dims[l + 1];
    lay.activation = (l + 2 == dims.size()) ? ActivationKind::linear() : hidden_act;
    lay.weights.resize(static_cast<std::size_t>(lay.out) * lay.in);
    lay.biases.assign(static_cast<std::size_t>(lay.out), 0.0);
    const double b = bound(l, lay.in, lay.out);
    for (double& w : lay.weights) w = rng.uniform(-b, b);
  }
  return p;
}

}  // namespace

MlpParams init_xavier(const std::vector<int>& layer_dims, ActivationKind hidden_activation,
                      std::uint64_t seed) {
  return init_common(layer_dims, seed, hidden_activation, [](std::size_t, int in, int out) {
    return std::sqrt(6.0 / (in + out));
  });
}

MlpParams init_siren(const std::vector<int>& layer_dims, double omega0, std::uint64_t seed) {
  if (!(omega0 > 0.0)) throw ConfigError("init_siren: omega0 must be > 0");
  return init_common(layer_dims, seed, ActivationKind::sine(omega0),
                     [omega0](std::size_t l, int in, int) {
                       return l == 0 ? 1.0 / in : std::sqrt(6.0 / in) / omega0;
                     });
}

double forward_value(const MlpParams& params, std::span<const double> x) {
  check_structure(params);
  check_point_dim(params, x.size());
  const std::size_t mw = static_cast<std::size_t>(max_width(params));
  std::vector<double> cur(mw), nxt(mw);
  for (std::size_t k = 0; k < x.size(); ++k) cur[k] = x[k];
  for (const auto& lay : params.layers) {
    for (int j = 0; j < lay.out; ++j) {
      double z = lay.biases[static_cast<std::size_t>(j)];
      const double* wrow = &lay.weights[static_cast<std::size_t>(j) * lay.in];
      for (int k = 0; k < lay.in; ++k) z += wrow[k] * cur[static_cast<std::size_t>(k)];
      nxt[static_cast<std::size_t>(j)] = activate_value(lay.activation, z);
    }
    std::swap(cur, nxt);
  }
  return cur[0];
}

Jet2 forward_jet(const MlpParams& params, std::span<const double> x) {
  check_structure(params);
  check_point_dim(params, x.size());
  Tape tape;
  tape.resize(params);
  Jet2 jet;
  forward_store(params, x, tape, &jet);
  return jet;
}

std::vector<Jet2> forward_jets(const MlpParams& params, std::span<const double> points) {
  check_structure(params);
  const std::size_t d = static_cast<std::size_t>(params.input_dim);
  if (points.size() % d != 0) throw ContractViolation("forward_jets: ragged point buffer");
  const std::size_t n = points.size() / d;
  std::vector<Jet2> jets(n);
  for_each_chunk(n, [&](std::size_t, std::size_t beg, std::size_t end) {
    Tape tape;
    tape.resize(params);
    for (std::size_t i = beg; i < end; ++i)
      forward_store(params, points.subspan(i * d, d), tape, &jets[i]);
  });
  return jets;
}

std::vector<double> forward_values(const MlpParams& params, std::span<const double> points) {
  check_structure(params);
  const std::size_t d = static_cast<std::size_t>(params.input_dim);
  if (points.size() % d != 0) throw ContractViolation("forward_values: ragged point buffer");
  const std::size_t n = points.size() / d;
  std::vector<double> vals(n);
  for_each_chunk(n, [&](std::size_t, std::size_t beg, std::size_t end) {
    for (std::size_t i = beg; i < end; ++i)
      vals[i] = forward_value(params, points.subspan(i * d, d));
  });
  return vals;
}

ParamGrads zeros_like(const MlpParams& params) {
  ParamGrads g;
  g.layers.resize(params.layers.size());
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    g.layers[l].weights.assign(params.layers[l].weights.size(), 0.0);
    g.layers[l].biases.assign(params.layers[l].biases.size(), 0.0);
  }
  return g;
}

void accumulate(ParamGrads& into, const ParamGrads& from) {
  for (std::size_t l = 0; l < into.layers.size(); ++l) {
    auto& a = into.layers[l];
    const auto& b = from.layers[l];
    for (std::size_t i = 0; i < a.weights.size(); ++i) a.weights[i] += b.weights[i];
    for (std::size_t i = 0; i < a.biases.size(); ++i) a.biases[i] += b.biases[i];
  }
}

ParamGrads backprop_jets(const MlpParams& params, std::span<const double> points,
                         std::span<const JetCotangent> cotangents) {
  check_structure(params);
  const std::size_t d = static_cast<std::size_t>(params.input_dim);
  const std::size_t n = cotangents.size();
  if (n == 0) throw ContractViolation("backprop_jets: empty batch");
  if (points.size() != n * d) throw ContractViolation("backprop_jets: point/cotangent mismatch");
  for (const auto& c : cotangents) {
    if ((!c.d_grad.empty() && c.d_grad.size() != d) ||
        (!c.d_hess_diag.empty() && c.d_hess_diag.size() != d))
      throw ContractViolation("backprop_jets: cotangent dimension mismatch");
  }

  const std::size_t chunks = chunk_count(n);
  std::vector<ParamGrads> partial(chunks);
  for_each_chunk(n, [&](std::size_t c, std::size_t beg, std::size_t end) {
    ParamGrads g = zeros_like(params);
    Tape tape;
    tape.resize(params);
    for (std::size_t i = beg; i < end; ++i) {
      forward_store(params, points.subspan(i * d, d), tape, nullptr);
      reverse_from_tape(params, tape, cotangents[i], g);
    }
    partial[c] = std::move(g);
  });

  ParamGrads total = zeros_like(params);
  for (std::size_t c = 0; c < chunks; ++c) accumulate(total, partial[c]);
  return total;
}

ParamGrads backprop_values(const MlpParams& params, std::span<const double> points,
                           std::span<const double> d_values) {
  check_structure(params);
  const std::size_t d = static_cast<std::size_t>(params.input_dim);
  const std::size_t n = d_values.size();
  if (n == 0) throw ContractViolation("backprop_values: empty batch");
  if (points.size() != n * d) throw ContractViolation("backprop_values: point/value mismatch");

  const std::size_t nl = params.layers.size();
  const std::size_t mw = static_cast<std::size_t>(max_width(params));
  const std::size_t chunks = chunk_count(n);
  std::vector<ParamGrads> partial(chunks);

  for_each_chunk(n, [&](std::size_t c, std::size_t beg, std::size_t end) {
    ParamGrads g = zeros_like(params);
    // Per-layer input values and activation slopes.
    std::vector<std::vector<double>> vin(nl), s1(nl);
    for (std::size_t l = 0; l < nl; ++l) {
      vin[l].resize(static_cast<std::size_t>(params.layers[l].in));
      s1[l].resize(static_cast<std::size_t>(params.layers[l].out));
    }
    std::vector<double> vbar(mw), vprev(mw);

    for (std::size_t p = beg; p < end; ++p) {
      const double* x = points.data() + p * d;
      for (std::size_t k = 0; k < d; ++k) vin[0][k] = x[k];
      for (std::size_t l = 0; l < nl; ++l) {
        const auto& lay = params.layers[l];
        double* outv = (l + 1 < nl) ? vin[l + 1].data() : vbar.data();  // last reused as tmp
        for (int j = 0; j < lay.out; ++j) {
          double z = lay.biases[static_cast<std::size_t>(j)];
          const double* wrow = &lay.weights[static_cast<std::size_t>(j) * lay.in];
          for (int k = 0; k < lay.in; ++k) z += wrow[k] * vin[l][static_cast<std::size_t>(k)];
          const ActEval a = activate(lay.activation, z);
          s1[l][static_cast<std::size_t>(j)] = a.s1;
          outv[j] = a.v;
        }
      }
      // Reverse.
      vbar[0] = d_values[p];
      for (std::size_t li = nl; li-- > 0;) {
        const auto& lay = params.layers[li];
        auto& lg = g.layers[li];
        const std::size_t in = static_cast<std::size_t>(lay.in);
        const std::size_t out = static_cast<std::size_t>(lay.out);
        if (li > 0) std::fill(vprev.begin(), vprev.begin() + static_cast<long>(in), 0.0);
        for (std::size_t j = 0; j < out; ++j) {
          const double zb = vbar[j] * s1[li][j];
          lg.biases[j] += zb;
          double* wg = &lg.weights[j * in];
          const double* wrow = &lay.weights[j * in];
          for (std::size_t k = 0; k < in; ++k) {
            wg[k] += zb * vin[li][k];
            if (li > 0) vprev[k] += wrow[k] * zb;
          }
        }
        if (li > 0) std::swap(vbar, vprev);
      }
    }
    partial[c] = std::move(g);
  });

  ParamGrads total = zeros_like(params);
  for (std::size_t c = 0; c < chunks; ++c) accumulate(total, partial[c]);
  return total;
}

}  // namespace dualpinn
