#pragma once

#include <span>
#include <string>
#include <vector>

#include "framecast/rng.hpp"

namespace framecast {

enum class Activation { kTanh, kIdentity };

struct NetworkArchitecture {
  int input_dim = 0;
  std::vector<int> hidden_sizes;
  int output_dim = 0;
  Activation hidden_activation = Activation::kTanh;

  /// Weights plus biases across all layers.
  long parameter_count() const;
};

/// One dense layer: parameters, gradient accumulators and Adam moments.
struct DenseLayer {
  int in = 0;
  int out = 0;
  Activation act = Activation::kIdentity;
  std::vector<double> w;  // out x in, row-major
  std::vector<double> b;
  std::vector<double> gw, gb;
  std::vector<double> mw, vw, mb, vb;

  void init(int in_dim, int out_dim, Activation activation, Rng& rng, double gain);
  void forward(std::span<const double> x, std::vector<double>& y) const;
  /// dy is the gradient at the layer output; accumulates gw/gb and
  /// writes the gradient at the layer input to dx. `y` must be the
  /// activation output of this layer for the same x.
  void backward(std::span<const double> x, std::span<const double> y,
                std::span<const double> dy, std::vector<double>& dx);
  void zero_grad();
};

/// Bias-corrected adaptive-moment update on one parameter vector.
/// t is the 1-based step count after this update.
void adam_step(std::span<double> params, std::span<const double> grads,
               std::span<double> m, std::span<double> v, long t, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

/// Dense feed-forward network with explicit reverse-mode gradients.
class Mlp {
 public:
  Mlp() = default;
  /// Orthogonal-style init scaled by sqrt(2) on hidden layers and by
  /// head_gain on the output layer.
  Mlp(NetworkArchitecture arch, Rng& rng, double head_gain = 1.0);

  struct Tape {
    std::vector<std::vector<double>> acts;  // acts[0] = input, acts[L] = output
  };

  std::vector<double> forward(std::span<const double> input) const;
  Tape forward_tape(std::span<const double> input) const;
  const std::vector<double>& tape_output(const Tape& tape) const {
    return tape.acts.back();
  }

  /// Accumulates parameter gradients of the scalar loss whose gradient
  /// at the network output is dl_dy; returns the gradient at the input.
  std::vector<double> backward(const Tape& tape, std::span<const double> dl_dy);

  void zero_grad();
  void scale_grad(double s);
  /// One Adam step over all layers; throws numeric_error on non-finite
  /// gradients.
  void adam_update(double lr);

  const NetworkArchitecture& arch() const { return arch_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  long parameter_count() const { return arch_.parameter_count(); }

  std::vector<double> flatten_params() const;
  void set_params(std::span<const double> flat);
  std::vector<double> flatten_grads() const;

  /// Plain-text checkpoint with architecture header; hex-float tensor
  /// values round-trip bit-exactly.
  void save(const std::string& path) const;
  static Mlp load(const std::string& path);

 private:
  NetworkArchitecture arch_;
  std::vector<DenseLayer> layers_;
  long adam_t_ = 0;
};

}  // namespace framecast
