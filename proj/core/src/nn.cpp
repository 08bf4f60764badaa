#include "framecast/nn.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "framecast/errors.hpp"

namespace framecast {

long NetworkArchitecture::parameter_count() const {
  long count = 0;
  int prev = input_dim;
  for (int h : hidden_sizes) {
    count += static_cast<long>(prev) * h + h;
    prev = h;
  }
  count += static_cast<long>(prev) * output_dim + output_dim;
  return count;
}

namespace {

// Orthonormalizes the rows (out <= in) or columns (out > in) of a
// Gaussian matrix via modified Gram-Schmidt, then scales by gain.
void orthogonal_init(std::vector<double>& w, int out, int in, double gain, Rng& rng) {
  for (double& x : w) x = rng.normal();
  const bool by_rows = out <= in;
  const int vecs = by_rows ? out : in;
  const int dim = by_rows ? in : out;
  auto at = [&](int v, int d) -> double& {
    return by_rows ? w[static_cast<std::size_t>(v) * in + d]
                   : w[static_cast<std::size_t>(d) * in + v];
  };
  for (int v = 0; v < vecs; ++v) {
    for (int u = 0; u < v; ++u) {
      double dot = 0.0;
      for (int d = 0; d < dim; ++d) dot += at(v, d) * at(u, d);
      for (int d = 0; d < dim; ++d) at(v, d) -= dot * at(u, d);
    }
    double norm = 0.0;
    for (int d = 0; d < dim; ++d) norm += at(v, d) * at(v, d);
    norm = std::sqrt(norm);
    if (norm < 1e-12) norm = 1.0;
    for (int d = 0; d < dim; ++d) at(v, d) /= norm;
  }
  for (double& x : w) x *= gain;
}

}  // namespace

void DenseLayer::init(int in_dim, int out_dim, Activation activation, Rng& rng,
                      double gain) {
  in = in_dim;
  out = out_dim;
  act = activation;
  w.assign(static_cast<std::size_t>(in) * out, 0.0);
  b.assign(out, 0.0);
  orthogonal_init(w, out, in, gain, rng);
  gw.assign(w.size(), 0.0);
  gb.assign(b.size(), 0.0);
  mw.assign(w.size(), 0.0);
  vw.assign(w.size(), 0.0);
  mb.assign(b.size(), 0.0);
  vb.assign(b.size(), 0.0);
}

void DenseLayer::forward(std::span<const double> x, std::vector<double>& y) const {
  y.resize(out);
  for (int o = 0; o < out; ++o) {
    const double* wo = &w[static_cast<std::size_t>(o) * in];
    double s = b[o];
    for (int i = 0; i < in; ++i) s += wo[i] * x[i];
    y[o] = act == Activation::kTanh ? std::tanh(s) : s;
  }
}

void DenseLayer::backward(std::span<const double> x, std::span<const double> y,
                          std::span<const double> dy, std::vector<double>& dx) {
  dx.assign(in, 0.0);
  for (int o = 0; o < out; ++o) {
    double dpre = dy[o];
    if (act == Activation::kTanh) dpre *= 1.0 - y[o] * y[o];
    double* gwo = &gw[static_cast<std::size_t>(o) * in];
    const double* wo = &w[static_cast<std::size_t>(o) * in];
    for (int i = 0; i < in; ++i) {
      gwo[i] += dpre * x[i];
      dx[i] += wo[i] * dpre;
    }
    gb[o] += dpre;
  }
}

void DenseLayer::zero_grad() {
  std::fill(gw.begin(), gw.end(), 0.0);
  std::fill(gb.begin(), gb.end(), 0.0);
}

void adam_step(std::span<double> params, std::span<const double> grads,
               std::span<double> m, std::span<double> v, long t, double lr,
               double beta1, double beta2, double eps) {
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grads[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grads[i] * grads[i];
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

Mlp::Mlp(NetworkArchitecture arch, Rng& rng, double head_gain)
    : arch_(std::move(arch)) {
  if (arch_.input_dim < 1 || arch_.output_dim < 1) {
    throw std::invalid_argument("Mlp: dimensions must be >= 1");
  }
  for (int h : arch_.hidden_sizes) {
    if (h < 1) throw std::invalid_argument("Mlp: hidden sizes must be >= 1");
  }
  int prev = arch_.input_dim;
  for (int h : arch_.hidden_sizes) {
    DenseLayer layer;
    layer.init(prev, h, arch_.hidden_activation, rng, std::sqrt(2.0));
    layers_.push_back(std::move(layer));
    prev = h;
  }
  DenseLayer head;
  head.init(prev, arch_.output_dim, Activation::kIdentity, rng, head_gain);
  layers_.push_back(std::move(head));
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
  if (static_cast<int>(input.size()) != arch_.input_dim) {
    throw std::invalid_argument("Mlp::forward: input dimension mismatch");
  }
  std::vector<double> cur(input.begin(), input.end());
  std::vector<double> next;
  for (const auto& layer : layers_) {
    layer.forward(cur, next);
    cur.swap(next);
  }
  return cur;
}

Mlp::Tape Mlp::forward_tape(std::span<const double> input) const {
  if (static_cast<int>(input.size()) != arch_.input_dim) {
    throw std::invalid_argument("Mlp::forward_tape: input dimension mismatch");
  }
  Tape tape;
  tape.acts.reserve(layers_.size() + 1);
  tape.acts.emplace_back(input.begin(), input.end());
  for (const auto& layer : layers_) {
    std::vector<double> y;
    layer.forward(tape.acts.back(), y);
    tape.acts.push_back(std::move(y));
  }
  return tape;
}

std::vector<double> Mlp::backward(const Tape& tape, std::span<const double> dl_dy) {
  if (tape.acts.size() != layers_.size() + 1) {
    throw std::logic_error("Mlp::backward: tape does not match this network");
  }
  if (dl_dy.size() != tape.acts.back().size()) {
    throw std::logic_error("Mlp::backward: output gradient size mismatch");
  }
  std::vector<double> dy(dl_dy.begin(), dl_dy.end());
  std::vector<double> dx;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    layers_[l].backward(tape.acts[l], tape.acts[l + 1], dy, dx);
    dy.swap(dx);
  }
  return dy;
}

void Mlp::zero_grad() {
  for (auto& layer : layers_) layer.zero_grad();
}

void Mlp::scale_grad(double s) {
  for (auto& layer : layers_) {
    for (double& g : layer.gw) g *= s;
    for (double& g : layer.gb) g *= s;
  }
}

void Mlp::adam_update(double lr) {
  for (const auto& layer : layers_) {
    for (double g : layer.gw) {
      if (!std::isfinite(g)) throw numeric_error("Mlp::adam_update: non-finite gradient");
    }
    for (double g : layer.gb) {
      if (!std::isfinite(g)) throw numeric_error("Mlp::adam_update: non-finite gradient");
    }
  }
  ++adam_t_;
  for (auto& layer : layers_) {
    adam_step(layer.w, layer.gw, layer.mw, layer.vw, adam_t_, lr);
    adam_step(layer.b, layer.gb, layer.mb, layer.vb, adam_t_, lr);
  }
}

std::vector<double> Mlp::flatten_params() const {
  std::vector<double> flat;
  for (const auto& layer : layers_) {
    flat.insert(flat.end(), layer.w.begin(), layer.w.end());
    flat.insert(flat.end(), layer.b.begin(), layer.b.end());
  }
  return flat;
}

void Mlp::set_params(std::span<const double> flat) {
  std::size_t k = 0;
  for (auto& layer : layers_) {
    for (double& x : layer.w) x = flat[k++];
    for (double& x : layer.b) x = flat[k++];
  }
  if (k != flat.size()) throw std::invalid_argument("Mlp::set_params: size mismatch");
}

std::vector<double> Mlp::flatten_grads() const {
  std::vector<double> flat;
  for (const auto& layer : layers_) {
    flat.insert(flat.end(), layer.gw.begin(), layer.gw.end());
    flat.insert(flat.end(), layer.gb.begin(), layer.gb.end());
  }
  return flat;
}

void Mlp::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << "framecast-net 1\n";
  out << "input " << arch_.input_dim << "\n";
  out << "hidden";
  for (int h : arch_.hidden_sizes) out << " " << h;
  out << "\n";
  out << "output " << arch_.output_dim << "\n";
  out << "activation "
      << (arch_.hidden_activation == Activation::kTanh ? "tanh" : "identity")
      << "\n";
  char buf[48];
  auto dump = [&](const std::vector<double>& v) {
    for (double x : v) {
      std::snprintf(buf, sizeof(buf), " %a", x);
      out << buf;
    }
    out << "\n";
  };
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    out << "w " << l;
    dump(layers_[l].w);
    out << "b " << l;
    dump(layers_[l].b);
  }
}

Mlp Mlp::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "framecast-net" || version != 1) {
    throw std::runtime_error("unrecognized checkpoint format: " + path);
  }
  NetworkArchitecture arch;
  std::string token;
  in >> token >> arch.input_dim;
  if (token != "input") throw std::runtime_error("bad checkpoint header");
  in >> token;
  if (token != "hidden") throw std::runtime_error("bad checkpoint header");
  std::string rest;
  std::getline(in, rest);
  {
    std::istringstream hs(rest);
    int h;
    while (hs >> h) arch.hidden_sizes.push_back(h);
  }
  in >> token >> arch.output_dim;
  if (token != "output") throw std::runtime_error("bad checkpoint header");
  in >> token >> rest;
  if (token != "activation") throw std::runtime_error("bad checkpoint header");
  arch.hidden_activation = rest == "tanh" ? Activation::kTanh : Activation::kIdentity;

  Rng dummy(0);
  Mlp net(arch, dummy, 1.0);
  // operator>> does not portably parse hex floats; go through strtod.
  auto read_value = [&](double& x) {
    std::string v;
    if (!(in >> v)) throw std::runtime_error("truncated checkpoint: " + path);
    char* end = nullptr;
    x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0') {
      throw std::runtime_error("bad checkpoint value '" + v + "' in " + path);
    }
  };
  for (std::size_t l = 0; l < net.layers_.size(); ++l) {
    std::size_t idx;
    in >> token >> idx;
    if (token != "w" || idx != l) throw std::runtime_error("bad checkpoint tensor");
    for (double& x : net.layers_[l].w) read_value(x);
    in >> token >> idx;
    if (token != "b" || idx != l) throw std::runtime_error("bad checkpoint tensor");
    for (double& x : net.layers_[l].b) read_value(x);
  }
  if (!in) throw std::runtime_error("truncated checkpoint: " + path);
  return net;
}

}  // namespace framecast
