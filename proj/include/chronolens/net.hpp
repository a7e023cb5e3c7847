#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chronolens/common.hpp"
#include "chronolens/image.hpp"

namespace chronolens {

enum class LayerKind : std::uint16_t {
  conv = 1,
  relu = 2,
  maxpool = 3,
  fc = 4,
  softmax = 5,
};

// One layer of the micro network. Convolutions run at stride 1 with zero
// padding; pooling windows are non-overlapping and ragged edges are dropped.
struct Layer {
  LayerKind kind = LayerKind::relu;
  std::string name;
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 0;
  int pad = 0;
  int window = 0;
  int in_dim = 0;
  int out_dim = 0;
  std::vector<double> weights;  // conv: oc*ic*k*k, fc: out_dim*in_dim
  std::vector<double> bias;
};

struct ActivationShape {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::size_t flat() const {
    return static_cast<std::size_t>(channels) * height * width;
  }
};

struct Network {
  int input_height = 0;
  int input_width = 0;
  int input_channels = 0;
  int n_classes = 0;
  std::vector<Layer> layers;
};

// Per-layer parameter gradients, same shapes as the layer tensors.
struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;

  static Gradients zeros_like(const Network& net) {
    Gradients g;
    g.weights.resize(net.layers.size());
    g.bias.resize(net.layers.size());
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
      g.weights[i].assign(net.layers[i].weights.size(), 0.0);
      g.bias[i].assign(net.layers[i].bias.size(), 0.0);
    }
    return g;
  }

  void add(const Gradients& other) {
    for (std::size_t i = 0; i < weights.size(); ++i) {
      for (std::size_t j = 0; j < weights[i].size(); ++j) {
        weights[i][j] += other.weights[i][j];
      }
      for (std::size_t j = 0; j < bias[i].size(); ++j) {
        bias[i][j] += other.bias[i][j];
      }
    }
  }

  void scale(double f) {
    for (auto& w : weights) {
      for (double& v : w) v *= f;
    }
    for (auto& b : bias) {
      for (double& v : b) v *= f;
    }
  }
};

namespace detail {

inline void he_init(std::vector<double>& w, std::size_t fan_in, Rng& rng) {
  const double sigma = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (double& v : w) v = rng.normal() * sigma;
}

inline ActivationShape layer_output_shape(const Layer& layer,
                                          const ActivationShape& in) {
  switch (layer.kind) {
    case LayerKind::conv: {
      if (in.channels != layer.in_channels) {
        throw ShapeMismatch(layer.name + ": input channels " +
                            std::to_string(in.channels) + ", expected " +
                            std::to_string(layer.in_channels));
      }
      const int h = in.height + 2 * layer.pad - layer.kernel + 1;
      const int w = in.width + 2 * layer.pad - layer.kernel + 1;
      if (h <= 0 || w <= 0) {
        throw ShapeMismatch(layer.name + ": kernel larger than padded input");
      }
      return {layer.out_channels, h, w};
    }
    case LayerKind::relu:
      return in;
    case LayerKind::maxpool: {
      const int h = in.height / layer.window;
      const int w = in.width / layer.window;
      if (h <= 0 || w <= 0) {
        throw ShapeMismatch(layer.name + ": pooling window " +
                            std::to_string(layer.window) +
                            " larger than input");
      }
      return {in.channels, h, w};
    }
    case LayerKind::fc: {
      if (static_cast<int>(in.flat()) != layer.in_dim) {
        throw ShapeMismatch(layer.name + ": flattened input " +
                            std::to_string(in.flat()) + ", expected " +
                            std::to_string(layer.in_dim));
      }
      return {layer.out_dim, 1, 1};
    }
    case LayerKind::softmax:
      return in;
  }
  throw Error("InternalError", layer.name + ": unrecognized layer kind",
              ErrorKind::internal);
}

inline void conv_forward(const Layer& L, const ActivationShape& in_shape,
                         const std::vector<double>& in,
                         const ActivationShape& out_shape,
                         std::vector<double>& out) {
  const int H = in_shape.height, W = in_shape.width;
  const int OH = out_shape.height, OW = out_shape.width;
  const int K = L.kernel, P = L.pad;
  for (int o = 0; o < L.out_channels; ++o) {
    for (int y = 0; y < OH; ++y) {
      for (int x = 0; x < OW; ++x) {
        double acc = L.bias[o];
        for (int c = 0; c < L.in_channels; ++c) {
          const double* wk = L.weights.data() +
                             ((static_cast<std::size_t>(o) * L.in_channels +
                               c) *
                              K * K);
          const double* plane = in.data() + static_cast<std::size_t>(c) * H * W;
          for (int ky = 0; ky < K; ++ky) {
            const int iy = y + ky - P;
            if (iy < 0 || iy >= H) continue;
            for (int kx = 0; kx < K; ++kx) {
              const int ix = x + kx - P;
              if (ix < 0 || ix >= W) continue;
              acc += wk[ky * K + kx] * plane[iy * W + ix];
            }
          }
        }
        out[(static_cast<std::size_t>(o) * OH + y) * OW + x] = acc;
      }
    }
  }
}

inline void conv_backward(const Layer& L, const ActivationShape& in_shape,
                          const std::vector<double>& in,
                          const ActivationShape& out_shape,
                          const std::vector<double>& d_out,
                          std::vector<double>& d_in,
                          std::vector<double>& d_weights,
                          std::vector<double>& d_bias) {
  const int H = in_shape.height, W = in_shape.width;
  const int OH = out_shape.height, OW = out_shape.width;
  const int K = L.kernel, P = L.pad;
  for (int o = 0; o < L.out_channels; ++o) {
    const double* dplane = d_out.data() + static_cast<std::size_t>(o) * OH * OW;
    double bsum = 0.0;
    for (int i = 0; i < OH * OW; ++i) bsum += dplane[i];
    d_bias[o] += bsum;
    for (int c = 0; c < L.in_channels; ++c) {
      const std::size_t wbase =
          (static_cast<std::size_t>(o) * L.in_channels + c) * K * K;
      const double* plane = in.data() + static_cast<std::size_t>(c) * H * W;
      double* d_plane = d_in.data() + static_cast<std::size_t>(c) * H * W;
      for (int y = 0; y < OH; ++y) {
        for (int x = 0; x < OW; ++x) {
          const double g = dplane[y * OW + x];
          if (g == 0.0) continue;
          for (int ky = 0; ky < K; ++ky) {
            const int iy = y + ky - P;
            if (iy < 0 || iy >= H) continue;
            for (int kx = 0; kx < K; ++kx) {
              const int ix = x + kx - P;
              if (ix < 0 || ix >= W) continue;
              d_weights[wbase + ky * K + kx] += g * plane[iy * W + ix];
              d_plane[iy * W + ix] += g * L.weights[wbase + ky * K + kx];
            }
          }
        }
      }
    }
  }
}

inline void maxpool_forward(const Layer& L, const ActivationShape& in_shape,
                            const std::vector<double>& in,
                            const ActivationShape& out_shape,
                            std::vector<double>& out) {
  const int H = in_shape.height, W = in_shape.width;
  const int OH = out_shape.height, OW = out_shape.width;
  const int M = L.window;
  for (int c = 0; c < in_shape.channels; ++c) {
    const double* plane = in.data() + static_cast<std::size_t>(c) * H * W;
    double* oplane = out.data() + static_cast<std::size_t>(c) * OH * OW;
    for (int y = 0; y < OH; ++y) {
      for (int x = 0; x < OW; ++x) {
        double best = -std::numeric_limits<double>::infinity();
        for (int ky = 0; ky < M; ++ky) {
          for (int kx = 0; kx < M; ++kx) {
            best = std::max(best, plane[(y * M + ky) * W + (x * M + kx)]);
          }
        }
        oplane[y * OW + x] = best;
      }
    }
  }
}

// Ties route the gradient to the first window cell in scan order.
inline void maxpool_backward(const Layer& L, const ActivationShape& in_shape,
                             const std::vector<double>& in,
                             const ActivationShape& out_shape,
                             const std::vector<double>& d_out,
                             std::vector<double>& d_in) {
  const int H = in_shape.height, W = in_shape.width;
  const int OH = out_shape.height, OW = out_shape.width;
  const int M = L.window;
  for (int c = 0; c < in_shape.channels; ++c) {
    const double* plane = in.data() + static_cast<std::size_t>(c) * H * W;
    double* d_plane = d_in.data() + static_cast<std::size_t>(c) * H * W;
    const double* dout_plane =
        d_out.data() + static_cast<std::size_t>(c) * OH * OW;
    for (int y = 0; y < OH; ++y) {
      for (int x = 0; x < OW; ++x) {
        int best_iy = y * M, best_ix = x * M;
        double best = plane[best_iy * W + best_ix];
        for (int ky = 0; ky < M; ++ky) {
          for (int kx = 0; kx < M; ++kx) {
            const int iy = y * M + ky, ix = x * M + kx;
            if (plane[iy * W + ix] > best) {
              best = plane[iy * W + ix];
              best_iy = iy;
              best_ix = ix;
            }
          }
        }
        d_plane[best_iy * W + best_ix] += dout_plane[y * OW + x];
      }
    }
  }
}

inline void softmax_forward(const std::vector<double>& in,
                            std::vector<double>& out) {
  const double peak = *std::max_element(in.begin(), in.end());
  double denom = 0.0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = std::exp(in[i] - peak);
    denom += out[i];
  }
  for (double& v : out) v /= denom;
}

inline void softmax_backward(const std::vector<double>& probs,
                             const std::vector<double>& d_out,
                             std::vector<double>& d_in) {
  double dot = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) dot += d_out[i] * probs[i];
  for (std::size_t i = 0; i < probs.size(); ++i) {
    d_in[i] = probs[i] * (d_out[i] - dot);
  }
}

}  // namespace detail

// Two conv/pool stages feeding two fully connected layers. Weights draw from
// a Kaiming normal (sigma = sqrt(2/fan_in)) in fixed layer order so the same
// seed always yields the same network; biases start at zero.
inline Network make_default_network(int height, int width, int channels,
                                   int n_classes, std::uint64_t seed) {
  if (height < 8 || width < 8 || channels < 1 || n_classes < 2) {
    throw ShapeMismatch("network needs input >= 8x8 and >= 2 classes");
  }
  Network net;
  net.input_height = height;
  net.input_width = width;
  net.input_channels = channels;
  net.n_classes = n_classes;
  Rng rng(seed);

  const auto add_conv = [&](const std::string& name, int in_c, int out_c) {
    Layer L;
    L.kind = LayerKind::conv;
    L.name = name;
    L.in_channels = in_c;
    L.out_channels = out_c;
    L.kernel = 3;
    L.pad = 1;
    L.weights.resize(static_cast<std::size_t>(out_c) * in_c * 9);
    L.bias.assign(out_c, 0.0);
    detail::he_init(L.weights, static_cast<std::size_t>(in_c) * 9, rng);
    net.layers.push_back(std::move(L));
  };
  const auto add_relu = [&](const std::string& name) {
    Layer L;
    L.kind = LayerKind::relu;
    L.name = name;
    net.layers.push_back(std::move(L));
  };
  const auto add_pool = [&](const std::string& name) {
    Layer L;
    L.kind = LayerKind::maxpool;
    L.name = name;
    L.window = 2;
    net.layers.push_back(std::move(L));
  };
  const auto add_fc = [&](const std::string& name, int in_dim, int out_dim) {
    Layer L;
    L.kind = LayerKind::fc;
    L.name = name;
    L.in_dim = in_dim;
    L.out_dim = out_dim;
    L.weights.resize(static_cast<std::size_t>(out_dim) * in_dim);
    L.bias.assign(out_dim, 0.0);
    detail::he_init(L.weights, static_cast<std::size_t>(in_dim), rng);
    net.layers.push_back(std::move(L));
  };

  add_conv("conv1", channels, 8);
  add_relu("relu1");
  add_pool("pool1");
  add_conv("conv2", 8, 16);
  add_relu("relu2");
  add_pool("pool2");
  const int h2 = (height / 2) / 2;
  const int w2 = (width / 2) / 2;
  add_fc("fc1", 16 * h2 * w2, 64);
  add_relu("relu3");
  add_fc("fc2", 64, n_classes);
  Layer sm;
  sm.kind = LayerKind::softmax;
  sm.name = "softmax";
  net.layers.push_back(std::move(sm));
  return net;
}

// Activations after every layer; activations[0] is the flattened input.
struct ForwardTrace {
  std::vector<std::vector<double>> activations;
  std::vector<ActivationShape> shapes;
};

inline ForwardTrace forward_trace(const Network& net, const ImageTensor& img) {
  if (img.height != net.input_height || img.width != net.input_width ||
      img.channels != net.input_channels) {
    throw ShapeMismatch("input " + std::to_string(img.channels) + "x" +
                        std::to_string(img.height) + "x" +
                        std::to_string(img.width) + ", network expects " +
                        std::to_string(net.input_channels) + "x" +
                        std::to_string(net.input_height) + "x" +
                        std::to_string(net.input_width));
  }
  ForwardTrace trace;
  trace.activations.reserve(net.layers.size() + 1);
  trace.shapes.reserve(net.layers.size() + 1);
  trace.activations.push_back(img.values);
  trace.shapes.push_back({net.input_channels, net.input_height,
                          net.input_width});

  for (const Layer& L : net.layers) {
    const ActivationShape& in_shape = trace.shapes.back();
    const std::vector<double>& in = trace.activations.back();
    const ActivationShape out_shape = detail::layer_output_shape(L, in_shape);
    std::vector<double> out(out_shape.flat(), 0.0);
    switch (L.kind) {
      case LayerKind::conv:
        detail::conv_forward(L, in_shape, in, out_shape, out);
        break;
      case LayerKind::relu:
        for (std::size_t i = 0; i < in.size(); ++i) {
          out[i] = in[i] > 0.0 ? in[i] : 0.0;
        }
        break;
      case LayerKind::maxpool:
        detail::maxpool_forward(L, in_shape, in, out_shape, out);
        break;
      case LayerKind::fc: {
        for (int o = 0; o < L.out_dim; ++o) {
          const double* row =
              L.weights.data() + static_cast<std::size_t>(o) * L.in_dim;
          double acc = L.bias[o];
          for (int i = 0; i < L.in_dim; ++i) acc += row[i] * in[i];
          out[o] = acc;
        }
        break;
      }
      case LayerKind::softmax:
        detail::softmax_forward(in, out);
        break;
    }
    trace.activations.push_back(std::move(out));
    trace.shapes.push_back(out_shape);
  }
  return trace;
}

// Class probabilities for one image.
inline std::vector<double> forward(const Network& net, const ImageTensor& img) {
  return forward_trace(net, img).activations.back();
}

// Activation vector after the named layer.
inline std::vector<double> features_at(const Network& net,
                                       const ImageTensor& img,
                                       const std::string& layer_name) {
  const ForwardTrace trace = forward_trace(net, img);
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    if (net.layers[i].name == layer_name) return trace.activations[i + 1];
  }
  throw ShapeMismatch("no layer named '" + layer_name + "'");
}

inline ActivationShape shape_at(const Network& net,
                                const std::string& layer_name) {
  ActivationShape shape{net.input_channels, net.input_height, net.input_width};
  for (const Layer& L : net.layers) {
    shape = detail::layer_output_shape(L, shape);
    if (L.name == layer_name) return shape;
  }
  throw ShapeMismatch("no layer named '" + layer_name + "'");
}

namespace detail {

// Probabilities below this floor are clamped inside the log, and the
// corresponding gradient contribution is exactly zero.
constexpr double kLogFloor = 1e-12;

inline double sample_loss_and_backprop(const Network& net,
                                       const ImageTensor& img, int label,
                                       Gradients* grads) {
  const ForwardTrace trace = forward_trace(net, img);
  const std::vector<double>& probs = trace.activations.back();
  if (label < 0 || label >= static_cast<int>(probs.size())) {
    throw ShapeMismatch("label " + std::to_string(label) + " outside [0, " +
                        std::to_string(probs.size()) + ")");
  }
  const double p = probs[static_cast<std::size_t>(label)];
  const double loss = -std::log(std::max(p, kLogFloor));
  if (!grads) return loss;

  std::vector<double> d_out(probs.size(), 0.0);
  if (p > kLogFloor) d_out[static_cast<std::size_t>(label)] = -1.0 / p;

  for (std::size_t li = net.layers.size(); li-- > 0;) {
    const Layer& L = net.layers[li];
    const ActivationShape& in_shape = trace.shapes[li];
    const ActivationShape& out_shape = trace.shapes[li + 1];
    const std::vector<double>& in = trace.activations[li];
    const std::vector<double>& out = trace.activations[li + 1];
    std::vector<double> d_in(in.size(), 0.0);
    switch (L.kind) {
      case LayerKind::conv:
        conv_backward(L, in_shape, in, out_shape, d_out, d_in,
                      grads->weights[li], grads->bias[li]);
        break;
      case LayerKind::relu:
        for (std::size_t i = 0; i < in.size(); ++i) {
          d_in[i] = in[i] > 0.0 ? d_out[i] : 0.0;
        }
        break;
      case LayerKind::maxpool:
        maxpool_backward(L, in_shape, in, out_shape, d_out, d_in);
        break;
      case LayerKind::fc:
        for (int o = 0; o < L.out_dim; ++o) {
          const double g = d_out[o];
          grads->bias[li][o] += g;
          if (g == 0.0) continue;
          const std::size_t base = static_cast<std::size_t>(o) * L.in_dim;
          for (int i = 0; i < L.in_dim; ++i) {
            grads->weights[li][base + i] += g * in[i];
            d_in[i] += g * L.weights[base + i];
          }
        }
        break;
      case LayerKind::softmax:
        softmax_backward(out, d_out, d_in);
        break;
    }
    d_out = std::move(d_in);
  }
  return loss;
}

}  // namespace detail

// Mean clamped negative log-likelihood over the batch plus an optional L2
// penalty (weight_decay/2 * |W|^2, biases excluded). When `grads` is given it
// receives the exact gradient of the returned value. Per-sample terms reduce
// over fixed-size chunks merged in index order, so the result is identical
// for any worker count.
inline double loss_and_gradients(const Network& net,
                                 std::span<const ImageTensor> images,
                                 std::span<const int> labels,
                                 double weight_decay, Gradients* grads) {
  if (images.empty() || images.size() != labels.size()) {
    throw LengthMismatch("batch of " + std::to_string(images.size()) +
                         " images, " + std::to_string(labels.size()) +
                         " labels");
  }
  constexpr std::size_t kChunk = 8;
  const std::size_t n_chunks = (images.size() + kChunk - 1) / kChunk;
  std::vector<double> chunk_loss(n_chunks, 0.0);
  std::vector<Gradients> chunk_grads;
  if (grads) {
    chunk_grads.resize(n_chunks);
    for (auto& g : chunk_grads) g = Gradients::zeros_like(net);
  }
  parallel_chunks(n_chunks, [&](std::size_t ci) {
    const std::size_t lo = ci * kChunk;
    const std::size_t hi = std::min(lo + kChunk, images.size());
    Gradients* slot = grads ? &chunk_grads[ci] : nullptr;
    for (std::size_t i = lo; i < hi; ++i) {
      chunk_loss[ci] +=
          detail::sample_loss_and_backprop(net, images[i], labels[i], slot);
    }
  });

  double loss = 0.0;
  for (double v : chunk_loss) loss += v;
  const double inv_n = 1.0 / static_cast<double>(images.size());
  loss *= inv_n;
  if (grads) {
    *grads = Gradients::zeros_like(net);
    for (const Gradients& g : chunk_grads) grads->add(g);
    grads->scale(inv_n);
  }
  if (weight_decay != 0.0) {
    double wsq = 0.0;
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
      for (double w : net.layers[li].weights) wsq += w * w;
    }
    loss += 0.5 * weight_decay * wsq;
    if (grads) {
      for (std::size_t li = 0; li < net.layers.size(); ++li) {
        for (std::size_t j = 0; j < net.layers[li].weights.size(); ++j) {
          grads->weights[li][j] += weight_decay * net.layers[li].weights[j];
        }
      }
    }
  }
  return loss;
}

struct SgdConfig {
  int batch_size = 50;
  double momentum = 0.9;
  double weight_decay = 0.0005;
  double learning_rate = 1e-5;
  int iterations = 50000;
  bool head_only = false;
  std::uint64_t shuffle_seed = 0;
};

struct TrainRecord {
  int iteration = 0;
  double loss = 0.0;
};

namespace detail {

// v <- momentum*v - lr*(g + decay*w); w <- w + v. Decay skips biases.
inline void sgd_step(Network& net, const Gradients& grads,
                     const SgdConfig& cfg, Gradients& velocity,
                     std::size_t first_trainable_layer) {
  for (std::size_t li = first_trainable_layer; li < net.layers.size(); ++li) {
    Layer& L = net.layers[li];
    for (std::size_t j = 0; j < L.weights.size(); ++j) {
      double& v = velocity.weights[li][j];
      v = cfg.momentum * v -
          cfg.learning_rate *
              (grads.weights[li][j] + cfg.weight_decay * L.weights[j]);
      L.weights[j] += v;
    }
    for (std::size_t j = 0; j < L.bias.size(); ++j) {
      double& v = velocity.bias[li][j];
      v = cfg.momentum * v - cfg.learning_rate * grads.bias[li][j];
      L.bias[j] += v;
    }
  }
}

inline std::size_t last_fc_index(const Network& net) {
  for (std::size_t li = net.layers.size(); li-- > 0;) {
    const LayerKind k = net.layers[li].kind;
    if (k == LayerKind::fc) return li;
    if (k == LayerKind::conv) break;
  }
  throw HeadNotFC("final learnable layer is not fully connected");
}

}  // namespace detail

// Minibatch SGD with momentum. Batches walk a seeded permutation of the
// dataset; when fewer than batch_size samples remain the permutation is
// redrawn, so every batch is full-size and the whole run is a deterministic
// function of (net, data, config).
inline std::vector<TrainRecord> train(Network& net,
                                      std::span<const ImageTensor> images,
                                      std::span<const int> labels,
                                      const SgdConfig& cfg) {
  if (images.empty() || images.size() != labels.size()) {
    throw LengthMismatch("dataset of " + std::to_string(images.size()) +
                         " images, " + std::to_string(labels.size()) +
                         " labels");
  }
  const std::size_t batch =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size),
                            images.size());
  Rng rng(cfg.shuffle_seed);
  std::vector<std::size_t> order(images.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  std::size_t cursor = 0;

  const std::size_t first_layer =
      cfg.head_only ? detail::last_fc_index(net) : 0;
  Gradients velocity = Gradients::zeros_like(net);
  Gradients grads;
  std::vector<ImageTensor> batch_images(batch);
  std::vector<int> batch_labels(batch);
  std::vector<TrainRecord> history;
  history.reserve(static_cast<std::size_t>(cfg.iterations));

  for (int it = 0; it < cfg.iterations; ++it) {
    if (cursor + batch > order.size()) {
      rng.shuffle(order);
      cursor = 0;
    }
    for (std::size_t b = 0; b < batch; ++b) {
      batch_images[b] = images[order[cursor + b]];
      batch_labels[b] = labels[order[cursor + b]];
    }
    cursor += batch;
    const double loss =
        loss_and_gradients(net, batch_images, batch_labels, 0.0, &grads);
    detail::sgd_step(net, grads, cfg, velocity, first_layer);
    history.push_back({it, loss});
  }
  return history;
}

// Swaps the final fully connected layer for a freshly initialized one with
// `n_classes` outputs; everything upstream keeps its weights.
inline void replace_head(Network& net, int n_classes, std::uint64_t seed) {
  const std::size_t li = detail::last_fc_index(net);
  Layer& head = net.layers[li];
  Rng rng(seed);
  head.out_dim = n_classes;
  head.weights.resize(static_cast<std::size_t>(n_classes) * head.in_dim);
  head.bias.assign(n_classes, 0.0);
  detail::he_init(head.weights, static_cast<std::size_t>(head.in_dim), rng);
  net.n_classes = n_classes;
}

inline int argmax_class(std::span<const double> probs) {
  int best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best]) best = static_cast<int>(i);
  }
  return best;
}

}  // namespace chronolens
