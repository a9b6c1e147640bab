#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "v2x/rng.hpp"

namespace v2x {

struct ConvSpec {
  int kernel = 4;  // clamped to the history length
  int filters = 16;
  int stride = 1;

  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

// Input layout matches encode_state: vehicles * channels * history channel
// block ([v][c][i]), then `extra_per_vehicle` * vehicles scalars passed
// straight to the first dense layer.
struct NetworkArchitecture {
  int vehicles = 1;
  int history = 1;
  int channels = 1;
  int extra_per_vehicle = 2;
  ConvSpec conv;
  std::vector<int> hidden{64};
  int outputs = 1;

  int kernel() const;
  int conv_length() const;
  std::size_t input_size() const;
  std::size_t conv_output_size() const;  // vehicles * filters * conv_length
  std::size_t dense_input_size() const;
  std::size_t param_count() const;
  std::string describe() const;
  void validate() const;

  friend bool operator==(const NetworkArchitecture&, const NetworkArchitecture&) = default;
};

// Activations kept by forward() for the backward pass.
struct ForwardCache {
  std::vector<double> input;
  std::vector<double> conv_pre;             // [v][f][l]
  std::vector<std::vector<double>> act;     // act[0] dense input, act[i] layer i input
  std::vector<std::vector<double>> pre;     // pre-activation of each dense layer
  std::vector<double> output;
};

// Shared 1D convolution over the history axis (filters shared across
// vehicles) with ReLU, then fully connected ReLU layers and a linear output.
// Parameters live in a flat vector: conv W [f][c][k], conv b [f], then per
// dense layer W [out][in] row-major and b [out].
class Network {
 public:
  explicit Network(NetworkArchitecture arch);

  const NetworkArchitecture& arch() const { return arch_; }
  std::size_t param_count() const { return arch_.param_count(); }

  std::vector<double> forward(std::span<const double> params, std::span<const double> x,
                              ForwardCache* cache = nullptr) const;

  // Adds d(output . dout)/d(params) to grad.
  void backward(std::span<const double> params, const ForwardCache& cache,
                std::span<const double> dout, std::span<double> grad) const;

  // Symmetric uniform in +-1/sqrt(fan_in) for weights; zero biases.
  std::vector<double> init(Rng& rng) const;

  struct Layer {
    std::size_t w_offset, b_offset;
    int in, out;
  };
  std::size_t conv_w_offset() const { return 0; }
  std::size_t conv_b_offset() const { return conv_b_; }
  const std::vector<Layer>& layers() const { return layers_; }

 private:
  NetworkArchitecture arch_;
  std::size_t conv_b_ = 0;
  std::vector<Layer> layers_;
};

}  // namespace v2x
