#include "v2x/nn.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "v2x/error.hpp"

namespace v2x {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMap = Eigen::Map<const RowMat>;
using MMap = Eigen::Map<RowMat>;
using CVecMap = Eigen::Map<const Eigen::VectorXd>;
using VecMap = Eigen::Map<Eigen::VectorXd>;

}  // namespace

int NetworkArchitecture::kernel() const { return std::min(conv.kernel, history); }

int NetworkArchitecture::conv_length() const { return (history - kernel()) / conv.stride + 1; }

std::size_t NetworkArchitecture::input_size() const {
  return static_cast<std::size_t>(vehicles) * channels * history +
         static_cast<std::size_t>(extra_per_vehicle) * vehicles;
}

std::size_t NetworkArchitecture::conv_output_size() const {
  return static_cast<std::size_t>(vehicles) * conv.filters * conv_length();
}

std::size_t NetworkArchitecture::dense_input_size() const {
  return conv_output_size() + static_cast<std::size_t>(extra_per_vehicle) * vehicles;
}

std::size_t NetworkArchitecture::param_count() const {
  std::size_t n = static_cast<std::size_t>(conv.filters) * channels * kernel() + conv.filters;
  std::size_t in = dense_input_size();
  for (int h : hidden) {
    n += in * h + h;
    in = h;
  }
  return n + in * outputs + outputs;
}

std::string NetworkArchitecture::describe() const {
  std::ostringstream os;
  os << "V=" << vehicles << " k=" << history << " C=" << channels << " extra=" << extra_per_vehicle
     << " conv=" << kernel() << "x" << conv.filters << "/" << conv.stride << " hidden=";
  for (std::size_t i = 0; i < hidden.size(); ++i) os << (i ? "," : "") << hidden[i];
  os << " out=" << outputs;
  return os.str();
}

void NetworkArchitecture::validate() const {
  require(vehicles >= 1 && history >= 1 && channels >= 1 && extra_per_vehicle >= 0,
          ErrorKind::kConfigInvalid, "network: input dimensions must be positive");
  require(conv.kernel >= 1 && conv.filters >= 1 && conv.stride >= 1, ErrorKind::kConfigInvalid,
          "network: conv kernel, filters and stride must be >= 1");
  require(outputs >= 1, ErrorKind::kConfigInvalid, "network: output width must be >= 1");
  for (int h : hidden)
    require(h >= 1, ErrorKind::kConfigInvalid, "network: hidden widths must be >= 1");
}

Network::Network(NetworkArchitecture arch) : arch_(std::move(arch)) {
  arch_.validate();
  conv_b_ = static_cast<std::size_t>(arch_.conv.filters) * arch_.channels * arch_.kernel();
  std::size_t off = conv_b_ + arch_.conv.filters;
  int in = static_cast<int>(arch_.dense_input_size());
  auto add = [&](int out) {
    Layer l{off, off + static_cast<std::size_t>(in) * out, in, out};
    off = l.b_offset + out;
    layers_.push_back(l);
    in = out;
  };
  for (int h : arch_.hidden) add(h);
  add(arch_.outputs);
}

std::vector<double> Network::forward(std::span<const double> params, std::span<const double> x,
                                     ForwardCache* cache) const {
  require(params.size() == param_count(), ErrorKind::kShapeMismatch,
          "network: parameter count mismatch");
  require(x.size() == arch_.input_size(), ErrorKind::kShapeMismatch,
          "network: input size mismatch");
  const int V = arch_.vehicles, C = arch_.channels, k = arch_.history;
  const int F = arch_.conv.filters, K = arch_.kernel(), L = arch_.conv_length();
  const int S = arch_.conv.stride;
  const double* W = params.data();
  const double* bc = params.data() + conv_b_;

  std::vector<double> conv_pre(arch_.conv_output_size());
  Eigen::VectorXd a(arch_.dense_input_size());
  for (int v = 0; v < V; ++v)
    for (int f = 0; f < F; ++f)
      for (int l = 0; l < L; ++l) {
        double s = bc[f];
        for (int c = 0; c < C; ++c) {
          const double* xi = &x[(static_cast<std::size_t>(v) * C + c) * k + l * S];
          const double* wf = &W[(static_cast<std::size_t>(f) * C + c) * K];
          for (int j = 0; j < K; ++j) s += wf[j] * xi[j];
        }
        const std::size_t idx = (static_cast<std::size_t>(v) * F + f) * L + l;
        conv_pre[idx] = s;
        a[idx] = s > 0.0 ? s : 0.0;
      }
  const std::size_t block = arch_.conv_output_size();
  const std::size_t channel_block = static_cast<std::size_t>(V) * C * k;
  for (std::size_t i = 0; i < x.size() - channel_block; ++i) a[block + i] = x[channel_block + i];

  if (cache) {
    cache->input.assign(x.begin(), x.end());
    cache->conv_pre = std::move(conv_pre);
    cache->act.clear();
    cache->pre.clear();
  }
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& ly = layers_[i];
    CMap Wl(params.data() + ly.w_offset, ly.out, ly.in);
    CVecMap bl(params.data() + ly.b_offset, ly.out);
    Eigen::VectorXd z = Wl * a + bl;
    if (cache) {
      cache->act.emplace_back(a.data(), a.data() + a.size());
      cache->pre.emplace_back(z.data(), z.data() + z.size());
    }
    if (i + 1 < layers_.size())
      a = z.cwiseMax(0.0);
    else
      a = std::move(z);
  }
  std::vector<double> out(a.data(), a.data() + a.size());
  if (cache) cache->output = out;
  return out;
}

void Network::backward(std::span<const double> params, const ForwardCache& cache,
                       std::span<const double> dout, std::span<double> grad) const {
  require(params.size() == param_count() && grad.size() == param_count(),
          ErrorKind::kShapeMismatch, "network: parameter/gradient size mismatch");
  require(dout.size() == static_cast<std::size_t>(arch_.outputs), ErrorKind::kShapeMismatch,
          "network: output gradient size mismatch");
  require(cache.act.size() == layers_.size(), ErrorKind::kShapeMismatch,
          "network: cache does not match the architecture");

  Eigen::VectorXd delta = CVecMap(dout.data(), dout.size());
  Eigen::VectorXd da;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const Layer& ly = layers_[i];
    CVecMap a(cache.act[i].data(), ly.in);
    MMap gW(grad.data() + ly.w_offset, ly.out, ly.in);
    VecMap gb(grad.data() + ly.b_offset, ly.out);
    gW.noalias() += delta * a.transpose();
    gb += delta;
    CMap Wl(params.data() + ly.w_offset, ly.out, ly.in);
    da = Wl.transpose() * delta;
    if (i > 0) {
      const auto& z = cache.pre[i - 1];
      for (int j = 0; j < da.size(); ++j)
        if (z[j] <= 0.0) da[j] = 0.0;
      delta = std::move(da);
    }
  }

  const int V = arch_.vehicles, C = arch_.channels, k = arch_.history;
  const int F = arch_.conv.filters, K = arch_.kernel(), L = arch_.conv_length();
  const int S = arch_.conv.stride;
  double* gWc = grad.data();
  double* gbc = grad.data() + conv_b_;
  const auto& x = cache.input;
  for (int v = 0; v < V; ++v)
    for (int f = 0; f < F; ++f)
      for (int l = 0; l < L; ++l) {
        const std::size_t idx = (static_cast<std::size_t>(v) * F + f) * L + l;
        if (cache.conv_pre[idx] <= 0.0) continue;
        const double d = da[idx];
        if (d == 0.0) continue;
        gbc[f] += d;
        for (int c = 0; c < C; ++c) {
          const double* xi = &x[(static_cast<std::size_t>(v) * C + c) * k + l * S];
          double* gw = &gWc[(static_cast<std::size_t>(f) * C + c) * K];
          for (int j = 0; j < K; ++j) gw[j] += d * xi[j];
        }
      }
}

std::vector<double> Network::init(Rng& rng) const {
  std::vector<double> p(param_count(), 0.0);
  auto fill = [&](std::size_t off, std::size_t n, int fan_in) {
    const double r = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-r, r);
    for (std::size_t i = 0; i < n; ++i) p[off + i] = u(rng);
  };
  fill(0, conv_b_, arch_.channels * arch_.kernel());
  for (const Layer& ly : layers_) fill(ly.w_offset, static_cast<std::size_t>(ly.in) * ly.out, ly.in);
  return p;
}

}  // namespace v2x
