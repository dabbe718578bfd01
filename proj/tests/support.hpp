#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <unistd.h>

#include "actmap/actmap.hpp"
#include "oracles.hpp"

namespace testing_support {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("actmap_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::vector<float> random_floats(actmap::Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<float> v(n);
  for (float& x : v) x = static_cast<float>(rng.uniform(lo, hi));
  return v;
}

inline oracle::Mat to_mat(const std::vector<float>& v, std::size_t w, std::size_t h) {
  oracle::Mat m(h, w);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) m(y, x) = v[y * w + x];
  return m;
}

inline std::filesystem::path toy_net() { return ACTMAP_TOY_NET; }

/// Archive with a single 3 -> out conv (k x k, padding k/2) followed by relu.
inline actmap::NetworkDescriptor one_conv_net(std::size_t out, std::size_t k, std::uint64_t seed) {
  actmap::Rng rng(seed);
  actmap::ConvLayer conv;
  conv.spec.in_channels = 3;
  conv.spec.out_channels = out;
  conv.spec.kernel_h = conv.spec.kernel_w = k;
  conv.spec.padding = k / 2;
  conv.spec.weights = random_floats(rng, conv.spec.weight_count(), -0.3, 0.3);
  conv.spec.bias = random_floats(rng, out, -0.05, 0.05);
  actmap::NetworkDescriptor net;
  net.name = "one_conv";
  net.layers = {conv, actmap::ReluLayer{}};
  return net;
}

/// Five conv stages shaped like the grouped AlexNet variant.
inline actmap::NetworkDescriptor alexnet_shaped(std::uint64_t seed) {
  actmap::Rng rng(seed);
  auto conv = [&](std::size_t in, std::size_t out, std::size_t k, std::size_t stride, std::size_t pad,
                  std::size_t groups) {
    actmap::ConvLayer c;
    c.spec = {in, out, k, k, stride, pad, groups, {}, {}};
    const double scale = std::sqrt(2.0 / static_cast<double>(in / groups * k * k));
    c.spec.weights.resize(c.spec.weight_count());
    for (float& w : c.spec.weights) w = static_cast<float>(scale * rng.normal());
    c.spec.bias = random_floats(rng, out, 0.0, 0.1);
    return c;
  };
  const actmap::LrnSpec norm{5, 1e-4, 0.75, 2.0};
  actmap::NetworkDescriptor net;
  net.name = "alexnet_shaped";
  net.normalization.means = {0.485, 0.456, 0.406};
  net.normalization.stds = {0.229, 0.224, 0.225};
  net.layers = {conv(3, 96, 11, 4, 2, 1),   actmap::ReluLayer{}, actmap::LrnLayer{norm},
                actmap::PoolLayer{{3, 2}},  conv(96, 256, 5, 1, 2, 2), actmap::ReluLayer{},
                actmap::LrnLayer{norm},     actmap::PoolLayer{{3, 2}}, conv(256, 384, 3, 1, 1, 1),
                actmap::ReluLayer{},        conv(384, 384, 3, 1, 1, 2), actmap::ReluLayer{},
                conv(384, 256, 3, 1, 1, 2), actmap::ReluLayer{},       actmap::PoolLayer{{3, 2}}};
  return net;
}

inline actmap::Tensor random_image(actmap::Rng& rng, std::size_t w, std::size_t h) {
  return actmap::Tensor(w, h, 3, random_floats(rng, w * h * 3, 0.0, 1.0));
}

}  // namespace testing_support
