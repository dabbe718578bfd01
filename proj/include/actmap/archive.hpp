#pragma once

// On-disk network description: a directory holding `network.json` plus one
// raw little-endian float32 blob per conv weight/bias array.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "actmap/error.hpp"
#include "actmap/tensor.hpp"

namespace actmap {

struct ConvLayer {
  ConvSpec spec;
  std::string weights_file;
  std::string bias_file;
};
struct ReluLayer {};
struct PoolLayer {
  PoolSpec spec;
};
struct LrnLayer {
  LrnSpec spec;
};

using Layer = std::variant<ConvLayer, ReluLayer, PoolLayer, LrnLayer>;

struct InputNormalization {
  std::array<double, 3> means{0.0, 0.0, 0.0};
  std::array<double, 3> stds{1.0, 1.0, 1.0};
};

struct NetworkDescriptor {
  std::string name;
  InputNormalization normalization;
  std::vector<Layer> layers;

  std::size_t conv_layer_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) n += std::holds_alternative<ConvLayer>(layer) ? 1 : 0;
    return n;
  }

  /// Output depth of each conv layer in network order.
  std::vector<std::size_t> conv_depths() const {
    std::vector<std::size_t> depths;
    for (const auto& layer : layers) {
      if (const auto* conv = std::get_if<ConvLayer>(&layer)) depths.push_back(conv->spec.out_channels);
    }
    return depths;
  }

  /// Length of the concatenated feature vector this network produces.
  std::size_t feature_length() const {
    std::size_t n = 0;
    for (std::size_t d : conv_depths()) n += d;
    return n;
  }

  /// Checks conv count, spec shapes and that channel counts chain from an RGB input.
  void validate() const {
    if (conv_layer_count() < 1) fail(ErrorKind::MalformedDescriptor, "network has no conv layers");
    for (double s : normalization.stds) {
      if (!(s > 0.0)) fail(ErrorKind::MalformedDescriptor, "input normalization std must be > 0");
    }
    std::size_t depth = 3;
    std::size_t index = 0;
    for (const auto& layer : layers) {
      if (const auto* conv = std::get_if<ConvLayer>(&layer)) {
        if (conv->spec.in_channels != depth) {
          fail(ErrorKind::ChannelChainBroken, "layer " + std::to_string(index) + " expects " +
                                                  std::to_string(conv->spec.in_channels) +
                                                  " input channels but receives " + std::to_string(depth));
        }
        conv->spec.validate();
        depth = conv->spec.out_channels;
      } else if (const auto* pool = std::get_if<PoolLayer>(&layer)) {
        if (pool->spec.window < 1 || pool->spec.stride < 1) {
          fail(ErrorKind::MalformedDescriptor, "maxpool window/stride must be >= 1");
        }
      } else if (const auto* norm = std::get_if<LrnLayer>(&layer)) {
        const LrnSpec& s = norm->spec;
        if (s.size % 2 == 0 || !(s.alpha > 0) || !(s.beta > 0) || !(s.k > 0)) {
          fail(ErrorKind::MalformedDescriptor, "lrn requires odd n and positive alpha, beta, k");
        }
      }
      ++index;
    }
  }
};

namespace detail {

inline std::vector<float> read_blob(const std::filesystem::path& path, std::size_t expected_elements) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::MissingFile, "cannot open blob " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() != expected_elements * 4) {
    fail(ErrorKind::ShapeMismatch, "blob " + path.filename().string() + " has " + std::to_string(bytes.size()) +
                                       " bytes, expected " + std::to_string(expected_elements * 4));
  }
  std::vector<float> values(expected_elements);
  for (std::size_t i = 0; i < expected_elements; ++i) {
    std::uint32_t word = 0;
    for (int b = 3; b >= 0; --b) word = (word << 8) | static_cast<unsigned char>(bytes[i * 4 + b]);
    values[i] = std::bit_cast<float>(word);
  }
  return values;
}

inline void write_blob(const std::filesystem::path& path, const std::vector<float>& values) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::IoError, "cannot write blob " + path.string());
  for (float v : values) {
    const auto word = std::bit_cast<std::uint32_t>(v);
    const char le[4] = {static_cast<char>(word & 0xff), static_cast<char>((word >> 8) & 0xff),
                        static_cast<char>((word >> 16) & 0xff), static_cast<char>((word >> 24) & 0xff)};
    out.write(le, 4);
  }
}

template <typename T>
T require(const nlohmann::json& node, const char* key, const std::string& context) {
  if (!node.contains(key)) fail(ErrorKind::MalformedDescriptor, context + ": missing field '" + key + "'");
  try {
    return node.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::MalformedDescriptor, context + ": field '" + key + "': " + e.what());
  }
}

}  // namespace detail

/// Parses and validates an archive directory, reading all weight blobs.
inline NetworkDescriptor load_archive(const std::filesystem::path& dir) {
  const auto descriptor_path = dir / "network.json";
  std::ifstream in(descriptor_path);
  if (!in) fail(ErrorKind::MissingFile, "cannot open " + descriptor_path.string());

  nlohmann::json root;
  try {
    in >> root;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::MalformedDescriptor, descriptor_path.string() + ": " + e.what());
  }
  if (!root.is_object()) fail(ErrorKind::MalformedDescriptor, "network.json must hold an object");

  NetworkDescriptor net;
  net.name = root.value("name", std::string{});
  if (root.contains("input_normalization")) {
    const auto& norm = root["input_normalization"];
    const auto means = detail::require<std::vector<double>>(norm, "means", "input_normalization");
    const auto stds = detail::require<std::vector<double>>(norm, "stds", "input_normalization");
    if (means.size() != 3 || stds.size() != 3) {
      fail(ErrorKind::MalformedDescriptor, "input_normalization needs 3 means and 3 stds");
    }
    std::copy(means.begin(), means.end(), net.normalization.means.begin());
    std::copy(stds.begin(), stds.end(), net.normalization.stds.begin());
  }

  if (!root.contains("layers") || !root["layers"].is_array()) {
    fail(ErrorKind::MalformedDescriptor, "network.json needs a 'layers' array");
  }
  std::size_t index = 0;
  for (const auto& node : root["layers"]) {
    const std::string context = "layers[" + std::to_string(index++) + "]";
    const auto kind = detail::require<std::string>(node, "kind", context);
    if (kind == "conv") {
      ConvLayer conv;
      auto& s = conv.spec;
      s.in_channels = detail::require<std::size_t>(node, "in", context);
      s.out_channels = detail::require<std::size_t>(node, "out", context);
      s.kernel_h = detail::require<std::size_t>(node, "kh", context);
      s.kernel_w = detail::require<std::size_t>(node, "kw", context);
      s.stride = node.value("stride", std::size_t{1});
      s.padding = node.value("pad", std::size_t{0});
      s.groups = node.value("groups", std::size_t{1});
      conv.weights_file = detail::require<std::string>(node, "weights_file", context);
      conv.bias_file = detail::require<std::string>(node, "bias_file", context);
      if (s.groups < 1 || s.in_channels % s.groups != 0 || s.out_channels % s.groups != 0 || s.stride < 1) {
        fail(ErrorKind::MalformedDescriptor, context + ": invalid stride/groups");
      }
      s.weights = detail::read_blob(dir / conv.weights_file, s.weight_count());
      s.bias = detail::read_blob(dir / conv.bias_file, s.out_channels);
      net.layers.emplace_back(std::move(conv));
    } else if (kind == "relu") {
      net.layers.emplace_back(ReluLayer{});
    } else if (kind == "maxpool") {
      PoolLayer pool;
      pool.spec.window = detail::require<std::size_t>(node, "window", context);
      pool.spec.stride = detail::require<std::size_t>(node, "stride", context);
      net.layers.emplace_back(pool);
    } else if (kind == "lrn") {
      LrnLayer norm;
      norm.spec.size = detail::require<std::size_t>(node, "n", context);
      norm.spec.alpha = detail::require<double>(node, "alpha", context);
      norm.spec.beta = detail::require<double>(node, "beta", context);
      norm.spec.k = detail::require<double>(node, "k", context);
      net.layers.emplace_back(norm);
    } else {
      fail(ErrorKind::MalformedDescriptor, context + ": unknown layer kind '" + kind + "'");
    }
  }
  net.validate();
  return net;
}

/// Writes `net` in archive form. Blob names default to conv<i>_weights.bin /
/// conv<i>_bias.bin when a layer carries none.
inline void save_archive(const NetworkDescriptor& net, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json root;
  root["name"] = net.name;
  root["input_normalization"] = {
      {"means", std::vector<double>(net.normalization.means.begin(), net.normalization.means.end())},
      {"stds", std::vector<double>(net.normalization.stds.begin(), net.normalization.stds.end())}};
  nlohmann::json layers = nlohmann::json::array();
  std::size_t conv_index = 0;
  for (const auto& layer : net.layers) {
    if (const auto* conv = std::get_if<ConvLayer>(&layer)) {
      ++conv_index;
      const std::string wname =
          conv->weights_file.empty() ? "conv" + std::to_string(conv_index) + "_weights.bin" : conv->weights_file;
      const std::string bname =
          conv->bias_file.empty() ? "conv" + std::to_string(conv_index) + "_bias.bin" : conv->bias_file;
      const auto& s = conv->spec;
      layers.push_back({{"kind", "conv"},
                        {"in", s.in_channels},
                        {"out", s.out_channels},
                        {"kh", s.kernel_h},
                        {"kw", s.kernel_w},
                        {"stride", s.stride},
                        {"pad", s.padding},
                        {"groups", s.groups},
                        {"weights_file", wname},
                        {"bias_file", bname}});
      detail::write_blob(dir / wname, s.weights);
      detail::write_blob(dir / bname, s.bias);
    } else if (std::holds_alternative<ReluLayer>(layer)) {
      layers.push_back({{"kind", "relu"}});
    } else if (const auto* pool = std::get_if<PoolLayer>(&layer)) {
      layers.push_back({{"kind", "maxpool"}, {"window", pool->spec.window}, {"stride", pool->spec.stride}});
    } else if (const auto* norm = std::get_if<LrnLayer>(&layer)) {
      layers.push_back({{"kind", "lrn"},
                        {"n", norm->spec.size},
                        {"alpha", norm->spec.alpha},
                        {"beta", norm->spec.beta},
                        {"k", norm->spec.k}});
    }
  }
  root["layers"] = layers;
  root["metadata"] = {{"feature_length", net.feature_length()}};
  std::ofstream out(dir / "network.json", std::ios::trunc);
  if (!out) fail(ErrorKind::IoError, "cannot write network.json in " + dir.string());
  out << root.dump(2) << '\n';
}

/// Applies the archive's per-channel input normalization to an RGB image in [0, 1].
inline Tensor normalize_input(const NetworkDescriptor& net, Tensor image) {
  if (image.depth() != 3) fail(ErrorKind::ShapeMismatch, "network input must have 3 channels");
  for (std::size_t c = 0; c < 3; ++c) {
    const auto mean = static_cast<float>(net.normalization.means[c]);
    const auto inv_std = static_cast<float>(1.0 / net.normalization.stds[c]);
    for (float& v : image.channel(c)) v = (v - mean) * inv_std;
  }
  return image;
}

/// Runs every layer and returns one activation tensor per conv layer: the
/// output of the ReLU directly following the conv (or the raw conv output
/// when no ReLU follows).
inline std::vector<Tensor> run_network(const NetworkDescriptor& net, const Tensor& image) {
  Tensor current = normalize_input(net, image);
  std::vector<Tensor> taps;
  taps.reserve(net.conv_layer_count());
  bool pending_tap = false;
  for (const auto& layer : net.layers) {
    if (const auto* conv = std::get_if<ConvLayer>(&layer)) {
      if (pending_tap) taps.push_back(current);
      current = conv2d(current, conv->spec);
      pending_tap = true;
    } else if (std::holds_alternative<ReluLayer>(layer)) {
      current = relu(std::move(current));
      if (pending_tap) {
        taps.push_back(current);
        pending_tap = false;
      }
    } else {
      if (pending_tap) {
        taps.push_back(current);
        pending_tap = false;
      }
      if (const auto* pool = std::get_if<PoolLayer>(&layer)) {
        current = maxpool(current, pool->spec);
      } else if (const auto* norm = std::get_if<LrnLayer>(&layer)) {
        current = lrn(current, norm->spec);
      }
    }
  }
  if (pending_tap) taps.push_back(current);
  return taps;
}

}  // namespace actmap
