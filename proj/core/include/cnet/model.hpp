#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cnet/adam.hpp"
#include "cnet/config.hpp"
#include "cnet/layers.hpp"
#include "cnet/rng.hpp"
#include "cnet/tape.hpp"

namespace cnet {

/// Spatial extents and channel counts at each join of the graph, derived
/// from the configuration alone.
struct ShapeTrace {
  struct Stage {
    std::string name;
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;
  };
  std::vector<Stage> stages;  // in forward order
  std::size_t flatten_width = 0;

  const Stage& at(std::string_view name) const;
};

/// Throws kConfigInvalid or kSpatialCollapse.
ShapeTrace infer_shapes(const CNetConfig& config);

/// Initialization seeds: one per Outer network (so swapping two seeds swaps
/// those networks' weights) and one for everything downstream.
struct InitSeeds {
  std::array<std::uint64_t, 4> outer{};
  std::uint64_t shared = 0;

  static InitSeeds from_seed(std::uint64_t seed);
};

/// A run of convolutions (each followed by ReLU), optionally closed by a
/// 2x2 max-pool and dropout.
struct ConvBlock {
  std::vector<Conv2D<float>> convs;
  bool pool = true;
  double dropout = 0.0;
};

using ConvChain = std::vector<ConvBlock>;

class CNetModel {
 public:
  const CNetConfig& config() const { return config_; }
  const ShapeTrace& shapes() const { return shapes_; }

  /// (b, H, W, C) pixels in [0, 1] -> (b, output_nodes) sigmoid activations.
  /// Dropout draws come from `rng` in train mode; eval mode never touches it.
  /// When `stages` is given, the shape of every join is appended to it.
  Tensor<float> forward(const Tensor<float>& batch, Mode mode, RngStream& rng,
                        Tape<float>* tape = nullptr,
                        std::vector<std::pair<std::string, Shape>>* stages = nullptr) const;

  /// Eval-mode forward without a tape.
  Tensor<float> predict(const Tensor<float>& batch) const;

  std::span<Parameter<float>> parameters() { return parameters_; }
  std::span<const Parameter<float>> parameters() const { return parameters_; }
  std::size_t parameter_count() const;

  const ConvChain& outer(std::size_t i) const { return outer_.at(i); }
  const ConvChain& middle(std::size_t i) const { return middle_.at(i); }
  const ConvChain& inner() const { return inner_; }

 private:
  friend CNetModel build_cnet(const CNetConfig& config, const InitSeeds& seeds);

  CNetConfig config_;
  ShapeTrace shapes_;
  std::array<ConvChain, 4> outer_;
  std::array<ConvChain, 2> middle_;
  ConvChain inner_;
  Dense<float> fc1_, fc2_, output_;
  std::vector<Parameter<float>> parameters_;
};

/// Builds the four Outer chains, two Middle chains, the Inner chain and
/// the dense head, with He-uniform weights for ReLU layers, Glorot-uniform
/// for the output layer and zero biases.
CNetModel build_cnet(const CNetConfig& config, const InitSeeds& seeds);
CNetModel build_cnet(const CNetConfig& config, std::uint64_t seed);

/// Sum of element counts of every trainable tensor.
inline std::size_t parameter_count(const CNetModel& model) { return model.parameter_count(); }

}  // namespace cnet
