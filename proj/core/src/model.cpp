#include "cnet/model.hpp"

#include <cmath>
#include <iostream>

#include "cnet/error.hpp"

namespace cnet {
namespace {

constexpr std::uint64_t kMiddleNetwork = 1;
constexpr std::uint64_t kInnerNetwork = 3;
constexpr std::uint64_t kHeadNetwork = 4;

enum class Init { kHeUniform, kGlorotUniform };

Tensor<float> uniform_tensor(Shape shape, double limit, RngStream rng) {
  std::vector<float> values(shape.numel());
  for (float& v : values) v = static_cast<float>((2.0 * rng.uniform() - 1.0) * limit);
  return Tensor<float>(std::move(shape), std::move(values), true);
}

class ParameterFactory {
 public:
  ParameterFactory(std::vector<Parameter<float>>& registry, std::uint64_t key, std::uint64_t network)
      : registry_(registry), key_(key), network_(network) {}

  Conv2D<float> conv(const std::string& name, std::size_t kernel, std::size_t in, std::size_t out) {
    Conv2D<float> layer;
    const double limit = std::sqrt(6.0 / static_cast<double>(kernel * kernel * in));
    layer.kernel = uniform_tensor(Shape{kernel, kernel, in, out}, limit, next_stream());
    layer.bias = Tensor<float>::zeros(Shape{out}, true);
    layer.padding = Padding::kSame;
    registry_.push_back({name + ".kernel", layer.kernel});
    registry_.push_back({name + ".bias", layer.bias});
    return layer;
  }

  Dense<float> dense(const std::string& name, std::size_t in, std::size_t out, Init init) {
    Dense<float> layer;
    const double fan = init == Init::kHeUniform ? static_cast<double>(in) : static_cast<double>(in + out);
    layer.weights = uniform_tensor(Shape{in, out}, std::sqrt(6.0 / fan), next_stream());
    layer.bias = Tensor<float>::zeros(Shape{out}, true);
    registry_.push_back({name + ".weights", layer.weights});
    registry_.push_back({name + ".bias", layer.bias});
    return layer;
  }

 private:
  RngStream next_stream() { return RngStream(key_, (network_ << 32) | local_++); }

  std::vector<Parameter<float>>& registry_;
  std::uint64_t key_;
  std::uint64_t network_;
  std::uint64_t local_ = 0;
};

Tensor<float> run_chain(const ConvChain& chain, Tensor<float> x, Mode mode, RngStream& rng,
                        Tape<float>* tape) {
  for (const ConvBlock& block : chain) {
    for (const auto& conv : block.convs) x = relu(conv2d(x, conv, tape), tape);
    if (block.pool) x = maxpool2x2(x, tape);
    if (block.dropout > 0.0) x = dropout(x, DropoutSpec{block.dropout, mode}, rng, tape);
  }
  return x;
}

void add_stage(std::vector<std::pair<std::string, Shape>>* stages, std::string name,
               const Tensor<float>& t) {
  if (stages != nullptr) stages->emplace_back(std::move(name), t.shape());
}

}  // namespace

const ShapeTrace::Stage& ShapeTrace::at(std::string_view name) const {
  for (const auto& s : stages) {
    if (s.name == name) return s;
  }
  throw Error(ErrorCode::kShapeMismatch, "no stage named " + std::string(name));
}

ShapeTrace infer_shapes(const CNetConfig& config) {
  config.validate();
  ShapeTrace trace;
  std::size_t h = config.input_height, w = config.input_width;
  const auto pool = [&](const std::string& where) {
    if (h < 2 || w < 2) {
      throw Error(ErrorCode::kSpatialCollapse, where + " pools a " + std::to_string(h) + "x" +
                                                   std::to_string(w) + " map");
    }
    h = pool_output_extent(h);
    w = pool_output_extent(w);
  };

  for (std::size_t b = 0; b < 4; ++b) {
    if (b < 3) pool("outer block " + std::to_string(b + 1));
    trace.stages.push_back({"outer.block" + std::to_string(b + 1), h, w, config.scaled(config.outer_filters[b])});
  }
  const std::size_t outer_channels = config.scaled(config.outer_filters[3]);
  trace.stages.push_back({"outer_out", h, w, outer_channels});
  trace.stages.push_back({"outer_concat", h, w, 2 * outer_channels});

  const std::size_t middle_channels = config.scaled(config.middle_filters);
  for (std::size_t b = 0; b < config.middle_blocks; ++b) {
    pool("middle block " + std::to_string(b + 1));
    trace.stages.push_back({"middle.block" + std::to_string(b + 1), h, w, middle_channels});
  }
  trace.stages.push_back({"middle_out", h, w, middle_channels});
  trace.stages.push_back({"middle_concat", h, w, 2 * middle_channels});

  pool("inner network");
  const std::size_t inner_channels = config.scaled(config.inner_filters);
  trace.stages.push_back({"inner_out", h, w, inner_channels});
  trace.flatten_width = h * w * inner_channels;
  return trace;
}

InitSeeds InitSeeds::from_seed(std::uint64_t seed) {
  InitSeeds seeds;
  for (std::size_t i = 0; i < 4; ++i) seeds.outer[i] = mix64(seed * 8 + i + 1);
  seeds.shared = mix64(seed * 8 + 5);
  return seeds;
}

CNetModel build_cnet(const CNetConfig& config, const InitSeeds& seeds) {
  CNetModel model;
  model.config_ = config;
  model.shapes_ = infer_shapes(config);
  auto& registry = model.parameters_;

  for (std::size_t i = 0; i < 4; ++i) {
    ParameterFactory factory(registry, seeds.outer[i], 0);
    std::size_t channels = config.input_channels;
    for (std::size_t b = 0; b < 4; ++b) {
      ConvBlock block;
      block.pool = b < 3;
      const std::size_t filters = config.scaled(config.outer_filters[b]);
      for (std::size_t k = 0; k < config.outer_convs_per_block[b]; ++k) {
        const std::string name =
            "outer" + std::to_string(i) + ".block" + std::to_string(b + 1) + ".conv" + std::to_string(k);
        block.convs.push_back(factory.conv(name, 3, channels, filters));
        channels = filters;
      }
      model.outer_[i].push_back(std::move(block));
    }
  }

  const std::size_t middle_filters = config.scaled(config.middle_filters);
  for (std::size_t i = 0; i < 2; ++i) {
    ParameterFactory factory(registry, seeds.shared, kMiddleNetwork + i);
    std::size_t channels = 2 * config.scaled(config.outer_filters[3]);
    for (std::size_t b = 0; b < config.middle_blocks; ++b) {
      ConvBlock block;
      block.pool = true;
      block.dropout = config.dropout_middle;
      const std::string prefix = "middle" + std::to_string(i) + ".block" + std::to_string(b + 1);
      for (std::size_t k = 0; k < config.middle_convs_per_block; ++k) {
        block.convs.push_back(factory.conv(prefix + ".conv" + std::to_string(k), 3, channels, middle_filters));
        channels = middle_filters;
      }
      block.convs.push_back(factory.conv(prefix + ".nin", 1, channels, middle_filters));
      model.middle_[i].push_back(std::move(block));
    }
  }

  {
    ParameterFactory factory(registry, seeds.shared, kInnerNetwork);
    const std::size_t filters = config.scaled(config.inner_filters);
    std::size_t channels = 2 * middle_filters;
    ConvBlock block;
    block.pool = true;
    for (std::size_t k = 0; k < config.inner_convs; ++k) {
      block.convs.push_back(factory.conv("inner.conv" + std::to_string(k), 3, channels, filters));
      channels = filters;
    }
    block.convs.push_back(factory.conv("inner.nin", 1, channels, filters));
    model.inner_.push_back(std::move(block));
  }

  {
    ParameterFactory factory(registry, seeds.shared, kHeadNetwork);
    const std::size_t units = config.scaled(config.fc_units);
    model.fc1_ = factory.dense("fc1", model.shapes_.flatten_width, units, Init::kHeUniform);
    model.fc2_ = factory.dense("fc2", units, units, Init::kHeUniform);
    model.output_ = factory.dense("output", units, config.output_nodes, Init::kGlorotUniform);
  }
  return model;
}

CNetModel build_cnet(const CNetConfig& config, std::uint64_t seed) {
  return build_cnet(config, InitSeeds::from_seed(seed));
}

std::size_t CNetModel::parameter_count() const {
  std::size_t total = 0;
  for (const auto& p : parameters_) total += p.value.numel();
  return total;
}

Tensor<float> CNetModel::forward(const Tensor<float>& batch, Mode mode, RngStream& rng,
                                 Tape<float>* tape,
                                 std::vector<std::pair<std::string, Shape>>* stages) const {
  const Shape& s = batch.shape();
  if (s.rank() != 4 || s[1] != config_.input_height || s[2] != config_.input_width ||
      s[3] != config_.input_channels) {
    throw Error(ErrorCode::kShapeMismatch,
                "model expects (b," + std::to_string(config_.input_height) + "," +
                    std::to_string(config_.input_width) + "," + std::to_string(config_.input_channels) +
                    "), got " + s.to_string());
  }
  for (float v : batch.data()) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      std::cerr << "warning: RangeWarning: input pixels outside [0, 1]\n";
      break;
    }
  }

  std::array<Tensor<float>, 4> outer_out;
  for (std::size_t i = 0; i < 4; ++i) {
    outer_out[i] = run_chain(outer_[i], batch, mode, rng, tape);
    add_stage(stages, "outer" + std::to_string(i), outer_out[i]);
  }
  std::array<Tensor<float>, 2> joined = {concat_channels(outer_out[0], outer_out[1], tape),
                                         concat_channels(outer_out[2], outer_out[3], tape)};
  add_stage(stages, "outer_concat0", joined[0]);
  add_stage(stages, "outer_concat1", joined[1]);

  std::array<Tensor<float>, 2> middle_out;
  for (std::size_t i = 0; i < 2; ++i) {
    middle_out[i] = run_chain(middle_[i], joined[i], mode, rng, tape);
    add_stage(stages, "middle" + std::to_string(i), middle_out[i]);
  }
  Tensor<float> x = concat_channels(middle_out[0], middle_out[1], tape);
  add_stage(stages, "middle_concat", x);

  x = run_chain(inner_, x, mode, rng, tape);
  add_stage(stages, "inner", x);
  x = flatten(x, tape);
  add_stage(stages, "flatten", x);

  const DropoutSpec fc_drop{config_.dropout_fc, mode};
  x = dropout(relu(dense(x, fc1_, tape), tape), fc_drop, rng, tape);
  x = dropout(relu(dense(x, fc2_, tape), tape), fc_drop, rng, tape);
  x = sigmoid(dense(x, output_, tape), tape);
  add_stage(stages, "output", x);
  return x;
}

Tensor<float> CNetModel::predict(const Tensor<float>& batch) const {
  RngStream unused;
  return forward(batch, Mode::kEval, unused, nullptr);
}

}  // namespace cnet
