#include "lsim/fixed_point.hpp"

#include <array>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include "lsim/errors.hpp"

namespace lsim {

namespace {

std::size_t element_count(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

}  // namespace

FixedPointTensor::FixedPointTensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
  for (auto d : shape_) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive");
  }
  data_.assign(shape_.empty() ? 0 : element_count(shape_), 0);
}

FixedPointTensor::FixedPointTensor(std::vector<std::size_t> shape, std::vector<std::int16_t> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  for (auto d : shape_) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive");
  }
  const std::size_t expected = shape_.empty() ? 0 : element_count(shape_);
  if (data_.size() != expected) {
    throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape product " + std::to_string(expected));
  }
}

FixedPointTensor FixedPointTensor::vector(std::vector<std::int16_t> data) {
  const auto n = data.size();
  return FixedPointTensor({n}, std::move(data));
}

void Fnv1a::update(std::span<const std::uint8_t> bytes) noexcept {
  for (auto b : bytes) {
    h_ ^= b;
    h_ *= 0x100000001b3ULL;
  }
}

void Fnv1a::update_u64(std::uint64_t v) noexcept {
  std::array<std::uint8_t, 8> le{};
  for (int i = 0; i < 8; ++i) le[i] = static_cast<std::uint8_t>(v >> (8 * i));
  update(le);
}

void Fnv1a::update_i16(std::int16_t v) noexcept {
  const auto u = static_cast<std::uint16_t>(v);
  const std::array<std::uint8_t, 2> le{static_cast<std::uint8_t>(u & 0xFF),
                                       static_cast<std::uint8_t>(u >> 8)};
  update(le);
}

void Fnv1a::update(const FixedPointTensor& t) noexcept {
  for (auto d : t.shape()) update_u64(d);
  for (auto v : t.data()) update_i16(v);
}

std::uint64_t digest(const FixedPointTensor& t) noexcept {
  Fnv1a h;
  h.update(t);
  return h.value();
}

std::uint64_t digest(const WeightSet& w) noexcept {
  Fnv1a h;
  for (const auto& l : w.layers) {
    h.update(l.weights);
    h.update(l.bias);
  }
  return h.value();
}

void WeightSet::validate() const {
  if (layers.empty()) throw ConfigError("weight set has no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.weights.shape().size() != 2) {
      throw ConfigError("layer " + std::to_string(i) + ": weights must be 2-D (out x in)");
    }
    if (l.bias.shape().size() != 1 || l.bias.shape()[0] != l.out_width()) {
      throw ConfigError("layer " + std::to_string(i) + ": bias length must equal output width");
    }
    if (i > 0 && layers[i - 1].out_width() != l.in_width()) {
      throw ConfigError("layer " + std::to_string(i) + ": input width " +
                        std::to_string(l.in_width()) + " does not match previous output width " +
                        std::to_string(layers[i - 1].out_width()));
    }
  }
  if (layers.back().activation != Activation::None) {
    throw ConfigError("last layer must have no activation");
  }
}

nlohmann::json to_json(const FixedPointTensor& t) {
  nlohmann::json data = nlohmann::json::array();
  for (auto v : t.data()) data.push_back(v);
  return {{"version", kTensorJsonVersion},
          {"shape", t.shape()},
          {"frac_bits", kFracBits},
          {"data", std::move(data)}};
}

FixedPointTensor tensor_from_json(const nlohmann::json& j) {
  if (j.value("version", 0) != kTensorJsonVersion) {
    throw ConfigError("unsupported tensor JSON version");
  }
  if (j.at("frac_bits").get<int>() != kFracBits) {
    throw ConfigError("tensor frac_bits must be " + std::to_string(kFracBits));
  }
  std::vector<std::int16_t> data;
  for (const auto& v : j.at("data")) {
    const auto x = v.get<std::int64_t>();
    if (x < std::numeric_limits<std::int16_t>::min() ||
        x > std::numeric_limits<std::int16_t>::max()) {
      throw ConfigError("tensor element out of 16-bit range: " + std::to_string(x));
    }
    data.push_back(static_cast<std::int16_t>(x));
  }
  return FixedPointTensor(j.at("shape").get<std::vector<std::size_t>>(), std::move(data));
}

nlohmann::json to_json(const WeightSet& w) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : w.layers) {
    layers.push_back({{"weights", to_json(l.weights)},
                      {"bias", to_json(l.bias)},
                      {"activation", l.activation == Activation::ReLU ? "relu" : "none"}});
  }
  return {{"version", kTensorJsonVersion}, {"layers", std::move(layers)}};
}

WeightSet weights_from_json(const nlohmann::json& j) {
  if (j.value("version", 0) != kTensorJsonVersion) {
    throw ConfigError("unsupported weight set JSON version");
  }
  WeightSet w;
  for (const auto& l : j.at("layers")) {
    const auto act = l.at("activation").get<std::string>();
    if (act != "relu" && act != "none") throw ConfigError("unknown activation '" + act + "'");
    w.layers.push_back({tensor_from_json(l.at("weights")), tensor_from_json(l.at("bias")),
                        act == "relu" ? Activation::ReLU : Activation::None});
  }
  w.validate();
  return w;
}

}  // namespace lsim
