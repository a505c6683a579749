#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace lsim {

/// Number of fractional bits of every tensor element (Q7.8).
inline constexpr int kFracBits = 8;
inline constexpr std::int32_t kOne = 1 << kFracBits;

/// Row-major tensor of Q7.8 values.
class FixedPointTensor {
 public:
  FixedPointTensor() = default;
  /// Zero-filled tensor of the given shape. Throws DimensionError on a zero
  /// dimension.
  explicit FixedPointTensor(std::vector<std::size_t> shape);
  FixedPointTensor(std::vector<std::size_t> shape, std::vector<std::int16_t> data);

  static FixedPointTensor vector(std::vector<std::int16_t> data);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::span<const std::int16_t> data() const noexcept { return data_; }
  std::span<std::int16_t> data() noexcept { return data_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::int16_t operator[](std::size_t i) const { return data_[i]; }
  std::int16_t& operator[](std::size_t i) { return data_[i]; }

  /// Element as a real number.
  double dequantized(std::size_t i) const { return static_cast<double>(data_[i]) / kOne; }

  friend bool operator==(const FixedPointTensor&, const FixedPointTensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<std::int16_t> data_;
};

/// Incremental FNV-1a 64-bit hasher.
class Fnv1a {
 public:
  void update(std::span<const std::uint8_t> bytes) noexcept;
  void update_u64(std::uint64_t v) noexcept;
  void update_i16(std::int16_t v) noexcept;
  void update(const FixedPointTensor& t) noexcept;
  std::uint64_t value() const noexcept { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

/// FNV-1a 64 over the little-endian encoding of the shape (each dimension as
/// u64) followed by the data (each element as i16).
std::uint64_t digest(const FixedPointTensor& t) noexcept;

enum class Activation { ReLU, None };

struct Layer {
  FixedPointTensor weights;  // out x in
  FixedPointTensor bias;     // out
  Activation activation = Activation::None;

  std::size_t in_width() const { return weights.shape().at(1); }
  std::size_t out_width() const { return weights.shape().at(0); }

  friend bool operator==(const Layer&, const Layer&) = default;
};

struct WeightSet {
  std::vector<Layer> layers;

  std::size_t input_width() const { return layers.front().in_width(); }
  std::size_t output_width() const { return layers.back().out_width(); }

  /// Throws ConfigError if layers are not dimension-compatible or the last
  /// layer has an activation.
  void validate() const;

  friend bool operator==(const WeightSet&, const WeightSet&) = default;
};

/// Digest over every layer's weights and bias, in order.
std::uint64_t digest(const WeightSet& w) noexcept;

// Versioned JSON form used by golden files.
inline constexpr int kTensorJsonVersion = 1;

nlohmann::json to_json(const FixedPointTensor& t);
FixedPointTensor tensor_from_json(const nlohmann::json& j);
nlohmann::json to_json(const WeightSet& w);
WeightSet weights_from_json(const nlohmann::json& j);

}  // namespace lsim
