#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace lsim {

/// One turnaround measurement: input release to output completion.
struct LatencySample {
  std::uint32_t replica_id = 0;
  std::uint64_t frame_id = 0;
  std::uint64_t repetition = 0;
  std::uint64_t turnaround_ns = 0;
};

/// Sarle's coefficient above this value hints at two modes.
inline constexpr double kBimodalityHint = 5.0 / 9.0;

struct ProfileStats {
  std::size_t n = 0;
  double mean = 0;
  double sample_std = 0;  // n-1 denominator; 0 for n == 1
  std::uint64_t min = 0;
  std::uint64_t max = 0;
  std::uint64_t p50 = 0;
  std::uint64_t p95 = 0;
  std::uint64_t p99 = 0;
  // Absent for n < 4 or zero variance.
  std::optional<double> skewness;
  std::optional<double> excess_kurtosis;
  std::optional<double> bimodality;

  bool bimodal_hint() const { return bimodality && *bimodality > kBimodalityHint; }
};

/// Value at 1-based rank ceil(pct/100 * n) of the sorted samples.
std::uint64_t percentile_nearest_rank(std::span<const std::uint64_t> sorted, unsigned pct);

/// Moments use population central moments:
///   g1 = m3 / m2^1.5,  g2 = m4 / m2^2 - 3,
///   b  = (g1^2 + 1) / (g2 + 3 (n-1)^2 / ((n-2)(n-3))).
/// Throws std::invalid_argument on an empty sample.
ProfileStats stats(std::span<const std::uint64_t> samples);

nlohmann::json to_json(const ProfileStats& s);

struct OutlierReport {
  double threshold = 3.5;
  std::string method;  // "mad", "mean_abs_dev", or "none" when both scales are 0
  double median = 0;
  double scale = 0;    // MAD, or the mean absolute deviation fallback
  std::vector<std::size_t> indices;
  std::vector<double> scores;
};

/// Modified z-score 0.6745 * |x - median| / MAD, flagged when above
/// `threshold`. A zero MAD falls back to the mean absolute deviation from
/// the median; if that is zero too nothing is flagged. Throws
/// std::invalid_argument for fewer than 3 samples.
OutlierReport detect_outliers(std::span<const std::uint64_t> samples, double threshold = 3.5);

nlohmann::json to_json(const OutlierReport& r);

struct ComparisonReport {
  double ks_statistic = 0;
  double critical_value = 0;
  double alpha = 0.01;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  bool distinguishable = false;
};

/// Two-sample Kolmogorov-Smirnov: D = max |ECDF_a - ECDF_b| over the merged
/// support, critical = sqrt(-ln(alpha/2)/2) * sqrt((na+nb)/(na*nb)).
/// Throws std::invalid_argument when either side is empty.
ComparisonReport ks_statistic(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                              double alpha = 0.01);

nlohmann::json to_json(const ComparisonReport& r);

struct HistogramBin {
  double lower_edge = 0;
  std::uint64_t count = 0;
};

/// Equal-width bins over [min, max]; the maximum lands in the last bin.
std::vector<HistogramBin> histogram(std::span<const std::uint64_t> samples, std::size_t bin_count);

/// CSV with header `lower_edge_ns,count`.
void write_histogram_csv(std::span<const HistogramBin> bins, std::ostream& out);

}  // namespace lsim
