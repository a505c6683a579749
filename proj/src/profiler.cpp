#include "lsim/profiler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lsim/kernels.hpp"

namespace lsim {

namespace {

double median_of_sorted(std::span<const double> v) {
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

nlohmann::json opt(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

std::uint64_t percentile_nearest_rank(std::span<const std::uint64_t> sorted, unsigned pct) {
  if (sorted.empty()) throw std::invalid_argument("percentile of an empty sample");
  const std::size_t n = sorted.size();
  std::size_t rank = (static_cast<std::size_t>(pct) * n + 99) / 100;
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sorted[rank - 1];
}

ProfileStats stats(std::span<const std::uint64_t> samples) {
  if (samples.empty()) throw std::invalid_argument("stats of an empty sample");
  ProfileStats s;
  s.n = samples.size();
  std::vector<std::uint64_t> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  s.min = sorted.front();
  s.max = sorted.back();
  s.p50 = percentile_nearest_rank(sorted, 50);
  s.p95 = percentile_nearest_rank(sorted, 95);
  s.p99 = percentile_nearest_rank(sorted, 99);

  // Shift by the minimum so the exact integer sum and the deviations stay
  // small; every statistic except the mean is translation invariant.
  std::vector<std::uint64_t> shifted(samples.size());
  std::transform(samples.begin(), samples.end(), shifted.begin(),
                 [&](std::uint64_t x) { return x - s.min; });
  const auto n = static_cast<long double>(s.n);
  const unsigned __int128 total = kernels::sum_parallel(shifted);
  const long double shifted_mean = static_cast<long double>(total) / n;
  s.mean = static_cast<double>(static_cast<long double>(s.min) + shifted_mean);

  const auto sums = kernels::central_sums_parallel(shifted, shifted_mean);
  s.sample_std = s.n > 1 ? static_cast<double>(std::sqrt(sums.s2 / (n - 1))) : 0.0;

  const long double m2 = sums.s2 / n;
  if (s.n >= 4 && m2 > 0) {
    const long double m3 = sums.s3 / n;
    const long double m4 = sums.s4 / n;
    const long double g1 = m3 / std::pow(m2, 1.5L);
    const long double g2 = m4 / (m2 * m2) - 3.0L;
    const long double correction = 3.0L * (n - 1) * (n - 1) / ((n - 2) * (n - 3));
    s.skewness = static_cast<double>(g1);
    s.excess_kurtosis = static_cast<double>(g2);
    s.bimodality = static_cast<double>((g1 * g1 + 1.0L) / (g2 + correction));
  }
  return s;
}

nlohmann::json to_json(const ProfileStats& s) {
  return {{"n", s.n},
          {"mean", s.mean},
          {"sample_std", s.sample_std},
          {"min", s.min},
          {"max", s.max},
          {"p50", s.p50},
          {"p95", s.p95},
          {"p99", s.p99},
          {"skewness", opt(s.skewness)},
          {"excess_kurtosis", opt(s.excess_kurtosis)},
          {"bimodality_coefficient", opt(s.bimodality)},
          {"bimodal_hint", s.bimodal_hint()}};
}

OutlierReport detect_outliers(std::span<const std::uint64_t> samples, double threshold) {
  if (samples.size() < 3) throw std::invalid_argument("outlier detection needs at least 3 samples");
  OutlierReport r;
  r.threshold = threshold;

  std::vector<double> v(samples.begin(), samples.end());
  std::sort(v.begin(), v.end());
  r.median = median_of_sorted(v);

  std::vector<double> dev(samples.size());
  std::transform(samples.begin(), samples.end(), dev.begin(),
                 [&](std::uint64_t x) { return std::abs(static_cast<double>(x) - r.median); });
  std::vector<double> sorted_dev = dev;
  std::sort(sorted_dev.begin(), sorted_dev.end());
  r.scale = median_of_sorted(sorted_dev);
  r.method = "mad";
  if (r.scale == 0.0) {
    long double total = 0;
    for (double d : dev) total += d;
    r.scale = static_cast<double>(total / static_cast<long double>(dev.size()));
    r.method = "mean_abs_dev";
  }
  if (r.scale == 0.0) {
    r.method = "none";
    return r;
  }
  for (std::size_t i = 0; i < dev.size(); ++i) {
    const double score = 0.6745 * dev[i] / r.scale;
    if (score > threshold) {
      r.indices.push_back(i);
      r.scores.push_back(score);
    }
  }
  return r;
}

nlohmann::json to_json(const OutlierReport& r) {
  return {{"method", r.method},         {"threshold", r.threshold}, {"median", r.median},
          {"scale", r.scale},           {"count", r.indices.size()}, {"indices", r.indices},
          {"scores", r.scores}};
}

ComparisonReport ks_statistic(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                              double alpha) {
  if (a.empty() || b.empty()) throw std::invalid_argument("KS comparison needs two non-empty samples");
  std::vector<std::uint64_t> sa(a.begin(), a.end());
  std::vector<std::uint64_t> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const auto na = static_cast<std::int64_t>(sa.size());
  const auto nb = static_cast<std::int64_t>(sb.size());

  // Gap at a threshold is |i*nb - j*na| / (na*nb); track the integer numerator.
  std::int64_t i = 0;
  std::int64_t j = 0;
  std::int64_t best = 0;
  while (i < na || j < nb) {
    std::uint64_t t;
    if (j >= nb || (i < na && sa[i] <= sb[j])) {
      t = sa[i];
    } else {
      t = sb[j];
    }
    while (i < na && sa[i] == t) ++i;
    while (j < nb && sb[j] == t) ++j;
    const std::int64_t gap = i * nb - j * na;
    best = std::max(best, gap < 0 ? -gap : gap);
  }

  ComparisonReport r;
  r.n_a = sa.size();
  r.n_b = sb.size();
  r.alpha = alpha;
  r.ks_statistic = static_cast<double>(best) / (static_cast<double>(na) * static_cast<double>(nb));
  const double c = std::sqrt(-std::log(alpha / 2.0) / 2.0);
  r.critical_value = c * std::sqrt(static_cast<double>(na + nb) / (static_cast<double>(na) * nb));
  r.distinguishable = r.ks_statistic > r.critical_value;
  return r;
}

nlohmann::json to_json(const ComparisonReport& r) {
  return {{"ks_statistic", r.ks_statistic}, {"critical_value", r.critical_value},
          {"alpha", r.alpha},               {"n_a", r.n_a},
          {"n_b", r.n_b},                   {"distinguishable", r.distinguishable}};
}

std::vector<HistogramBin> histogram(std::span<const std::uint64_t> samples, std::size_t bin_count) {
  if (bin_count == 0) throw std::invalid_argument("histogram needs at least one bin");
  if (samples.empty()) return {};
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const std::uint64_t lo = *lo_it;
  const std::uint64_t range = *hi_it - lo;
  std::vector<HistogramBin> bins(bin_count);
  for (std::size_t i = 0; i < bin_count; ++i) {
    bins[i].lower_edge = static_cast<double>(lo) + static_cast<double>(range) *
                                                        static_cast<double>(i) /
                                                        static_cast<double>(bin_count);
  }
  for (auto x : samples) {
    std::size_t idx = bin_count - 1;
    if (range > 0) {
      const auto scaled = static_cast<unsigned __int128>(x - lo) * bin_count / range;
      idx = std::min<std::size_t>(static_cast<std::size_t>(scaled), bin_count - 1);
    }
    ++bins[idx].count;
  }
  return bins;
}

void write_histogram_csv(std::span<const HistogramBin> bins, std::ostream& out) {
  out << "lower_edge_ns,count\n";
  for (const auto& b : bins) {
    out << nlohmann::json(b.lower_edge).dump() << ',' << b.count << '\n';
  }
}

}  // namespace lsim
