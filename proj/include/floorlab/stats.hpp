#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace floorlab {

/// Standard normal quantile.
double normal_quantile(double p);

/// Nearest-rank percentile: the smallest value whose cumulative share is >= p.
/// p in (0, 1]; values need not be sorted.
double nearest_rank(std::vector<double> values, double p);

/// 1-based nearest rank for p = num/den over n items, computed in integers.
std::int64_t nearest_rank_index(std::int64_t n, std::int64_t num, std::int64_t den);

double mean(std::span<const double> values);

/// Sample standard deviation (denominator n - 1). Zero for n < 2.
double sample_sd(std::span<const double> values);

}  // namespace floorlab
