#include "floorlab/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "floorlab/error.hpp"
#include "floorlab/money.hpp"

namespace floorlab {

std::string to_string(MoneySum value) {
    if (value == 0) return "0";
    const bool negative = value < 0;
    unsigned __int128 magnitude = negative ? static_cast<unsigned __int128>(-(value + 1)) + 1
                                           : static_cast<unsigned __int128>(value);
    std::string digits;
    while (magnitude > 0) {
        digits.push_back(static_cast<char>('0' + static_cast<int>(magnitude % 10)));
        magnitude /= 10;
    }
    if (negative) digits.push_back('-');
    std::reverse(digits.begin(), digits.end());
    return digits;
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal quantile requires p in (0,1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

std::int64_t nearest_rank_index(std::int64_t n, std::int64_t num, std::int64_t den) {
    // ceil(num * n / den), at least 1.
    const std::int64_t rank = (num * n + den - 1) / den;
    return std::max<std::int64_t>(rank, 1);
}

double nearest_rank(std::vector<double> values, double p) {
    if (values.empty()) throw DomainError("percentile of empty sample");
    if (!(p > 0.0 && p <= 1.0)) throw DomainError("percentile requires p in (0,1]");
    const auto n = static_cast<double>(values.size());
    // Guard against p*n landing a hair above an integer.
    auto rank = static_cast<std::size_t>(std::ceil(p * n - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                     values.end());
    return values[rank - 1];
}

double mean(std::span<const double> values) {
    if (values.empty()) return 0.0;
    double total = 0.0;
    for (double v : values) total += v;
    return total / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
    if (values.size() < 2) return 0.0;
    const double m = mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace floorlab
