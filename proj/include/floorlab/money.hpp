#pragma once

#include <cstdint>
#include <string>

namespace floorlab {

// Prices are integer minor units; all sums are exact.
using Money = std::int64_t;

// Accumulator for money sums. 128 bits cannot overflow for any realistic panel.
using MoneySum = __int128;

std::string to_string(MoneySum value);

// Converts an exact sum to double; exact whenever |value| < 2^53.
inline double to_double(MoneySum value) { return static_cast<double>(static_cast<long double>(value)); }

// num/den as double, computed from the exact integers.
inline double exact_ratio(MoneySum num, MoneySum den) { return to_double(num) / to_double(den); }

}  // namespace floorlab
