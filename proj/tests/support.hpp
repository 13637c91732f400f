#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "floorlab/panel.hpp"

namespace floorlab::testing {

inline AuctionRecord rec(std::int32_t day, Money bid, Money floor, Money pay, bool filled, bool clicked = false,
                         bool converted = false, std::int32_t exchange = 1, std::int32_t region = 1,
                         std::int32_t advertiser = 1) {
    AuctionRecord r;
    r.day = day;
    r.bid = bid;
    r.logged_floor = floor;
    r.pay_price = filled ? pay : 0;
    r.filled = filled;
    r.clicked = filled && clicked;
    r.converted = filled && converted;
    r.exchange = exchange;
    r.region = region;
    r.advertiser = advertiser;
    r.slot = 1;
    r.device = 1;
    return r;
}

// Straight-line replay over records, written independently of the engine:
// value = sum over filled rows kept by the floor of max(pay, floor).
struct Straight {
    __int128 value = 0;
    __int128 base = 0;
    long long retained = 0, filled = 0;
};

inline Straight straight_replay(const Panel& p, const std::vector<Money>& floors) {
    Straight s;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto r = p.record(i);
        if (!r.filled) continue;
        s.filled += 1;
        s.base += r.pay_price > r.logged_floor ? r.pay_price : r.logged_floor;
        if (r.bid >= floors[i]) {
            s.retained += 1;
            s.value += r.pay_price > floors[i] ? r.pay_price : floors[i];
        }
    }
    return s;
}

/// Scratch directory removed on scope exit.
class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("floorlab_test_" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace floorlab::testing
