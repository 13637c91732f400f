#include <gtest/gtest.h>

#include <algorithm>
#include <json.hpp>

#include "floorlab/error.hpp"
#include "floorlab/io.hpp"
#include "floorlab/panel.hpp"
#include "floorlab/synthgen.hpp"
#include "support.hpp"

using namespace floorlab;
using floorlab::testing::rec;
using floorlab::testing::TempDir;
using floorlab::testing::write_text;
using floorlab::testing::read_text;

namespace {

const char* kHeader = "timestamp\tday\texchange\tregion\tadvertiser\tslot\tdevice\tbid\tfloor\tpay\tfilled\tclicked\tconverted\n";

std::string valid_rows(int n, int day, int ts0 = 0) {
    std::string text;
    for (int i = 0; i < n; ++i) {
        text += std::to_string(ts0 + i) + "\t" + std::to_string(day) + "\t1\t2\t3\t1\t1\t" +
                std::to_string(100 + i) + "\t50\t" + std::to_string(60 + i) + "\t1\t0\t0\n";
    }
    return text;
}

Panel panel_with_floors(std::vector<Money> floors) {
    std::vector<AuctionRecord> rs;
    for (Money f : floors) rs.push_back(rec(1, f + 10, f, 0, false));
    return Panel::from_records(std::move(rs));
}

// Smallest value whose cumulative share reaches p, by direct scan.
Money brute_nearest_rank(std::vector<Money> v, double p) {
    std::sort(v.begin(), v.end());
    for (std::size_t k = 1; k <= v.size(); ++k)
        if (static_cast<double>(k) / static_cast<double>(v.size()) >= p - 1e-12) return v[k - 1];
    return v.back();
}

}  // namespace

TEST(Panel, SortsByDayThenTimestamp) {
    auto a = rec(2, 10, 0, 0, false);
    a.timestamp = 5;
    auto b = rec(1, 10, 0, 0, false);
    b.timestamp = 9;
    auto c = rec(1, 10, 0, 0, false);
    c.timestamp = 3;
    const auto p = Panel::from_records({a, b, c});
    ASSERT_EQ(p.size(), 3u);
    EXPECT_EQ(p.record(0), c);
    EXPECT_EQ(p.record(1), b);
    EXPECT_EQ(p.record(2), a);
    EXPECT_EQ(p.day_keys().size(), 2u);
    EXPECT_EQ(p.day_index()[2], 1);
}

TEST(Panel, ShardRangesCoverPanel) {
    std::vector<AuctionRecord> rs(23, rec(1, 10, 0, 0, false));
    const auto p = Panel::from_records(rs);
    for (std::size_t k : {1u, 4u, 17u, 40u}) {
        const auto ranges = p.shard_ranges(k);
        std::size_t total = 0, prev = 0;
        for (auto [b, e] : ranges) {
            EXPECT_EQ(b, prev);
            total += e - b;
            prev = e;
        }
        EXPECT_EQ(total, p.size());
    }
}

TEST(RecordViolation, FlagsEachInvariant) {
    EXPECT_FALSE(record_violation(rec(1, 100, 50, 60, true)));
    EXPECT_EQ(*record_violation(rec(1, -1, 0, 0, false)), "negative_bid");
    EXPECT_EQ(*record_violation(rec(1, 10, -1, 0, false)), "negative_floor");
    EXPECT_EQ(*record_violation(rec(1, 40, 50, 45, true)), "fill_below_floor");
    auto r = rec(1, 100, 50, 0, false);
    r.pay_price = 5;
    EXPECT_EQ(*record_violation(r), "unfilled_with_payment");
    r.pay_price = 0;
    r.clicked = true;
    EXPECT_EQ(*record_violation(r), "unfilled_with_outcome");
}

TEST(Ingest, TwoFilesOfTenRows) {
    TempDir dir;
    write_text(dir / "a.tsv", std::string(kHeader) + valid_rows(10, 20130606));
    write_text(dir / "b.tsv", std::string(kHeader) + valid_rows(10, 20130607));
    const std::vector<std::filesystem::path> files = {dir / "a.tsv", dir / "b.tsv"};
    const auto res = ingest_logs(files, Schema::native());
    EXPECT_EQ(res.panel.size(), 20u);
    EXPECT_TRUE(res.quarantined.empty());
    EXPECT_EQ(res.rows_read, 20u);
    EXPECT_EQ(res.checksums.size(), 2u);
}

TEST(Ingest, FilledWithoutPayIsQuarantined) {
    TempDir dir;
    write_text(dir / "a.tsv", std::string(kHeader) + valid_rows(3, 20130606) +
                                  "7\t20130606\t1\t2\t3\t1\t1\t100\t50\t\t1\t0\t0\n");
    const std::vector<std::filesystem::path> files = {dir / "a.tsv"};
    const auto res = ingest_logs(files, Schema::native());
    EXPECT_EQ(res.panel.size(), 3u);
    ASSERT_EQ(res.quarantined.size(), 1u);
    EXPECT_EQ(res.quarantined[0].reason, "missing_pay");
    EXPECT_EQ(res.quarantined[0].line, 5u);

    write_quarantine(res.quarantined, dir / "q.tsv");
    const auto q = read_text(dir / "q.tsv");
    EXPECT_NE(q.find("missing_pay"), std::string::npos);
    EXPECT_EQ(std::count(q.begin(), q.end(), '\n'), 2);
}

TEST(Ingest, QuarantineReasons) {
    TempDir dir;
    std::string text = kHeader;
    text += "1\t20130606\t1\t2\t3\t1\t1\tabc\t50\t\t0\t0\t0\n";   // bad bid
    text += "2\t20130606\t1\t2\t3\t1\t1\t100\tx\t\t0\t0\t0\n";     // bad floor
    text += "3\t20130606\t1\t2\t3\t1\t1\t40\t50\t45\t1\t0\t0\n";   // fill below floor
    text += "4\t20130606\t1\t2\t3\t1\t1\t100\t50\t60\t2\t0\t0\n";  // bad flag
    text += "5\tday\t1\t2\t3\t1\t1\t100\t50\t60\t1\t0\t0\n";       // bad day
    text += "6\t20130606\t1\t2\n";                                 // short row
    text += valid_rows(1, 20130606, 7);
    write_text(dir / "a.tsv", text);
    const std::vector<std::filesystem::path> files = {dir / "a.tsv"};
    const auto res = ingest_logs(files, Schema::native());
    ASSERT_EQ(res.quarantined.size(), 6u);
    std::vector<std::string> reasons;
    for (const auto& q : res.quarantined) reasons.push_back(q.reason);
    EXPECT_EQ(reasons, (std::vector<std::string>{"bad_bid", "bad_floor", "fill_below_floor", "bad_flag",
                                                  "bad_day", "missing_column"}));
    EXPECT_EQ(res.panel.size(), 1u);
    EXPECT_NEAR(res.quarantine_share(), 6.0 / 7.0, 1e-12);
}

TEST(Ingest, MissingColumnIsSchemaError) {
    TempDir dir;
    write_text(dir / "a.tsv", "timestamp\tday\tbid\n1\t2\t3\n");
    const std::vector<std::filesystem::path> files = {dir / "a.tsv"};
    EXPECT_THROW(ingest_logs(files, Schema::native()), SchemaError);
}

TEST(Ingest, UnmappedRequiredFieldIsSchemaError) {
    auto schema = Schema::native();
    schema.columns.erase(Field::bid);
    TempDir dir;
    write_text(dir / "a.tsv", std::string(kHeader) + valid_rows(1, 1));
    const std::vector<std::filesystem::path> files = {dir / "a.tsv"};
    EXPECT_THROW(ingest_logs(files, schema), SchemaError);
}

TEST(Ingest, NoParseableRowsIsEmptyPanel) {
    TempDir dir;
    write_text(dir / "a.tsv", std::string(kHeader) + "1\t20130606\t1\t2\t3\t1\t1\tabc\t50\t\t0\t0\t0\n");
    const std::vector<std::filesystem::path> files = {dir / "a.tsv"};
    EXPECT_THROW(ingest_logs(files, Schema::native()), EmptyPanelError);
}

TEST(Ingest, MissingFileIsIoError) {
    const std::vector<std::filesystem::path> files = {"/nonexistent/floorlab.tsv"};
    EXPECT_THROW(ingest_logs(files, Schema::native()), IoError);
}

TEST(Ingest, SchemaByIndexCommaAndScale) {
    const auto schema = Schema::parse(
        "# comma file, no header\n"
        "delimiter=comma\nheader=false\nmoney_scale=100\n"
        "day=0\nexchange=1\nregion=2\nadvertiser=3\nbid=4\nfloor=5\npay=6\nfilled=7\nclicked=8\nconverted=9\n");
    EXPECT_EQ(schema.delimiter, ',');
    EXPECT_FALSE(schema.header);
    TempDir dir;
    write_text(dir / "a.csv", "20130606,1,2,3,1.25,0.50,0.755,1,1,0\n20130606,1,2,3,1.00,0.00,,0,0,0\n");
    const std::vector<std::filesystem::path> files = {dir / "a.csv"};
    const auto res = ingest_logs(files, schema);
    ASSERT_EQ(res.panel.size(), 2u);
    const auto r = res.panel.record(0);
    EXPECT_EQ(r.bid, 125);
    EXPECT_EQ(r.logged_floor, 50);
    EXPECT_EQ(r.pay_price, 76);  // half away from zero
    EXPECT_TRUE(r.clicked);
}

TEST(Ingest, CategoricalStringsHashDeterministically) {
    TempDir dir;
    std::string text = kHeader;
    text += "1\t20130606\tgoogle\tus-west\tadv9\t1\t1\t100\t50\t60\t1\t0\t0\n";
    text += "2\t20130606\tgoogle\tus-west\tadv9\t1\t1\t100\t50\t60\t1\t0\t0\n";
    write_text(dir / "a.tsv", text);
    const std::vector<std::filesystem::path> files = {dir / "a.tsv"};
    const auto res = ingest_logs(files, Schema::native());
    EXPECT_EQ(res.panel.exchanges()[0], res.panel.exchanges()[1]);
    EXPECT_GE(res.panel.exchanges()[0], 0);
    EXPECT_NE(res.panel.exchanges()[0], res.panel.regions()[0]);
}

TEST(Ingest, CompactTimestampGivesDayAndHour) {
    auto schema = Schema::parse(
        "timestamp_format=compact_datetime\nday_from_timestamp=true\ntimestamp=timestamp\n"
        "exchange=exchange\nregion=region\nadvertiser=advertiser\nbid=bid\nfloor=floor\npay=pay\n"
        "filled=filled\nclicked=clicked\nconverted=converted\n");
    TempDir dir;
    write_text(dir / "a.tsv", std::string(kHeader) + "20130606143015123\t0\t1\t2\t3\t1\t1\t100\t50\t60\t1\t0\t0\n");
    const std::vector<std::filesystem::path> files = {dir / "a.tsv"};
    const auto res = ingest_logs(files, schema);
    EXPECT_EQ(res.panel.days()[0], 20130606);
    EXPECT_EQ(res.panel.hours()[0], 14);
}

TEST(Ingest, SyntheticRoundTripIsBitIdentical) {
    GenConfig cfg;
    cfg.n_rows = 1000;
    cfg.seed = 11;
    const auto generated = generate_panel(cfg);
    TempDir dir;
    for (const char* name : {"panel.tsv", "panel.tsv.gz"}) {
        write_panel(generated, dir / name);
        const std::vector<std::filesystem::path> files = {dir / name};
        const auto res = ingest_logs(files, Schema::native());
        EXPECT_TRUE(res.quarantined.empty());
        EXPECT_TRUE(res.panel.same_rows(generated)) << name;
        EXPECT_EQ(panel_summary(res.panel), panel_summary(generated));
    }
}

TEST(Ingest, ParallelEqualsSequential) {
    GenConfig cfg;
    cfg.n_rows = 3000;
    const auto generated = generate_panel(cfg);
    TempDir dir;
    std::vector<std::filesystem::path> files;
    for (std::size_t k = 0; k < 5; ++k) {
        files.push_back(dir / ("part" + std::to_string(k) + ".tsv"));
        write_panel(generated.slice(k * 600, (k + 1) * 600), files.back());
    }
    std::reverse(files.begin(), files.end());  // merge order must not matter once sorted
    const auto seq = ingest_logs(files, Schema::native(), "w", 1);
    const auto par = ingest_logs(files, Schema::native(), "w", 4);
    EXPECT_TRUE(seq.panel.same_rows(par.panel));
    EXPECT_EQ(seq.checksums, par.checksums);
    EXPECT_TRUE(seq.panel.same_rows(generated));
}

TEST(Split, SizesFromEnumeration) {
    EXPECT_EQ(split_sizes(10, {}), (std::array<std::size_t, 3>{6, 2, 2}));
    EXPECT_EQ(split_sizes(5, {}), (std::array<std::size_t, 3>{3, 1, 1}));
    EXPECT_EQ(split_sizes(1, {}), (std::array<std::size_t, 3>{1, 0, 0}));
    // Floor-then-distribute: every size within one row of n*f, remainder to earlier splits.
    for (std::size_t n = 0; n < 200; ++n) {
        const auto s = split_sizes(n, {});
        EXPECT_EQ(s[0] + s[1] + s[2], n);
        const double want[3] = {0.6 * n, 0.2 * n, 0.2 * n};
        for (int k = 0; k < 3; ++k) EXPECT_LT(std::abs(static_cast<double>(s[k]) - want[k]), 1.0 + 1e-9);
        EXPECT_GE(s[0], s[1]);
    }
}

TEST(Split, FractionsMustSumToOne) {
    EXPECT_THROW(split_sizes(10, {0.5, 0.2, 0.2}), ConfigError);
    EXPECT_THROW(split_sizes(10, {1.2, -0.1, -0.1}), ConfigError);
}

TEST(Split, PartitionPreservesOrder) {
    GenConfig cfg;
    cfg.n_rows = 997;
    const auto p = generate_panel(cfg);
    const auto s = chronological_split(p);
    EXPECT_EQ(s.train.size() + s.val.size() + s.test.size(), p.size());
    EXPECT_TRUE(s.train.same_rows(p.slice(0, s.train.size())));
    EXPECT_TRUE(s.test.same_rows(p.slice(p.size() - s.test.size(), p.size())));
    EXPECT_THROW(chronological_split(Panel{}), EmptyPanelError);
}

TEST(Quantiles, ConstantPopulation) {
    const auto q = floor_quantiles(panel_with_floors({50, 50, 50, 50, 50}), FloorPopulation::positive_floors);
    EXPECT_EQ(q.q25, 50);
    EXPECT_EQ(q.q50, 50);
    EXPECT_EQ(q.q75, 50);
}

TEST(Quantiles, NearestRankExamples) {
    const auto pos = floor_quantiles(panel_with_floors({40, 10, 30, 20, 0}), FloorPopulation::positive_floors);
    EXPECT_EQ(pos.q50, brute_nearest_rank({10, 20, 30, 40}, 0.5));
    EXPECT_EQ(pos.q50, 20);
    const auto all = floor_quantiles(panel_with_floors({0, 0, 100, 100}), FloorPopulation::all_floors);
    EXPECT_EQ(all.q25, brute_nearest_rank({0, 0, 100, 100}, 0.25));
    EXPECT_EQ(all.q25, 0);
}

TEST(Quantiles, MatchBruteForceOnGeneratedPanels) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        GenConfig cfg;
        cfg.n_rows = 500 + 137 * seed;
        cfg.seed = seed;
        const auto p = generate_panel(cfg);
        std::vector<Money> pos, all(p.floors().begin(), p.floors().end());
        for (Money f : all)
            if (f > 0) pos.push_back(f);
        const auto qp = floor_quantiles(p, FloorPopulation::positive_floors);
        const auto qa = floor_quantiles(p, FloorPopulation::all_floors);
        EXPECT_EQ(qp.q25, brute_nearest_rank(pos, 0.25));
        EXPECT_EQ(qp.q50, brute_nearest_rank(pos, 0.50));
        EXPECT_EQ(qp.q75, brute_nearest_rank(pos, 0.75));
        EXPECT_EQ(qa.q25, brute_nearest_rank(all, 0.25));
        EXPECT_EQ(qa.q75, brute_nearest_rank(all, 0.75));
        EXPECT_LE(qp.q25, qp.q50);
        EXPECT_LE(qp.q50, qp.q75);
    }
}

TEST(Quantiles, EmptyPositivePopulationThrows) {
    EXPECT_THROW(floor_quantiles(panel_with_floors({0, 0}), FloorPopulation::positive_floors), QuantileError);
}

TEST(Summary, EmptyPanelIsZero) {
    const auto s = panel_summary(Panel{});
    EXPECT_EQ(s, PanelSummary{});
}

TEST(Summary, ExactTallies) {
    const auto p = Panel::from_records({rec(1, 100, 50, 60, true, true, true), rec(1, 100, 50, 70, true, true),
                                        rec(2, 10, 50, 0, false), rec(3, 90, 0, 5, true)});
    const auto s = panel_summary(p);
    EXPECT_EQ(s.days, 3);
    EXPECT_EQ(s.opportunities, 4);
    EXPECT_EQ(s.filled, 3);
    EXPECT_DOUBLE_EQ(s.fill_rate, 0.75);
    EXPECT_EQ(s.clicks, 2);
    EXPECT_EQ(s.conversions, 1);
    EXPECT_EQ(s.baseline_yield_sum, 135);
    const auto j = nlohmann::json::parse(summary_json(s));
    EXPECT_EQ(j["opportunities"], 4);
    EXPECT_EQ(j["baseline_yield_sum"], "135");
}

TEST(Summary, ReportedSeasonFillRates) {
    // Rounded fill shares of the two reported windows follow from their counts.
    EXPECT_NEAR(12'190'344.0 / 53'289'330.0, 0.229, 0.0005);
    EXPECT_NEAR(3'132'311.0 / 10'566'743.0, 0.296, 0.0005);
}
