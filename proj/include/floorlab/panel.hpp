#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "floorlab/money.hpp"

namespace floorlab {

/// One logged bid opportunity.
struct AuctionRecord {
    std::int64_t timestamp = 0;  // event time, ms
    std::int32_t day = 0;        // calendar-day key
    std::int32_t hour = 0;       // 0..23, derived from the timestamp at ingest
    std::int32_t exchange = 0;
    std::int32_t region = 0;
    std::int32_t advertiser = 0;
    std::int32_t slot = 0;
    std::int32_t device = 0;
    Money bid = 0;
    Money logged_floor = 0;
    Money pay_price = 0;  // zero when not filled
    bool filled = false;
    bool clicked = false;
    bool converted = false;

    bool operator==(const AuctionRecord&) const = default;
};

/// Reason a row violates the record invariants, or nullopt when it is valid.
std::optional<std::string> record_violation(const AuctionRecord& record);

/// Immutable columnar panel, sorted by (day, timestamp).
class Panel {
public:
    Panel() = default;

    /// Stable-sorts by (day, timestamp). Rows must already satisfy the record
    /// invariants; ingest quarantines the ones that do not.
    static Panel from_records(std::vector<AuctionRecord> records, std::string window_id = "",
                              std::size_t shard_count = 1);

    std::size_t size() const { return bid_.size(); }
    bool empty() const { return bid_.empty(); }

    AuctionRecord record(std::size_t i) const;

    std::span<const std::int64_t> timestamps() const { return timestamp_; }
    std::span<const std::int32_t> days() const { return day_; }
    std::span<const std::int32_t> hours() const { return hour_; }
    std::span<const std::int32_t> exchanges() const { return exchange_; }
    std::span<const std::int32_t> regions() const { return region_; }
    std::span<const std::int32_t> advertisers() const { return advertiser_; }
    std::span<const std::int32_t> slots() const { return slot_; }
    std::span<const std::int32_t> devices() const { return device_; }
    std::span<const Money> bids() const { return bid_; }
    std::span<const Money> floors() const { return floor_; }
    std::span<const Money> pays() const { return pay_; }
    std::span<const std::uint8_t> filled() const { return filled_; }
    std::span<const std::uint8_t> clicked() const { return clicked_; }
    std::span<const std::uint8_t> converted() const { return converted_; }

    /// Dense 0-based index of each row's day; days are contiguous because the
    /// panel is sorted.
    std::span<const std::int32_t> day_index() const { return day_index_; }
    /// Distinct day keys in order; day_keys()[day_index()[i]] == days()[i].
    std::span<const std::int32_t> day_keys() const { return day_keys_; }

    const std::string& window_id() const { return window_id_; }
    std::size_t shard_count() const { return shard_count_; }

    /// Contiguous half-open row ranges covering the panel, sizes within one row
    /// of each other. Order is preserved, so no shard reorders a day.
    std::vector<std::pair<std::size_t, std::size_t>> shard_ranges(std::size_t shards) const;

    /// Rows [begin, end) as a new panel with the same window id.
    Panel slice(std::size_t begin, std::size_t end) const;

    /// Rows at the given (ascending) indices.
    Panel select(std::span<const std::size_t> rows) const;

    Panel with_shards(std::size_t shard_count) const;

    /// Column-wise equality (window metadata excluded).
    bool same_rows(const Panel& other) const;

private:
    void push_back(const AuctionRecord& r);
    void index_days();

    std::vector<std::int64_t> timestamp_;
    std::vector<std::int32_t> day_, hour_, exchange_, region_, advertiser_, slot_, device_;
    std::vector<Money> bid_, floor_, pay_;
    std::vector<std::uint8_t> filled_, clicked_, converted_;
    std::vector<std::int32_t> day_index_, day_keys_;
    std::string window_id_;
    std::size_t shard_count_ = 1;
};

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

/// Logical fields a schema can map. Required: day, exchange, region,
/// advertiser, bid, floor, pay, filled, clicked, converted.
enum class Field {
    timestamp, day, exchange, region, advertiser, slot, device,
    bid, floor, pay, filled, clicked, converted
};

const char* field_name(Field f);
std::span<const Field> all_fields();

enum class TimestampFormat { epoch_ms, compact_datetime };  // compact: yyyyMMddHHmmssSSS

/// Column mapping for delimiter-separated input. Each field maps to either a
/// zero-based column index or a header name.
struct Schema {
    std::map<Field, std::string> columns;  // value: digits = index, else header name
    char delimiter = '\t';
    bool header = true;
    std::int64_t money_scale = 1;  // input decimals are multiplied by this
    TimestampFormat timestamp_format = TimestampFormat::epoch_ms;
    bool day_from_timestamp = false;  // compact timestamps only: day = yyyyMMdd prefix

    /// Mapping for the files written by write_panel.
    static Schema native();

    /// Parses `key=value` lines; `#` starts a comment. Keys are field names
    /// plus delimiter, header, money_scale, timestamp_format, day_from_timestamp.
    static Schema parse(const std::string& text);
    static Schema load(const std::filesystem::path& path);
};

struct QuarantinedRow {
    std::string source;      // file name
    std::size_t line = 0;    // 1-based line number in the source
    std::string raw;         // original line
    std::string reason;
};

struct IngestResult {
    Panel panel;
    std::vector<QuarantinedRow> quarantined;
    std::size_t rows_read = 0;
    std::vector<std::pair<std::string, std::uint64_t>> checksums;  // FNV-1a 64 of file bytes

    double quarantine_share() const {
        return rows_read == 0 ? 0.0
                              : static_cast<double>(quarantined.size()) / static_cast<double>(rows_read);
    }
};

/// Reads delimiter-separated (optionally gzip-compressed) files. Files are
/// parsed in parallel when threads > 1; the result is identical to a
/// sequential read.
IngestResult ingest_logs(std::span<const std::filesystem::path> paths, const Schema& schema,
                         std::string window_id = "", std::size_t threads = 1);

/// Writes the native format (gzip when the name ends in .gz).
void write_panel(const Panel& panel, const std::filesystem::path& path);

/// Quarantine side file: header line, then each raw line plus a reason column.
void write_quarantine(std::span<const QuarantinedRow> rows, const std::filesystem::path& path,
                      char delimiter = '\t');

std::uint64_t file_checksum(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Splits, quantiles, summaries
// ---------------------------------------------------------------------------

struct PanelSplit {
    Panel train, val, test;
};

struct SplitFractions {
    double train = 0.6, val = 0.2, test = 0.2;
};

/// Split sizes: floor(n * fraction) each, remainder handed out one row at a
/// time to earlier splits in order.
std::array<std::size_t, 3> split_sizes(std::size_t n, SplitFractions fractions);

PanelSplit chronological_split(const Panel& panel, SplitFractions fractions = {});

enum class FloorPopulation { positive_floors, all_floors };

const char* population_name(FloorPopulation p);

struct QuantileSet {
    Money q25 = 0, q50 = 0, q75 = 0;
    FloorPopulation population = FloorPopulation::positive_floors;

    bool operator==(const QuantileSet&) const = default;
};

/// Nearest-rank quartiles of the logged floor over the selected population.
QuantileSet floor_quantiles(const Panel& panel, FloorPopulation population);

struct PanelSummary {
    std::int64_t days = 0;
    std::int64_t opportunities = 0;
    std::int64_t filled = 0;
    double fill_rate = 0.0;
    std::int64_t clicks = 0;
    std::int64_t conversions = 0;
    MoneySum baseline_yield_sum = 0;  // sum of filled * pay

    bool operator==(const PanelSummary&) const = default;
};

PanelSummary panel_summary(const Panel& panel);

/// Flat key/value JSON document.
std::string summary_json(const PanelSummary& summary);

}  // namespace floorlab
