#include "floorlab/panel.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "floorlab/error.hpp"
#include "floorlab/io.hpp"
#include "floorlab/stats.hpp"

namespace floorlab {

std::optional<std::string> record_violation(const AuctionRecord& r) {
    if (r.bid < 0) return "negative_bid";
    if (r.logged_floor < 0) return "negative_floor";
    if (!r.filled) {
        if (r.pay_price != 0) return "unfilled_with_payment";
        if (r.clicked || r.converted) return "unfilled_with_outcome";
    } else {
        if (r.pay_price < 0) return "negative_payment";
        if (r.bid < r.logged_floor) return "fill_below_floor";
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Panel
// ---------------------------------------------------------------------------

Panel Panel::from_records(std::vector<AuctionRecord> records, std::string window_id,
                          std::size_t shard_count) {
    std::stable_sort(records.begin(), records.end(), [](const AuctionRecord& a, const AuctionRecord& b) {
        return a.day != b.day ? a.day < b.day : a.timestamp < b.timestamp;
    });
    Panel p;
    const auto n = records.size();
    p.timestamp_.reserve(n);
    p.day_.reserve(n);
    p.hour_.reserve(n);
    p.exchange_.reserve(n);
    p.region_.reserve(n);
    p.advertiser_.reserve(n);
    p.slot_.reserve(n);
    p.device_.reserve(n);
    p.bid_.reserve(n);
    p.floor_.reserve(n);
    p.pay_.reserve(n);
    p.filled_.reserve(n);
    p.clicked_.reserve(n);
    p.converted_.reserve(n);
    for (const auto& r : records) p.push_back(r);
    p.window_id_ = std::move(window_id);
    p.shard_count_ = std::max<std::size_t>(shard_count, 1);
    p.index_days();
    return p;
}

void Panel::push_back(const AuctionRecord& r) {
    timestamp_.push_back(r.timestamp);
    day_.push_back(r.day);
    hour_.push_back(r.hour);
    exchange_.push_back(r.exchange);
    region_.push_back(r.region);
    advertiser_.push_back(r.advertiser);
    slot_.push_back(r.slot);
    device_.push_back(r.device);
    bid_.push_back(r.bid);
    floor_.push_back(r.logged_floor);
    pay_.push_back(r.pay_price);
    filled_.push_back(r.filled ? 1 : 0);
    clicked_.push_back(r.clicked ? 1 : 0);
    converted_.push_back(r.converted ? 1 : 0);
}

void Panel::index_days() {
    day_index_.resize(day_.size());
    day_keys_.clear();
    for (std::size_t i = 0; i < day_.size(); ++i) {
        if (day_keys_.empty() || day_keys_.back() != day_[i]) day_keys_.push_back(day_[i]);
        day_index_[i] = static_cast<std::int32_t>(day_keys_.size() - 1);
    }
}

AuctionRecord Panel::record(std::size_t i) const {
    AuctionRecord r;
    r.timestamp = timestamp_[i];
    r.day = day_[i];
    r.hour = hour_[i];
    r.exchange = exchange_[i];
    r.region = region_[i];
    r.advertiser = advertiser_[i];
    r.slot = slot_[i];
    r.device = device_[i];
    r.bid = bid_[i];
    r.logged_floor = floor_[i];
    r.pay_price = pay_[i];
    r.filled = filled_[i] != 0;
    r.clicked = clicked_[i] != 0;
    r.converted = converted_[i] != 0;
    return r;
}

std::vector<std::pair<std::size_t, std::size_t>> Panel::shard_ranges(std::size_t shards) const {
    shards = std::max<std::size_t>(shards, 1);
    const std::size_t n = size();
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(shards);
    const std::size_t base = n / shards, extra = n % shards;
    std::size_t begin = 0;
    for (std::size_t s = 0; s < shards; ++s) {
        const std::size_t len = base + (s < extra ? 1 : 0);
        out.emplace_back(begin, begin + len);
        begin += len;
    }
    return out;
}

Panel Panel::slice(std::size_t begin, std::size_t end) const {
    end = std::min(end, size());
    begin = std::min(begin, end);
    std::vector<std::size_t> rows(end - begin);
    std::iota(rows.begin(), rows.end(), begin);
    return select(rows);
}

Panel Panel::select(std::span<const std::size_t> rows) const {
    Panel p;
    for (std::size_t i : rows) p.push_back(record(i));
    p.window_id_ = window_id_;
    p.shard_count_ = shard_count_;
    p.index_days();
    return p;
}

Panel Panel::with_shards(std::size_t shard_count) const {
    Panel p = *this;
    p.shard_count_ = std::max<std::size_t>(shard_count, 1);
    return p;
}

bool Panel::same_rows(const Panel& o) const {
    return timestamp_ == o.timestamp_ && day_ == o.day_ && hour_ == o.hour_ &&
           exchange_ == o.exchange_ && region_ == o.region_ && advertiser_ == o.advertiser_ &&
           slot_ == o.slot_ && device_ == o.device_ && bid_ == o.bid_ && floor_ == o.floor_ &&
           pay_ == o.pay_ && filled_ == o.filled_ && clicked_ == o.clicked_ &&
           converted_ == o.converted_;
}

// ---------------------------------------------------------------------------
// Schema
// ---------------------------------------------------------------------------

namespace {

constexpr std::array<Field, 13> kFields = {
    Field::timestamp, Field::day, Field::exchange, Field::region, Field::advertiser,
    Field::slot, Field::device, Field::bid, Field::floor, Field::pay,
    Field::filled, Field::clicked, Field::converted};

constexpr std::array<Field, 10> kRequired = {
    Field::day, Field::exchange, Field::region, Field::advertiser, Field::bid,
    Field::floor, Field::pay, Field::filled, Field::clicked, Field::converted};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
    s = trim(s);
    Int value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

// Decimal text times scale, rounded half away from zero.
std::optional<Money> parse_money(std::string_view s, std::int64_t scale) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    bool negative = false;
    if (s.front() == '-' || s.front() == '+') {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    const auto dot = s.find('.');
    std::string_view whole = s.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
    if (whole.empty() && frac.empty()) return std::nullopt;
    if (!whole.empty() && !all_digits(whole)) return std::nullopt;
    if (!frac.empty() && !all_digits(frac)) return std::nullopt;
    if (frac.size() > 12) return std::nullopt;
    __int128 w = 0;
    for (char c : whole) {
        w = w * 10 + (c - '0');
        if (w > (static_cast<__int128>(1) << 62)) return std::nullopt;
    }
    __int128 f = 0, denom = 1;
    for (char c : frac) {
        f = f * 10 + (c - '0');
        denom *= 10;
    }
    __int128 scaled = w * scale + (f * scale * 2 + denom) / (2 * denom);
    if (scaled > std::numeric_limits<Money>::max()) return std::nullopt;
    return static_cast<Money>(negative ? -scaled : scaled);
}

std::optional<bool> parse_flag(std::string_view s) {
    s = trim(s);
    if (s == "1" || s == "true" || s == "TRUE" || s == "True") return true;
    if (s == "0" || s == "false" || s == "FALSE" || s == "False" || s.empty()) return false;
    return std::nullopt;
}

// Integer ids pass through; anything else is hashed to a stable 31-bit id so
// parallel readers agree without a shared dictionary.
std::int32_t parse_category(std::string_view s) {
    s = trim(s);
    if (s.empty() || s == "null" || s == "NA") return 0;
    if (auto v = parse_int<std::int64_t>(s); v && *v >= 0 && *v <= std::numeric_limits<std::int32_t>::max())
        return static_cast<std::int32_t>(*v);
    return static_cast<std::int32_t>(io::fnv1a(s) & 0x7fffffffULL);
}

}  // namespace

const char* field_name(Field f) {
    switch (f) {
        case Field::timestamp: return "timestamp";
        case Field::day: return "day";
        case Field::exchange: return "exchange";
        case Field::region: return "region";
        case Field::advertiser: return "advertiser";
        case Field::slot: return "slot";
        case Field::device: return "device";
        case Field::bid: return "bid";
        case Field::floor: return "floor";
        case Field::pay: return "pay";
        case Field::filled: return "filled";
        case Field::clicked: return "clicked";
        case Field::converted: return "converted";
    }
    return "?";
}

std::span<const Field> all_fields() { return kFields; }

Schema Schema::native() {
    Schema s;
    for (Field f : kFields) s.columns[f] = field_name(f);
    return s;
}

Schema Schema::parse(const std::string& text) {
    Schema s;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw SchemaError("schema line " + std::to_string(line_no) + ": expected key=value");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key == "delimiter") {
            if (value == "tab" || value == "\\t") s.delimiter = '\t';
            else if (value == "comma") s.delimiter = ',';
            else if (value.size() == 1) s.delimiter = value[0];
            else throw SchemaError("delimiter must be one character, 'tab' or 'comma'");
        } else if (key == "header") {
            auto flag = parse_flag(value);
            if (!flag) throw SchemaError("header must be true or false");
            s.header = *flag;
        } else if (key == "money_scale") {
            auto v = parse_int<std::int64_t>(value);
            if (!v || *v <= 0) throw SchemaError("money_scale must be a positive integer");
            s.money_scale = *v;
        } else if (key == "timestamp_format") {
            if (value == "epoch_ms") s.timestamp_format = TimestampFormat::epoch_ms;
            else if (value == "compact_datetime") s.timestamp_format = TimestampFormat::compact_datetime;
            else throw SchemaError("timestamp_format must be epoch_ms or compact_datetime");
        } else if (key == "day_from_timestamp") {
            auto flag = parse_flag(value);
            if (!flag) throw SchemaError("day_from_timestamp must be true or false");
            s.day_from_timestamp = *flag;
        } else {
            auto it = std::find_if(kFields.begin(), kFields.end(),
                                   [&](Field f) { return key == field_name(f); });
            if (it == kFields.end()) throw SchemaError("unknown schema key '" + key + "'");
            if (value.empty()) throw SchemaError("empty column reference for '" + key + "'");
            s.columns[*it] = value;
        }
    }
    return s;
}

Schema Schema::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open schema " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

namespace {

struct FileParse {
    std::vector<AuctionRecord> records;
    std::vector<QuarantinedRow> quarantined;
    std::size_t rows_read = 0;
    std::uint64_t checksum = 0;
};

using ColumnIndex = std::array<int, 13>;  // per Field, -1 when unmapped

ColumnIndex resolve_columns(const Schema& schema, const std::vector<std::string_view>* header,
                            const std::string& source) {
    ColumnIndex idx;
    idx.fill(-1);
    for (const auto& [field, ref] : schema.columns) {
        int col = -1;
        if (all_digits(ref)) {
            col = std::stoi(ref);
        } else {
            if (header == nullptr)
                throw SchemaError("column '" + ref + "' referenced by name but header=false");
            for (std::size_t i = 0; i < header->size(); ++i)
                if (trim((*header)[i]) == ref) col = static_cast<int>(i);
            if (col < 0) throw SchemaError(source + ": missing required column '" + ref + "'");
        }
        idx[static_cast<std::size_t>(field)] = col;
    }
    return idx;
}

void check_required(const Schema& schema) {
    for (Field f : kRequired) {
        if (f == Field::day && schema.day_from_timestamp) continue;
        if (!schema.columns.contains(f))
            throw SchemaError(std::string("schema does not map required field '") + field_name(f) + "'");
    }
    if (schema.day_from_timestamp && !schema.columns.contains(Field::timestamp))
        throw SchemaError("day_from_timestamp requires a timestamp column");
    if (schema.day_from_timestamp && schema.timestamp_format != TimestampFormat::compact_datetime)
        throw SchemaError("day_from_timestamp requires timestamp_format=compact_datetime");
}

std::int32_t hour_of(std::int64_t ts, TimestampFormat format) {
    if (format == TimestampFormat::compact_datetime) return static_cast<std::int32_t>((ts / 10'000'000) % 100);
    const std::int64_t h = (ts / 3'600'000) % 24;
    return static_cast<std::int32_t>(h < 0 ? h + 24 : h);
}

FileParse parse_file(const std::filesystem::path& path, const Schema& schema) {
    FileParse out;
    out.checksum = file_checksum(path);
    const std::string source = path.filename().string();
    std::optional<ColumnIndex> idx;
    if (!schema.header) idx = resolve_columns(schema, nullptr, source);

    io::for_each_line(path, [&](std::string_view line, std::size_t line_no) {
        if (!idx) {
            auto header = io::split(line, schema.delimiter);
            idx = resolve_columns(schema, &header, source);
            return;
        }
        if (trim(line).empty()) return;
        ++out.rows_read;
        auto cells = io::split(line, schema.delimiter);
        auto quarantine = [&](std::string reason) {
            out.quarantined.push_back({source, line_no, std::string(line), std::move(reason)});
        };
        auto cell = [&](Field f) -> std::optional<std::string_view> {
            const int c = (*idx)[static_cast<std::size_t>(f)];
            if (c < 0) return std::string_view{};
            if (static_cast<std::size_t>(c) >= cells.size()) return std::nullopt;
            return cells[static_cast<std::size_t>(c)];
        };
        for (Field f : kFields)
            if (!cell(f)) return quarantine("missing_column");

        AuctionRecord r;
        if (schema.columns.contains(Field::timestamp)) {
            auto ts = parse_int<std::int64_t>(*cell(Field::timestamp));
            if (!ts) return quarantine("bad_timestamp");
            r.timestamp = *ts;
            r.hour = hour_of(r.timestamp, schema.timestamp_format);
        }
        if (schema.day_from_timestamp) {
            r.day = static_cast<std::int32_t>(r.timestamp / 1'000'000'000);
        } else {
            auto day = parse_int<std::int32_t>(*cell(Field::day));
            if (!day) return quarantine("bad_day");
            r.day = *day;
        }
        r.exchange = parse_category(*cell(Field::exchange));
        r.region = parse_category(*cell(Field::region));
        r.advertiser = parse_category(*cell(Field::advertiser));
        r.slot = parse_category(*cell(Field::slot));
        r.device = parse_category(*cell(Field::device));

        auto filled = parse_flag(*cell(Field::filled));
        auto clicked = parse_flag(*cell(Field::clicked));
        auto converted = parse_flag(*cell(Field::converted));
        if (!filled || !clicked || !converted) return quarantine("bad_flag");
        r.filled = *filled;
        r.clicked = *clicked;
        r.converted = *converted;

        auto bid = parse_money(*cell(Field::bid), schema.money_scale);
        auto floor = parse_money(*cell(Field::floor), schema.money_scale);
        if (!bid) return quarantine("bad_bid");
        if (!floor) return quarantine("bad_floor");
        r.bid = *bid;
        r.logged_floor = *floor;
        const auto pay_text = trim(*cell(Field::pay));
        if (pay_text.empty() || pay_text == "null" || pay_text == "NA") {
            if (r.filled) return quarantine("missing_pay");
            r.pay_price = 0;
        } else {
            auto pay = parse_money(pay_text, schema.money_scale);
            if (!pay) return quarantine("bad_pay");
            r.pay_price = *pay;
        }
        if (auto violation = record_violation(r)) return quarantine(*violation);
        out.records.push_back(r);
    });
    if (!idx) throw SchemaError(source + ": no header line");
    return out;
}

}  // namespace

IngestResult ingest_logs(std::span<const std::filesystem::path> paths, const Schema& schema,
                         std::string window_id, std::size_t threads) {
    check_required(schema);
    for (const auto& p : paths)
        if (!std::filesystem::exists(p)) throw IoError("input file not found: " + p.string());

    std::vector<FileParse> parsed(paths.size());
    std::vector<std::exception_ptr> failures(paths.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < paths.size(); i = next++) {
            try {
                parsed[i] = parse_file(paths[i], schema);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    const std::size_t n_threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(paths.size(), 1));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }
    for (auto& f : failures)
        if (f) std::rethrow_exception(f);

    IngestResult result;
    std::vector<AuctionRecord> records;
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        auto& fp = parsed[i];
        records.insert(records.end(), fp.records.begin(), fp.records.end());
        result.quarantined.insert(result.quarantined.end(), fp.quarantined.begin(), fp.quarantined.end());
        result.rows_read += fp.rows_read;
        result.checksums.emplace_back(paths[i].filename().string(), fp.checksum);
    }
    if (records.empty()) throw EmptyPanelError("no parseable rows in input");
    result.panel = Panel::from_records(std::move(records), std::move(window_id));
    return result;
}

void write_panel(const Panel& panel, const std::filesystem::path& path) {
    std::string text;
    text.reserve(panel.size() * 64 + 128);
    for (std::size_t i = 0; i < kFields.size(); ++i) {
        if (i) text += '\t';
        text += field_name(kFields[i]);
    }
    text += '\n';
    for (std::size_t i = 0; i < panel.size(); ++i) {
        const auto r = panel.record(i);
        text += std::to_string(r.timestamp);
        for (std::int64_t v : {std::int64_t{r.day}, std::int64_t{r.exchange}, std::int64_t{r.region},
                               std::int64_t{r.advertiser}, std::int64_t{r.slot}, std::int64_t{r.device},
                               r.bid, r.logged_floor}) {
            text += '\t';
            text += std::to_string(v);
        }
        text += '\t';
        if (r.filled) text += std::to_string(r.pay_price);
        text += r.filled ? "\t1" : "\t0";
        text += r.clicked ? "\t1" : "\t0";
        text += r.converted ? "\t1" : "\t0";
        text += '\n';
    }
    io::write_file_atomic(path, text);
}

void write_quarantine(std::span<const QuarantinedRow> rows, const std::filesystem::path& path,
                      char delimiter) {
    std::string text = "source";
    text += delimiter;
    text += "line";
    text += delimiter;
    text += "raw";
    text += delimiter;
    text += "reason\n";
    for (const auto& q : rows) {
        text += q.source;
        text += delimiter;
        text += std::to_string(q.line);
        text += delimiter;
        text += q.raw;
        text += delimiter;
        text += q.reason;
        text += '\n';
    }
    io::write_file_atomic(path, text);
}

std::uint64_t file_checksum(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        hash = io::fnv1a(std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())), hash);
    }
    return hash;
}

// ---------------------------------------------------------------------------
// Splits, quantiles, summary
// ---------------------------------------------------------------------------

std::array<std::size_t, 3> split_sizes(std::size_t n, SplitFractions fr) {
    const std::array<double, 3> f = {fr.train, fr.val, fr.test};
    for (double x : f)
        if (!(x >= 0.0)) throw ConfigError("split fractions must be non-negative");
    if (std::abs(f[0] + f[1] + f[2] - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
    std::array<std::size_t, 3> sizes{};
    std::size_t used = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        // The epsilon absorbs representation error such as 10 * 0.6 = 5.999...
        sizes[k] = static_cast<std::size_t>(std::floor(static_cast<double>(n) * f[k] + 1e-9));
        used += sizes[k];
    }
    for (std::size_t k = 0; used < n; k = (k + 1) % 3, ++used) ++sizes[k];
    return sizes;
}

PanelSplit chronological_split(const Panel& panel, SplitFractions fractions) {
    if (panel.empty()) throw EmptyPanelError("cannot split an empty panel");
    const auto sizes = split_sizes(panel.size(), fractions);
    PanelSplit s;
    s.train = panel.slice(0, sizes[0]);
    s.val = panel.slice(sizes[0], sizes[0] + sizes[1]);
    s.test = panel.slice(sizes[0] + sizes[1], panel.size());
    return s;
}

const char* population_name(FloorPopulation p) {
    return p == FloorPopulation::positive_floors ? "positive_floors" : "all_floors";
}

QuantileSet floor_quantiles(const Panel& panel, FloorPopulation population) {
    std::vector<Money> values;
    values.reserve(panel.size());
    for (Money f : panel.floors())
        if (population == FloorPopulation::all_floors || f > 0) values.push_back(f);
    if (values.empty())
        throw QuantileError(std::string("empty floor population (") + population_name(population) + ")");
    std::sort(values.begin(), values.end());
    const auto n = static_cast<std::int64_t>(values.size());
    auto at = [&](std::int64_t num) {
        return values[static_cast<std::size_t>(nearest_rank_index(n, num, 4) - 1)];
    };
    return QuantileSet{at(1), at(2), at(3), population};
}

PanelSummary panel_summary(const Panel& panel) {
    PanelSummary s;
    s.opportunities = static_cast<std::int64_t>(panel.size());
    s.days = static_cast<std::int64_t>(panel.day_keys().size());
    const auto filled = panel.filled();
    const auto clicked = panel.clicked();
    const auto converted = panel.converted();
    const auto pays = panel.pays();
    for (std::size_t i = 0; i < panel.size(); ++i) {
        s.filled += filled[i];
        s.clicks += clicked[i];
        s.conversions += converted[i];
        if (filled[i]) s.baseline_yield_sum += pays[i];
    }
    s.fill_rate = s.opportunities == 0 ? 0.0
                                       : static_cast<double>(s.filled) / static_cast<double>(s.opportunities);
    return s;
}

std::string summary_json(const PanelSummary& s) {
    nlohmann::ordered_json j;
    j["days"] = s.days;
    j["opportunities"] = s.opportunities;
    j["filled"] = s.filled;
    j["fill_rate"] = s.fill_rate;
    j["clicks"] = s.clicks;
    j["conversions"] = s.conversions;
    j["baseline_yield_sum"] = to_string(s.baseline_yield_sum);
    return j.dump(2);
}

}  // namespace floorlab
