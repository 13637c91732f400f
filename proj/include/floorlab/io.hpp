#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace floorlab::io {

/// Calls fn(line, line_number) for each line; gzip input is detected
/// transparently. Trailing '\r' is stripped.
void for_each_line(const std::filesystem::path& path,
                   const std::function<void(std::string_view, std::size_t)>& fn);

/// Writes via a temp file and rename so readers never see a partial file.
/// Compresses when the name ends in .gz.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t hash = 0xcbf29ce484222325ULL);

std::string hex64(std::uint64_t value);

/// Shortest decimal that round-trips, fixed by the C locale.
std::string format_double(double value);

std::vector<std::string_view> split(std::string_view line, char delimiter);

/// Minimal CSV builder: comma separated, fields quoted only when needed.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    CsvTable& row();
    CsvTable& cell(std::string_view text);
    CsvTable& cell(const char* text) { return cell(std::string_view(text)); }
    CsvTable& cell(const std::string& text) { return cell(std::string_view(text)); }
    CsvTable& cell(double value);
    CsvTable& cell(std::int64_t value);
    CsvTable& cell(int value) { return cell(static_cast<std::int64_t>(value)); }
    CsvTable& cell(std::size_t value) { return cell(static_cast<std::int64_t>(value)); }
    CsvTable& cell(bool value) { return cell(static_cast<std::int64_t>(value ? 1 : 0)); }

    std::string str() const;

private:
    std::string text_;
    std::size_t columns_ = 0;
    std::size_t in_row_ = 0;
    bool open_ = false;
};

}  // namespace floorlab::io
