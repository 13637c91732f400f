#include "floorlab/io.hpp"

#include <zlib.h>

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>

#include "floorlab/error.hpp"

namespace floorlab::io {

namespace {

bool has_gz_suffix(const std::filesystem::path& path) { return path.extension() == ".gz"; }

}  // namespace

void for_each_line(const std::filesystem::path& path,
                   const std::function<void(std::string_view, std::size_t)>& fn) {
    gzFile file = gzopen(path.c_str(), "rb");
    if (file == nullptr) throw IoError("cannot open " + path.string());
    gzbuffer(file, 1 << 20);

    std::array<char, 1 << 16> chunk{};
    std::string pending;
    std::size_t line_number = 0;
    while (true) {
        const int got = gzread(file, chunk.data(), static_cast<unsigned>(chunk.size()));
        if (got < 0) {
            int code = 0;
            std::string message = gzerror(file, &code);
            gzclose(file);
            throw IoError("read error in " + path.string() + ": " + message);
        }
        if (got == 0) break;
        std::string_view data(chunk.data(), static_cast<std::size_t>(got));
        std::size_t start = 0;
        while (true) {
            const auto nl = data.find('\n', start);
            if (nl == std::string_view::npos) {
                pending.append(data.substr(start));
                break;
            }
            std::string_view piece = data.substr(start, nl - start);
            std::string_view line = piece;
            if (!pending.empty()) {
                pending.append(piece);
                line = pending;
            }
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            fn(line, ++line_number);
            pending.clear();
            start = nl + 1;
        }
    }
    gzclose(file);
    if (!pending.empty()) {
        std::string_view line = pending;
        if (line.back() == '\r') line.remove_suffix(1);
        fn(line, ++line_number);
    }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    if (has_gz_suffix(path)) {
        gzFile file = gzopen(tmp.c_str(), "wb6");
        if (file == nullptr) throw IoError("cannot write " + tmp.string());
        std::size_t offset = 0;
        while (offset < content.size()) {
            const auto n = static_cast<unsigned>(std::min<std::size_t>(content.size() - offset, 1u << 24));
            if (gzwrite(file, content.data() + offset, n) != static_cast<int>(n)) {
                gzclose(file);
                throw IoError("write failed for " + tmp.string());
            }
            offset += n;
        }
        if (gzclose(file) != Z_OK) throw IoError("close failed for " + tmp.string());
    } else {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t hash) {
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::string format_double(double value) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) return "nan";
    return std::string(buf.data(), end);
}

std::vector<std::string_view> split(std::string_view line, char delimiter) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delimiter, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

CsvTable::CsvTable(std::vector<std::string> header) : columns_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) text_ += ',';
        text_ += header[i];
    }
    text_ += '\n';
}

CsvTable& CsvTable::row() {
    if (open_) text_ += '\n';
    open_ = true;
    in_row_ = 0;
    return *this;
}

CsvTable& CsvTable::cell(std::string_view text) {
    if (in_row_++) text_ += ',';
    if (text.find_first_of(",\"\n") != std::string_view::npos) {
        text_ += '"';
        for (char c : text) {
            if (c == '"') text_ += '"';
            text_ += c;
        }
        text_ += '"';
    } else {
        text_ += text;
    }
    return *this;
}

CsvTable& CsvTable::cell(double value) { return cell(std::string_view(format_double(value))); }

CsvTable& CsvTable::cell(std::int64_t value) { return cell(std::string_view(std::to_string(value))); }

std::string CsvTable::str() const { return open_ ? text_ + '\n' : text_; }

}  // namespace floorlab::io
