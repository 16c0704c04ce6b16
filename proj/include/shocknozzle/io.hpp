#pragma once

// Result persistence: columnar CSV tables with '#' metadata headers plus JSON
// sidecars/summaries. Numbers are written with 17 significant digits so tables
// reload bit-identically.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "shocknozzle/config.hpp"
#include "shocknozzle/errors.hpp"

namespace shocknozzle {

using json = nlohmann::ordered_json;

struct CsvTable {
    std::vector<std::string> comments; // '#' header lines (without the '#')
    std::vector<std::string> columns;
    std::vector<std::vector<double>> data; // data[c][row]

    std::size_t rows() const { return data.empty() ? 0 : data.front().size(); }

    const std::vector<double>& column(const std::string& name) const {
        for (std::size_t c = 0; c < columns.size(); ++c)
            if (columns[c] == name) return data[c];
        throw IoError("table: missing column '" + name + "'");
    }
};

inline void write_csv(const std::filesystem::path& path, const CsvTable& t) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    for (const auto& c : t.comments) os << "# " << c << "\n";
    for (std::size_t c = 0; c < t.columns.size(); ++c)
        os << t.columns[c] << (c + 1 < t.columns.size() ? "," : "");
    os << "\n";
    for (std::size_t r = 0; r < t.rows(); ++r) {
        for (std::size_t c = 0; c < t.columns.size(); ++c)
            os << format_double(t.data[c][r]) << (c + 1 < t.columns.size() ? "," : "");
        os << "\n";
    }
    if (!os) throw IoError("write failed: " + path.string());
}

inline CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path.string());
    CsvTable t;
    std::string line;
    std::size_t offset = 0;
    bool header_done = false;
    while (std::getline(is, line)) {
        const std::size_t line_start = offset;
        offset += line.size() + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            t.comments.push_back(detail::trim(line.substr(1)));
            continue;
        }
        std::vector<std::string> cells;
        std::size_t pos = 0;
        while (true) {
            const auto comma = line.find(',', pos);
            cells.push_back(line.substr(pos, comma == std::string::npos ? comma : comma - pos));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (!header_done) {
            t.columns = cells;
            t.data.assign(cells.size(), {});
            header_done = true;
            continue;
        }
        if (cells.size() != t.columns.size())
            throw IoError("parse error in " + path.string() + " at byte " +
                          std::to_string(line_start) + ": expected " +
                          std::to_string(t.columns.size()) + " cells, got " +
                          std::to_string(cells.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v = 0.0;
            const std::string& s = cells[c];
            auto r = std::from_chars(s.data(), s.data() + s.size(), v);
            if (r.ec != std::errc() || r.ptr != s.data() + s.size())
                throw IoError("parse error in " + path.string() + " at byte " +
                              std::to_string(line_start) + ": bad number '" + s + "'");
            t.data[c].push_back(v);
        }
    }
    if (!header_done) throw IoError("parse error in " + path.string() + ": no header row");
    return t;
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os << j.dump(2) << "\n";
    if (!os) throw IoError("write failed: " + path.string());
}

inline json read_json(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open: " + path.string());
    try {
        return json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError("parse error in " + path.string() + " at byte " + std::to_string(e.byte) +
                      ": " + e.what());
    }
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os << text;
    if (!os) throw IoError("write failed: " + path.string());
}

} // namespace shocknozzle
