// ============================================================================
// csv.hpp -- CSV tables with a metadata preamble and a sidecar JSON file
//
// Layout of every file:
//   # key: value          (one line per metadata entry, insertion order)
//   col1,col2,...
//   rows...
// Numbers are printed with %.12g so identical inputs give identical bytes.
// ============================================================================
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace ehwsn {

inline std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string fmt_hex(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void meta(const std::string& key, const std::string& value) { meta_.emplace_back(key, value); }

    void row(std::vector<std::string> cells) {
        if (cells.size() != columns_.size()) throw std::invalid_argument("CsvTable: row width mismatch");
        rows_.push_back(std::move(cells));
    }

    const std::vector<std::string>& columns() const { return columns_; }
    const std::vector<std::vector<std::string>>& rows() const { return rows_; }
    const std::vector<std::pair<std::string, std::string>>& metadata() const { return meta_; }

    /// Column index by name; throws if absent.
    std::size_t col(const std::string& name) const {
        for (std::size_t i = 0; i < columns_.size(); ++i)
            if (columns_[i] == name) return i;
        throw std::out_of_range("CsvTable: no column '" + name + "'");
    }

    std::string str() const {
        std::string out;
        for (const auto& [k, v] : meta_) out += "# " + k + ": " + v + "\n";
        out += join(columns_) + "\n";
        for (const auto& r : rows_) out += join(r) + "\n";
        return out;
    }

    nlohmann::json sidecar() const {
        nlohmann::json j;
        nlohmann::json m = nlohmann::json::object();
        for (const auto& [k, v] : meta_) m[k] = v;
        j["metadata"] = m;
        j["columns"] = columns_;
        j["rows"] = rows_.size();
        return j;
    }

    /// Writes <dir>/<stem>.csv and <dir>/<stem>.json; returns the CSV path.
    std::filesystem::path write(const std::filesystem::path& dir, const std::string& stem) const {
        std::filesystem::create_directories(dir);
        const auto csv = dir / (stem + ".csv");
        const auto json = dir / (stem + ".json");
        write_file(csv, str());
        write_file(json, sidecar().dump(2) + "\n");
        return csv;
    }

private:
    static std::string join(const std::vector<std::string>& cells) {
        std::string s;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) s += ',';
            s += cells[i];
        }
        return s;
    }

    static void write_file(const std::filesystem::path& p, const std::string& text) {
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
        out << text;
        if (!out) throw std::runtime_error("write failed for '" + p.string() + "'");
    }

    std::vector<std::string> columns_;
    std::vector<std::pair<std::string, std::string>> meta_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace ehwsn
