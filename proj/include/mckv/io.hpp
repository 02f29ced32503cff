#pragma once

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mckv/grid.hpp"

namespace mckv {

namespace detail {
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
}  // namespace detail

/// Field dump: text header of key:value lines (dimension, n, L, tag,
/// endianness) terminated by a blank line, then the little-endian float64
/// payload in row-major order. Round trips bit-exactly.
inline void dump_field(const Field& f, std::ostream& os) {
    static_assert(sizeof(double) == 8);
    if constexpr (std::endian::native != std::endian::little)
        throw ConfigError("dump_field: only little-endian hosts are supported");
    os << "dimension: " << f.grid.dim() << "\n";
    os << "n: " << f.grid.n_per_axis() << "\n";
    os << "L: " << detail::format_double(f.grid.extent()) << "\n";
    os << "tag: " << f.tag << "\n";
    os << "endianness: little\n";
    os << "\n";
    os.write(reinterpret_cast<const char*>(f.values.data()),
             static_cast<std::streamsize>(f.values.size() * sizeof(double)));
}

inline void dump_field(const Field& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("dump_field: cannot open " + path);
    dump_field(f, os);
}

inline Field load_field(std::istream& is) {
    std::map<std::string, std::string> header;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) break;
        auto pos = line.find(':');
        if (pos == std::string::npos) throw ConfigError("load_field: malformed header line '" + line + "'");
        std::string key = line.substr(0, pos);
        std::string val = line.substr(pos + 1);
        if (!val.empty() && val.front() == ' ') val.erase(0, 1);
        header[key] = val;
    }
    for (const char* key : {"dimension", "n", "L", "endianness"})
        if (!header.count(key)) throw ConfigError(std::string("load_field: missing header key ") + key);
    if (header["endianness"] != "little") throw ConfigError("load_field: unsupported endianness");
    Grid g = make_grid(std::stoi(header["dimension"]), std::stoi(header["n"]), std::stod(header["L"]));
    Field f(g, 0.0, header.count("tag") ? header["tag"] : "");
    is.read(reinterpret_cast<char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (static_cast<std::size_t>(is.gcount()) != f.values.size() * sizeof(double))
        throw ConfigError("load_field: truncated payload");
    return f;
}

inline Field load_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("load_field: cannot open " + path);
    return load_field(is);
}

/// Deterministic CSV emitter: fixed column order, %.17g doubles, header row.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void add_row(const std::vector<std::string>& cells) {
        if (cells.size() != columns_.size()) throw ConfigError("CsvWriter: row width mismatch");
        rows_.push_back(cells);
    }

    static std::string cell(double v) { return detail::format_double(v); }
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(bool b) { return b ? "1" : "0"; }
    static std::string cell(long long v) { return std::to_string(v); }

    std::string str() const {
        std::ostringstream os;
        write(os);
        return os.str();
    }

    void write(std::ostream& os) const {
        for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
        os << "\n";
        for (const auto& row : rows_) {
            for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
            os << "\n";
        }
    }

    void write(const std::string& path) const {
        std::ofstream os(path);
        if (!os) throw ConfigError("CsvWriter: cannot open " + path);
        write(os);
    }

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace mckv
