#pragma once

// SweepRecord, its fixed column schema, and RFC-4180 CSV reading/writing.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nhtop/numerics.hpp"

namespace nhtop {

struct SweepRecord {
    std::size_t index = 0;  // task index: point * realizations + realization
    double sweep_value = 0.0;
    std::optional<double> min_abs_e;
    std::optional<double> min_s;
    std::optional<double> wipr;
    std::optional<double> kappa;
    std::optional<int> v_nonbloch_x;
    std::optional<int> v_nonbloch_y;
    std::optional<int> v_2d;
    std::optional<double> v_realspace;
    std::optional<int> zero_modes;
    std::optional<double> min_s_minus;
    std::optional<double> min_s_plus;
    std::optional<double> v_minus;
    std::optional<double> v_plus;
    std::uint64_t seed = 0;
    int realization = 0;
    std::int64_t wall_time_ms = 0;  // kept out of the main CSV, see timings file
    std::string status = "ok";      // ok | partial: ... | error: ...
    std::optional<int> zero_modes_minus;
    std::optional<int> zero_modes_plus;

    bool failed() const { return status.rfind("error", 0) == 0; }
};

enum class ColumnKind { Real, Integer, Text };

struct Column {
    std::string name;
    std::string unit;
    ColumnKind kind;
    std::function<std::string(const SweepRecord&)> get;
    std::function<void(SweepRecord&, const std::string&)> set;
};

/// 17 significant digits round-trip any double.
inline std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_real(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw InvalidInput("csv: '" + s + "' is not a number");
    }
    if (used != s.size()) throw InvalidInput("csv: '" + s + "' is not a number");
    return v;
}

namespace detail {

template <class T>
Column optional_column(std::string name, std::string unit, std::optional<T> SweepRecord::*field) {
    constexpr bool real = std::is_floating_point_v<T>;
    return {std::move(name), std::move(unit), real ? ColumnKind::Real : ColumnKind::Integer,
            [field](const SweepRecord& r) -> std::string {
                const auto& v = r.*field;
                if (!v) return "";
                if constexpr (real) return format_real(*v);
                else return std::to_string(*v);
            },
            [field](SweepRecord& r, const std::string& s) {
                if (s.empty()) {
                    (r.*field).reset();
                } else if constexpr (real) {
                    r.*field = parse_real(s);
                } else {
                    r.*field = static_cast<T>(std::stoll(s));
                }
            }};
}

}  // namespace detail

/// The CSV schema, in SweepRecord field order. wall_time_ms is written to a
/// separate timings file so the main CSV stays byte-deterministic.
inline const std::vector<Column>& columns() {
    using detail::optional_column;
    static const std::vector<Column> cols = [] {
        std::vector<Column> c;
        c.push_back({"sweep_value", "axis units", ColumnKind::Real,
                     [](const SweepRecord& r) { return format_real(r.sweep_value); },
                     [](SweepRecord& r, const std::string& s) { r.sweep_value = parse_real(s); }});
        c.push_back(optional_column("min_abs_e", "energy (hopping units)", &SweepRecord::min_abs_e));
        c.push_back(optional_column("min_s", "energy (hopping units)", &SweepRecord::min_s));
        c.push_back(optional_column("wipr", "lattice sites", &SweepRecord::wipr));
        c.push_back(optional_column("kappa", "dimensionless", &SweepRecord::kappa));
        c.push_back(optional_column("v_nonbloch_x", "integer winding", &SweepRecord::v_nonbloch_x));
        c.push_back(optional_column("v_nonbloch_y", "integer winding", &SweepRecord::v_nonbloch_y));
        c.push_back(optional_column("v_2d", "integer winding", &SweepRecord::v_2d));
        c.push_back(optional_column("v_realspace", "winding (real-valued)", &SweepRecord::v_realspace));
        c.push_back(optional_column("zero_modes", "count", &SweepRecord::zero_modes));
        c.push_back(optional_column("min_s_minus", "dimensionless", &SweepRecord::min_s_minus));
        c.push_back(optional_column("min_s_plus", "dimensionless", &SweepRecord::min_s_plus));
        c.push_back(optional_column("v_minus", "winding (real-valued)", &SweepRecord::v_minus));
        c.push_back(optional_column("v_plus", "winding (real-valued)", &SweepRecord::v_plus));
        c.push_back({"seed", "u64", ColumnKind::Integer, [](const SweepRecord& r) { return std::to_string(r.seed); },
                     [](SweepRecord& r, const std::string& s) { r.seed = std::stoull(s); }});
        c.push_back({"realization", "index", ColumnKind::Integer,
                     [](const SweepRecord& r) { return std::to_string(r.realization); },
                     [](SweepRecord& r, const std::string& s) { r.realization = std::stoi(s); }});
        c.push_back({"status", "text", ColumnKind::Text, [](const SweepRecord& r) { return r.status; },
                     [](SweepRecord& r, const std::string& s) { r.status = s; }});
        c.push_back(optional_column("zero_modes_minus", "count", &SweepRecord::zero_modes_minus));
        c.push_back(optional_column("zero_modes_plus", "count", &SweepRecord::zero_modes_plus));
        return c;
    }();
    return cols;
}

inline const Column* find_column(const std::string& name) {
    for (const Column& c : columns()) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

// ---------------------------------------------------------------------------
// RFC 4180
// ---------------------------------------------------------------------------

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

inline std::string csv_line(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) line += ',';
        line += csv_field(fields[i]);
    }
    return line + "\r\n";
}

inline std::vector<std::string> record_fields(const SweepRecord& r) {
    std::vector<std::string> f;
    for (const Column& c : columns()) f.push_back(c.get(r));
    return f;
}

inline std::string csv_header() {
    std::vector<std::string> names;
    for (const Column& c : columns()) names.push_back(c.name);
    return csv_line(names);
}

inline std::string records_to_csv(const std::vector<SweepRecord>& records) {
    std::string out = csv_header();
    for (const SweepRecord& r : records) out += csv_line(record_fields(r));
    return out;
}

/// Parses RFC 4180 text; accepts LF or CRLF line ends.
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field.empty()) throw InvalidInput("csv: stray quote inside an unquoted field");
                quoted = true;
                field_started = true;
                break;
            case ',':
                row.push_back(std::move(field));
                field.clear();
                field_started = true;
                break;
            case '\r':
                if (i + 1 < text.size() && text[i + 1] == '\n') break;
                [[fallthrough]];
            case '\n':
                row.push_back(std::move(field));
                field.clear();
                rows.push_back(std::move(row));
                row.clear();
                field_started = false;
                break;
            default:
                field += c;
                field_started = true;
        }
    }
    if (quoted) throw InvalidInput("csv: unterminated quoted field");
    if (field_started || !row.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline SweepRecord record_from_fields(const std::vector<std::string>& fields, std::size_t index) {
    const auto& cols = columns();
    if (fields.size() != cols.size()) {
        throw InvalidInput("csv: row " + std::to_string(index) + " has " + std::to_string(fields.size()) +
                           " fields, schema has " + std::to_string(cols.size()));
    }
    SweepRecord r;
    r.index = index;
    for (std::size_t i = 0; i < cols.size(); ++i) {
        try {
            cols[i].set(r, fields[i]);
        } catch (const InvalidInput&) {
            throw;
        } catch (const std::exception&) {
            throw InvalidInput("csv: bad value '" + fields[i] + "' in column " + cols[i].name);
        }
    }
    return r;
}

/// Parses a CSV in this schema; a different header is a schema mismatch.
inline std::vector<SweepRecord> records_from_csv(const std::string& text) {
    const auto rows = parse_csv(text);
    if (rows.empty()) throw InvalidInput("csv: missing header");
    std::vector<std::string> expect;
    for (const Column& c : columns()) expect.push_back(c.name);
    if (rows[0] != expect) throw InvalidInput("csv: schema mismatch in header");
    std::vector<SweepRecord> out;
    for (std::size_t i = 1; i < rows.size(); ++i) out.push_back(record_from_fields(rows[i], i - 1));
    return out;
}

}  // namespace nhtop
