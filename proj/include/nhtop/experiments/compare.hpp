#pragma once

// Regression gate: per-column deviation of a candidate sweep from a reference.

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "nhtop/experiments/record.hpp"

namespace nhtop {

struct Tolerance {
    enum class Rule { Exact, Relative, Factor };
    Rule rule = Rule::Exact;
    double value = 0.0;
    double floor = 0.0;  // Relative: denominators below this are raised to it

    std::string describe() const {
        switch (rule) {
            case Rule::Exact: return "exact";
            case Rule::Relative: return "relative " + format_real(value) + " (floor " + format_real(floor) + ")";
            case Rule::Factor: return "within factor " + format_real(value);
        }
        return "";
    }
};

/// Shipped tolerance table. Singular values and energies: 1e-8 relative;
/// kappa: order of magnitude; integers and text: exact.
inline std::map<std::string, Tolerance> default_tolerances() {
    const Tolerance rel{Tolerance::Rule::Relative, 1e-8, 1e-13};
    std::map<std::string, Tolerance> t;
    for (const Column& c : columns()) {
        t[c.name] = c.kind == ColumnKind::Real ? rel : Tolerance{};
    }
    t["sweep_value"] = {Tolerance::Rule::Relative, 1e-12, 1e-12};
    t["kappa"] = {Tolerance::Rule::Factor, 10.0, 0.0};
    t["v_realspace"] = t["v_minus"] = t["v_plus"] = {Tolerance::Rule::Relative, 1e-6, 1.0};
    return t;
}

struct ColumnReport {
    std::string name;
    std::string tolerance;
    double max_deviation = 0.0;
    std::size_t failures = 0;
    bool passed() const { return failures == 0; }
};

struct CompareReport {
    std::vector<ColumnReport> columns;
    std::size_t rows_candidate = 0;
    std::size_t rows_reference = 0;
    bool passed() const {
        if (rows_candidate != rows_reference) return false;
        for (const auto& c : columns) {
            if (!c.passed()) return false;
        }
        return true;
    }
};

namespace detail {

// Deviation of one cell under a rule; +inf when one side is null.
inline double cell_deviation(const Column& col, const Tolerance& tol, const std::string& a, const std::string& b,
                             bool& ok) {
    ok = true;
    if (a == b) return 0.0;
    if (a.empty() || b.empty() || col.kind == ColumnKind::Text) {
        ok = false;
        return std::numeric_limits<double>::infinity();
    }
    const double x = parse_real(a);
    const double y = parse_real(b);
    double dev = 0.0;
    switch (tol.rule) {
        case Tolerance::Rule::Exact:
            dev = std::abs(x - y);
            ok = dev == 0.0;
            break;
        case Tolerance::Rule::Relative:
            dev = std::abs(x - y) / std::max(std::abs(y), tol.floor);
            ok = dev <= tol.value;
            break;
        case Tolerance::Rule::Factor:
            if (x > 0.0 && y > 0.0) {
                dev = std::max(x / y, y / x);
                ok = dev <= tol.value;
            } else {
                dev = std::abs(x - y);
                ok = dev == 0.0;
            }
            break;
    }
    if (std::isnan(dev)) ok = false;
    return dev;
}

}  // namespace detail

/// Compares rows position by position. Both inputs follow the CSV schema.
inline CompareReport compare_to_reference(const std::vector<SweepRecord>& candidate,
                                          const std::vector<SweepRecord>& reference,
                                          const std::map<std::string, Tolerance>& tolerances = default_tolerances()) {
    CompareReport rep;
    rep.rows_candidate = candidate.size();
    rep.rows_reference = reference.size();
    const std::size_t rows = std::min(candidate.size(), reference.size());
    for (const Column& col : columns()) {
        const auto it = tolerances.find(col.name);
        const Tolerance tol = it == tolerances.end() ? Tolerance{} : it->second;
        ColumnReport cr;
        cr.name = col.name;
        cr.tolerance = tol.describe();
        for (std::size_t i = 0; i < rows; ++i) {
            bool ok = true;
            const double d = detail::cell_deviation(col, tol, col.get(candidate[i]), col.get(reference[i]), ok);
            if (!ok) ++cr.failures;
            if (!(d <= cr.max_deviation)) cr.max_deviation = d;
        }
        rep.columns.push_back(cr);
    }
    return rep;
}

inline CompareReport compare_to_reference(const std::vector<SweepRecord>& candidate, const std::string& reference_csv,
                                          const std::map<std::string, Tolerance>& tolerances = default_tolerances()) {
    return compare_to_reference(candidate, records_from_csv(reference_csv), tolerances);
}

inline std::string format_report(const CompareReport& rep) {
    std::string out = "rows: candidate " + std::to_string(rep.rows_candidate) + ", reference " +
                      std::to_string(rep.rows_reference) + "\n";
    for (const auto& c : rep.columns) {
        out += (c.passed() ? "  pass  " : "  FAIL  ") + c.name + "  max deviation " + format_real(c.max_deviation) +
               "  [" + c.tolerance + "]";
        if (!c.passed()) out += "  failures " + std::to_string(c.failures);
        out += "\n";
    }
    out += rep.passed() ? "result: pass\n" : "result: FAIL\n";
    return out;
}

}  // namespace nhtop
