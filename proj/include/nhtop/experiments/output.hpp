#pragma once

// Publishing: CSV, timings, JSON manifest and SVG plots, each written to a
// .tmp sibling and renamed into place.

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nhtop/experiments/config.hpp"
#include "nhtop/experiments/plot.hpp"
#include "nhtop/experiments/record.hpp"
#include "nhtop/experiments/run.hpp"

namespace nhtop {

inline constexpr const char* kVersion = "0.1.0";

/// Writes `content` to path.tmp, then renames. A failed write leaves the .tmp
/// behind and never touches `path`.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw IoError("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename '" + tmp.string() + "': " + ec.message());
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string timings_csv(const std::vector<SweepRecord>& records) {
    std::string out = csv_line({"index", "sweep_value", "realization", "wall_time_ms"});
    for (const auto& r : records) {
        out += csv_line({std::to_string(r.index), format_real(r.sweep_value), std::to_string(r.realization),
                         std::to_string(r.wall_time_ms)});
    }
    return out;
}

/// Median of a column at each sweep value; nulls skipped.
inline std::map<double, double> column_medians(const std::vector<SweepRecord>& records, const std::string& column) {
    const Column* col = find_column(column);
    std::map<double, std::vector<double>> by_x;
    if (!col || col->kind == ColumnKind::Text) return {};
    for (const auto& r : records) {
        const std::string s = col->get(r);
        if (!s.empty()) by_x[r.sweep_value].push_back(parse_real(s));
    }
    std::map<double, double> med;
    for (auto& [x, v] : by_x) {
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        med[x] = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    }
    return med;
}

/// Sweep intervals [first, last] where the median of `column` is below `level`.
inline std::vector<std::pair<double, double>> plateaus(const std::vector<SweepRecord>& records,
                                                       const std::string& column, double level) {
    std::vector<std::pair<double, double>> out;
    bool open = false;
    for (const auto& [x, v] : column_medians(records, column)) {
        if (v < level) {
            if (!open) out.push_back({x, x});
            out.back().second = x;
            open = true;
        } else {
            open = false;
        }
    }
    return out;
}

/// Derived numbers worth reading off a sweep: zero plateaus, size scaling.
inline Json summarize(const std::vector<SweepRecord>& records, const ExperimentConfig& cfg) {
    Json s = Json::object();
    for (const char* c : {"min_abs_e", "min_s", "min_s_minus", "min_s_plus"}) {
        if (column_medians(records, c).empty()) continue;
        Json list = Json::array();
        for (const auto& [a, b] : plateaus(records, c, 1e-3)) list.push_back(Json::array({a, b}));
        s["plateaus_below_1e-3"][c] = list;
    }
    if (cfg.sweep.axis == SweepAxis::Size) {
        std::vector<double> xs, ys;
        for (const auto& [L, v] : column_medians(records, "min_s")) {
            if (v >= 1e-14) {
                xs.push_back(L);
                ys.push_back(std::log(v));
            }
        }
        if (xs.size() >= 2) {
            const LinearFit f = linear_fit(xs, ys);
            s["ln_min_s_vs_size"] = Json{{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}};
        }
    }
    std::size_t ok = 0, partial = 0, failed = 0;
    for (const auto& r : records) {
        if (r.failed()) ++failed;
        else if (r.status == "ok") ++ok;
        else ++partial;
    }
    s["status"] = Json{{"ok", ok}, {"partial", partial}, {"error", failed}};
    return s;
}

inline Json make_manifest(const std::vector<SweepRecord>& records, const ExperimentConfig& cfg,
                          const std::vector<std::string>& files) {
    Json m;
    m["software"] = Json{{"name", "nhtop"},
                         {"version", kVersion},
                         {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                       "." + std::to_string(EIGEN_MINOR_VERSION)},
                         {"linear_algebra", "LAPACKE"},
                         {"compiler", __VERSION__}};
    m["config"] = to_json(cfg);
    m["fingerprint"] = config_fingerprint(cfg);
    Json seeds = Json::array();
    for (int i = 0; i < cfg.realization_count(); ++i) seeds.push_back(cfg.realization_seed(i));
    m["seeds"] = Json{{"base", cfg.seed}, {"realizations", seeds}, {"rng", kRngName}};
    Json cols = Json::array();
    for (const Column& c : columns()) cols.push_back(Json{{"name", c.name}, {"unit", c.unit}});
    m["columns"] = cols;
    m["scale"] = Json{{"reference", Json{{"Lx", cfg.reference_scale.Lx}, {"Ly", cfg.reference_scale.Ly}, {"note", cfg.reference_scale.note}}},
                      {"run", Json{{"Lx", cfg.Lx}, {"Ly", cfg.Ly}, {"max_dimension", cfg.max_task_dimension()}}}};
    m["records"] = records.size();
    m["summary"] = summarize(records, cfg);
    m["files"] = files;
    return m;
}

struct EmitResult {
    std::vector<std::filesystem::path> files;
};

/// Publishes the requested formats into cfg.outputs.directory. An empty
/// record list needs `force` (header-only CSV).
inline EmitResult emit_outputs(const std::vector<SweepRecord>& records, const ExperimentConfig& cfg, bool force = false) {
    if (records.empty() && !force) throw InvalidInput("emit_outputs: no records (pass force to publish headers)");
    namespace fs = std::filesystem;
    const fs::path dir(cfg.outputs.directory);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir.string() + "'");

    EmitResult res;
    std::vector<std::string> names;
    auto publish = [&](const std::string& name, const std::string& content) {
        atomic_write(dir / name, content);
        res.files.push_back(dir / name);
        names.push_back(name);
    };
    if (cfg.outputs.csv) {
        publish(cfg.name + ".csv", records_to_csv(records));
        publish(cfg.name + ".timings.csv", timings_csv(records));
    }
    if (cfg.outputs.svg) {
        for (const std::string& c : cfg.outputs.plots) {
            const bool log = cfg.outputs.log_scale && log_scaled_column(c);
            publish(cfg.name + "_" + c + ".svg", svg_plot(records, c, log, cfg.name + ": " + c));
        }
    }
    if (cfg.outputs.json) {
        std::vector<std::string> listed = names;
        listed.push_back(cfg.name + ".manifest.json");
        publish(cfg.name + ".manifest.json", make_manifest(records, cfg, listed).dump(2) + "\n");
    }
    // The CSV is now the source of truth; the progress log is spent.
    if (cfg.outputs.csv) fs::remove(progress_path(cfg), ec);
    return res;
}

}  // namespace nhtop
