#pragma once

// Sweep execution: one task per (sweep point x realization), a shared work
// counter across workers, and a single writer that owns the progress file.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <thread>

#include "nhtop/experiments/config.hpp"
#include "nhtop/experiments/record.hpp"
#include "nhtop/topology.hpp"

namespace nhtop {

/// Evaluates one task. Never throws on numerical trouble: failures land in
/// the record's status and the affected columns stay null.
inline SweepRecord evaluate_task(const ExperimentConfig& cfg, std::size_t index) {
    const auto grid = cfg.sweep.grid();
    const int reps = cfg.realization_count();
    const auto t0 = std::chrono::steady_clock::now();

    SweepRecord r;
    r.index = index;
    r.sweep_value = grid.at(index / reps);
    r.realization = static_cast<int>(index % reps);
    r.seed = cfg.realization_seed(r.realization);

    std::vector<std::string> errors;
    std::vector<std::string> undefined;
    auto guarded = [&](const char* what, auto&& fn) {
        try {
            fn();
        } catch (const TopologyUndefined&) {
            undefined.emplace_back(what);
        } catch (const std::exception& e) {
            errors.push_back(std::string(what) + ": " + e.what());
        }
    };

    const Model2D m = cfg.model_at(r.sweep_value, r.realization);

    const bool want_vectors = cfg.wants(Diagnostic::Wipr) || cfg.wants(Diagnostic::Kappa);
    if (want_vectors || cfg.wants(Diagnostic::MinAbsE)) {
        guarded("separable", [&] {
            const SeparableFactors f = separable_factors(m);
            if (want_vectors) {
                const EigResult ex = eig(f.hx);
                const EigResult ey = eig(f.hy);
                if (cfg.wants(Diagnostic::MinAbsE)) r.min_abs_e = min_abs_energy_separable(ex.values, ey.values);
                if (cfg.wants(Diagnostic::Wipr)) r.wipr = wipr_separable(ex, ey, m.Lx, m.Ly, cfg.wipr_coordinates);
                if (cfg.wants(Diagnostic::Kappa)) {
                    const double k = condition_number_separable(ex, ey).kappa;
                    if (std::isfinite(k)) r.kappa = k;
                    else undefined.emplace_back("kappa");
                }
            } else {
                r.min_abs_e = min_abs_energy_separable(eigenvalues(f.hx), eigenvalues(f.hy));
            }
        });
    }
    if (cfg.wants(Diagnostic::NonBloch)) {
        guarded("v_nonbloch_x", [&] { r.v_nonbloch_x = winding_nonbloch_1d(m.x).v; });
        guarded("v_nonbloch_y", [&] { r.v_nonbloch_y = winding_nonbloch_1d(m.y).v; });
        if (r.v_nonbloch_x && r.v_nonbloch_y) r.v_2d = *r.v_nonbloch_x * *r.v_nonbloch_y;
    }
    if (cfg.wants_dense()) {
        guarded("svd", [&] {
            const ComplexDense h = hamiltonian(m);
            RealVector s;
            if (cfg.wants(Diagnostic::RealSpaceWinding)) {
                const SvdTriple t = svd(h);
                s = t.S;
                guarded("v_realspace", [&] { r.v_realspace = real_space_winding(t, m.Lx, m.Ly).value; });
            } else {
                s = singular_values(h);
            }
            if (cfg.wants(Diagnostic::MinS)) r.min_s = s(s.size() - 1);
            if (cfg.wants(Diagnostic::ZeroModes)) r.zero_modes = zero_mode_count(s, cfg.zero_mode_policy).count;
        });
    }
    if (cfg.wants_floquet()) {
        guarded("floquet", [&] {
            DriveProtocol p;
            p.T = cfg.drive->T;
            p.T1 = cfg.drive->T1;
            p.qx = cfg.drive->qx;
            p.qy = cfg.drive->qy;
            p.fx = m.x.v;
            p.fy = m.y.v;
            FloquetOptions opt;
            opt.windings = cfg.wants(Diagnostic::FloquetWinding);
            opt.policy = cfg.zero_mode_policy;
            const FloquetResult f = analyze_floquet(m, p, opt);
            if (cfg.wants(Diagnostic::FloquetMinS)) {
                r.min_s_minus = f.min_s_minus;
                r.min_s_plus = f.min_s_plus;
                r.zero_modes_minus = f.zero_modes_minus.count;
                r.zero_modes_plus = f.zero_modes_plus.count;
            }
            if (f.v_minus) r.v_minus = f.v_minus->value;
            if (f.v_plus) r.v_plus = f.v_plus->value;
        });
    }

    auto join = [](const std::vector<std::string>& v) {
        std::string s;
        for (const auto& e : v) s += (s.empty() ? "" : "; ") + e;
        return s;
    };
    if (!errors.empty()) {
        r.status = "error: " + join(errors);
    } else if (!undefined.empty()) {
        r.status = "partial: undefined " + join(undefined);
    }
    r.wall_time_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

/// Rough peak working set per worker, in bytes.
inline std::size_t estimate_peak_bytes(const ExperimentConfig& cfg) {
    const auto n = static_cast<double>(cfg.max_task_dimension());
    double per = 0.0;
    if (cfg.wants_dense()) per = std::max(per, (cfg.wants(Diagnostic::RealSpaceWinding) ? 7.0 : 3.0) * 16.0 * n * n);
    if (cfg.wants_floquet()) per = std::max(per, 9.0 * 16.0 * n * n);
    const double chain = 2.0 * std::sqrt(n);  // 2L for square lattices
    per = std::max(per, 8.0 * 16.0 * chain * chain);
    return static_cast<std::size_t>(per * std::min<std::size_t>(cfg.threads, std::max<std::size_t>(1, cfg.task_count())));
}

/// 64-bit FNV-1a over the result-relevant part of the config (threads and
/// output settings excluded).
inline std::string config_fingerprint(const ExperimentConfig& cfg) {
    Json j = to_json(cfg);
    j.erase("threads");
    j.erase("outputs");
    j.erase("name");
    const std::string s = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct RunOptions {
    bool persist = true;                   // keep a progress file in outputs.directory
    std::optional<std::size_t> stop_after; // evaluate at most this many new tasks (simulated interruption)
    std::function<void(const std::string&)> log;
};

struct RunResult {
    std::vector<SweepRecord> records;  // ordered by task index
    bool complete = false;
    std::size_t resumed = 0;  // records loaded from a previous run
};

inline std::filesystem::path progress_path(const ExperimentConfig& cfg) {
    return std::filesystem::path(cfg.outputs.directory) / (cfg.name + ".progress.jsonl");
}

namespace detail {

inline Json progress_line(const SweepRecord& r) {
    return Json{{"index", r.index}, {"wall_time_ms", r.wall_time_ms}, {"row", record_fields(r)}};
}

// Loads completed records; drops a torn last line and anything from another config.
inline std::map<std::size_t, SweepRecord> load_progress(const std::filesystem::path& path,
                                                        const std::string& fingerprint, std::size_t tasks) {
    std::map<std::size_t, SweepRecord> done;
    std::ifstream in(path);
    if (!in) return done;
    std::string line;
    if (!std::getline(in, line)) return done;
    try {
        const Json head = Json::parse(line);
        if (head.at("fingerprint") != fingerprint || head.at("tasks") != tasks) return done;
    } catch (const std::exception&) {
        return done;
    }
    while (std::getline(in, line)) {
        try {
            const Json j = Json::parse(line);
            const auto idx = j.at("index").get<std::size_t>();
            if (idx >= tasks) continue;
            SweepRecord r = record_from_fields(j.at("row").get<std::vector<std::string>>(), idx);
            r.wall_time_ms = j.at("wall_time_ms").get<std::int64_t>();
            done[idx] = std::move(r);
        } catch (const std::exception&) {
            break;  // torn write at the kill point
        }
    }
    return done;
}

}  // namespace detail

/// Runs every (point x realization) task. Deterministic given the config:
/// the thread count only changes the schedule, never the values.
inline RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opt = {}) {
    cfg.validate();
    auto log = [&](const std::string& s) {
        if (opt.log) opt.log(s);
    };
    const std::size_t tasks = cfg.task_count();
    RunResult result;
    if (tasks == 0) {
        result.complete = true;
        return result;
    }

    const std::string fingerprint = config_fingerprint(cfg);
    std::map<std::size_t, SweepRecord> done;
    std::ofstream progress;
    if (opt.persist) {
        namespace fs = std::filesystem;
        std::error_code ec;
        fs::create_directories(cfg.outputs.directory, ec);
        if (ec) throw IoError("cannot create output directory '" + cfg.outputs.directory + "': " + ec.message());
        const fs::path path = progress_path(cfg);
        done = detail::load_progress(path, fingerprint, tasks);
        result.resumed = done.size();
        if (!done.empty()) log("resuming: " + std::to_string(done.size()) + " of " + std::to_string(tasks) + " tasks done");
        // Rewrite the clean prefix so appends never follow a torn line.
        const fs::path tmp = path.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::trunc);
            if (!out) throw IoError("cannot write progress file '" + tmp.string() + "'");
            out << Json{{"fingerprint", fingerprint}, {"tasks", tasks}}.dump() << '\n';
            for (const auto& [i, r] : done) out << detail::progress_line(r).dump() << '\n';
            if (!out.flush()) throw IoError("cannot write progress file '" + tmp.string() + "'");
        }
        fs::rename(tmp, path, ec);
        if (ec) throw IoError("cannot publish progress file: " + ec.message());
        progress.open(path, std::ios::app);
        if (!progress) throw IoError("cannot append to progress file '" + path.string() + "'");
    }

    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < tasks; ++i) {
        if (!done.count(i)) pending.push_back(i);
    }
    const std::size_t budget = std::min(pending.size(), opt.stop_after.value_or(pending.size()));

    std::mutex mu;
    std::condition_variable cv;
    std::deque<SweepRecord> queue;
    std::size_t finished_workers = 0;
    std::atomic<std::size_t> next{0};
    const int workers = std::max(1, std::min<int>(cfg.threads, static_cast<int>(std::max<std::size_t>(budget, 1))));

    auto worker = [&] {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= budget) break;
            SweepRecord r = evaluate_task(cfg, pending[k]);
            {
                std::lock_guard lock(mu);
                queue.push_back(std::move(r));
            }
            cv.notify_one();
        }
        {
            std::lock_guard lock(mu);
            ++finished_workers;
        }
        cv.notify_one();
    };

    std::string io_failure;
    std::thread writer([&] {
        std::size_t written = 0;
        for (;;) {
            std::unique_lock lock(mu);
            cv.wait(lock, [&] { return !queue.empty() || finished_workers == static_cast<std::size_t>(workers); });
            if (queue.empty()) break;
            SweepRecord r = std::move(queue.front());
            queue.pop_front();
            lock.unlock();
            if (progress.is_open()) {
                progress << detail::progress_line(r).dump() << '\n';
                progress.flush();
                if (!progress && io_failure.empty()) io_failure = "progress file write failed";
            }
            ++written;
            log("task " + std::to_string(r.index + 1) + "/" + std::to_string(tasks) + " value " +
                format_real(r.sweep_value) + " realization " + std::to_string(r.realization) + " " +
                std::to_string(r.wall_time_ms) + " ms " + r.status);
            done[r.index] = std::move(r);
        }
    });

    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    writer.join();
    if (!io_failure.empty()) throw IoError(io_failure);

    result.complete = done.size() == tasks;
    result.records.reserve(done.size());
    for (auto& [i, r] : done) result.records.push_back(std::move(r));
    return result;
}

}  // namespace nhtop
