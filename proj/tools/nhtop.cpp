// nhtop: run preset scenarios and parameter sweeps, compare against a
// reference CSV, inspect resolved configs.

#include <cstdio>
#include <iostream>
#include <optional>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "nhtop/experiments.hpp"

using namespace nhtop;

namespace {

struct Common {
    std::string config;
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> threads;
    std::optional<long long> max_dim;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "YAML or JSON config (a manifest also works)");
    app->add_option("--scenario", c.scenario, "fig2a | fig2b | fig3a | fig3b | fig3c | fig4 | custom");
    app->add_option("--seed", c.seed, "base seed (u64)");
    app->add_option("--out", c.out, "output directory");
    app->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
    app->add_option("--max-dim", c.max_dim, "cap on dense matrix dimension")->check(CLI::PositiveNumber);
}

ExperimentConfig resolve(const Common& c) {
    ExperimentConfig cfg;
    if (!c.config.empty()) {
        cfg = load_config(c.config);
        if (!c.scenario.empty() && parse_scenario(c.scenario) != cfg.scenario) {
            throw InvalidInput("--scenario disagrees with the config file's scenario");
        }
    } else {
        cfg = preset(parse_scenario(c.scenario.empty() ? "custom" : c.scenario));
    }
    if (c.seed) cfg.seed = *c.seed;
    if (c.out) cfg.outputs.directory = *c.out;
    if (c.threads) cfg.threads = *c.threads;
    if (c.max_dim) cfg.max_dim = static_cast<Eigen::Index>(*c.max_dim);
    return cfg;
}

std::string human_bytes(double b) {
    const char* units[] = {"B", "KiB", "MiB", "GiB", "TiB"};
    int u = 0;
    while (b >= 1024.0 && u < 4) {
        b /= 1024.0;
        ++u;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f %s", b, units[u]);
    return buf;
}

int execute(ExperimentConfig cfg, bool force, bool fresh) {
    cfg.validate();
    spdlog::info("scenario {} ({}): {} tasks, dense dimension up to {}, estimated peak memory {}", to_string(cfg.scenario),
                 cfg.name, cfg.task_count(), cfg.max_task_dimension(), human_bytes(static_cast<double>(estimate_peak_bytes(cfg))));
    if (fresh) {
        std::error_code ec;
        std::filesystem::remove(progress_path(cfg), ec);
    }
    RunOptions opt;
    opt.log = [](const std::string& s) { spdlog::info("{}", s); };
    const RunResult r = run_experiment(cfg, opt);
    if (r.records.empty() && !force) {
        spdlog::info("no records (empty sweep); nothing to publish");
        return kExitOk;
    }
    for (const auto& p : emit_outputs(r.records, cfg, force).files) spdlog::info("wrote {}", p.string());
    const int code = exit_code_for(r.records);
    if (code != kExitOk) spdlog::warn("at least one point failed numerically; see the status column");
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    auto logger = spdlog::stderr_color_mt("nhtop");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%H:%M:%S] %^%l%$ %v");

    CLI::App app{"Non-Hermitian 2D SSH topology: sweeps, invariants and diagnostics"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string level = "info";
    app.add_option("--log-level", level, "trace | debug | info | warn | error | off");

    // run: a scenario or config exactly as given.
    Common run_opts;
    bool run_force = false, run_fresh = false, run_svg = false;
    auto* run = app.add_subcommand("run", "run a scenario preset or a config file");
    add_common(run, run_opts);
    run->add_flag("--force", run_force, "publish header-only outputs for an empty sweep");
    run->add_flag("--fresh", run_fresh, "ignore saved progress");
    run->add_flag("--svg", run_svg, "also write SVG plots");

    // sweep: same, with the sweep and disorder overridable from the command line.
    Common sweep_opts;
    bool sweep_force = false, sweep_fresh = false, sweep_svg = false;
    std::string axis;
    std::optional<double> from, to, strength;
    std::optional<int> points, size, realizations;
    std::vector<double> values;
    std::string disorder_kind;
    std::string name;
    auto* sweep = app.add_subcommand("sweep", "run with the sweep axis, range or disorder overridden");
    add_common(sweep, sweep_opts);
    sweep->add_option("--axis", axis, "vx | vy | disorder | size");
    sweep->add_option("--from", from, "first sweep value");
    sweep->add_option("--to", to, "last sweep value");
    sweep->add_option("--points", points, "number of sweep points")->check(CLI::NonNegativeNumber);
    sweep->add_option("--values", values, "explicit sweep values")->delimiter(',');
    sweep->add_option("--size", size, "Lx = Ly")->check(CLI::PositiveNumber);
    sweep->add_option("--disorder", disorder_kind, "chiral | random | none");
    sweep->add_option("--strength", strength, "disorder strength");
    sweep->add_option("--realizations", realizations, "disorder realizations")->check(CLI::PositiveNumber);
    sweep->add_option("--name", name, "output base name");
    sweep->add_flag("--force", sweep_force, "publish header-only outputs for an empty sweep");
    sweep->add_flag("--fresh", sweep_fresh, "ignore saved progress");
    sweep->add_flag("--svg", sweep_svg, "also write SVG plots");

    std::string candidate, reference;
    std::optional<double> rel, kappa_factor;
    auto* compare = app.add_subcommand("compare", "compare a sweep CSV against a reference CSV");
    compare->add_option("candidate", candidate, "CSV to check")->required();
    compare->add_option("reference", reference, "reference CSV")->required();
    compare->add_option("--rel", rel, "relative tolerance for real columns (default 1e-8)");
    compare->add_option("--kappa-factor", kappa_factor, "allowed factor on kappa (default 10)");

    Common info_opts;
    auto* info = app.add_subcommand("info", "print the resolved config, task count and memory estimate");
    add_common(info, info_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitValidation;
    }
    spdlog::set_level(spdlog::level::from_str(level));

    try {
        if (*run) {
            ExperimentConfig cfg = resolve(run_opts);
            if (run_svg) cfg.outputs.svg = true;
            return execute(cfg, run_force, run_fresh);
        }
        if (*sweep) {
            ExperimentConfig cfg = resolve(sweep_opts);
            if (!axis.empty()) cfg.sweep.axis = detail::parse_name(detail::kAxisNames, axis, "--axis");
            if (from || to || points) {
                cfg.sweep.values.clear();
                if (from) cfg.sweep.start = *from;
                if (to) cfg.sweep.stop = *to;
                if (points) cfg.sweep.points = *points;
            }
            if (!values.empty()) cfg.sweep.values = values;
            if (size) cfg.Lx = cfg.Ly = *size;
            if (disorder_kind == "none") {
                cfg.disorder.reset();
            } else if (!disorder_kind.empty() || strength || realizations) {
                DisorderPlan p = cfg.disorder.value_or(DisorderPlan{});
                if (!disorder_kind.empty()) p.kind = detail::parse_name(detail::kDisorderNames, disorder_kind, "--disorder");
                if (strength) p.strength = *strength;
                if (realizations) p.realizations = *realizations;
                cfg.disorder = p;
            }
            if (!name.empty()) cfg.name = name;
            if (sweep_svg) cfg.outputs.svg = true;
            return execute(cfg, sweep_force, sweep_fresh);
        }
        if (*compare) {
            auto tol = default_tolerances();
            if (rel) {
                for (const Column& c : columns()) {
                    if (c.kind == ColumnKind::Real && tol[c.name].rule == Tolerance::Rule::Relative &&
                        c.name != "sweep_value") {
                        tol[c.name].value = *rel;
                    }
                }
            }
            if (kappa_factor) tol["kappa"].value = *kappa_factor;
            const auto cand = records_from_csv(read_file(candidate));
            const CompareReport rep = compare_to_reference(cand, read_file(reference), tol);
            std::cout << format_report(rep);
            return rep.passed() ? kExitOk : kExitNumerical;
        }
        if (*info) {
            const ExperimentConfig cfg = resolve(info_opts);
            cfg.validate();
            std::cout << to_json(cfg).dump(2) << "\n";
            std::cout << "tasks: " << cfg.task_count() << "\n";
            std::cout << "max dense dimension: " << cfg.max_task_dimension() << "\n";
            std::cout << "estimated peak memory: " << human_bytes(static_cast<double>(estimate_peak_bytes(cfg))) << "\n";
            std::cout << "fingerprint: " << config_fingerprint(cfg) << "\n";
            return kExitOk;
        }
    } catch (const InvalidInput& e) {
        spdlog::error("{}", e.what());
        return kExitValidation;
    } catch (const ResourceLimit& e) {
        spdlog::error("{}", e.what());
        return kExitValidation;
    } catch (const IoError& e) {
        spdlog::error("{}", e.what());
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        spdlog::error("{}", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kExitNumerical;
    }
    return kExitOk;
}
