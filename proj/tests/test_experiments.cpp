#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>

#include "nhtop/experiments.hpp"

using namespace nhtop;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("nhtop_test_" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

std::size_t count_lines(const std::string& s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

// Small dense fig3 family: quick enough for determinism checks.
ExperimentConfig small_dense(const fs::path& out) {
    ExperimentConfig c = preset(Scenario::Fig3c);
    c.name = "small";
    c.Lx = c.Ly = 4;
    c.sweep = {SweepAxis::Vx, 0.2, 1.6, 5, {}};
    c.outputs.directory = out.string();
    return c;
}

ExperimentConfig small_disordered(const fs::path& out) {
    ExperimentConfig c = preset(Scenario::Fig2b);
    c.name = "dis";
    c.Lx = c.Ly = 6;
    c.sweep = {SweepAxis::Disorder, 0.0, 0.2, 3, {}};
    c.disorder->realizations = 3;
    c.diagnostics.push_back(Diagnostic::MinS);
    c.outputs.directory = out.string();
    return c;
}

}  // namespace

TEST_CASE("CSV: three records give a header plus three rows") {
    std::vector<SweepRecord> recs(3);
    for (int i = 0; i < 3; ++i) {
        recs[i].index = i;
        recs[i].sweep_value = 0.1 * i;
        recs[i].min_s = 1e-3 * (i + 1);
    }
    const std::string csv = records_to_csv(recs);
    CHECK(count_lines(csv) == 4);
    CHECK(csv.rfind("sweep_value,min_abs_e,min_s,wipr,kappa,v_nonbloch_x,v_nonbloch_y,v_2d,v_realspace,zero_modes,"
                    "min_s_minus,min_s_plus,v_minus,v_plus,seed,realization,status,zero_modes_minus,zero_modes_plus\r\n",
                    0) == 0);
    // Absent diagnostics are empty fields, never zero.
    const auto rows = parse_csv(csv);
    REQUIRE(rows.size() == 4);
    CHECK(rows[1][1].empty());
    CHECK(rows[1][2] == "0.001");
    CHECK(rows[2][0] == "0.10000000000000001");
}

TEST_CASE("CSV: RFC 4180 quoting round-trips") {
    SweepRecord r;
    r.status = "error: svd: \"zgesdd\" failed, info 3\nsecond line";
    r.kappa = 2.93e9;
    const std::string csv = records_to_csv({r});
    CHECK(csv.find("\"error: svd: \"\"zgesdd\"\" failed, info 3\nsecond line\"") != std::string::npos);
    const auto back = records_from_csv(csv);
    REQUIRE(back.size() == 1);
    CHECK(back[0].status == r.status);
    CHECK(back[0].kappa == r.kappa);
    CHECK_FALSE(back[0].min_s.has_value());

    CHECK(parse_csv("a,b\nc,\"d\"\"e\"") == std::vector<std::vector<std::string>>{{"a", "b"}, {"c", "d\"e"}});
    CHECK(parse_csv("x,\r\n,y\r\n") == std::vector<std::vector<std::string>>{{"x", ""}, {"", "y"}});
    CHECK_THROWS_AS(parse_csv("\"open"), InvalidInput);
    CHECK_THROWS_AS(records_from_csv("a,b\r\n1,2\r\n"), InvalidInput);
}

TEST_CASE("reals keep 17 significant digits") {
    for (double v : {0.1, 1.0 / 3.0, 2.93e9, 8.007e-13, -0.0, 1e-300}) {
        CHECK(parse_real(format_real(v)) == v);
    }
    CHECK(format_real(0.1) == "0.10000000000000001");
    CHECK_THROWS_AS(parse_real("1.0x"), InvalidInput);
}

TEST_CASE("presets carry the reference model parameters") {
    for (Scenario s : {Scenario::Fig2a, Scenario::Fig2b, Scenario::Fig3a, Scenario::Fig3b, Scenario::Fig3c,
                       Scenario::Fig4, Scenario::Custom}) {
        CHECK_NOTHROW(preset(s).validate());
    }
    const ExperimentConfig f3 = preset(Scenario::Fig3a);
    const Model2D m = f3.model_at(1.25, 0);
    CHECK(m.x.w == 1.0);
    CHECK(m.x.gamma == 1.5);
    CHECK(m.x.v == 1.25);
    CHECK(m.y.w == 0.0);
    CHECK(m.y.gamma == 9.0);
    CHECK(m.y.v == 6.0 * 1.25);

    const ExperimentConfig f2b = preset(Scenario::Fig2b);
    CHECK(f2b.x.v == -1.5);
    CHECK(f2b.y.v == -9.0);
    CHECK(f2b.Lx == 60);

    const ExperimentConfig f4 = preset(Scenario::Fig4);
    REQUIRE(f4.drive);
    CHECK(f4.drive->T == 0.6);
    CHECK(f4.drive->T1 == 0.3);
    CHECK(f4.drive->qx == 0.2);
    CHECK(f4.drive->qy == 0.2);
    CHECK(f4.model_at(2.0, 0).y.v == 14.0);
    CHECK(f4.y.gamma == 10.5);
    CHECK(f4.task_count() == 51);

    const auto g = preset(Scenario::Fig2a).sweep.grid();
    CHECK(g.size() == 101);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 2.0);
    CHECK(g[40] == Catch::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("config validation rejects bad documents") {
    ExperimentConfig c = preset(Scenario::Fig3a);
    c.sweep.stop = INFINITY;
    CHECK_THROWS_AS(c.validate(), InvalidInput);

    c = preset(Scenario::Fig2b);
    c.disorder->realizations = 0;
    CHECK_THROWS_AS(c.validate(), InvalidInput);

    c = preset(Scenario::Fig3a);
    c.sweep.axis = SweepAxis::Disorder;
    CHECK_THROWS_AS(c.validate(), InvalidInput);

    c = preset(Scenario::Fig4);
    c.drive.reset();
    CHECK_THROWS_AS(c.validate(), InvalidInput);

    c = preset(Scenario::Fig3a);
    c.max_dim = 1000;
    CHECK_THROWS_AS(c.validate(), InvalidInput);

    c = preset(Scenario::Fig3b);
    c.sweep.values = {8, 12.5};
    CHECK_THROWS_AS(c.validate(), InvalidInput);

    c = preset(Scenario::Fig3a);
    c.name = "../escape";
    CHECK_THROWS_AS(c.validate(), InvalidInput);

    CHECK_THROWS_AS(config_from_json(Json::parse(R"({"scenario": "fig3a", "sweeep": {}})")), InvalidInput);
    CHECK_THROWS_AS(config_from_json(Json::parse(R"({"scenario": "fig9"})")), InvalidInput);
    CHECK_THROWS_AS(config_from_json(Json::parse(R"({"model": {"Lx": "big"}})")), InvalidInput);
}

TEST_CASE("config document round-trips") {
    for (Scenario s : {Scenario::Fig2a, Scenario::Fig2b, Scenario::Fig3b, Scenario::Fig4}) {
        const ExperimentConfig c = preset(s);
        const Json j = to_json(c);
        CHECK(to_json(config_from_json(j)) == j);
        CHECK(config_from_json(j).sweep.grid() == c.sweep.grid());
    }
    // Partial documents layer over the preset.
    const ExperimentConfig c = config_from_json(Json::parse(R"({"scenario": "fig4", "model": {"Lx": 6, "Ly": 6}})"));
    CHECK(c.Lx == 6);
    CHECK(c.y.gamma == 10.5);
    CHECK(c.sweep.points == 51);
}

TEST_CASE("YAML configs map onto the same document") {
    TempDir tmp;
    const fs::path p = tmp.path / "cfg.yaml";
    std::ofstream(p) << "scenario: fig2b\n"
                        "name: \"dis-yaml\"\n"
                        "model:\n"
                        "  Lx: 8\n"
                        "  Ly: 8\n"
                        "sweep: {axis: disorder, values: [0, 0.1, 0.4]}\n"
                        "disorder:\n"
                        "  kind: random\n"
                        "  realizations: 4\n"
                        "seed: 18446744073709551615\n"
                        "zero_modes: {policy: clustering}\n"
                        "outputs: {directory: out, formats: [csv, svg], plots: [wipr]}\n";
    const ExperimentConfig c = load_config(p.string());
    CHECK(c.name == "dis-yaml");
    CHECK(c.Lx == 8);
    CHECK(c.sweep.grid() == std::vector<double>{0.0, 0.1, 0.4});
    CHECK(c.disorder->kind == DisorderKind::FullyRandom);
    CHECK(c.disorder->realizations == 4);
    CHECK(c.seed == 18446744073709551615ULL);
    CHECK(c.zero_mode_policy.kind == ZeroModePolicy::Kind::GapClustering);
    CHECK(c.outputs.svg);
    CHECK_FALSE(c.outputs.json);
    CHECK(c.x.v == -1.5);

    std::ofstream(tmp.path / "bad.yaml") << "model: [1, 2\n";
    CHECK_THROWS_AS(load_config((tmp.path / "bad.yaml").string()), InvalidInput);
    CHECK_THROWS_AS(load_config((tmp.path / "missing.yaml").string()), IoError);
}

TEST_CASE("disorder seeds follow the realization, not the sweep point") {
    const ExperimentConfig c = preset(Scenario::Fig2b);
    const Model2D a = c.model_at(0.1, 3);
    const Model2D b = c.model_at(0.3, 3);
    REQUIRE(a.disorder);
    REQUIRE(b.disorder);
    CHECK(a.disorder->seed == b.disorder->seed);
    CHECK(a.disorder->seed == child_seed(c.seed, 3));
    CHECK(a.disorder->strength == 0.1);
    CHECK_FALSE(c.model_at(0.0, 3).disorder.has_value());
    CHECK(c.model_at(0.1, 2).disorder->seed != a.disorder->seed);
}

TEST_CASE("empty sweep gives no records and succeeds") {
    TempDir tmp;
    ExperimentConfig c = small_dense(tmp.path);
    c.sweep.points = 0;
    const RunResult r = run_experiment(c);
    CHECK(r.records.empty());
    CHECK(r.complete);
    CHECK(exit_code_for(r.records) == kExitOk);
    CHECK_THROWS_AS(emit_outputs(r.records, c), InvalidInput);
    emit_outputs(r.records, c, true);
    CHECK(count_lines(read_file((tmp.path / "small.csv").string())) == 1);
}

TEST_CASE("records hold exactly the requested diagnostics") {
    TempDir tmp;
    ExperimentConfig c = small_dense(tmp.path);
    const RunResult r = run_experiment(c, {false, {}, {}});
    REQUIRE(r.records.size() == 5);
    for (const auto& rec : r.records) {
        CHECK(rec.status == "ok");
        CHECK(rec.min_s.has_value());
        CHECK(rec.zero_modes.has_value());
        CHECK(rec.v_realspace.has_value());
        CHECK(rec.v_2d.has_value());
        CHECK_FALSE(rec.min_abs_e.has_value());
        CHECK_FALSE(rec.wipr.has_value());
        CHECK_FALSE(rec.min_s_minus.has_value());
        CHECK_FALSE(rec.zero_modes_plus.has_value());
    }
    // Deep in each phase the real-space and non-Bloch invariants agree.
    CHECK(std::lround(*r.records.front().v_realspace) == 0);
    CHECK(*r.records.front().v_2d == 0);
    CHECK(std::lround(*r.records.back().v_realspace) == 1);
    CHECK(*r.records.back().v_2d == 1);
}

TEST_CASE("undefined invariants are null with a partial status") {
    ExperimentConfig c = preset(Scenario::Custom);
    c.x = {1.0, 1.0, 0.0};  // Hermitian gap closing at k = pi
    c.y = {0.2, 1.0, 0.0};
    c.sweep = {SweepAxis::Vy, 1.0, 1.0, 1, {}};
    c.diagnostics = {Diagnostic::NonBloch, Diagnostic::MinAbsE};
    const SweepRecord r = evaluate_task(c, 0);
    CHECK_FALSE(r.v_nonbloch_x.has_value());
    CHECK_FALSE(r.v_2d.has_value());
    REQUIRE(r.v_nonbloch_y.has_value());
    CHECK(*r.v_nonbloch_y == 1);
    CHECK(r.min_abs_e.has_value());
    CHECK(r.status == "partial: undefined v_nonbloch_x");
    CHECK_FALSE(r.failed());

    SweepRecord bad;
    bad.status = "error: svd: no convergence";
    CHECK(exit_code_for({r, bad}) == kExitNumerical);
}

TEST_CASE("Floquet sweep records both probes") {
    ExperimentConfig c = preset(Scenario::Fig4);
    c.Lx = c.Ly = 3;
    c.sweep = {SweepAxis::Vx, 0.5, 1.8, 2, {}};
    const RunResult r = run_experiment(c, {false, {}, {}});
    REQUIRE(r.records.size() == 2);
    for (const auto& rec : r.records) {
        CHECK(rec.min_s_minus.has_value());
        CHECK(rec.min_s_plus.has_value());
        CHECK(rec.v_minus.has_value());
        CHECK(rec.v_plus.has_value());
        CHECK(rec.zero_modes_minus.has_value());
        CHECK_FALSE(rec.min_s.has_value());
        CHECK_FALSE(rec.zero_modes.has_value());
    }
}

TEST_CASE("identical config and seeds give identical CSV bytes") {
    TempDir tmp;
    ExperimentConfig c = small_disordered(tmp.path);
    const std::string a = records_to_csv(run_experiment(c, {false, {}, {}}).records);
    c.threads = 3;
    const std::string b = records_to_csv(run_experiment(c, {false, {}, {}}).records);
    CHECK(a == b);
    CHECK(count_lines(a) == 1 + 9);
    c.seed += 1;
    CHECK(records_to_csv(run_experiment(c, {false, {}, {}}).records) != a);
}

TEST_CASE("an interrupted sweep resumes to the same CSV") {
    TempDir tmp;
    ExperimentConfig c = small_disordered(tmp.path);
    const std::string reference = records_to_csv(run_experiment(c, {false, {}, {}}).records);

    RunOptions stop;
    stop.stop_after = 4;
    const RunResult first = run_experiment(c, stop);
    CHECK_FALSE(first.complete);
    CHECK(first.records.size() == 4);
    REQUIRE(fs::exists(progress_path(c)));

    // A kill mid-write leaves a torn last line.
    std::ofstream(progress_path(c), std::ios::app) << "{\"index\": 7, \"wall_";

    stop.stop_after = 2;
    const RunResult second = run_experiment(c, stop);
    CHECK(second.resumed == 4);
    CHECK(second.records.size() == 6);

    c.threads = 2;  // schedule changes do not invalidate progress
    const RunResult last = run_experiment(c);
    CHECK(last.resumed == 6);
    CHECK(last.complete);
    CHECK(records_to_csv(last.records) == reference);

    emit_outputs(last.records, c);
    CHECK_FALSE(fs::exists(progress_path(c)));
    CHECK(read_file((tmp.path / "dis.csv").string()) == reference);
}

TEST_CASE("progress from a different config is discarded") {
    TempDir tmp;
    ExperimentConfig c = small_disordered(tmp.path);
    RunOptions stop;
    stop.stop_after = 3;
    run_experiment(c, stop);
    c.seed += 7;
    const RunResult r = run_experiment(c);
    CHECK(r.resumed == 0);
    CHECK(records_to_csv(r.records) == records_to_csv(run_experiment(c, {false, {}, {}}).records));
}

TEST_CASE("manifest round-trip reproduces the CSV byte for byte") {
    TempDir tmp;
    ExperimentConfig c = small_dense(tmp.path / "first");
    c.outputs.svg = true;
    emit_outputs(run_experiment(c).records, c);
    const fs::path manifest = tmp.path / "first" / "small.manifest.json";
    REQUIRE(fs::exists(manifest));
    REQUIRE(fs::exists(tmp.path / "first" / "small.timings.csv"));
    REQUIRE(fs::exists(tmp.path / "first" / "small_v_realspace.svg"));

    const Json m = Json::parse(read_file(manifest.string()));
    CHECK(m.at("software").at("version") == kVersion);
    CHECK(m.at("columns").size() == columns().size());
    CHECK(m.at("seeds").at("base") == c.seed);
    CHECK(m.at("scale").at("reference").at("Lx") == 40);
    CHECK(m.at("scale").at("run").at("Lx") == 4);
    CHECK(m.at("summary").at("status").at("ok") == 5);

    ExperimentConfig again = load_config(manifest.string());
    again.outputs.directory = (tmp.path / "second").string();
    emit_outputs(run_experiment(again).records, again);
    CHECK(read_file((tmp.path / "second" / "small.csv").string()) ==
          read_file((tmp.path / "first" / "small.csv").string()));
}

TEST_CASE("size sweeps report the ln Min[s] fit in the manifest") {
    ExperimentConfig c = preset(Scenario::Fig3b);
    c.sweep.values = {4, 6, 8, 10};
    const RunResult r = run_experiment(c, {false, {}, {}});
    const Json s = summarize(r.records, c);
    CHECK(s.at("ln_min_s_vs_size").at("slope").get<double>() < 0.0);
    CHECK(s.at("ln_min_s_vs_size").at("r2").get<double>() > 0.98);
    CHECK(s.at("plateaus_below_1e-3").at("min_s").size() == 1);
}

TEST_CASE("plateau extraction") {
    std::vector<SweepRecord> recs(6);
    const double vals[] = {1.0, 1e-5, 1e-6, 0.5, 1e-9, 1e-9};
    for (int i = 0; i < 6; ++i) {
        recs[i].sweep_value = i;
        recs[i].min_s = vals[i];
    }
    const auto p = plateaus(recs, "min_s", 1e-3);
    REQUIRE(p.size() == 2);
    CHECK(p[0] == std::pair<double, double>{1.0, 2.0});
    CHECK(p[1] == std::pair<double, double>{4.0, 5.0});
}

TEST_CASE("publishing is atomic") {
    TempDir tmp;
    ExperimentConfig c = small_dense(tmp.path);
    std::vector<SweepRecord> recs(1);

    // Target occupied by a directory: the rename fails, the .tmp stays.
    fs::create_directories(tmp.path / "small.csv");
    CHECK_THROWS_AS(emit_outputs(recs, c), IoError);
    CHECK(fs::exists(tmp.path / "small.csv.tmp"));
    CHECK(fs::is_directory(tmp.path / "small.csv"));

    // Output directory path is a regular file.
    std::ofstream(tmp.path / "file") << "x";
    c.outputs.directory = (tmp.path / "file").string();
    CHECK_THROWS_AS(emit_outputs(recs, c), IoError);
}

TEST_CASE("compare_to_reference tolerances") {
    std::vector<SweepRecord> ref(3);
    for (int i = 0; i < 3; ++i) {
        ref[i].sweep_value = 0.5 * i;
        ref[i].min_s = 1e-3 * (i + 1);
        ref[i].kappa = 2.93e9;
        ref[i].zero_modes = 2;
    }
    const std::string ref_csv = records_to_csv(ref);

    const CompareReport same = compare_to_reference(ref, ref_csv);
    CHECK(same.passed());
    for (const auto& c : same.columns) CHECK(c.max_deviation == 0.0);

    auto cand = ref;
    cand[1].min_s = *ref[1].min_s * (1.0 + 5e-9);
    cand[2].kappa = 2.93e10 * 0.9;
    CHECK(compare_to_reference(cand, ref_csv).passed());

    cand[1].min_s = *ref[1].min_s * (1.0 + 1e-6);
    const CompareReport loose = compare_to_reference(cand, ref_csv);
    CHECK_FALSE(loose.passed());
    for (const auto& c : loose.columns) CHECK(c.passed() == (c.name != "min_s"));

    cand = ref;
    cand[0].kappa = 2.93e9 * 20;
    CHECK_FALSE(compare_to_reference(cand, ref_csv).passed());

    cand = ref;
    cand[2].zero_modes = 4;
    CHECK_FALSE(compare_to_reference(cand, ref_csv).passed());

    cand = ref;
    cand[0].min_s.reset();  // null against a value
    CHECK_FALSE(compare_to_reference(cand, ref_csv).passed());

    cand = ref;
    cand.pop_back();
    CHECK_FALSE(compare_to_reference(cand, ref_csv).passed());

    CHECK_THROWS_AS(compare_to_reference(ref, std::string("x,y\r\n1,2\r\n")), InvalidInput);
    CHECK(format_report(same).find("result: pass") != std::string::npos);
}

TEST_CASE("SVG plots") {
    std::vector<SweepRecord> recs(4);
    for (int i = 0; i < 4; ++i) {
        recs[i].sweep_value = i;
        recs[i].min_s = i == 2 ? 0.0 : std::pow(10.0, -3 * i);
    }
    const std::string log = svg_plot(recs, "min_s", true);
    CHECK(log.rfind("<svg", 0) == 0);
    CHECK(log.find("<polyline") != std::string::npos);
    CHECK(log.find("(log10)") != std::string::npos);
    CHECK(log.find("1e-9") != std::string::npos);
    // The zero is dropped on a log axis: three markers.
    std::size_t circles = 0;
    for (std::size_t p = log.find("<circle"); p != std::string::npos; p = log.find("<circle", p + 1)) ++circles;
    CHECK(circles == 3);
    CHECK(svg_plot(recs, "min_s", false).find("(log10)") == std::string::npos);
    CHECK(svg_plot({}, "wipr", false).find("no data") != std::string::npos);
    CHECK_THROWS_AS(svg_plot(recs, "status", false), InvalidInput);
}

TEST_CASE("peak memory estimate scales with the dense dimension") {
    const ExperimentConfig f3 = preset(Scenario::Fig3c);
    const std::size_t b = estimate_peak_bytes(f3);
    CHECK(b > 7u * 16u * 1600u * 1600u - 1);
    CHECK(b < 2'000'000'000u);
    CHECK(estimate_peak_bytes(preset(Scenario::Fig2a)) < 100'000'000u);
}
