#pragma once

// Experiment configuration: scenario presets, validation, and the nested
// key-value document form (JSON, or YAML mapped onto the same tree).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "json.hpp"
#include "nhtop/diagnostics.hpp"
#include "nhtop/floquet.hpp"
#include "nhtop/model.hpp"
#include "nhtop/rng.hpp"

namespace nhtop {

using Json = nlohmann::ordered_json;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Scenario { Fig2a, Fig2b, Fig3a, Fig3b, Fig3c, Fig4, Custom };
enum class SweepAxis { Vx, Vy, Disorder, Size };
enum class Diagnostic {
    MinAbsE,          // separable eigenvalues
    Wipr,             // separable eigenvectors
    Kappa,            // separable eigenvectors
    NonBloch,         // v_nonbloch_x, v_nonbloch_y, v_2d
    MinS,             // dense singular values
    ZeroModes,        // dense singular values
    RealSpaceWinding, // dense SVD with vectors
    FloquetMinS,      // Min[s-], Min[s+] and their zero-mode counts
    FloquetWinding,   // V-, V+
};

namespace detail {

template <class E>
struct NameTable {
    E value;
    std::string_view name;
};

inline constexpr std::array<NameTable<Scenario>, 7> kScenarioNames{{
    {Scenario::Fig2a, "fig2a"}, {Scenario::Fig2b, "fig2b"}, {Scenario::Fig3a, "fig3a"},
    {Scenario::Fig3b, "fig3b"}, {Scenario::Fig3c, "fig3c"}, {Scenario::Fig4, "fig4"},
    {Scenario::Custom, "custom"},
}};

inline constexpr std::array<NameTable<SweepAxis>, 4> kAxisNames{{
    {SweepAxis::Vx, "vx"}, {SweepAxis::Vy, "vy"}, {SweepAxis::Disorder, "disorder"}, {SweepAxis::Size, "size"},
}};

inline constexpr std::array<NameTable<Diagnostic>, 9> kDiagnosticNames{{
    {Diagnostic::MinAbsE, "min_abs_e"},
    {Diagnostic::Wipr, "wipr"},
    {Diagnostic::Kappa, "kappa"},
    {Diagnostic::NonBloch, "nonbloch"},
    {Diagnostic::MinS, "min_s"},
    {Diagnostic::ZeroModes, "zero_modes"},
    {Diagnostic::RealSpaceWinding, "v_realspace"},
    {Diagnostic::FloquetMinS, "floquet_min_s"},
    {Diagnostic::FloquetWinding, "floquet_winding"},
}};

inline constexpr std::array<NameTable<DisorderKind>, 2> kDisorderNames{{
    {DisorderKind::ChiralPreserving, "chiral"}, {DisorderKind::FullyRandom, "random"},
}};

inline constexpr std::array<NameTable<DisorderRange>, 2> kRangeNames{{
    {DisorderRange::Dense, "dense"}, {DisorderRange::NearestNeighbor, "nearest"},
}};

inline constexpr std::array<NameTable<ZeroModePolicy::Kind>, 4> kPolicyNames{{
    {ZeroModePolicy::Kind::Default, "default"},
    {ZeroModePolicy::Kind::Absolute, "absolute"},
    {ZeroModePolicy::Kind::Relative, "relative"},
    {ZeroModePolicy::Kind::GapClustering, "clustering"},
}};

inline constexpr std::array<NameTable<WiprCoordinates>, 2> kCoordNames{{
    {WiprCoordinates::Site, "site"}, {WiprCoordinates::Cell, "cell"},
}};

template <class E, std::size_t N>
std::string name_of(const std::array<NameTable<E>, N>& table, E v) {
    for (const auto& e : table) {
        if (e.value == v) return std::string(e.name);
    }
    throw InvalidInput("unnamed enum value");
}

template <class E, std::size_t N>
E parse_name(const std::array<NameTable<E>, N>& table, const std::string& s, const char* what) {
    for (const auto& e : table) {
        if (e.name == s) return e.value;
    }
    std::string allowed;
    for (const auto& e : table) allowed += (allowed.empty() ? "" : ", ") + std::string(e.name);
    throw InvalidInput(std::string(what) + ": unknown value '" + s + "' (allowed: " + allowed + ")");
}

}  // namespace detail

inline std::string to_string(Scenario s) { return detail::name_of(detail::kScenarioNames, s); }
inline std::string to_string(SweepAxis a) { return detail::name_of(detail::kAxisNames, a); }
inline std::string to_string(Diagnostic d) { return detail::name_of(detail::kDiagnosticNames, d); }
inline Scenario parse_scenario(const std::string& s) { return detail::parse_name(detail::kScenarioNames, s, "scenario"); }

struct SweepSpec {
    SweepAxis axis = SweepAxis::Vx;
    double start = 0.0;
    double stop = 0.0;
    int points = 0;
    std::vector<double> values;  // explicit list; overrides start/stop/points when nonempty

    /// Sweep values in order. Linear grid endpoints are exact.
    std::vector<double> grid() const {
        if (!values.empty()) return values;
        std::vector<double> g;
        g.reserve(static_cast<std::size_t>(std::max(points, 0)));
        for (int i = 0; i < points; ++i) {
            if (points == 1) {
                g.push_back(start);
            } else if (i == points - 1) {
                g.push_back(stop);
            } else {
                g.push_back(start + (stop - start) * static_cast<double>(i) / (points - 1));
            }
        }
        return g;
    }
};

struct DisorderPlan {
    DisorderKind kind = DisorderKind::ChiralPreserving;
    double strength = 0.0;
    int realizations = 1;
    DisorderRange range = DisorderRange::Dense;
    bool reciprocal = false;
};

/// Period and segment ratios; the first-stage amplitudes track the model's v.
struct DrivePlan {
    double T = 0.6;
    double T1 = 0.3;
    double qx = 0.2;
    double qy = 0.2;
};

struct OutputSpec {
    std::string directory = "out";
    bool csv = true;
    bool json = true;
    bool svg = false;
    std::vector<std::string> plots;  // column names
    bool log_scale = true;           // log axis for min_s-like columns
};

/// Full-size reference dimensions kept alongside the reduced run in the manifest.
struct ReferenceScale {
    int Lx = 0;
    int Ly = 0;
    std::string note;
};

struct ExperimentConfig {
    Scenario scenario = Scenario::Custom;
    std::string name = "custom";
    ChainParams x;
    ChainParams y;
    std::optional<double> vy_ratio;  // v_y = ratio * v_x whenever v_x is set by the sweep
    int Lx = 1;
    int Ly = 1;
    Eigen::Index max_dim = kDefaultMaxDim;
    SweepSpec sweep;
    std::optional<DisorderPlan> disorder;
    std::optional<DrivePlan> drive;
    std::vector<Diagnostic> diagnostics;
    ZeroModePolicy zero_mode_policy{};
    WiprCoordinates wipr_coordinates = WiprCoordinates::Site;
    std::uint64_t seed = 0;
    int threads = 1;
    OutputSpec outputs;
    ReferenceScale reference_scale;

    bool wants(Diagnostic d) const {
        return std::find(diagnostics.begin(), diagnostics.end(), d) != diagnostics.end();
    }
    bool wants_dense() const {
        return wants(Diagnostic::MinS) || wants(Diagnostic::ZeroModes) || wants(Diagnostic::RealSpaceWinding);
    }
    bool wants_floquet() const { return wants(Diagnostic::FloquetMinS) || wants(Diagnostic::FloquetWinding); }

    int realization_count() const { return disorder ? disorder->realizations : 1; }
    std::size_t task_count() const {
        return sweep.grid().size() * static_cast<std::size_t>(realization_count());
    }

    std::uint64_t realization_seed(int realization) const {
        return disorder ? child_seed(seed, static_cast<std::uint64_t>(realization)) : seed;
    }

    /// The model at one sweep value and disorder realization.
    Model2D model_at(double value, int realization) const {
        Model2D m;
        m.x = x;
        m.y = y;
        m.Lx = Lx;
        m.Ly = Ly;
        m.max_dim = max_dim;
        double strength = disorder ? disorder->strength : 0.0;
        switch (sweep.axis) {
            case SweepAxis::Vx:
                m.x.v = value;
                if (vy_ratio) m.y.v = *vy_ratio * value;
                break;
            case SweepAxis::Vy: m.y.v = value; break;
            case SweepAxis::Disorder: strength = value; break;
            case SweepAxis::Size: m.Lx = m.Ly = static_cast<int>(std::lround(value)); break;
        }
        if (disorder && strength != 0.0) {
            m.disorder = DisorderSpec{disorder->kind, strength, realization_seed(realization), disorder->range,
                                      disorder->reciprocal};
        }
        return m;
    }

    /// Largest dense dimension any task will build.
    Eigen::Index max_task_dimension() const {
        Eigen::Index d = Eigen::Index{4} * Lx * Ly;
        if (sweep.axis == SweepAxis::Size) {
            for (double v : sweep.grid()) {
                const auto L = static_cast<Eigen::Index>(std::lround(v));
                d = std::max(d, 4 * L * L);
            }
        }
        return d;
    }

    void validate() const {
        auto fail = [](const std::string& m) { throw InvalidInput("config: " + m); };
        if (name.empty() || !std::all_of(name.begin(), name.end(), [](char c) {
                return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
            })) {
            fail("name must be nonempty and use only [A-Za-z0-9_.-]");
        }
        x.validate();
        y.validate();
        if (Lx < 1 || Ly < 1) fail("Lx and Ly must be >= 1");
        if (max_dim < 4) fail("max_dim must be >= 4");
        if (vy_ratio && !std::isfinite(*vy_ratio)) fail("vy_ratio must be finite");
        if (sweep.points < 0) fail("sweep.points must be >= 0");
        if (!std::isfinite(sweep.start) || !std::isfinite(sweep.stop)) fail("sweep range must be finite");
        for (double v : sweep.grid()) {
            if (!std::isfinite(v)) fail("sweep values must be finite");
            if (sweep.axis == SweepAxis::Size && (v < 1.0 || v != std::round(v))) {
                fail("size sweep values must be positive integers");
            }
            if (sweep.axis == SweepAxis::Disorder && v < 0.0) fail("disorder strengths must be >= 0");
        }
        if (sweep.axis == SweepAxis::Disorder && !disorder) fail("a disorder sweep needs a disorder block");
        if (disorder) {
            if (disorder->realizations < 1) fail("disorder.realizations must be >= 1");
            if (!(disorder->strength >= 0.0) || !std::isfinite(disorder->strength)) {
                fail("disorder.strength must be finite and >= 0");
            }
        }
        if (diagnostics.empty()) fail("at least one diagnostic is required");
        if (wants_floquet()) {
            if (!drive) fail("Floquet diagnostics need a drive block");
            DriveProtocol p;
            p.T = drive->T;
            p.T1 = drive->T1;
            p.qx = drive->qx;
            p.qy = drive->qy;
            p.validate();
            if (disorder) fail("Floquet diagnostics do not take disorder");
        }
        if (threads < 1) fail("threads must be >= 1");
        if ((wants_dense() || wants_floquet()) && max_task_dimension() > max_dim) {
            fail("dense dimension " + std::to_string(max_task_dimension()) + " exceeds max_dim " +
                 std::to_string(max_dim));
        }
        if (!(zero_mode_policy.absolute > 0.0) || !(zero_mode_policy.gap_decades >= 0.0)) {
            fail("zero-mode thresholds must be positive");
        }
    }
};

// ---------------------------------------------------------------------------
// Presets. Physical parameters are fixed per scenario; sizes are reduced.
// ---------------------------------------------------------------------------

inline ExperimentConfig preset(Scenario s) {
    ExperimentConfig c;
    c.scenario = s;
    c.name = to_string(s);
    c.seed = 20240601;
    auto static_fig3 = [&c] {
        c.x = {1.0, 0.0, 1.5};
        c.y = {0.0, 0.0, 9.0};
        c.vy_ratio = 6.0;
    };
    switch (s) {
        case Scenario::Fig2a:
            static_fig3();
            c.Lx = c.Ly = 200;
            c.sweep = {SweepAxis::Vx, 0.0, 2.0, 101, {}};
            c.diagnostics = {Diagnostic::MinAbsE, Diagnostic::NonBloch};
            c.outputs.plots = {"min_abs_e", "v_2d"};
            c.reference_scale = {1000, 1000, "1000 x 1000 cells; run at 200 x 200 cells via the separable path"};
            break;
        case Scenario::Fig2b:
            c.x = {1.0, -1.5, 1.5};
            c.y = {0.0, -9.0, 9.0};
            c.Lx = c.Ly = 60;
            c.sweep = {SweepAxis::Disorder, 0.0, 0.4, 21, {}};
            c.disorder = DisorderPlan{DisorderKind::ChiralPreserving, 0.0, 10, DisorderRange::Dense, false};
            c.diagnostics = {Diagnostic::MinAbsE, Diagnostic::Wipr, Diagnostic::Kappa};
            c.outputs.plots = {"min_abs_e", "wipr"};
            c.reference_scale = {60, 60, "60 x 60, run at full size via the separable path"};
            break;
        case Scenario::Fig3a:
            static_fig3();
            c.Lx = c.Ly = 20;
            c.sweep = {SweepAxis::Vx, 0.0, 2.0, 41, {}};
            c.diagnostics = {Diagnostic::MinS, Diagnostic::ZeroModes};
            c.outputs.plots = {"min_s"};
            c.reference_scale = {40, 40, "Lx = Ly = 40; run at 20 x 20 (dense 1600-dim SVD)"};
            break;
        case Scenario::Fig3b:
            static_fig3();
            c.x.v = 1.5;
            c.y.v = 9.0;
            c.vy_ratio.reset();
            c.Lx = c.Ly = 8;
            c.sweep = {SweepAxis::Size, 0.0, 0.0, 0, {8, 12, 16, 20, 24, 28}};
            c.diagnostics = {Diagnostic::MinS, Diagnostic::ZeroModes};
            c.outputs.plots = {"min_s"};
            c.reference_scale = {0, 0, "sizes 8..28 step 4 at v_x = 1.5"};
            break;
        case Scenario::Fig3c:
            static_fig3();
            c.Lx = c.Ly = 20;
            c.sweep = {SweepAxis::Vx, 0.0, 2.0, 41, {}};
            c.diagnostics = {Diagnostic::MinS, Diagnostic::ZeroModes, Diagnostic::RealSpaceWinding,
                             Diagnostic::NonBloch};
            c.outputs.plots = {"v_realspace", "v_2d"};
            c.outputs.log_scale = false;
            c.reference_scale = {40, 40, "Lx = Ly = 40; run at 20 x 20 (dense 1600-dim SVD)"};
            break;
        case Scenario::Fig4:
            c.x = {1.0, 0.0, 1.5};
            c.y = {0.0, 0.0, 10.5};
            c.vy_ratio = 7.0;
            c.Lx = c.Ly = 20;
            c.drive = DrivePlan{0.6, 0.3, 0.2, 0.2};
            c.sweep = {SweepAxis::Vx, 0.0, 2.5, 51, {}};
            c.diagnostics = {Diagnostic::FloquetMinS, Diagnostic::FloquetWinding};
            c.outputs.plots = {"min_s_minus", "min_s_plus", "v_minus", "v_plus"};
            c.reference_scale = {40, 40, "Lx = Ly = 40; run at 20 x 20 (dense 1600-dim SVD of U -+ I)"};
            break;
        case Scenario::Custom:
            c.x = {1.0, 1.0, 0.0};
            c.y = {1.0, 1.0, 0.0};
            c.Lx = c.Ly = 4;
            c.diagnostics = {Diagnostic::MinS};
            break;
    }
    return c;
}

// ---------------------------------------------------------------------------
// Document form
// ---------------------------------------------------------------------------

inline Json to_json(const ExperimentConfig& c) {
    auto chain = [](const ChainParams& p) { return Json{{"w", p.w}, {"v", p.v}, {"gamma", p.gamma}}; };
    Json j;
    j["scenario"] = to_string(c.scenario);
    j["name"] = c.name;
    j["model"] = Json{{"x", chain(c.x)}, {"y", chain(c.y)}, {"Lx", c.Lx}, {"Ly", c.Ly}, {"max_dim", c.max_dim}};
    if (c.vy_ratio) j["model"]["vy_ratio"] = *c.vy_ratio;
    Json sweep{{"axis", to_string(c.sweep.axis)}};
    if (c.sweep.values.empty()) {
        sweep["start"] = c.sweep.start;
        sweep["stop"] = c.sweep.stop;
        sweep["points"] = c.sweep.points;
    } else {
        sweep["values"] = c.sweep.values;
    }
    j["sweep"] = sweep;
    if (c.disorder) {
        j["disorder"] = Json{{"kind", detail::name_of(detail::kDisorderNames, c.disorder->kind)},
                             {"strength", c.disorder->strength},
                             {"realizations", c.disorder->realizations},
                             {"range", detail::name_of(detail::kRangeNames, c.disorder->range)},
                             {"reciprocal", c.disorder->reciprocal}};
    }
    if (c.drive) {
        j["drive"] = Json{{"T", c.drive->T}, {"T1", c.drive->T1}, {"qx", c.drive->qx}, {"qy", c.drive->qy}};
    }
    Json diags = Json::array();
    for (Diagnostic d : c.diagnostics) diags.push_back(to_string(d));
    j["diagnostics"] = diags;
    j["zero_modes"] = Json{{"policy", detail::name_of(detail::kPolicyNames, c.zero_mode_policy.kind)},
                           {"absolute", c.zero_mode_policy.absolute},
                           {"relative_factor", c.zero_mode_policy.relative_factor},
                           {"gap_decades", c.zero_mode_policy.gap_decades},
                           {"cluster_ceiling", c.zero_mode_policy.cluster_ceiling}};
    j["wipr_coordinates"] = detail::name_of(detail::kCoordNames, c.wipr_coordinates);
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    Json formats = Json::array();
    if (c.outputs.csv) formats.push_back("csv");
    if (c.outputs.json) formats.push_back("json");
    if (c.outputs.svg) formats.push_back("svg");
    j["outputs"] = Json{{"directory", c.outputs.directory},
                        {"formats", formats},
                        {"plots", c.outputs.plots},
                        {"log_scale", c.outputs.log_scale}};
    j["reference_scale"] = Json{{"Lx", c.reference_scale.Lx}, {"Ly", c.reference_scale.Ly}, {"note", c.reference_scale.note}};
    return j;
}

namespace detail {

// Strict reader: every key must be consumed, so typos surface as errors.
class Reader {
public:
    Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw InvalidInput("config: '" + path_ + "' must be a mapping");
    }
    ~Reader() = default;

    bool has(const char* key) const { return j_.contains(key); }

    template <class T>
    void get(const char* key, T& out) {
        if (!j_.contains(key)) return;
        used_.push_back(key);
        try {
            out = j_.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw InvalidInput("config: '" + path_ + "." + key + "' has the wrong type");
        }
    }
    const Json& sub(const char* key) {
        used_.push_back(key);
        return j_.at(key);
    }
    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            if (std::find(used_.begin(), used_.end(), k) == used_.end()) {
                throw InvalidInput("config: unknown key '" + path_ + "." + k + "'");
            }
        }
    }

private:
    const Json& j_;
    std::string path_;
    std::vector<std::string> used_;
};

inline void read_chain(const Json& j, const std::string& path, ChainParams& p) {
    Reader r(j, path);
    r.get("w", p.w);
    r.get("v", p.v);
    r.get("gamma", p.gamma);
    r.finish();
}

}  // namespace detail

/// Builds a config from a document. A non-custom scenario starts from its
/// preset, so a document only needs the keys it changes.
inline ExperimentConfig config_from_json(const Json& doc) {
    const Json& j = doc.contains("config") && doc.contains("software") ? doc.at("config") : doc;
    detail::Reader r(j, "config");
    std::string scenario = "custom";
    r.get("scenario", scenario);
    ExperimentConfig c = preset(parse_scenario(scenario));
    r.get("name", c.name);
    if (r.has("model")) {
        detail::Reader m(r.sub("model"), "model");
        if (m.has("x")) detail::read_chain(m.sub("x"), "model.x", c.x);
        if (m.has("y")) detail::read_chain(m.sub("y"), "model.y", c.y);
        m.get("Lx", c.Lx);
        m.get("Ly", c.Ly);
        m.get("max_dim", c.max_dim);
        if (m.has("vy_ratio")) {
            if (m.sub("vy_ratio").is_null()) {
                c.vy_ratio.reset();
            } else {
                double ratio = 0.0;
                m.get("vy_ratio", ratio);
                c.vy_ratio = ratio;
            }
        }
        m.finish();
    }
    if (r.has("sweep")) {
        detail::Reader s(r.sub("sweep"), "sweep");
        std::string axis = to_string(c.sweep.axis);
        s.get("axis", axis);
        c.sweep.axis = detail::parse_name(detail::kAxisNames, axis, "sweep.axis");
        if (s.has("start") || s.has("stop") || s.has("points")) c.sweep.values.clear();
        s.get("start", c.sweep.start);
        s.get("stop", c.sweep.stop);
        s.get("points", c.sweep.points);
        s.get("values", c.sweep.values);
        s.finish();
    }
    if (r.has("disorder")) {
        const Json& dj = r.sub("disorder");
        if (dj.is_null()) {
            c.disorder.reset();
        } else {
            detail::Reader d(dj, "disorder");
            DisorderPlan p = c.disorder.value_or(DisorderPlan{});
            std::string kind = detail::name_of(detail::kDisorderNames, p.kind);
            std::string range = detail::name_of(detail::kRangeNames, p.range);
            d.get("kind", kind);
            d.get("strength", p.strength);
            d.get("realizations", p.realizations);
            d.get("range", range);
            d.get("reciprocal", p.reciprocal);
            d.finish();
            p.kind = detail::parse_name(detail::kDisorderNames, kind, "disorder.kind");
            p.range = detail::parse_name(detail::kRangeNames, range, "disorder.range");
            c.disorder = p;
        }
    }
    if (r.has("drive")) {
        const Json& dj = r.sub("drive");
        if (dj.is_null()) {
            c.drive.reset();
        } else {
            detail::Reader d(dj, "drive");
            DrivePlan p = c.drive.value_or(DrivePlan{});
            d.get("T", p.T);
            d.get("T1", p.T1);
            d.get("qx", p.qx);
            d.get("qy", p.qy);
            d.finish();
            c.drive = p;
        }
    }
    if (r.has("diagnostics")) {
        std::vector<std::string> names;
        r.get("diagnostics", names);
        c.diagnostics.clear();
        for (const auto& n : names) {
            c.diagnostics.push_back(detail::parse_name(detail::kDiagnosticNames, n, "diagnostics"));
        }
    }
    if (r.has("zero_modes")) {
        detail::Reader z(r.sub("zero_modes"), "zero_modes");
        std::string policy = detail::name_of(detail::kPolicyNames, c.zero_mode_policy.kind);
        z.get("policy", policy);
        z.get("absolute", c.zero_mode_policy.absolute);
        z.get("relative_factor", c.zero_mode_policy.relative_factor);
        z.get("gap_decades", c.zero_mode_policy.gap_decades);
        z.get("cluster_ceiling", c.zero_mode_policy.cluster_ceiling);
        z.finish();
        c.zero_mode_policy.kind = detail::parse_name(detail::kPolicyNames, policy, "zero_modes.policy");
    }
    if (r.has("wipr_coordinates")) {
        std::string coords;
        r.get("wipr_coordinates", coords);
        c.wipr_coordinates = detail::parse_name(detail::kCoordNames, coords, "wipr_coordinates");
    }
    r.get("seed", c.seed);
    r.get("threads", c.threads);
    if (r.has("outputs")) {
        detail::Reader o(r.sub("outputs"), "outputs");
        o.get("directory", c.outputs.directory);
        if (o.has("formats")) {
            std::vector<std::string> formats;
            o.get("formats", formats);
            c.outputs.csv = c.outputs.json = c.outputs.svg = false;
            for (const auto& f : formats) {
                if (f == "csv") c.outputs.csv = true;
                else if (f == "json") c.outputs.json = true;
                else if (f == "svg") c.outputs.svg = true;
                else throw InvalidInput("config: unknown output format '" + f + "'");
            }
        }
        o.get("plots", c.outputs.plots);
        o.get("log_scale", c.outputs.log_scale);
        o.finish();
    }
    if (r.has("reference_scale")) {
        detail::Reader p(r.sub("reference_scale"), "reference_scale");
        p.get("Lx", c.reference_scale.Lx);
        p.get("Ly", c.reference_scale.Ly);
        p.get("note", c.reference_scale.note);
        p.finish();
    }
    r.finish();
    return c;
}

namespace detail {

inline Json yaml_to_json(const YAML::Node& n) {
    switch (n.Type()) {
        case YAML::NodeType::Null:
        case YAML::NodeType::Undefined: return nullptr;
        case YAML::NodeType::Sequence: {
            Json a = Json::array();
            for (const auto& e : n) a.push_back(yaml_to_json(e));
            return a;
        }
        case YAML::NodeType::Map: {
            Json o = Json::object();
            for (const auto& kv : n) o[kv.first.as<std::string>()] = yaml_to_json(kv.second);
            return o;
        }
        case YAML::NodeType::Scalar: break;
    }
    const std::string s = n.Scalar();
    if (n.Tag() == "!") return s;  // quoted
    if (s == "true" || s == "false") return s == "true";
    if (s == "null" || s == "~") return nullptr;
    // Integers keep their full 64-bit range (seeds); anything else numeric is a double.
    if (!s.empty() && s.find_first_not_of("+-0123456789") == std::string::npos) {
        try {
            return s[0] == '-' ? Json(std::stoll(s)) : Json(std::stoull(s));
        } catch (const std::exception&) {
        }
    }
    std::istringstream in(s);
    in.imbue(std::locale::classic());
    double d = 0.0;
    if (in >> d && in.eof()) return d;
    return s;
}

}  // namespace detail

/// Reads a YAML or JSON config file (chosen by extension).
inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const bool is_json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
    try {
        if (is_json) return config_from_json(Json::parse(buf.str()));
        return config_from_json(detail::yaml_to_json(YAML::Load(buf.str())));
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput("config: " + std::string(e.what()));
    } catch (const YAML::Exception& e) {
        throw InvalidInput("config: " + std::string(e.what()));
    }
}

}  // namespace nhtop
