#include "fockpass/cli.hpp"

#include "fockpass/config.hpp"
#include "fockpass/errors.hpp"
#include "fockpass/explore.hpp"
#include "fockpass/io.hpp"
#include "fockpass/parallel.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

namespace fockpass::cli {

using nlohmann::json;

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

const std::vector<std::string> kCommands = {"surfaces", "intersections", "propagate", "predict",
                                            "scan",     "design",        "oracle-compare", "check"};

// Oracle agreement tolerances on final populations.
constexpr double kOracleAgreement = 0.02;
constexpr double kPhaseSpread = 0.01;

std::string hex64(std::uint64_t v) {
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << v;
    return s.str();
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

std::string compiler_id() {
#if defined(__clang__)
    return "clang " __clang_version__;
#elif defined(__GNUC__)
    return "gcc " __VERSION__;
#else
    return "unknown";
#endif
}

struct Context {
    RunConfig cfg;
    json doc;
    std::filesystem::path out_dir;
    int workers{1};
    bool display_offset{false};
    std::ostream& out;
    std::ostream& err;
    std::vector<std::string> outputs;
    json report;  // command-specific summary for the manifest

    void write(const std::string& name, const std::string& contents) {
        io::write_atomic(out_dir / name, contents);
        outputs.push_back(name);
    }
    void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }
    void warn(const std::string& msg) const { err << "warning: " << msg << '\n'; }

    const PulseSchedule& schedule(const char* command) const {
        if (!cfg.schedule)
            throw ConfigError(std::string(command) + " needs a 'schedule' block (or 'physical')");
        return *cfg.schedule;
    }
};

// --- commands ---------------------------------------------------------------

void cmd_surfaces(Context& c) {
    const auto grid = surface_grid(c.cfg.model, c.cfg.surfaces.g, c.cfg.surfaces.omega, false, c.workers);
    std::ostringstream s;
    io::write_surfaces_csv(s, grid, c.display_offset);
    c.write("surfaces.csv", s.str());
    c.report = {{"points", grid.g_axis.size() * grid.omega_axis.size()}, {"sheets", grid.sheet_count}};
}

void cmd_intersections(Context& c) {
    std::vector<IntersectionRecord> all;
    json counts;
    for (auto [plane, limit] : {std::pair{Plane::omega_zero, c.cfg.intersections.g_field_max},
                                std::pair{Plane::g_zero, c.cfg.intersections.omega_field_max}}) {
        auto found = locate_intersections(c.cfg.model, plane, limit);
        for (const auto& w : found.warnings) c.warn(w);
        counts[to_string(plane)] = found.records.size();
        all.insert(all.end(), found.records.begin(), found.records.end());
    }
    std::ostringstream s;
    io::write_intersections_csv(s, all);
    c.write("intersections.csv", s.str());
    const auto t = transfer_thresholds(c.cfg.model, c.cfg.intersections.g_field_max,
                                       c.cfg.intersections.omega_field_max);
    c.report = {{"counts", counts}, {"g_star", t.g_star}, {"omega_star", t.omega_star}};
    c.out << "G* thresholds:";
    for (double g : t.g_star) c.out << ' ' << io::format_double(g);
    c.out << "\nOmega* thresholds:";
    for (double o : t.omega_star) c.out << ' ' << io::format_double(o);
    c.out << '\n';
}

void cmd_propagate(Context& c) {
    const auto& schedule = c.schedule("propagate");
    const auto traj = propagate(c.cfg.model, schedule,
                                StateVector::basis(c.cfg.model.n_max, c.cfg.initial), c.cfg.propagation);
    std::ostringstream s;
    io::write_trajectory_csv(s, traj);
    c.write("trajectory.csv", s.str());

    json finals;
    const auto& pops = traj.final_populations();
    for (std::size_t i = 0; i < pops.size(); ++i)
        finals[BasisIndex::from_flat(static_cast<int>(i)).label()] = pops[i];
    c.report = {{"final_populations", finals},
                {"max_norm_drift", traj.max_norm_drift()},
                {"steps", {{"accepted", traj.stats.accepted}, {"rejected", traj.stats.rejected}}}};
    for (const auto& w : adiabaticity_metric(c.cfg.model, schedule).warnings) c.warn(w);

    auto best = std::max_element(pops.begin(), pops.end());
    c.out << "final dominant state "
          << BasisIndex::from_flat(static_cast<int>(best - pops.begin())).label() << " P = "
          << io::format_double(*best) << ", max norm drift " << traj.max_norm_drift() << '\n';
}

void cmd_predict(Context& c) {
    const auto& schedule = c.schedule("predict");
    const auto prediction = predict_transfer(c.cfg.model, std::abs(schedule.g_max), std::abs(schedule.omega_max));
    for (const auto& w : prediction.warnings) c.warn(w);
    json j = io::to_json(prediction);
    j["g_max"] = schedule.g_max;
    j["omega_max"] = schedule.omega_max;
    c.write_json("prediction.json", j);
    c.report = j;
    c.out << "predicted photon number n = " << prediction.n << '\n';
}

void cmd_scan(Context& c) {
    const auto& sc = c.cfg.scan;
    PulseSchedule tmpl = c.cfg.schedule ? *c.cfg.schedule
                                        : PulseSchedule::with_default_window(0.0, 0.0, 66.0, 57.0);
    const auto scan = robustness_scan(c.cfg.model, tmpl, sc.g, sc.omega, sc.target_n, c.workers,
                                      c.cfg.propagation);
    for (const auto& f : scan.failures)
        c.warn("scan point (" + std::to_string(f.ig) + ", " + std::to_string(f.io) + ") failed: " + f.message);
    std::ostringstream s;
    io::write_scan_csv(s, scan);
    c.write("scan.csv", s.str());
    json summary = io::scan_summary(scan);
    if (scan.plateau.found) {
        PulseSchedule at = tmpl;
        at.g_max = scan.plateau.center_g;
        at.omega_max = scan.plateau.center_omega;
        const auto r = propagate(c.cfg.model, at, StateVector::basis(c.cfg.model.n_max, c.cfg.initial),
                                 c.cfg.propagation);
        summary["center_population"] = r.final_population({Atom::lower, sc.target_n});
    }
    c.write_json("scan_summary.json", summary);
    c.report = {{"plateau", summary["plateau"]}, {"failures", scan.failures.size()}};
    if (scan.plateau.found)
        c.out << "plateau center g_max = " << io::format_double(scan.plateau.center_g)
              << ", omega_max = " << io::format_double(scan.plateau.center_omega)
              << ", P(-," << sc.target_n << ") = " << io::format_double(summary["center_population"].get<double>())
              << '\n';
    else
        c.out << "no grid point exceeds " << kPlateauLevel << '\n';
}

void cmd_design(Context& c) {
    const PulseSchedule base = c.cfg.schedule ? *c.cfg.schedule : PulseSchedule{};
    const auto design = design_pulses(c.cfg.model, c.cfg.design.target_n, base.t_int, base.tau,
                                      c.cfg.design.validate, c.cfg.propagation);
    for (const auto& w : design.rationale.adiabaticity.warnings) c.warn(w);
    const json j = io::to_json(design);
    c.write_json("design.json", j);
    c.report = j;
    c.out << "g_max = " << io::format_double(design.schedule.g_max)
          << ", omega_max = " << io::format_double(design.schedule.omega_max);
    if (design.rationale.validation_population)
        c.out << ", P = " << io::format_double(*design.rationale.validation_population);
    c.out << '\n';
}

void cmd_oracle(Context& c) {
    const auto& schedule = c.schedule("oracle-compare");
    const auto& model = c.cfg.model;
    const auto initial = StateVector::basis(model.n_max, c.cfg.initial);
    const auto effective = propagate(model, schedule, initial, c.cfg.propagation);

    const auto& thetas = c.cfg.oracle.theta_0;
    std::vector<TrajectoryRecord> runs(thetas.size());
    SemiclassicalOptions opts{c.cfg.propagation, c.cfg.oracle.steps_per_period};
    parallel_for(thetas.size(), c.workers, [&](std::size_t k) {
        const auto sc = SemiclassicalParams::from_model(model, c.cfg.oracle.omega_M, thetas[k]);
        runs[k] = propagate_semiclassical(sc, model, schedule, initial, opts);
    });

    const auto& pe = effective.final_populations();
    double agreement = 0.0, spread = 0.0;
    json per_theta = json::array();
    for (std::size_t k = 0; k < runs.size(); ++k) {
        const auto& ps = runs[k].final_populations();
        double diff = 0.0;
        for (std::size_t i = 0; i < pe.size(); ++i) {
            diff = std::max(diff, std::abs(ps[i] - pe[i]));
            spread = std::max(spread, std::abs(ps[i] - runs.front().final_populations()[i]));
        }
        agreement = std::max(agreement, diff);
        for (const auto& w : runs[k].warnings) c.warn(w);
        per_theta.push_back({{"theta_0", thetas[k]},
                             {"final_populations", ps},
                             {"max_difference_to_effective", diff},
                             {"max_norm_drift", runs[k].max_norm_drift()}});
    }
    const bool pass = agreement <= kOracleAgreement && spread <= kPhaseSpread;
    const json j = {{"omega_M", c.cfg.oracle.omega_M},
                    {"effective_final_populations", pe},
                    {"semiclassical", per_theta},
                    {"max_difference", agreement},
                    {"theta_spread", spread},
                    {"agreement_tolerance", kOracleAgreement},
                    {"theta_tolerance", kPhaseSpread},
                    {"pass", pass}};
    c.write_json("oracle_compare.json", j);
    c.report = {{"max_difference", agreement}, {"theta_spread", spread}, {"pass", pass}};
    c.out << "oracle max |dP| = " << agreement << ", theta_0 spread = " << spread << '\n';
    if (!pass) throw ValidationError("semiclassical and effective propagations disagree");
}

void cmd_check(Context& c) {
    const auto& model = c.cfg.model;
    // No schedule means no pulse: every product is zero.
    const PulseSchedule schedule = c.cfg.schedule ? *c.cfg.schedule : PulseSchedule{0, 0, 0, 0, 0, 0};
    json j;
    j["model"] = io::to_json(model);
    j["schedule"] = c.cfg.schedule ? io::to_json(schedule) : json(nullptr);
    const auto adiabatic = adiabaticity_metric(model, schedule);
    j["adiabaticity"] = io::to_json(adiabatic);
    std::vector<std::string> warnings = adiabatic.warnings;

    if (schedule.t_int > 0.0) {
        j["tail_ratio"] = schedule.tail_ratio();
        const auto sc = SemiclassicalParams::from_model(model, c.cfg.oracle.omega_M, 0.0);
        const double ratio = sc.rwa_ratio(schedule.g_max, schedule.omega_max);
        j["rwa"] = {{"ratio", ratio}, {"limit", kRwaRatioLimit}, {"pass", ratio < kRwaRatioLimit}};
        if (ratio >= kRwaRatioLimit) warnings.push_back("rotating-wave ratio " + std::to_string(ratio) + " too large");
        if (schedule.g_max != 0.0 || schedule.omega_max != 0.0) {
            const auto trunc = truncation_check(model, schedule, c.cfg.propagation);
            j["truncation"] = io::to_json(trunc);
            warnings.insert(warnings.end(), trunc.warnings.begin(), trunc.warnings.end());
        }
    } else {
        warnings.push_back("no pulse schedule: nothing to propagate");
    }
    j["warnings"] = warnings;
    for (const auto& w : warnings) c.warn(w);
    c.write_json("check.json", j);
    c.report = {{"adiabaticity", j["adiabaticity"]}, {"warnings", warnings.size()}};
    c.out << "|Delta_M| T_int = " << adiabatic.delta_m_product << ", |Delta_C| T_int = "
          << adiabatic.delta_c_product << ", G_max T_int = " << adiabatic.g_product << '\n';
}

const std::map<std::string, std::function<void(Context&)>>& dispatch() {
    static const std::map<std::string, std::function<void(Context&)>> table = {
        {"surfaces", cmd_surfaces}, {"intersections", cmd_intersections},
        {"propagate", cmd_propagate}, {"predict", cmd_predict},
        {"scan", cmd_scan}, {"design", cmd_design},
        {"oracle-compare", cmd_oracle}, {"check", cmd_check}};
    return table;
}

json load_document(const RunRequest& req) {
    json doc;
    if (req.config_path.empty()) {
        doc = {{"schema", kConfigSchemaVersion}};
    } else {
        std::ifstream in(req.config_path);
        if (!in) throw ConfigError("cannot read config " + req.config_path.string());
        doc = json::parse(in, nullptr, false);
        if (doc.is_discarded()) throw ConfigError("config " + req.config_path.string() + " is not valid JSON");
    }
    for (const auto& o : req.overrides) apply_override(doc, o);
    return doc;
}

}  // namespace

int run(const RunRequest& req, std::ostream& out, std::ostream& err) {
    const auto started = std::chrono::steady_clock::now();
    json manifest = {{"tool", "fockpass"},
                     {"version", kVersion},
                     {"command", req.command},
                     {"started_at", utc_now()},
                     {"config_path", req.config_path.string()},
                     {"overrides", req.overrides},
                     {"versions",
                      {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                     std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                     std::to_string(EIGEN_MINOR_VERSION)},
                       {"compiler", compiler_id()},
                       {"config_schema", kConfigSchemaVersion}}}};

    int code = ExitCode::ok;
    std::unique_ptr<Context> ctx;
    try {
        const auto it = dispatch().find(req.command);
        if (it == dispatch().end()) throw ConfigError("unknown command '" + req.command + "'");
        if (req.display_offset && req.command != "surfaces")
            throw ConfigError("--display-offset applies to 'surfaces' only");
        if (req.workers < 0) throw ConfigError("--workers must be positive");

        json doc = load_document(req);
        manifest["config_hash"] = "fnv1a64:" + hex64(fnv1a(doc.dump()));
        RunConfig cfg = parse_config(doc);

        ctx.reset(new Context{std::move(cfg), doc, req.out_dir,
                              req.workers > 0 ? req.workers : default_workers(), req.display_offset,
                              out, err, {}, {}});
        std::filesystem::create_directories(req.out_dir);
        manifest["workers"] = ctx->workers;
        manifest["normalized"] = {{"model", io::to_json(ctx->cfg.model)},
                                  {"schedule", ctx->cfg.schedule ? io::to_json(*ctx->cfg.schedule) : json(nullptr)}};
        if (ctx->cfg.physical) {
            const auto& ph = *ctx->cfg.physical;
            const auto& r = ph.realization;
            const auto& z = *ctx->cfg.realized;
            manifest["physical"] = {
                {"inputs", {{"dipole", r.dipole}, {"mode_volume", r.mode_volume},
                            {"maser_amplitude", r.maser_amplitude}, {"velocity", r.velocity},
                            {"waist_C", r.waist_C}, {"waist_M", r.waist_M}, {"d", r.d},
                            {"omega_C", ph.omega_C}, {"delta", ph.delta}}},
                {"realized_si", {{"g_max", z.g_max}, {"omega_max", z.omega_max}, {"t_int", z.t_int},
                                 {"t_int_maser", z.t_int_maser}, {"tau", z.tau}}}};
            if (r.waist_M != r.waist_C)
                ctx->warn("waist_M differs from waist_C; both envelopes use the cavity width");
        }

        it->second(*ctx);
        manifest["report"] = ctx->report;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        code = ExitCode::config_error;
    } catch (const ValidationError& e) {
        err << "validation failure: " << e.what() << '\n';
        code = ExitCode::validation_error;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        code = ExitCode::numerical_error;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "config error: " << e.what() << '\n';
        code = ExitCode::config_error;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        code = ExitCode::numerical_error;
    }
    if (ctx) manifest["report"] = ctx->report;

    manifest["outputs"] = ctx ? ctx->outputs : std::vector<std::string>{};
    manifest["exit_code"] = code;
    manifest["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    try {
        io::write_atomic(req.out_dir / "manifest.json", manifest.dump(2) + "\n");
    } catch (const std::exception& e) {
        err << "could not write manifest: " << e.what() << '\n';
        if (code == ExitCode::ok) code = ExitCode::config_error;
    }
    return code;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Photon-number state preparation by adiabatic passage through dressed-state intersections"};
    app.set_version_flag("--version", kVersion);
    RunRequest req;
    std::string config, out_dir = ".";
    app.add_option("command", req.command, "one of: surfaces intersections propagate predict scan design oracle-compare check")
        ->required()
        ->check(CLI::IsMember(kCommands));
    app.add_option("--config", config, "JSON run configuration");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--set", req.overrides, "dotted-path override key=value (repeatable)")->take_all();
    app.add_option("--workers", req.workers, "worker threads (default FOCKPASS_WORKERS or all cores)");
    app.add_flag("--display-offset", req.display_offset, "surfaces: add an energy + G column");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ExitCode::ok : ExitCode::config_error;
    }
    req.config_path = config;
    req.out_dir = out_dir;
    return run(req, out, err);
}

}  // namespace fockpass::cli
