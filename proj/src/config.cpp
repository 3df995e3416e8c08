#include "fockpass/config.hpp"

#include "fockpass/errors.hpp"

#include <cmath>
#include <initializer_list>
#include <set>

namespace fockpass {

using nlohmann::json;

namespace {

// Wraps one JSON object: rejects keys outside `allowed`, reads typed fields.
class Block {
public:
    Block(const json& j, std::string path, std::initializer_list<const char*> allowed)
        : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
        std::set<std::string> keys(allowed.begin(), allowed.end());
        for (const auto& item : j_.items())
            if (!keys.count(item.key())) throw ConfigError("unknown key '" + where(item.key()) + "'");
    }

    bool has(const char* key) const { return j_.contains(key); }
    const json& at(const char* key) const { return j_.at(key); }
    std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void read(const char* key, double& out) const {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
        out = v.get<double>();
        if (!std::isfinite(out)) throw ConfigError(where(key) + ": must be finite");
    }
    void read(const char* key, int& out) const {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
        out = v.get<int>();
    }
    void read(const char* key, bool& out) const {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_boolean()) throw ConfigError(where(key) + ": expected true or false");
        out = v.get<bool>();
    }
    void read(const char* key, std::string& out) const {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
        out = v.get<std::string>();
    }

private:
    const json& j_;
    std::string path_;
};

AxisRange read_range(const Block& parent, const char* key, AxisRange range) {
    if (!parent.has(key)) return range;
    Block b(parent.at(key), parent.where(key), {"lo", "hi", "points"});
    b.read("lo", range.lo);
    b.read("hi", range.hi);
    b.read("points", range.points);
    if (!(range.lo < range.hi) || range.points < 2)
        throw ConfigError(parent.where(key) + ": need lo < hi and points >= 2");
    return range;
}

template <class F>
void guard(const std::string& block, F&& check) {
    try {
        check();
    } catch (const ConfigError& e) {
        throw ConfigError(block + ": " + e.what());
    }
}

}  // namespace

BasisIndex basis_from_label(const std::string& label) {
    for (const auto& [prefix, atom] :
         {std::pair<std::string, Atom>{"minus_", Atom::lower}, {"plus_", Atom::upper}}) {
        if (label.rfind(prefix, 0) == 0) {
            const std::string digits = label.substr(prefix.size());
            if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) break;
            return {atom, std::stoi(digits)};
        }
    }
    throw ConfigError("basis label '" + label + "' is not of the form minus_<n> or plus_<n>");
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("--set expects key.path=value, got '" + assignment + "'");
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);

    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    if (!doc.is_object()) doc = json::object();
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot - start);
        if (key.empty()) throw ConfigError("--set: empty path segment in '" + path + "'");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        json& child = (*node)[key];
        if (child.is_null()) child = json::object();
        if (!child.is_object()) throw ConfigError("--set: '" + path.substr(0, dot) + "' is not an object");
        node = &child;
        start = dot + 1;
    }
}

RunConfig parse_config(const json& doc) {
    Block root(doc, "",
               {"schema", "model", "schedule", "propagation", "surfaces", "intersections", "scan",
                "design", "oracle", "physical"});
    RunConfig cfg;

    if (!root.has("schema")) throw ConfigError("missing 'schema' (expected " +
                                               std::to_string(kConfigSchemaVersion) + ")");
    root.read("schema", cfg.schema);
    if (cfg.schema != kConfigSchemaVersion)
        throw ConfigError("unsupported schema " + std::to_string(cfg.schema) + " (expected " +
                          std::to_string(kConfigSchemaVersion) + ")");

    if (root.has("model")) {
        Block b(root.at("model"), "model", {"delta", "delta_M", "delta_C", "n_max"});
        b.read("delta", cfg.model.delta);
        b.read("delta_M", cfg.model.delta_M);
        cfg.model.delta_C = cfg.model.delta_M - cfg.model.delta;
        b.read("delta_C", cfg.model.delta_C);
        b.read("n_max", cfg.model.n_max);
    }
    guard("model", [&] { cfg.model.validate(); });

    if (root.has("physical")) {
        Block b(root.at("physical"), "physical",
                {"dipole", "mode_volume", "maser_amplitude", "velocity", "waist_C", "waist_M", "d",
                 "omega_C", "delta"});
        PhysicalSettings ph;
        auto& r = ph.realization;
        b.read("dipole", r.dipole);
        b.read("mode_volume", r.mode_volume);
        b.read("maser_amplitude", r.maser_amplitude);
        b.read("velocity", r.velocity);
        b.read("waist_C", r.waist_C);
        r.waist_M = r.waist_C;
        b.read("waist_M", r.waist_M);
        b.read("d", r.d);
        b.read("omega_C", ph.omega_C);
        b.read("delta", ph.delta);
        if (!(ph.delta > 0.0)) throw ConfigError("physical.delta: must be positive (rad/s)");
        SemiclassicalParams freq;
        freq.omega_C = ph.omega_C;
        guard("physical", [&] { cfg.realized = realize(r, freq); });
        cfg.physical = ph;
    }

    if (root.has("schedule") || cfg.realized) {
        PulseSchedule s;
        bool has_start = false, has_end = false;
        if (root.has("schedule")) {
            Block b(root.at("schedule"), "schedule",
                    {"g_max", "omega_max", "t_int", "tau", "t_start", "t_end"});
            b.read("g_max", s.g_max);
            b.read("omega_max", s.omega_max);
            b.read("t_int", s.t_int);
            b.read("tau", s.tau);
            has_start = b.has("t_start");
            has_end = b.has("t_end");
            b.read("t_start", s.t_start);
            b.read("t_end", s.t_end);
        }
        if (cfg.realized) {
            // SI -> units of delta: frequencies divided by delta, times multiplied.
            const double unit = cfg.physical->delta;
            s.g_max = cfg.realized->g_max / unit;
            s.omega_max = cfg.realized->omega_max / unit;
            s.t_int = cfg.realized->t_int * unit;
            s.tau = cfg.realized->tau * unit;
        }
        const auto window = PulseSchedule::with_default_window(s.g_max, s.omega_max, s.t_int, s.tau);
        if (!has_start) s.t_start = window.t_start;
        if (!has_end) s.t_end = window.t_end;
        // t_int = 0 describes "no pulse" and is accepted for diagnostics only;
        // propagation validates again and rejects it.
        if (s.t_int < 0.0) throw ConfigError("schedule.t_int: must not be negative");
        if (s.t_int > 0.0) guard("schedule", [&] { s.validate(); });
        cfg.schedule = s;
    }

    if (root.has("propagation")) {
        Block b(root.at("propagation"), "propagation",
                {"rtol", "atol", "samples", "norm_drift_limit", "initial"});
        auto& p = cfg.propagation;
        b.read("rtol", p.rtol);
        b.read("atol", p.atol);
        b.read("samples", p.samples);
        b.read("norm_drift_limit", p.norm_drift_limit);
        std::string label;
        b.read("initial", label);
        if (!label.empty()) cfg.initial = basis_from_label(label);
        if (!(p.rtol > 0.0) || !(p.atol > 0.0)) throw ConfigError("propagation: tolerances must be positive");
        if (p.samples < 2) throw ConfigError("propagation.samples: must be at least 2");
        if (!(p.norm_drift_limit > 0.0)) throw ConfigError("propagation.norm_drift_limit: must be positive");
    }
    if (cfg.initial.n > cfg.model.n_max)
        throw ConfigError("propagation.initial: outside the truncated basis");

    if (root.has("surfaces")) {
        Block b(root.at("surfaces"), "surfaces", {"g", "omega"});
        cfg.surfaces.g = read_range(b, "g", cfg.surfaces.g);
        cfg.surfaces.omega = read_range(b, "omega", cfg.surfaces.omega);
    }

    if (root.has("intersections")) {
        Block b(root.at("intersections"), "intersections", {"g_field_max", "omega_field_max"});
        b.read("g_field_max", cfg.intersections.g_field_max);
        b.read("omega_field_max", cfg.intersections.omega_field_max);
        if (!(cfg.intersections.g_field_max > 0.0) || !(cfg.intersections.omega_field_max > 0.0))
            throw ConfigError("intersections: field limits must be positive");
    }

    if (root.has("scan")) {
        Block b(root.at("scan"), "scan", {"g", "omega", "target_n"});
        cfg.scan.g = read_range(b, "g", cfg.scan.g);
        cfg.scan.omega = read_range(b, "omega", cfg.scan.omega);
        b.read("target_n", cfg.scan.target_n);
    }
    if (cfg.scan.target_n < 0 || cfg.scan.target_n > cfg.model.n_max)
        throw ConfigError("scan.target_n: outside the truncated basis");

    if (root.has("design")) {
        Block b(root.at("design"), "design", {"target_n", "validate"});
        b.read("target_n", cfg.design.target_n);
        b.read("validate", cfg.design.validate);
    }
    if (cfg.design.target_n < 1) throw ConfigError("design.target_n: must be at least 1");

    if (root.has("oracle")) {
        Block b(root.at("oracle"), "oracle", {"omega_M", "theta_0", "steps_per_period"});
        b.read("omega_M", cfg.oracle.omega_M);
        b.read("steps_per_period", cfg.oracle.steps_per_period);
        if (b.has("theta_0")) {
            const auto& t = b.at("theta_0");
            if (!t.is_array() || t.empty()) throw ConfigError("oracle.theta_0: expected a non-empty array");
            cfg.oracle.theta_0.clear();
            for (const auto& v : t) {
                if (!v.is_number()) throw ConfigError("oracle.theta_0: expected numbers");
                cfg.oracle.theta_0.push_back(v.get<double>());
            }
        }
        if (!(cfg.oracle.omega_M > 0.0)) throw ConfigError("oracle.omega_M: must be positive");
        if (cfg.oracle.steps_per_period < 1) throw ConfigError("oracle.steps_per_period: must be positive");
    }
    return cfg;
}

}  // namespace fockpass
