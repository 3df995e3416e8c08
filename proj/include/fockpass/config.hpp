// config.hpp: JSON run configuration. Every block is optional except the
// schema tag; unknown keys are rejected.

#pragma once

#include "fockpass/dynamics.hpp"
#include "fockpass/model.hpp"
#include "fockpass/spectra.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace fockpass {

inline constexpr int kConfigSchemaVersion = 1;

struct SurfaceSettings {
    AxisRange g{0.0, 3.0, 61};
    AxisRange omega{0.0, 3.0, 61};
};

struct IntersectionSettings {
    double g_field_max{2.5};
    double omega_field_max{4.0};
};

struct ScanSettings {
    AxisRange g{0.0, 2.5, 32};
    AxisRange omega{0.0, 4.0, 32};
    int target_n{1};
};

struct DesignSettings {
    int target_n{1};
    bool validate{true};
};

struct OracleSettings {
    double omega_M{200.0};
    std::vector<double> theta_0{0.0, 1.5707963267948966, 3.141592653589793};
    int steps_per_period{20};
};

// SI inputs for realize(); omega_C and delta in rad / s set the unit of
// frequency (delta) and the cavity frequency entering the vacuum field.
struct PhysicalSettings {
    PhysicalRealization realization;
    double omega_C{};
    double delta{};
};

struct RunConfig {
    int schema{kConfigSchemaVersion};
    ModelParams model{ModelParams::reference()};
    std::optional<PulseSchedule> schedule;
    BasisIndex initial{Atom::lower, 0};
    PropagationOptions propagation{};
    SurfaceSettings surfaces{};
    IntersectionSettings intersections{};
    ScanSettings scan{};
    DesignSettings design{};
    OracleSettings oracle{};
    std::optional<PhysicalSettings> physical;
    std::optional<RealizedPulses> realized;  // filled when `physical` is present
};

// Applies `key.path=value` to a JSON document. The value is parsed as JSON
// when possible, otherwise taken as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

// Parses and validates; throws ConfigError with the offending key.
RunConfig parse_config(const nlohmann::json& doc);

BasisIndex basis_from_label(const std::string& label);

}  // namespace fockpass
