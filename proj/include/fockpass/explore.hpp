// explore.hpp: peak-amplitude robustness scans and pulse design for a target
// photon number.

#pragma once

#include "fockpass/dynamics.hpp"
#include "fockpass/spectra.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fockpass {

inline constexpr double kPlateauLevel = 0.95;

// Largest axis-aligned block of grid points whose population exceeds
// kPlateauLevel. Extents count each grid point as one cell of the axis step.
struct Plateau {
    bool found{false};
    std::size_t ig_lo{}, ig_hi{}, io_lo{}, io_hi{};  // inclusive
    double g_lo{}, g_hi{}, omega_lo{}, omega_hi{};
    double g_extent{}, omega_extent{};
    double center_g{}, center_omega{};
};

struct ScanFailure {
    std::size_t ig{};
    std::size_t io{};
    std::string message;
};

struct ScanResult {
    std::vector<double> g_max_axis;
    std::vector<double> omega_max_axis;
    int target_n{};
    // [ig * omega_max_axis.size() + io]; NaN where propagation failed
    std::vector<double> population_map;
    std::vector<int> predictor_map;
    std::vector<ScanFailure> failures;
    Plateau plateau;

    double population(std::size_t ig, std::size_t io) const {
        return population_map[ig * omega_max_axis.size() + io];
    }
    int predicted(std::size_t ig, std::size_t io) const {
        return predictor_map[ig * omega_max_axis.size() + io];
    }
};

// Plateau of a population map laid out as in ScanResult.
Plateau extract_plateau(const std::vector<double>& g_axis, const std::vector<double>& omega_axis,
                        const std::vector<double>& population_map, double level = kPlateauLevel);

// One propagation from (-,0) per grid point, recording P(-, target_n). The
// schedule template fixes t_int, tau and the window; only its amplitudes are
// replaced. Failures at single points are recorded, not thrown.
ScanResult robustness_scan(const ModelParams& params, const PulseSchedule& schedule_template,
                           const AxisRange& g_range, const AxisRange& omega_range, int target_n,
                           int workers = 1, const PropagationOptions& options = {});

struct DesignRationale {
    int target_n{};
    double g_star_lower{};       // G*_n
    double g_star_upper{};       // G*_{n+1}
    double omega_star_target{};  // Omega*_n
    double omega_factor{1.5};
    int predicted_n{};
    AdiabaticityReport adiabaticity;
    std::optional<double> validation_population;  // P(-, n) from a propagation
};

struct PulseDesign {
    PulseSchedule schedule;
    DesignRationale rationale;
};

// g_max = sqrt(G*_n G*_{n+1}), omega_max = 1.5 Omega*_n. Rejects target_n < 1
// and truncations too small to resolve G*_{n+1}.
PulseDesign design_pulses(const ModelParams& params, int target_n, double t_int, double tau,
                          bool validate = true, const PropagationOptions& options = {});

}  // namespace fockpass
