// spectra.hpp: dressed eigenenergy surfaces of the effective Hamiltonian,
// their conical intersections on the two boundary planes, and the topological
// photon-transfer predictor built on them.

#pragma once

#include "fockpass/model.hpp"

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace fockpass {

struct EigenSystem {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXcd vectors; // orthonormal columns
};

EigenSystem eigen_decompose(const HermitianOperator& h);
// Validates Hermiticity first; throws ConfigError otherwise.
EigenSystem eigen_decompose(const Eigen::MatrixXcd& h);

// ---------------------------------------------------------------------------
// Surfaces
// ---------------------------------------------------------------------------

struct AxisRange {
    double lo{};
    double hi{};
    int points{2};

    std::vector<double> samples() const;  // uniform, inclusive of both ends
};

struct SurfaceGrid {
    std::vector<double> g_axis;
    std::vector<double> omega_axis;
    int sheet_count{};
    // sheets[(ig * omega_axis.size() + io) * sheet_count + s]
    std::vector<double> sheets;
    bool display_offset_applied{false};

    double value(std::size_t ig, std::size_t io, int sheet) const {
        return sheets[(ig * omega_axis.size() + io) * static_cast<std::size_t>(sheet_count) +
                      static_cast<std::size_t>(sheet)];
    }
};

// Eigenvalues on a (G, Omega) grid. With `display_offset` every stored value
// is eigenvalue + G (presentation only). Grid points are evaluated across
// `workers` threads; output is independent of the worker count.
SurfaceGrid surface_grid(const ModelParams& params, const AxisRange& g_range,
                         const AxisRange& omega_range, bool display_offset, int workers = 1);

// ---------------------------------------------------------------------------
// Conical intersections
// ---------------------------------------------------------------------------

enum class Plane { omega_zero, g_zero };

std::string to_string(Plane plane);
Plane plane_from_string(const std::string& name);

struct IntersectionRecord {
    Plane plane{Plane::omega_zero};
    double field_value{};               // coordinate along the non-zero axis
    std::pair<int, int> surface_pair{}; // (i, i + 1) in ascending sheet order
    double residual_gap{};
    double energy{};                    // mean of the two touching eigenvalues
};

struct IntersectionSearch {
    std::vector<IntersectionRecord> records;  // sorted by (field_value, lower sheet)
    std::vector<std::string> warnings;
};

inline constexpr double kDegeneracyGap = 1e-8;

// Scan-plus-bisection search for every adjacent-sheet degeneracy along the
// chosen axis in (0, field_max]. The gap is scanned at field_max / 2000; each
// local minimum is refined by bisection on the sign of the gap derivative
// (Hellmann–Feynman) to 1e-10 in the field. Minima that do not close are
// re-scanned with a finer step before being discarded.
IntersectionSearch locate_intersections(const ModelParams& params, Plane plane, double field_max);

// ---------------------------------------------------------------------------
// Transfer prediction
// ---------------------------------------------------------------------------

struct TransferThresholds {
    // Omega = 0 plane crossings of the sheet carrying |-,0> (eigenvalue 0),
    // ascending: G*_1, G*_2, ...
    std::vector<double> g_star;
    // G = 0 plane crossing positions, distinct and ascending: Omega*_1, ...
    std::vector<double> omega_star;
};

// Thresholds up to the given field limits, located numerically.
TransferThresholds transfer_thresholds(const ModelParams& params, double g_limit, double omega_limit);

struct TransferPrediction {
    int n{0};
    int g_crossings{0};     // G* thresholds strictly below g_max
    int omega_crossings{0}; // Omega* thresholds strictly below omega_max
    std::vector<std::string> warnings;
};

// Counterintuitive ordering assumed. The path crosses one Omega = 0 plane
// intersection per G*_k below g_max on the rise and must cross as many G = 0
// plane intersections on the descent, so n = min(#G* < g_max, #Omega* < omega_max).
TransferPrediction predict_transfer(const ModelParams& params, double g_max, double omega_max);
TransferPrediction predict_transfer(const TransferThresholds& thresholds, double g_max,
                                    double omega_max);

// ---------------------------------------------------------------------------
// Adiabatic-state continuation
// ---------------------------------------------------------------------------

struct TrackedPoint {
    int sheet{};       // ascending sheet index of the followed state
    double overlap{};  // |<v_prev | v_here>|
    double gap{};      // distance to the nearest other eigenvalue
};

// Follows the eigenvector starting on `start_sheet` along a sampled path of
// (G, Omega) points by maximal overlap.
std::vector<TrackedPoint> follow_adiabatic_state(const ModelParams& params,
                                                 const std::vector<std::pair<double, double>>& path,
                                                 int start_sheet);

}  // namespace fockpass
