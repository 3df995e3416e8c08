// dynamics.hpp: delayed Gaussian pulses and time propagation of the
// Schrödinger equation under the effective and semiclassical Hamiltonians.

#pragma once

#include "fockpass/integrator.hpp"
#include "fockpass/model.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace fockpass {

// ---------------------------------------------------------------------------
// Pulses
// ---------------------------------------------------------------------------

struct PulseSchedule {
    double g_max{};      // peak cavity Rabi frequency
    double omega_max{};  // peak maser Rabi frequency
    double t_int{66.0};  // FWHM of both envelopes
    double tau{57.0};    // delay of the maser peak after the cavity peak (t = 0)
    double t_start{};
    double t_end{};

    // Window [-2.5 t_int, tau + 2.5 t_int].
    static PulseSchedule with_default_window(double g_max, double omega_max, double t_int, double tau);

    double sigma() const;  // t_int / (2 sqrt(ln 2))

    // Largest envelope value at either window edge relative to its peak.
    double tail_ratio() const;

    // t_int > 0, finite fields, t_start < t_end, tail_ratio() < 1e-6.
    void validate() const;
};

inline constexpr double kWindowHalfWidths = 2.5;
inline constexpr double kTailTolerance = 1e-6;

struct Envelope {
    double g{};
    double omega{};
};

Envelope envelope(const PulseSchedule& schedule, double t);

// ---------------------------------------------------------------------------
// States and trajectories
// ---------------------------------------------------------------------------

class StateVector {
public:
    static constexpr double kNormTolerance = 1e-8;

    // Throws ConfigError if |norm - 1| > kNormTolerance.
    explicit StateVector(Eigen::VectorXcd amplitudes);

    static StateVector basis(int n_max, BasisIndex index);

    const Eigen::VectorXcd& amplitudes() const noexcept { return amplitudes_; }
    int dim() const noexcept { return static_cast<int>(amplitudes_.size()); }

private:
    Eigen::VectorXcd amplitudes_;
};

struct TrajectoryRecord {
    std::vector<double> times;
    // populations[sample][flat basis index]
    std::vector<std::vector<double>> populations;
    std::vector<double> norm_drift;
    Eigen::VectorXcd final_state;
    IntegratorStats stats;
    std::vector<std::string> warnings;

    const std::vector<double>& final_populations() const { return populations.back(); }
    double final_population(BasisIndex index) const {
        return populations.back()[static_cast<std::size_t>(index.flat())];
    }
    double max_norm_drift() const;
};

struct PropagationOptions {
    double rtol{1e-9};
    double atol{1e-11};
    int samples{2000};
    double norm_drift_limit{1e-6};
    double h_max{0.0};
};

// i dPhi/dt = H_eff(t) Phi on [t_start, t_end]. Samples are uniform in time.
// Throws NumericalError on step underflow or when the norm drift exceeds
// options.norm_drift_limit; the state is never renormalized.
TrajectoryRecord propagate(const ModelParams& params, const PulseSchedule& schedule,
                           const StateVector& initial, const PropagationOptions& options = {});

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

struct AdiabaticityReport {
    double delta_m_product{};  // |Delta_M| T_int
    double delta_c_product{};  // |Delta_C| T_int
    double g_product{};        // |G_max| T_int
    bool pass{};               // all three > 10
    std::vector<std::string> warnings;
};

inline constexpr double kAdiabaticityThreshold = 10.0;

AdiabaticityReport adiabaticity_metric(const ModelParams& params, const PulseSchedule& schedule);

// Unit conventions for quoting a Rabi frequency "in Hz".
enum class RabiConvention {
    angular_as_quoted,  // the quoted number is already the angular rate
    cyclic_times_2pi,   // quoted number is nu, angular rate is 2 pi nu
};

// G_max T_int for a Rabi frequency quoted in Hz and a time in seconds.
double physical_adiabaticity_product(double rabi_hz, double t_int_s, RabiConvention convention);

// ---------------------------------------------------------------------------
// Semiclassical oracle
// ---------------------------------------------------------------------------

struct SemiclassicalOptions {
    PropagationOptions propagation{};
    int steps_per_period{20};  // h_max = (2 pi / omega_M) / steps_per_period
};

// Propagates the atom ⊗ cavity-Fock state under the semiclassical
// Hamiltonian with explicit maser phase theta_0 + omega_M t. Populations are
// on the atom ⊗ photon basis, flat index 2n + atom as in the effective model.
// Throws ValidationError when the rotating-wave ratio reaches kRwaRatioLimit.
TrajectoryRecord propagate_semiclassical(const SemiclassicalParams& sc, const ModelParams& params,
                                         const PulseSchedule& schedule, const StateVector& initial,
                                         const SemiclassicalOptions& options = {});

// ---------------------------------------------------------------------------
// Truncation convergence
// ---------------------------------------------------------------------------

struct TruncationReport {
    int n_max{};
    int n_max_extended{};
    double max_population_difference{};
    double boundary_population{};  // max over samples of P(., n_max) in the smaller run
    bool converged{};
    int suggested_n_max{};
    std::vector<std::string> warnings;
};

inline constexpr double kTruncationTolerance = 1e-6;
inline constexpr double kBoundaryPopulationLimit = 1e-8;
inline constexpr int kTruncationExtension = 4;

// Repeats propagate from (-,0) with n_max and n_max + 4 and compares the
// final populations on the union of both bases.
TruncationReport truncation_check(const ModelParams& params, const PulseSchedule& schedule,
                                  const PropagationOptions& options = {});

}  // namespace fockpass
