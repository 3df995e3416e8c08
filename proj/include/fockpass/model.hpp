// model.hpp: dressed basis, model parameters and Hamiltonian builders for the
// atom–maser–cavity system.
//
// Everything here works in normalized units: energies in units of the
// cavity–maser frequency difference delta, times in units of 1/delta.
// The only place physical (SI) units appear is `realize`.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <string>

namespace fockpass {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

struct ModelParams {
    double delta{1.0};    // omega_C - omega_M (> 0), the global unit scale
    double delta_M{0.5};  // omega_0 - omega_M
    double delta_C{-0.5}; // omega_0 - omega_C
    int n_max{7};         // maximum exchanged-photon number kept in the basis

    // Throws ConfigError on violated invariants.
    void validate() const;

    int dim() const noexcept { return 2 * (n_max + 1); }

    // delta_C follows from delta_M - delta_C = delta.
    static ModelParams from_detuning(double delta, double delta_M, int n_max);

    // delta = 2 delta_M = -2 delta_C with delta = 1.
    static ModelParams reference(int n_max = 7);
};

enum class Atom { lower = 0, upper = 1 };

// |-, n> and |+, n> of the m = 0 family, flattened as 2n + atom.
struct BasisIndex {
    Atom atom{Atom::lower};
    int n{0};

    int flat() const noexcept { return 2 * n + static_cast<int>(atom); }
    static BasisIndex from_flat(int flat) noexcept {
        return {flat % 2 == 0 ? Atom::lower : Atom::upper, flat / 2};
    }
    // "minus_3", "plus_0", used for CSV headers and config keys.
    std::string label() const;

    friend bool operator==(const BasisIndex&, const BasisIndex&) = default;
};

// ---------------------------------------------------------------------------
// Hermitian operator
// ---------------------------------------------------------------------------

class HermitianOperator {
public:
    static constexpr double kHermitianTolerance = 1e-12;

    // Throws ConfigError when the matrix is not square or deviates from its
    // adjoint by more than kHermitianTolerance (absolute, per entry).
    explicit HermitianOperator(Eigen::MatrixXcd entries);

    int dim() const noexcept { return static_cast<int>(entries_.rows()); }
    const Eigen::MatrixXcd& matrix() const noexcept { return entries_; }
    cplx operator()(int row, int col) const { return entries_(row, col); }

    // max_ij |H_ij - conj(H_ji)|
    static double hermiticity_defect(const Eigen::MatrixXcd& m);

private:
    Eigen::MatrixXcd entries_;
};

// H_eff(G, Omega) = delta b^+ b + [[Delta_M, Omega/2], [Omega/2, 0]]
//                  + G [[0, b], [b^+, 0]]
// on the interleaved basis (-,0),(+,0),(-,1),(+,1),...
HermitianOperator build_effective_hamiltonian(const ModelParams& params, double g, double omega);

// The two field-derivative operators dH/dG and dH/dOmega (the Hamiltonian is
// linear in both amplitudes).
Eigen::MatrixXd effective_coupling_g(const ModelParams& params);
Eigen::MatrixXd effective_coupling_omega(const ModelParams& params);

// ---------------------------------------------------------------------------
// Semiclassical model (quantized cavity, classical maser with explicit phase)
// ---------------------------------------------------------------------------

struct SemiclassicalParams {
    double omega_M{200.0};
    double omega_C{201.0};
    double omega_0{200.5};
    double theta_0{0.0};

    // Frequencies consistent with `params`: omega_C = omega_M + delta,
    // omega_0 = omega_M + delta_M.
    static SemiclassicalParams from_model(const ModelParams& params, double omega_M, double theta_0);

    // Throws ConfigError if the frequencies disagree with `params`.
    void check_consistent(const ModelParams& params) const;

    // max(|G|, |Omega|) / omega_0 for the given peak amplitudes.
    double rwa_ratio(double g_max, double omega_max) const;
};

inline constexpr double kRwaRatioLimit = 0.05;

// Atom ⊗ cavity-Fock Hamiltonian at time t, same flat ordering as the
// effective model: (-, n) -> 2n, (+, n) -> 2n + 1, n = cavity photons.
HermitianOperator build_semiclassical_hamiltonian(const SemiclassicalParams& sc,
                                                  const ModelParams& params,
                                                  double g, double omega, double t);

// ---------------------------------------------------------------------------
// Physical realization (SI units)
// ---------------------------------------------------------------------------

struct PhysicalRealization {
    double dipole{};          // C m
    double mode_volume{};     // m^3
    double maser_amplitude{}; // V / m
    double velocity{};        // m / s
    double waist_C{};         // m
    double waist_M{};         // m
    double d{};               // m, separation of the cavity and maser axes

    void validate() const;
};

struct RealizedPulses {
    double g_max{};       // rad / s
    double omega_max{};   // rad / s
    double t_int{};       // s, FWHM of the cavity envelope
    double t_int_maser{}; // s, FWHM of the maser envelope (differs when W_M != W_C)
    double tau{};         // s
};

namespace si {
inline constexpr double hbar = 1.054571817e-34;     // J s
inline constexpr double epsilon_0 = 8.8541878128e-12; // F / m
}  // namespace si

// g_max = (mu / hbar) sqrt(hbar omega_C / (2 eps0 V)), omega_max = mu E_M / hbar,
// t_int = 2 (W_C / v) sqrt(ln 2), tau = d / v. Signs are dropped.
// `d = 0` is accepted (simultaneous pulses). `frequencies` carries the cavity
// frequency in rad / s.
RealizedPulses realize(const PhysicalRealization& phys, const SemiclassicalParams& frequencies);

}  // namespace fockpass
