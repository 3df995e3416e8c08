#include "fockpass/model.hpp"

#include "fockpass/errors.hpp"

#include <cmath>
#include <string>

namespace fockpass {

namespace {

bool finite(double x) { return std::isfinite(x); }

void require(bool condition, const std::string& message) {
    if (!condition) throw ConfigError(message);
}

// Relative agreement for frequency identities that are exact in principle.
bool close(double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

// ---------------------------------------------------------------------------

void ModelParams::validate() const {
    require(finite(delta) && finite(delta_M) && finite(delta_C), "model: non-finite detuning");
    require(delta > 0.0, "model: delta must be positive");
    require(close(delta_M - delta_C, delta),
            "model: detunings must satisfy delta_M - delta_C = delta");
    require(n_max >= 1, "model: n_max must be at least 1");
}

ModelParams ModelParams::from_detuning(double delta, double delta_M, int n_max) {
    ModelParams p{delta, delta_M, delta_M - delta, n_max};
    p.validate();
    return p;
}

ModelParams ModelParams::reference(int n_max) {
    return from_detuning(1.0, 0.5, n_max);
}

std::string BasisIndex::label() const {
    return std::string(atom == Atom::lower ? "minus_" : "plus_") + std::to_string(n);
}

// ---------------------------------------------------------------------------

HermitianOperator::HermitianOperator(Eigen::MatrixXcd entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols() || entries_.rows() == 0)
        throw ConfigError("HermitianOperator: matrix must be square and non-empty");
    if (!entries_.allFinite())
        throw ConfigError("HermitianOperator: non-finite entries");
    if (hermiticity_defect(entries_) > kHermitianTolerance)
        throw ConfigError("HermitianOperator: matrix is not Hermitian");
}

double HermitianOperator::hermiticity_defect(const Eigen::MatrixXcd& m) {
    if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd effective_coupling_g(const ModelParams& params) {
    const int dim = params.dim();
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(dim, dim);
    for (int n = 1; n <= params.n_max; ++n) {
        const int minus_n = BasisIndex{Atom::lower, n}.flat();
        const int plus_prev = BasisIndex{Atom::upper, n - 1}.flat();
        c(plus_prev, minus_n) = c(minus_n, plus_prev) = std::sqrt(static_cast<double>(n));
    }
    return c;
}

Eigen::MatrixXd effective_coupling_omega(const ModelParams& params) {
    const int dim = params.dim();
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(dim, dim);
    for (int n = 0; n <= params.n_max; ++n) {
        const int minus_n = BasisIndex{Atom::lower, n}.flat();
        const int plus_n = BasisIndex{Atom::upper, n}.flat();
        c(plus_n, minus_n) = c(minus_n, plus_n) = 0.5;
    }
    return c;
}

HermitianOperator build_effective_hamiltonian(const ModelParams& params, double g, double omega) {
    params.validate();
    if (!finite(g) || !finite(omega))
        throw ConfigError("build_effective_hamiltonian: non-finite field amplitude");

    const int dim = params.dim();
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
    for (int n = 0; n <= params.n_max; ++n) {
        const int minus_n = BasisIndex{Atom::lower, n}.flat();
        const int plus_n = BasisIndex{Atom::upper, n}.flat();
        h(minus_n, minus_n) = params.delta * n;
        h(plus_n, plus_n) = params.delta * n + params.delta_M;
        h(plus_n, minus_n) = h(minus_n, plus_n) = 0.5 * omega;
        if (n >= 1) {
            // <n-1| b |n> = sqrt(n)
            const int plus_prev = BasisIndex{Atom::upper, n - 1}.flat();
            h(plus_prev, minus_n) = h(minus_n, plus_prev) = g * std::sqrt(static_cast<double>(n));
        }
    }
    return HermitianOperator(std::move(h));
}

// ---------------------------------------------------------------------------

SemiclassicalParams SemiclassicalParams::from_model(const ModelParams& params, double omega_M,
                                                    double theta_0) {
    params.validate();
    return {omega_M, omega_M + params.delta, omega_M + params.delta_M, theta_0};
}

void SemiclassicalParams::check_consistent(const ModelParams& params) const {
    require(finite(omega_M) && finite(omega_C) && finite(omega_0) && finite(theta_0),
            "semiclassical: non-finite frequency or phase");
    require(omega_M > 0.0 && omega_C > 0.0 && omega_0 > 0.0,
            "semiclassical: frequencies must be positive");
    require(close(omega_C - omega_M, params.delta),
            "semiclassical: omega_C - omega_M disagrees with model delta");
    require(close(omega_0 - omega_M, params.delta_M),
            "semiclassical: omega_0 - omega_M disagrees with model delta_M");
}

double SemiclassicalParams::rwa_ratio(double g_max, double omega_max) const {
    return std::max(std::abs(g_max), std::abs(omega_max)) / omega_0;
}

HermitianOperator build_semiclassical_hamiltonian(const SemiclassicalParams& sc,
                                                  const ModelParams& params,
                                                  double g, double omega, double t) {
    params.validate();
    sc.check_consistent(params);
    if (!finite(g) || !finite(omega) || !finite(t))
        throw ConfigError("build_semiclassical_hamiltonian: non-finite input");

    // Upper-right element of the maser block: (Omega/2) exp(-i(theta_0 + omega_M t)).
    const cplx maser = 0.5 * omega * std::polar(1.0, -(sc.theta_0 + sc.omega_M * t));

    const int dim = params.dim();
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
    for (int n = 0; n <= params.n_max; ++n) {
        const int minus_n = BasisIndex{Atom::lower, n}.flat();
        const int plus_n = BasisIndex{Atom::upper, n}.flat();
        h(minus_n, minus_n) = sc.omega_C * n;
        h(plus_n, plus_n) = sc.omega_C * n + sc.omega_0;
        h(plus_n, minus_n) = maser;
        h(minus_n, plus_n) = std::conj(maser);
        if (n >= 1) {
            const int plus_prev = BasisIndex{Atom::upper, n - 1}.flat();
            h(plus_prev, minus_n) = h(minus_n, plus_prev) = g * std::sqrt(static_cast<double>(n));
        }
    }
    return HermitianOperator(std::move(h));
}

// ---------------------------------------------------------------------------

void PhysicalRealization::validate() const {
    require(finite(dipole) && dipole > 0.0, "physical: dipole must be positive");
    require(finite(mode_volume) && mode_volume > 0.0, "physical: mode_volume must be positive");
    require(finite(maser_amplitude) && maser_amplitude > 0.0,
            "physical: maser_amplitude must be positive");
    require(finite(velocity) && velocity > 0.0, "physical: velocity must be positive");
    require(finite(waist_C) && waist_C > 0.0, "physical: waist_C must be positive");
    require(finite(waist_M) && waist_M > 0.0, "physical: waist_M must be positive");
    require(finite(d) && d >= 0.0, "physical: axis separation d must be non-negative");
}

RealizedPulses realize(const PhysicalRealization& phys, const SemiclassicalParams& frequencies) {
    phys.validate();
    require(finite(frequencies.omega_C) && frequencies.omega_C > 0.0,
            "realize: cavity frequency must be positive");
    const double sqrt_ln2 = std::sqrt(std::log(2.0));
    RealizedPulses out;
    out.g_max = phys.dipole / si::hbar *
                std::sqrt(si::hbar * frequencies.omega_C / (2.0 * si::epsilon_0 * phys.mode_volume));
    out.omega_max = phys.dipole * phys.maser_amplitude / si::hbar;
    out.t_int = 2.0 * (phys.waist_C / phys.velocity) * sqrt_ln2;
    out.t_int_maser = 2.0 * (phys.waist_M / phys.velocity) * sqrt_ln2;
    out.tau = phys.d / phys.velocity;
    return out;
}

}  // namespace fockpass
