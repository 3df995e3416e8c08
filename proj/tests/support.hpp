// Shared test helpers: independent oracles and hand-rolled generators.

#pragma once

#include "fockpass/dynamics.hpp"
#include "fockpass/model.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace testing {

using fockpass::cplx;
using fockpass::ModelParams;

// Deterministic generator for property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    ModelParams params(int n_lo = 1, int n_hi = 10) {
        return ModelParams::from_detuning(uniform(0.2, 2.0), uniform(-1.0, 1.0), integer(n_lo, n_hi));
    }

private:
    std::mt19937_64 rng_;
};

// H_eff assembled from tensor products on atom ⊗ Fock (atom index major),
// then permuted into the interleaved order 2n + atom.
inline Eigen::MatrixXcd tensor_product_hamiltonian(const ModelParams& p, double g, double omega) {
    const int n = p.n_max + 1;
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);  // lowering
    for (int k = 1; k < n; ++k) b(k - 1, k) = std::sqrt(static_cast<double>(k));
    const Eigen::MatrixXd num = b.transpose() * b;
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);

    Eigen::Matrix2d up_proj = Eigen::Matrix2d::Zero();  // |+><+|, atom index 1 = upper
    up_proj(1, 1) = 1.0;
    Eigen::Matrix2d raise = Eigen::Matrix2d::Zero();  // |+><-|
    raise(1, 0) = 1.0;
    const Eigen::Matrix2d lower = raise.transpose();
    const Eigen::Matrix2d id2 = Eigen::Matrix2d::Identity();

    auto kron = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& c) {
        Eigen::MatrixXd out(a.rows() * c.rows(), a.cols() * c.cols());
        for (int i = 0; i < a.rows(); ++i)
            for (int j = 0; j < a.cols(); ++j)
                out.block(i * c.rows(), j * c.cols(), c.rows(), c.cols()) = a(i, j) * c;
        return out;
    };

    const Eigen::MatrixXd h = p.delta * kron(id2, num) + p.delta_M * kron(up_proj, id) +
                              0.5 * omega * kron(raise + lower, id) +
                              g * (kron(raise, b) + kron(lower, b.transpose()));

    Eigen::MatrixXcd out(2 * n, 2 * n);
    for (int a = 0; a < 2; ++a)
        for (int k = 0; k < n; ++k)
            for (int a2 = 0; a2 < 2; ++a2)
                for (int k2 = 0; k2 < n; ++k2)
                    out(2 * k + a, 2 * k2 + a2) = h(a * n + k, a2 * n + k2);
    return out;
}

// exp(-i H t) y for Hermitian H via its eigenbasis.
inline Eigen::VectorXcd exact_evolution(const Eigen::MatrixXcd& h, const Eigen::VectorXcd& y, double t) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    Eigen::VectorXcd phases(h.rows());
    for (Eigen::Index i = 0; i < h.rows(); ++i) phases[i] = std::polar(1.0, -es.eigenvalues()[i] * t);
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint() * y;
}

// Pinned plateau centers from the 32x32 scans (fixtures hold the same values).
inline constexpr double kPathAG = 1.0483870967741935;
inline constexpr double kPathAOmega = 1.7419354838709677;
inline constexpr double kPathBG = 1.411290322580645;
inline constexpr double kPathBOmega = 3.354838709677419;

inline fockpass::PulseSchedule path_schedule(double g, double omega) {
    return fockpass::PulseSchedule::with_default_window(g, omega, 66.0, 57.0);
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace testing
