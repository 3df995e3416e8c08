#include "support.hpp"

#include "fockpass/errors.hpp"
#include "fockpass/model.hpp"
#include "fockpass/spectra.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

using namespace fockpass;
using testing::Gen;

TEST_SUITE("model") {

TEST_CASE("model params identity and validation") {
    const auto p = ModelParams::reference();
    CHECK(p.delta == 1.0);
    CHECK(p.delta_M == 0.5);
    CHECK(p.delta_C == -0.5);
    CHECK(p.dim() == 16);

    ModelParams bad = p;
    bad.delta_C = -0.4;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = p;
    bad.delta = -1.0;
    bad.delta_M = -0.5;
    bad.delta_C = 0.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = p;
    bad.n_max = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK_THROWS_AS(build_effective_hamiltonian(bad, 0.1, 0.1), ConfigError);
}

TEST_CASE("basis index flat map is a bijection") {
    for (int n_max : {1, 4, 9}) {
        const int dim = 2 * (n_max + 1);
        std::vector<int> seen(dim, 0);
        for (int n = 0; n <= n_max; ++n)
            for (Atom a : {Atom::lower, Atom::upper}) {
                const BasisIndex idx{a, n};
                REQUIRE(idx.flat() >= 0);
                REQUIRE(idx.flat() < dim);
                ++seen[idx.flat()];
                CHECK(BasisIndex::from_flat(idx.flat()) == idx);
            }
        CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
    }
    CHECK(BasisIndex{Atom::lower, 3}.label() == "minus_3");
    CHECK(BasisIndex{Atom::upper, 0}.label() == "plus_0");
}

TEST_CASE("zero-field effective Hamiltonian is diagonal") {
    const auto p = ModelParams::from_detuning(1.0, 0.5, 2);
    const auto h = build_effective_hamiltonian(p, 0.0, 0.0).matrix();
    const double expected[] = {0.0, 0.5, 1.0, 1.5, 2.0, 2.5};
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            CHECK(h(i, j) == cplx(i == j ? expected[i] : 0.0, 0.0));
    CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("matrix elements at g = 0.3, omega = 0.4") {
    const auto p = ModelParams::from_detuning(1.0, 0.5, 2);
    const auto h = build_effective_hamiltonian(p, 0.3, 0.4);
    const int plus1 = BasisIndex{Atom::upper, 1}.flat();
    const int plus2 = BasisIndex{Atom::upper, 2}.flat();
    const int minus2 = BasisIndex{Atom::lower, 2}.flat();
    CHECK(h(plus1, minus2).real() == doctest::Approx(0.3 * std::sqrt(2.0)).epsilon(1e-15));
    CHECK(h(plus1, minus2).real() == doctest::Approx(0.42426).epsilon(1e-5));
    CHECK(h(plus2, minus2).real() == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(h(minus2, plus1) == std::conj(h(plus1, minus2)));
}

TEST_CASE("effective Hamiltonian matches the tensor-product construction") {
    Gen gen(11);
    for (int trial = 0; trial < 200; ++trial) {
        const auto p = gen.params();
        const double g = gen.uniform(-3.0, 3.0);
        const double omega = gen.uniform(-3.0, 3.0);
        const auto h = build_effective_hamiltonian(p, g, omega).matrix();
        const auto oracle = testing::tensor_product_hamiltonian(p, g, omega);
        REQUIRE((h - oracle).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("property: Hermitian to 1e-12 and sparsity pattern") {
    Gen gen(12);
    for (int trial = 0; trial < 300; ++trial) {
        const auto p = gen.params();
        const auto h = build_effective_hamiltonian(p, gen.uniform(-5, 5), gen.uniform(-5, 5)).matrix();
        REQUIRE(HermitianOperator::hermiticity_defect(h) <= 1e-12);
        // Only same-n atomic couplings and (+,n-1)<->(-,n) exchange are allowed.
        for (int i = 0; i < h.rows(); ++i)
            for (int j = 0; j < h.cols(); ++j) {
                if (std::abs(i - j) <= 1) continue;
                REQUIRE(h(i, j) == cplx(0.0, 0.0));
            }
    }
}

TEST_CASE("property: sign flips of g and omega leave the spectrum invariant") {
    Gen gen(13);
    for (int trial = 0; trial < 200; ++trial) {
        const auto p = gen.params();
        const double g = gen.uniform(-3, 3), omega = gen.uniform(-3, 3);
        const auto e = eigen_decompose(build_effective_hamiltonian(p, g, omega)).values;
        const auto eg = eigen_decompose(build_effective_hamiltonian(p, -g, omega)).values;
        const auto eo = eigen_decompose(build_effective_hamiltonian(p, g, -omega)).values;
        REQUIRE((e - eg).cwiseAbs().maxCoeff() < 1e-12);
        REQUIRE((e - eo).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("gauge conjugations realize the sign flips exactly") {
    const auto p = ModelParams::reference(5);
    const auto h = build_effective_hamiltonian(p, 0.7, 1.3).matrix();
    // (-1)^n on every (., n): exchange terms flip, atomic terms stay.
    // (-1)^(n + atom): atomic terms flip, exchange terms stay.
    Eigen::VectorXd photon_parity(p.dim()), atomic(p.dim());
    for (int i = 0; i < p.dim(); ++i) {
        const auto idx = BasisIndex::from_flat(i);
        photon_parity[i] = idx.n % 2 ? -1.0 : 1.0;
        atomic[i] = (idx.n + static_cast<int>(idx.atom)) % 2 ? -1.0 : 1.0;
    }
    const Eigen::MatrixXcd hg = photon_parity.asDiagonal() * h * photon_parity.asDiagonal();
    const Eigen::MatrixXcd ho = atomic.asDiagonal() * h * atomic.asDiagonal();
    CHECK((hg - build_effective_hamiltonian(p, -0.7, 1.3).matrix()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((ho - build_effective_hamiltonian(p, 0.7, -1.3).matrix()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("property: zero-field spectrum is delta n and delta n + Delta_M") {
    Gen gen(14);
    for (int trial = 0; trial < 100; ++trial) {
        const auto p = gen.params();
        std::vector<double> expected;
        for (int n = 0; n <= p.n_max; ++n) {
            expected.push_back(p.delta * n);
            expected.push_back(p.delta * n + p.delta_M);
        }
        std::sort(expected.begin(), expected.end());
        const auto e = eigen_decompose(build_effective_hamiltonian(p, 0.0, 0.0)).values;
        for (std::size_t i = 0; i < expected.size(); ++i)
            REQUIRE(std::abs(e[i] - expected[i]) < 1e-12 * (1.0 + std::abs(expected[i])));
    }
}

TEST_CASE("non-finite fields are rejected") {
    const auto p = ModelParams::reference();
    CHECK_THROWS_AS(build_effective_hamiltonian(p, std::numeric_limits<double>::quiet_NaN(), 0.0),
                    ConfigError);
    CHECK_THROWS_AS(build_effective_hamiltonian(p, 0.0, std::numeric_limits<double>::infinity()),
                    ConfigError);
}

TEST_CASE("hermitian operator rejects non-Hermitian input") {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
    m(0, 1) = cplx(1.0, 0.0);
    CHECK_THROWS_AS(HermitianOperator{m}, ConfigError);
    m(1, 0) = cplx(1.0, 1e-13);
    CHECK_NOTHROW(HermitianOperator{m});
}

TEST_CASE("semiclassical Hamiltonian") {
    const auto p = ModelParams::reference(3);
    const auto sc = SemiclassicalParams::from_model(p, 200.0, 0.0);
    CHECK(sc.omega_C == 201.0);
    CHECK(sc.omega_0 == 200.5);

    SUBCASE("zero field is free atom plus free cavity") {
        const auto h = build_semiclassical_hamiltonian(sc, p, 0.0, 0.0, 3.7).matrix();
        for (int n = 0; n <= p.n_max; ++n) {
            CHECK(h(2 * n, 2 * n).real() == sc.omega_C * n);
            CHECK(h(2 * n + 1, 2 * n + 1).real() == sc.omega_C * n + sc.omega_0);
        }
        CHECK((h - Eigen::MatrixXcd(h.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("maser phase at t = 0") {
        const auto h0 = build_semiclassical_hamiltonian(sc, p, 0.0, 0.4, 0.0).matrix();
        CHECK(h0(1, 0) == cplx(0.2, 0.0));
        auto sc2 = SemiclassicalParams::from_model(p, 200.0, std::numbers::pi / 2);
        const auto h2 = build_semiclassical_hamiltonian(sc2, p, 0.0, 0.4, 0.0).matrix();
        const int plus = BasisIndex{Atom::upper, 1}.flat(), minus = BasisIndex{Atom::lower, 1}.flat();
        CHECK(std::abs(h2(plus, minus) - cplx(0.0, -0.2)) < 1e-16);
        CHECK(HermitianOperator::hermiticity_defect(h2) <= 1e-12);
    }
    SUBCASE("cavity coupling") {
        const auto h = build_semiclassical_hamiltonian(sc, p, 0.3, 0.0, 1.0).matrix();
        CHECK(h(BasisIndex{Atom::upper, 1}.flat(), BasisIndex{Atom::lower, 2}.flat()).real() ==
              doctest::Approx(0.3 * std::sqrt(2.0)).epsilon(1e-15));
    }
    SUBCASE("inconsistent frequencies are rejected") {
        SemiclassicalParams bad = sc;
        bad.omega_C = 202.0;
        CHECK_THROWS_AS(build_semiclassical_hamiltonian(bad, p, 0.0, 0.0, 0.0), ConfigError);
    }
    SUBCASE("rwa ratio") {
        CHECK(sc.rwa_ratio(1.0, 2.0) == doctest::Approx(2.0 / 200.5));
    }
}

TEST_CASE("physical realization") {
    PhysicalRealization ph;
    ph.dipole = 1e-27;
    ph.mode_volume = 1e-6;
    ph.maser_amplitude = 1e-3;
    ph.velocity = 100.0;
    ph.waist_C = 6e-3;
    ph.waist_M = 6e-3;
    ph.d = 5e-3;
    SemiclassicalParams freq;
    freq.omega_C = 2.0 * std::numbers::pi * 21.5e9;

    const auto r = realize(ph, freq);
    CHECK(ph.waist_C / ph.velocity == doctest::Approx(60e-6));
    CHECK(r.t_int == doctest::Approx(2.0 * 60e-6 * std::sqrt(std::log(2.0))));
    CHECK(r.tau == doctest::Approx(5e-5));
    CHECK(r.omega_max == doctest::Approx(ph.dipole * ph.maser_amplitude / si::hbar));
    CHECK(r.g_max == doctest::Approx(ph.dipole / si::hbar *
                                     std::sqrt(si::hbar * freq.omega_C / (2.0 * si::epsilon_0 * ph.mode_volume))));

    ph.d = 0.0;
    CHECK(realize(ph, freq).tau == 0.0);

    PhysicalRealization bad = ph;
    bad.velocity = 0.0;
    CHECK_THROWS_AS(realize(bad, freq), ConfigError);
    bad = ph;
    bad.waist_C = 0.0;
    CHECK_THROWS_AS(realize(bad, freq), ConfigError);
}

}  // TEST_SUITE
