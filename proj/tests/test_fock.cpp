#include "qphase/fock.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace qphase;

TEST(Coherent, AmplitudesByRecursion) {
    const Complex alpha = std::polar(1.7, 0.4);
    const FockVector psi = coherent_state(alpha, 30);
    // <n|alpha> = e^{-|a|^2/2} a^n / sqrt(n!), built up term by term.
    Complex expected = std::exp(-0.5 * std::norm(alpha));
    for (int n = 0; n <= 30; ++n) {
        if (n > 0) expected *= alpha / std::sqrt(static_cast<double>(n));
        EXPECT_NEAR(std::abs(psi[n] - expected), 0.0, 1e-14) << n;
    }
    EXPECT_NEAR(psi.norm_squared() + psi.tail_mass, 1.0, 1e-14);
    EXPECT_FALSE(psi.truncation_warning);
}

TEST(Coherent, TailMassIsPoissonTail) {
    const FockVector psi = coherent_state(3.0, 5);
    double head = 0.0, term = std::exp(-9.0);
    for (int n = 0; n <= 5; ++n) {
        head += term;
        term *= 9.0 / (n + 1);
    }
    EXPECT_NEAR(psi.tail_mass, 1.0 - head, 1e-13);
    EXPECT_TRUE(psi.truncation_warning);
}

TEST(Coherent, VacuumAndBadInput) {
    const FockVector v = coherent_state(0.0, 4);
    EXPECT_EQ(v[0], Complex(1.0));
    EXPECT_EQ(v.tail_mass, 0.0);
    EXPECT_THROW(coherent_state(Complex(NAN, 0.0), 3), std::invalid_argument);
    EXPECT_THROW(coherent_state(1.0, -1), std::invalid_argument);
}

TEST(Thermal, GeometricDiagonalAndDeficit) {
    const double beta = std::log(2.0);
    const DensityMatrix rho = thermal_state(beta, 20);
    for (int n = 0; n <= 20; ++n) EXPECT_NEAR(rho(n, n).real(), 0.5 * std::pow(0.5, n), 1e-16);
    EXPECT_NEAR(rho.trace_deficit, std::pow(0.5, 21), 1e-18);
    EXPECT_NEAR(rho.trace() + rho.trace_deficit, 1.0, 1e-15);
    EXPECT_EQ(rho.entries(0, 1), Complex(0.0));
    EXPECT_THROW(thermal_state(0.0, 5), std::domain_error);
    EXPECT_THROW(thermal_state(-1.0, 5), std::domain_error);
}

TEST(RandomHs, ValidStatesAcrossSeeds) {
    for (std::uint64_t sample = 0; sample < 50; ++sample) {
        const DensityMatrix rho = random_hs_density(3, 5, 99, sample);
        EXPECT_TRUE(validate(rho).empty()) << sample;
        EXPECT_NEAR(rho.trace(), 1.0, 1e-14);
        EXPECT_GE(min_eigenvalue(rho.entries), -1e-14);
        EXPECT_EQ(rho(4, 4), Complex(0.0));
    }
}

TEST(RandomHs, PureFunctionOfArguments) {
    const DensityMatrix a = random_hs_density(2, 1, 42, 17);
    const DensityMatrix b = random_hs_density(2, 1, 42, 17);
    const DensityMatrix c = random_hs_density(2, 1, 42, 18);
    EXPECT_EQ((a.entries - b.entries).norm(), 0.0);
    EXPECT_GT((a.entries - c.entries).norm(), 1e-6);
    EXPECT_THROW(random_hs_density(4, 2, 1), std::out_of_range);
}

TEST(RandomHs, QubitPurityMatchesEnsembleMean) {
    // For Hilbert-Schmidt qubits E[tr rho^2] = 4/5.
    double sum = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const DensityMatrix rho = random_hs_density(2, 1, 5, static_cast<std::uint64_t>(i));
        sum += (rho.entries * rho.entries).trace().real();
    }
    EXPECT_NEAR(sum / n, 0.8, 0.005);
}

TEST(NumberPhase, OrthonormalBasis) {
    const int s = 7;
    for (int t = 0; t <= s; ++t) {
        for (int u = 0; u <= s; ++u) {
            const Complex overlap = number_phase_state(t, s).amplitudes.dot(number_phase_state(u, s).amplitudes);
            EXPECT_NEAR(std::abs(overlap - (t == u ? 1.0 : 0.0)), 0.0, 1e-14);
        }
    }
    EXPECT_NEAR(number_phase_angle(3, 7), kTwoPi * 3 / 8, 1e-15);
    EXPECT_THROW(number_phase_state(8, 7), std::out_of_range);
}

TEST(NumberPhase, ContinuousStateWrapsAngle) {
    const FockVector a = continuous_phase_state(0.5, 6);
    const FockVector b = continuous_phase_state(0.5 + 3 * kTwoPi, 6);
    EXPECT_LT((a.amplitudes - b.amplitudes).norm(), 1e-12);
    EXPECT_LT((continuous_phase_state(number_phase_angle(2, 6), 6).amplitudes - number_phase_state(2, 6).amplitudes).norm(),
              1e-15);
}

TEST(Validate, FlagsBrokenStates) {
    DensityMatrix rho = random_hs_density(2, 2, 3);
    rho.entries(0, 1) += Complex(0.1, 0.0);
    EXPECT_FALSE(validate(rho).empty());
    DensityMatrix neg = DensityMatrix::from_matrix(Matrix::Identity(2, 2));
    neg.entries(1, 1) = -0.5;
    neg.entries(0, 0) = 1.5;
    EXPECT_FALSE(validate(neg).empty());
    EXPECT_TRUE(validate(pure_density(coherent_state(1.0, 30))).empty());
}

TEST(Quantile, FockAndThermal) {
    EXPECT_EQ(photon_number_quantile(pure_density(fock_basis_state(4, 9))), 4);
    // Thermal ln 2: P(n > k) = 2^{-(k+1)} <= 1e-10 first at k = 33.
    EXPECT_EQ(photon_number_quantile(thermal_state(std::log(2.0), 60)), 33);
}

TEST(StateSpec, ParsesAllKinds) {
    const auto c = std::get<CoherentSpec>(parse_state_spec("coherent:r=2,psi=3.14159"));
    EXPECT_DOUBLE_EQ(c.r, 2.0);
    EXPECT_DOUBLE_EQ(c.psi, 3.14159);
    EXPECT_DOUBLE_EQ(std::get<ThermalSpec>(parse_state_spec("thermal:beta=0.693")).beta, 0.693);
    EXPECT_EQ(std::get<FockSpec>(parse_state_spec("fock:n=3")).n, 3);
    const auto r = std::get<RandomSpec>(parse_state_spec("random:dim=2,seed=42"));
    EXPECT_EQ(r.dim, 2);
    EXPECT_EQ(r.seed, 42u);
}

TEST(StateSpec, RoundTripsThroughToString) {
    for (const char* text : {"coherent:r=0.5,psi=3.1415926535897931", "thermal:beta=0.69299999999999995", "fock:n=7",
                             "random:dim=3,seed=11"}) {
        EXPECT_EQ(to_string(parse_state_spec(text)), text);
    }
}

TEST(StateSpec, RejectsMalformedInput) {
    for (const char* text : {"", "coherent", "coherent:r=abc,psi=0", "coherent:r=1", "squeezed:r=1", "thermal:beta=0",
                             "thermal:beta=1,extra=2", "fock:n=-1", "fock:n=1.5", "random:dim=0,seed=1",
                             "thermal:beta=1,beta=2", "thermal:beta"}) {
        EXPECT_THROW(parse_state_spec(text), StateSpecError) << text;
    }
}

TEST(StateSpec, DefaultCutoffsAndPreparation) {
    EXPECT_EQ(default_cutoff(CoherentSpec{0.5, 0.0}), 40);
    EXPECT_EQ(default_cutoff(FockSpec{5}), 5);
    EXPECT_EQ(default_cutoff(RandomSpec{4, 1}), 3);
    const int thermal_cutoff = default_cutoff(ThermalSpec{std::log(2.0)});
    EXPECT_LE(std::pow(0.5, thermal_cutoff + 1), 1e-12);

    const PreparedState coh = prepare_state(CoherentSpec{2.0, kPi}, 60);
    ASSERT_TRUE(coh.pure.has_value());
    EXPECT_NEAR(coh.rho.trace(), 1.0, 1e-13);
    EXPECT_FALSE(prepare_state(ThermalSpec{1.0}, 30).pure.has_value());
    EXPECT_THROW(prepare_state(FockSpec{5}, 3), std::out_of_range);
}
