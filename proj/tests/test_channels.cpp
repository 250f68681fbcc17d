#include "qphase/channels.hpp"
#include "qphase/experiments.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace qphase;

namespace {

// Amplifier built from explicit Kraus matrices with plain double arithmetic:
// <j+m|T_j|m> = sqrt(C(j+m, m) q^j / kappa^{m+1}).
Matrix brute_force_amplifier(const Matrix& rho, double kappa, int out_cutoff, int j_max) {
    const int n_in = static_cast<int>(rho.rows()) - 1;
    const double q = (kappa - 1.0) / kappa;
    Matrix out = Matrix::Zero(out_cutoff + 1, out_cutoff + 1);
    for (int j = 0; j <= j_max; ++j) {
        Matrix t = Matrix::Zero(out_cutoff + 1, n_in + 1);
        for (int m = 0; m <= n_in && j + m <= out_cutoff; ++m) {
            double binom = 1.0;
            for (int k = 1; k <= m; ++k) binom *= static_cast<double>(j + k) / k;
            t(j + m, m) = std::sqrt(binom * std::pow(q, j) / std::pow(kappa, m + 1));
        }
        out += t * rho * t.adjoint();
    }
    return out;
}

} // namespace

TEST(Amplifier, MatchesExplicitKrausSum) {
    const DensityMatrix rho = random_hs_density(4, 3, 8);
    for (double kappa : {1.3, 2.0, 3.5}) {
        const DensityMatrix fast = qla_apply(rho, AmplifierParams::strength(kappa), 40);
        const Matrix slow = brute_force_amplifier(rho.entries, kappa, 40, 40);
        EXPECT_LT((fast.entries - slow).cwiseAbs().maxCoeff(), 1e-13) << kappa;
    }
}

TEST(Amplifier, TracePreservedUpToReportedDeficit) {
    for (std::uint64_t i = 0; i < 10; ++i) {
        const DensityMatrix rho = random_hs_density(5, 6, 9, i);
        const DensityMatrix out = qla_apply(rho, AmplifierParams::strength(1.0 + 0.4 * static_cast<double>(i)));
        EXPECT_NEAR(out.trace() + out.trace_deficit, 1.0, 1e-13);
        EXPECT_LT(out.trace_deficit, 1e-12);
        EXPECT_FALSE(out.truncation_warning);
        EXPECT_LT(hermiticity_defect(out.entries), 1e-15);
        EXPECT_GT(min_eigenvalue(out.entries), -1e-13);
    }
}

TEST(Amplifier, VacuumBecomesThermal) {
    const DensityMatrix out = qla_apply(pure_density(fock_basis_state(0, 0)), AmplifierParams::strength(4.0));
    for (int n = 0; n < 20; ++n) EXPECT_NEAR(out(n, n).real(), 0.25 * std::pow(0.75, n), 1e-15);
}

TEST(Amplifier, ThermalStaysThermal) {
    const double beta = std::log(2.0);
    const double kappa = 2.0;
    const DensityMatrix out = qla_apply(thermal_state(beta, 60), AmplifierParams::strength(kappa));
    const double beta_out = qla_thermal_closed_form(beta, kappa);
    // ln(2 / 1.5) = ln(4/3).
    EXPECT_NEAR(beta_out, 0.28768207245178090, 1e-15);
    for (int n = 0; n < 30; ++n) {
        const double expected = -std::expm1(-beta_out) * std::exp(-beta_out * n);
        EXPECT_NEAR(out(n, n).real(), expected, 1e-12) << n;
    }
    EXPECT_LT(std::abs(out(3, 4)), 1e-16);
}

TEST(Amplifier, IdentityAtKappaOne) {
    const DensityMatrix rho = random_hs_density(3, 4, 1);
    const DensityMatrix out = qla_apply(rho, AmplifierParams::strength(1.0), 7);
    EXPECT_EQ((out.entries.topLeftCorner(5, 5) - rho.entries).norm(), 0.0);
    EXPECT_EQ(out.entries.bottomRightCorner(3, 3).norm(), 0.0);
}

TEST(Amplifier, SemigroupOnRandomStates) {
    for (std::uint64_t i = 0; i < 5; ++i) {
        EXPECT_LT(semigroup_defect(random_hs_density(11, 10, 4, i), 2.0, 1.5), 1e-10) << i;
        EXPECT_LT(semigroup_defect(random_hs_density(3, 2, 5, i), 1.1, 4.0), 1e-10) << i;
    }
}

TEST(Amplifier, ScheduleAndDomain) {
    EXPECT_DOUBLE_EQ(AmplifierParams::linear(100, 0.1).kappa(), 11.0);
    EXPECT_DOUBLE_EQ(AmplifierParams::quadratic(100, 0.01).kappa(), 101.0);
    EXPECT_EQ(AmplifierParams::linear(3, 0.5).schedule(), Schedule::linear);
    EXPECT_THROW(AmplifierParams::strength(0.99), std::domain_error);
    EXPECT_THROW(AmplifierParams::linear(10, 0.0), std::domain_error);
    EXPECT_THROW(AmplifierParams::linear(10, -1.0), std::domain_error);
    const DensityMatrix rho = random_hs_density(2, 3, 1);
    EXPECT_THROW(qla_apply(rho, AmplifierParams::strength(2.0), 2), std::invalid_argument);
}

TEST(Amplifier, OutCutoffPolicyCoversNegativeBinomialTail) {
    EXPECT_GE(default_out_cutoff(10, 3.0), static_cast<int>(std::ceil(33 + 4 * std::sqrt(33.0) + 10)));
    const DensityMatrix top = pure_density(fock_basis_state(10, 10));
    const DensityMatrix out = qla_apply(top, AmplifierParams::strength(3.0));
    EXPECT_LT(out.trace_deficit, 1e-12);
    EXPECT_EQ(default_out_cutoff(5, 1.0), std::max(5, static_cast<int>(std::ceil(6 + 4 * std::sqrt(6.0) + 10))));
}

TEST(Attenuator, CoherentStatesShrink) {
    // E_lambda(|a><a|) = |sqrt(lambda) a><sqrt(lambda) a|
    const Complex alpha = std::polar(1.5, 0.7);
    const double lambda = 0.36;
    const Matrix in = pure_density(coherent_state(alpha, 50)).entries;
    const Matrix out = attenuator_apply(in, AttenuatorParams(lambda), 50);
    const Matrix expected = pure_density(coherent_state(std::sqrt(lambda) * alpha, 50)).entries;
    EXPECT_LT((out - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Attenuator, EndpointsAndTrace) {
    const DensityMatrix rho = random_hs_density(4, 3, 12);
    EXPECT_LT((attenuator_apply(rho.entries, AttenuatorParams(1.0), 3) - rho.entries).norm(), 1e-15);
    const Matrix vac = attenuator_apply(rho.entries, AttenuatorParams(0.0), 3);
    EXPECT_NEAR(vac(0, 0).real(), 1.0, 1e-14);
    EXPECT_NEAR(vac.norm(), 1.0, 1e-14);
    EXPECT_NEAR(attenuator_apply(rho.entries, AttenuatorParams(0.4), 3).trace().real(), 1.0, 1e-14);
    EXPECT_THROW(AttenuatorParams(1.5), std::domain_error);
    EXPECT_THROW(AttenuatorParams(-0.1), std::domain_error);
}

TEST(Duality, RandomTriples) {
    for (std::uint64_t i = 0; i < 30; ++i) {
        CounterRng rng(77, i);
        const int dim = 1 + static_cast<int>(rng.next_u64() % 6);
        const int obs_dim = dim + static_cast<int>(rng.next_u64() % 10);
        const double kappa = 1.0 + 6.0 * rng.uniform();
        const auto [fwd, bwd] = duality_pair(random_hs_density(dim, dim - 1, 78, i), random_hermitian(obs_dim, 79, i), kappa);
        EXPECT_NEAR(fwd, bwd, 1e-10 * std::max(1.0, std::abs(fwd))) << i;
    }
}

TEST(Duality, NumberOperatorMeanGrows) {
    // Tr[A_k(rho) N] = k <N> + k - 1
    const DensityMatrix rho = random_hs_density(3, 2, 6);
    const double mean_in = (rho.entries * number_operator(2)).trace().real();
    const auto [fwd, bwd] = duality_pair(rho, number_operator(120), 2.5);
    EXPECT_NEAR(fwd, 2.5 * mean_in + 1.5, 1e-10);
    EXPECT_NEAR(bwd, 2.5 * mean_in + 1.5, 1e-10);
}

TEST(Gkls, TracelessAndFirstOrder) {
    const DensityMatrix rho = random_hs_density(4, 3, 21);
    const Matrix gen = gkls_generator(rho);
    EXPECT_NEAR(std::abs(gen.trace()), 0.0, 1e-14);
    // a^dag rho a - 1/2{a a^dag, rho} from explicit ladder matrices.
    const Matrix a = annihilation_operator(4);
    const Matrix r = pad_to(rho.entries, 5);
    const Matrix aad = a * a.adjoint();
    Matrix expected = a.adjoint() * r * a - 0.5 * (aad * r + r * aad);
    // a a^dag on the truncated space is wrong at the top level; compare below it.
    EXPECT_LT((gen.topLeftCorner(4, 4) - expected.topLeftCorner(4, 4)).norm(), 1e-14);
    EXPECT_NEAR(gen(4, 4).real(), 4.0 * rho(3, 3).real(), 1e-14);

    const double e1 = gkls_finite_difference_error(rho, 1e-4);
    const double e2 = gkls_finite_difference_error(rho, 5e-5);
    EXPECT_GT(e1 / e2, 1.8);
    EXPECT_LT(e1 / e2, 2.2);
}
