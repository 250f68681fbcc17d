// experiments.hpp: ratio tables, figure data and consistency checks built on
// the state, channel and phase layers.

#pragma once

#include "qphase/channels.hpp"
#include "qphase/fock.hpp"
#include "qphase/phase.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qphase {

class DegenerateDenominator : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

inline constexpr double kMinPaulDenominator = 1e-12;

struct RatioEntry {
    int s = 0;
    double eps = 0.0;
    double phi = 0.0;
    double mean = 0.0;
    double max_dev = 0.0;  // max_i |R_i - mean|
    int n_samples = 0;
    std::uint64_t seed = 0;
};

struct RatioReport {
    std::vector<RatioEntry> entries;
    AmplifiedNormalization normalization = AmplifiedNormalization::finite_dimension;
};

/// Amplified Pegg-Barnett density over Paul density at phi, with kappa = 1 + s eps.
/// Throws DegenerateDenominator when the Paul density is below 1e-12.
double ratio_R(const DensityMatrix& rho, int s, double eps, double phi,
               AmplifiedNormalization normalization = AmplifiedNormalization::finite_dimension);
double ratio_R(const FockVector& psi, int s, double eps, double phi,
               AmplifiedNormalization normalization = AmplifiedNormalization::finite_dimension);

struct RatioTableConfig {
    int samples = 1000;
    std::uint64_t seed = 42;
    double phi = 0.3;
    std::vector<int> s_list{1, 10, 100, 1000, 10000};
    std::vector<double> eps_list{1.0, 0.5, 0.1, 0.05, 0.01};
    AmplifiedNormalization normalization = AmplifiedNormalization::limit_prefactor;
    int threads = 1;
};

/// Hilbert-Schmidt qubit i is random_hs_density(2, 1, seed, i) in every cell,
/// so results do not depend on the thread count.
RatioReport ratio_table_run(const RatioTableConfig& cfg);

struct ProfileRow {
    double phi = 0.0;
    std::vector<double> paul;  // one per r'
    std::vector<double> pb;
};

struct ProfileData {
    std::vector<double> r_primes;
    double psi = 0.0;
    int terms = 0;
    std::vector<ProfileRow> rows;
};

ProfileData phase_profiles_run(const std::vector<double>& r_primes, double psi, const PhaseGrid& grid, int terms);

struct ConvergenceRow {
    int s_plus_1 = 0;
    int t = 0;
    double phi = 0.0;
    double ratio = 0.0;
};

/// R at phi = 2 pi t / 10 for the coherent state |r' e^{i psi}> kept to
/// `terms` Fock components.
std::vector<ConvergenceRow> ratio_convergence_run(double r_prime, double psi, double eps, const std::vector<int>& s_plus_1_list,
                                      const std::vector<int>& t_list, int terms = 100);

// (1/2pi)(1 - x^{s+1}), x = (e^{-beta} + kappa - 1)/kappa.
double thermal_pb_amplified_for_kappa(double beta, int s, double kappa);
// kappa = 1 + s eps.
double thermal_pb_amplified_closed_form(double beta, int s, double eps);
// s -> infinity at fixed eps: (1/2pi)(1 - e^{-(1 - e^{-beta})/eps}).
double thermal_pb_amplified_limit(double beta, double eps);

struct NonlinearRow {
    int s = 0;
    double eps = 0.0;
    double kappa = 0.0;
    double closed_form = 0.0;  // 2 pi times the density
    double numerical = 0.0;
};

/// kappa = 1 + s^2 eps; the numerical column runs the thermal state through
/// AmplifiedPhaseKernel at phi = 0.
std::vector<NonlinearRow> nonlinear_amplification_scan(double beta, double eps, const std::vector<int>& s_list);

/// ( Tr[rho (1/kappa) E_{1/kappa}(Phi_s[f])], PB expectation of f on A_kappa(rho) ),
/// kappa = 1 + s eps, Phi_s[f] the dimension-s Pegg-Barnett operator.
std::pair<Complex, Complex> operator_attenuation_check(const DensityMatrix& rho, int s, double eps,
                                                       const PhaseFunction& f);

/// ( Paul expectation of f, PB expectation of f on A_{1+s eps}(rho) at dimension s ).
std::pair<Complex, Complex> corollary_expectation_check(const DensityMatrix& rho, const PhaseFunction& f, int s,
                                                        double eps);

// Trace distance between A_k2(A_k1(rho)) and A_{k1 k2}(rho), default cutoffs.
double semigroup_defect(const DensityMatrix& rho, double kappa1, double kappa2);

// Frobenius norm of (A_{1+h}(rho) - rho)/h - L(rho).
double gkls_finite_difference_error(const DensityMatrix& rho, double h);

struct InvarianceResult {
    double max_deviation = 0.0;  // sup over the grid
    double error_budget = 0.0;   // quadrature errors of both sides plus the discarded mass
};

// Paul distributions of rho and A_kappa(rho) on the same grid.
InvarianceResult paul_amplification_invariance(const DensityMatrix& rho, double kappa, int grid_size = 256);

// Random complex Hermitian matrix with i.i.d. Gaussian entries.
Matrix random_hermitian(int dim, std::uint64_t seed, std::uint64_t sample = 0);

// Normalised pure state with i.i.d. complex Gaussian amplitudes on 0..dim-1.
FockVector random_pure_state(int dim, std::uint64_t seed, std::uint64_t sample = 0);

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
};

/// Fast property suite: thermal flatness, closed forms, channel identities,
/// bounds and normalization. value <= threshold means passed.
std::vector<CheckResult> run_checks();

} // namespace qphase
