// phase.hpp: Paul and Pegg-Barnett phase distributions and expectations.
//
// Conventions: phi in radians on [0, 2 pi); densities are per radian and a
// grid integral is the periodic rectangle rule sum_i p(phi_i) * 2 pi / G.

#pragma once

#include "qphase/channels.hpp"
#include "qphase/fock.hpp"

#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace qphase {

class PhaseGrid {
public:
    explicit PhaseGrid(int size = 512);

    int size() const { return size_; }
    double spacing() const { return kTwoPi / size_; }
    double point(int i) const { return kTwoPi * i / size_; }
    std::vector<double> points() const;

private:
    int size_;
};

struct PhaseDistribution {
    PhaseGrid grid;
    std::vector<double> density;
    double quad_error = 0.0;          // quadrature tail bound plus clamped jitter
    double truncation_deficit = 0.0;  // mass outside the represented block
    bool warning = false;

    double integral() const;
    // |integral - (1 - truncation_deficit)|; within 1e-6 + quad_error when sound.
    double normalization_error() const;
};

/// f(e^{i phi}) = sum_{|k| <= K} c_k e^{i k phi}.
class PhaseFunction {
public:
    PhaseFunction() = default;
    explicit PhaseFunction(std::map<int, Complex> coefficients);

    static PhaseFunction constant(Complex c);
    static PhaseFunction harmonic(int k, Complex c = 1.0);

    Complex operator()(double phi) const;
    Complex coefficient(int k) const;
    const std::map<int, Complex>& coefficients() const { return coefficients_; }
    int max_mode() const;
    // sum |c_k|, an upper bound on |f|.
    double bound() const;

private:
    std::map<int, Complex> coefficients_;
};

struct QuadratureConfig {
    int radial_nodes = 32;  // Gauss-Legendre nodes per unit-width radial panel
    double r_max = 8.0;
    int grid_size = 512;

    /// r_max = sqrt(N_eff) + 8 with N_eff the 1 - 1e-10 photon-number quantile.
    static QuadratureConfig for_state(const DensityMatrix& rho, int grid_size = 512);
    void check() const;
};

inline constexpr double kQuadratureWarningThreshold = 1e-6;

double husimi_q(const DensityMatrix& rho, Complex alpha);

/// Radial moments of the Husimi function for every density matrix up to a
/// given cutoff, so that
///   P_Paul(phi) = Re sum_{mn} rho_mn M_mn e^{i(n-m)phi},
///   M_mn = (1/pi) int_0^{r_max} r e^{-r^2} r^{m+n} / sqrt(m! n!) dr,
/// with the radial integral done by composite Gauss-Legendre quadrature.
class PaulEvaluator {
public:
    PaulEvaluator(int cutoff, const QuadratureConfig& cfg);

    double density(const DensityMatrix& rho, double phi) const;
    // Upper bound on the density lost beyond r_max, for any angle.
    double tail_bound(const DensityMatrix& rho) const;
    int cutoff() const { return cutoff_; }

private:
    int cutoff_;
    QuadratureConfig cfg_;
    Eigen::MatrixXd moments_;
};

PhaseDistribution paul_distribution(const DensityMatrix& rho, const QuadratureConfig& cfg);
PhaseDistribution paul_distribution(const DensityMatrix& rho);
double paul_density(const DensityMatrix& rho, double phi, const QuadratureConfig& cfg);
double paul_coherent_closed_form(double r_prime, double psi, double phi);
Complex paul_expectation(const DensityMatrix& rho, const PhaseFunction& f, const QuadratureConfig& cfg);

// sum_i f(e^{i phi_i}) p(phi_i) dphi over a tabulated distribution.
Complex grid_expectation(const PhaseDistribution& dist, const PhaseFunction& f);

// <theta_{t,s}|rho|theta_{t,s}>, t = 0..s, on the (s+1)-dimensional block.
std::vector<double> pb_discrete_distribution(const DensityMatrix& rho, int s);
double pb_continuous_density(const DensityMatrix& rho, int s, double phi);
PhaseDistribution pb_continuous_distribution(const DensityMatrix& rho, int s, const PhaseGrid& grid);
Complex pb_expectation(const DensityMatrix& rho, int s, const PhaseFunction& f);
// sum_t f(e^{i theta_t}) |theta_t><theta_t| as an (s+1) x (s+1) matrix.
Matrix pb_operator(int s, const PhaseFunction& f);
double pb_coherent_series(double r_prime, double psi, double phi, int terms);

// ---------------------------------------------------------------------------
// Amplified Pegg-Barnett density
//
//   P = C sum_{j=0}^{s} q^j | sum_m psi_m e^{-i m phi} (m!)^{-1/2}
//                                 prod_{k=1}^{m} ((j+k)/kappa)^{1/2} |^2,
//   q = (kappa - 1)/kappa.
// ---------------------------------------------------------------------------

enum class AmplifiedNormalization {
    /// Exact (s+1)-dimensional block of A_kappa(rho): C = 1/(2 pi kappa) and
    /// the inner sum stops at m = s - j.
    finite_dimension,
    /// C = 1/(2 pi eps (s+1)) with the inner sum running over the whole
    /// state. Agrees with finite_dimension as s -> infinity; this is the
    /// normalization the published ratio table follows at small s.
    /// Linear schedules only.
    limit_prefactor,
};

struct AmplifiedPbOptions {
    AmplifiedNormalization normalization = AmplifiedNormalization::finite_dimension;
    // Keep only m < inner_terms in the inner sum.
    std::optional<int> inner_terms;
};

/// Pure-state evaluator, O(s * M) per angle with M = psi.cutoff. All weights
/// are formed in log space; an overflowing weight throws std::overflow_error.
double pb_amplified_density(const FockVector& psi, int s, const AmplifierParams& params, double phi,
                            const AmplifiedPbOptions& options = {});
double pb_amplified_density(const FockVector& psi, int s, double eps, double phi,
                            const AmplifiedPbOptions& options = {});

/// Mixed-state version of the same sum, W_mn = C sum_j q^j t(j,m) t(j,n),
/// precomputed once for a given (s, kappa, state cutoff). The density and the
/// finite-s Pegg-Barnett expectation are then O(M^2) per state.
class AmplifiedPhaseKernel {
public:
    AmplifiedPhaseKernel(int s, const AmplifierParams& params, int state_cutoff,
                         const AmplifiedPbOptions& options = {});

    double density(const DensityMatrix& rho, double phi) const;
    PhaseDistribution distribution(const DensityMatrix& rho, const PhaseGrid& grid) const;
    // Pegg-Barnett expectation of f at dimension s on the amplified state.
    Complex expectation(const DensityMatrix& rho, const PhaseFunction& f) const;
    // 2 pi times the grid-free integral of the density (trace of the block).
    double block_mass(const DensityMatrix& rho) const;

    int s() const { return s_; }
    int state_cutoff() const { return cutoff_; }
    const Eigen::MatrixXd& weights() const { return weights_; }

private:
    int s_;
    int cutoff_;
    Eigen::MatrixXd weights_;  // includes the 2 pi normalisation
};

double pb_amplified_density(const DensityMatrix& rho, int s, const AmplifierParams& params, double phi,
                            const AmplifiedPbOptions& options = {});

// sum_{m >= start} (m! eps^m)^{-1/2}, summed until terms fall below 1e-16
// after the peak.
double dominating_series(double eps, int start = 0);

struct DominationPair {
    double integrand;  // |I_s(phi)| with |f| = f_bound
    double bound;      // J(phi)
};

DominationPair appendix_a_bound(double eps, int s, double phi, const FockVector& psi, double f_bound);

} // namespace qphase
