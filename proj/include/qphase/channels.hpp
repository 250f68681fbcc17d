// channels.hpp: quantum limited amplifier and attenuator in the number basis.

#pragma once

#include "qphase/fock.hpp"

#include <optional>
#include <utility>

namespace qphase {

enum class Schedule {
    fixed,      // kappa given directly
    linear,     // kappa = 1 + s * eps
    quadratic,  // kappa = 1 + s^2 * eps
};

/// Amplification strength kappa >= 1, optionally tied to a Pegg-Barnett
/// dimension s and a rate eps.
class AmplifierParams {
public:
    static AmplifierParams strength(double kappa);
    static AmplifierParams linear(int s, double eps);
    static AmplifierParams quadratic(int s, double eps);

    double kappa() const { return kappa_; }
    Schedule schedule() const { return schedule_; }
    std::optional<int> s() const { return s_; }
    std::optional<double> eps() const { return eps_; }

private:
    AmplifierParams(double kappa, Schedule schedule, std::optional<int> s, std::optional<double> eps)
        : kappa_(kappa), schedule_(schedule), s_(s), eps_(eps) {}

    double kappa_;
    Schedule schedule_;
    std::optional<int> s_;
    std::optional<double> eps_;
};

class AttenuatorParams {
public:
    explicit AttenuatorParams(double lambda);
    double lambda() const { return lambda_; }

private:
    double lambda_;
};

inline constexpr double kDiscardWarningThreshold = 1e-6;

/// Output cutoff for A_kappa applied to a state supported on 0..in_cutoff:
/// at least ceil(k(N+1) + 4 sqrt(k(N+1)) + 10), raised until the
/// negative-binomial tail of the top input level drops below `tail_tol`.
int default_out_cutoff(int in_cutoff, double kappa, double tail_tol = 1e-13);

/// A_kappa(rho), truncated at out_cutoff. The dropped mass is added to
/// trace_deficit; truncation_warning is set when it exceeds 1e-6.
DensityMatrix qla_apply(const DensityMatrix& rho, const AmplifierParams& params, int out_cutoff);
DensityMatrix qla_apply(const DensityMatrix& rho, const AmplifierParams& params);

// beta(kappa) with A_kappa(g_beta) = g_{beta(kappa)}.
double qla_thermal_closed_form(double beta, double kappa);

/// Pure-loss channel E_lambda on an arbitrary operator (not necessarily a
/// state), with Kraus operators <n-j|K_j|n> = sqrt(C(n,j)) lambda^{(n-j)/2} (1-lambda)^{j/2}.
Matrix attenuator_apply(const Matrix& op, const AttenuatorParams& params, int out_cutoff);

/// a^dag rho a - 1/2 {a a^dag, rho} on cutoff rho.cutoff + 1.
Matrix gkls_generator(const DensityMatrix& rho);

/// ( Tr[A_kappa(rho) obs], Tr[rho (1/kappa) E_{1/kappa}(obs)] ), each side
/// through its own channel. `obs` must be Hermitian and cover rho's block.
std::pair<double, double> duality_pair(const DensityMatrix& rho, const Matrix& obs, double kappa);

Matrix number_operator(int cutoff);
Matrix annihilation_operator(int cutoff);

} // namespace qphase
