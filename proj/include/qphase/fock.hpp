// fock.hpp: states on a truncated single-mode Fock space |0>, ..., |N>.

#pragma once

#include "qphase/numerics.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace qphase {

/// Pure-state amplitudes psi_m, m = 0..cutoff.
///
/// `tail_mass` is the probability that lies above the cutoff and was dropped
/// rather than renormalised away, so that sum |psi_m|^2 + tail_mass == 1.
struct FockVector {
    Vector amplitudes;
    int cutoff = 0;
    double tail_mass = 0.0;
    bool truncation_warning = false;

    double norm_squared() const { return amplitudes.squaredNorm(); }
    Complex operator[](int m) const { return amplitudes(m); }
};

/// Density matrix rho_mn on the truncated basis. `trace_deficit` is the mass
/// lost to truncation, either at construction or in a channel application.
struct DensityMatrix {
    Matrix entries;
    int cutoff = 0;
    double trace_deficit = 0.0;
    bool truncation_warning = false;

    int dim() const { return cutoff + 1; }
    double trace() const { return entries.trace().real(); }
    Complex operator()(int m, int n) const { return entries(m, n); }

    // Wraps an explicit matrix; cutoff is inferred from its size.
    static DensityMatrix from_matrix(Matrix m, double trace_deficit = 0.0);
};

inline constexpr double kTailWarningThreshold = 1e-8;

FockVector coherent_state(Complex alpha, int cutoff);
FockVector fock_basis_state(int n, int cutoff);
DensityMatrix thermal_state(double beta, int cutoff);

/// Hilbert-Schmidt random density matrix G G^dag / tr(G G^dag) with a
/// dim x dim complex Ginibre G, embedded in the top-left block. Draws come
/// from the counter stream (seed, sample), so the result is a pure function
/// of its arguments.
DensityMatrix random_hs_density(int dim, int cutoff, std::uint64_t seed, std::uint64_t sample = 0);

DensityMatrix pure_density(const FockVector& psi);

// |theta_{t,s}> with theta_{t,s} = 2 pi t / (s + 1).
FockVector number_phase_state(int t, int s);
double number_phase_angle(int t, int s);

// (s+1)^{-1/2} sum_{n<=s} e^{i n phi} |n>; phi is reduced mod 2 pi.
FockVector continuous_phase_state(double phi, int s);

/// Invariant violations of a density matrix (empty when valid).
std::vector<std::string> validate(const DensityMatrix& rho, double tol = 1e-10);
std::vector<std::string> validate(const FockVector& psi, double tol = 1e-10);

// Smallest n whose cumulative diagonal mass reaches (1 - 1e-10) of the trace.
int photon_number_quantile(const DensityMatrix& rho, double level = 1.0 - 1e-10);

// ---------------------------------------------------------------------------
// State-spec mini-language
//
//   coherent:r=<float>,psi=<float>
//   thermal:beta=<float>
//   fock:n=<int>
//   random:dim=<int>,seed=<int>
// ---------------------------------------------------------------------------

struct CoherentSpec { double r = 0.0; double psi = 0.0; };
struct ThermalSpec { double beta = 1.0; };
struct FockSpec { int n = 0; };
struct RandomSpec { int dim = 2; std::uint64_t seed = 0; };

using StateSpec = std::variant<CoherentSpec, ThermalSpec, FockSpec, RandomSpec>;

class StateSpecError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

StateSpec parse_state_spec(std::string_view text);
std::string to_string(const StateSpec& spec);

// Cutoff used when none is given on the command line.
int default_cutoff(const StateSpec& spec);

struct PreparedState {
    DensityMatrix rho;
    std::optional<FockVector> pure;  // set for coherent and fock specs
};

PreparedState prepare_state(const StateSpec& spec, int cutoff);

} // namespace qphase
