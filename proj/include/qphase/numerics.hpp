// numerics.hpp: shared numeric plumbing, log-factorials, Gauss-Legendre rules,
// a counter-based random stream and a few Hermitian-matrix helpers.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <vector>

namespace qphase {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

double log_factorial(int n);

// log C(n, k); -inf when k is outside [0, n].
double log_binomial(int n, int k);

/// Tabulated log(n!) for n = 0..n_max. Avoids repeated lgamma calls in
/// inner loops and is safe to share between threads once built.
class LogFactorialTable {
public:
    explicit LogFactorialTable(int n_max);

    double operator()(int n) const { return table_[static_cast<std::size_t>(n)]; }
    int max_n() const { return static_cast<int>(table_.size()) - 1; }

private:
    std::vector<double> table_;
};

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

// n-point Gauss-Legendre rule mapped onto [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

// `panels` equal sub-intervals of [a, b], each with an n-point rule.
QuadratureRule composite_gauss_legendre(int nodes_per_panel, int panels, double a, double b);

/// Counter-based random stream. Draw k of stream (seed, stream_id) is a pure
/// function of (seed, stream_id, k), so sample i never depends on how many
/// other samples were drawn before it or on which thread drew them.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t next_u64();
    // Uniform on the open interval (0, 1).
    double uniform();
    double normal();
    // Real and imaginary parts i.i.d. N(0, 1).
    Complex complex_normal();

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

// Zero-pads a square matrix to dim x dim (dim >= current size).
Matrix pad_to(const Matrix& m, Eigen::Index dim);

// Smallest eigenvalue of the Hermitian part of m.
double min_eigenvalue(const Matrix& m);

// Half the trace norm of (a - b); the smaller operand is zero-padded.
double trace_distance(const Matrix& a, const Matrix& b);

// Largest entrywise |m_ij - conj(m_ji)|.
double hermiticity_defect(const Matrix& m);

} // namespace qphase
