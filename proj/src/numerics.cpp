#include "qphase/numerics.hpp"

#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qphase {

double log_factorial(int n) {
    if (n < 0) throw std::domain_error("log_factorial: negative argument");
    return std::lgamma(static_cast<double>(n) + 1.0);
}

double log_binomial(int n, int k) {
    if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

LogFactorialTable::LogFactorialTable(int n_max) {
    if (n_max < 0) throw std::domain_error("LogFactorialTable: negative size");
    table_.resize(static_cast<std::size_t>(n_max) + 1);
    table_[0] = 0.0;
    // Each entry from lgamma directly, not a running sum.
    for (int n = 1; n <= n_max; ++n) table_[static_cast<std::size_t>(n)] = std::lgamma(n + 1.0);
}

QuadratureRule gauss_legendre(int n, double a, double b) {
    if (n < 1) throw std::domain_error("gauss_legendre: need at least one node");
    if (!(b > a)) throw std::domain_error("gauss_legendre: empty interval");

    // Boost returns the non-negative roots of P_n in increasing order.
    const std::vector<double> roots = boost::math::legendre_p_zeros<double>(n);
    std::vector<double> x;
    x.reserve(static_cast<std::size_t>(n));
    for (auto it = roots.rbegin(); it != roots.rend(); ++it) {
        if (*it > 0.0) x.push_back(-*it);
    }
    for (double r : roots) x.push_back(r);

    QuadratureRule rule;
    rule.nodes.reserve(x.size());
    rule.weights.reserve(x.size());
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    for (double xi : x) {
        const double dp = boost::math::legendre_p_prime(n, xi);
        const double w = 2.0 / ((1.0 - xi * xi) * dp * dp);
        rule.nodes.push_back(mid + half * xi);
        rule.weights.push_back(half * w);
    }
    return rule;
}

QuadratureRule composite_gauss_legendre(int nodes_per_panel, int panels, double a, double b) {
    if (panels < 1) throw std::domain_error("composite_gauss_legendre: need at least one panel");
    QuadratureRule out;
    const double width = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * width;
        const double hi = (p + 1 == panels) ? b : lo + width;
        QuadratureRule panel = gauss_legendre(nodes_per_panel, lo, hi);
        out.nodes.insert(out.nodes.end(), panel.nodes.begin(), panel.nodes.end());
        out.weights.insert(out.weights.end(), panel.weights.begin(), panel.weights.end());
    }
    return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream_id)
    : key_(splitmix64(splitmix64(seed) ^ (stream_id * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL))) {}

std::uint64_t CounterRng::next_u64() {
    return splitmix64(key_ ^ splitmix64(counter_++));
}

double CounterRng::uniform() {
    // 53 random mantissa bits, shifted off zero.
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

Complex CounterRng::complex_normal() {
    const double re = normal();
    const double im = normal();
    return {re, im};
}

Matrix pad_to(const Matrix& m, Eigen::Index dim) {
    if (m.rows() != m.cols()) throw std::invalid_argument("pad_to: matrix is not square");
    if (dim < m.rows()) throw std::invalid_argument("pad_to: target smaller than matrix");
    Matrix out = Matrix::Zero(dim, dim);
    out.topLeftCorner(m.rows(), m.cols()) = m;
    return out;
}

double min_eigenvalue(const Matrix& m) {
    const Matrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double trace_distance(const Matrix& a, const Matrix& b) {
    const Eigen::Index dim = std::max(a.rows(), b.rows());
    const Matrix diff = pad_to(a, dim) - pad_to(b, dim);
    const Matrix h = 0.5 * (diff + diff.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double hermiticity_defect(const Matrix& m) {
    if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

} // namespace qphase
