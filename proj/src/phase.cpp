#include "qphase/phase.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qphase {

namespace {

constexpr double kClampTolerance = 1e-12;
constexpr double kMaxLogWeight = 700.0;

// Clamps tiny negative jitter to zero; returns the clamp magnitude.
double clamp_jitter(double& value) {
    if (value < 0.0 && value >= -kClampTolerance) {
        const double magnitude = -value;
        value = 0.0;
        return magnitude;
    }
    return 0.0;
}

// c_d = sum_m rho_{m, m+d} * w(m, m+d) for d = 0..top over the block 0..top.
template <class Weight>
std::vector<Complex> offset_sums(const DensityMatrix& rho, int top, Weight&& weight) {
    std::vector<Complex> c(static_cast<std::size_t>(top) + 1, Complex{});
    for (int d = 0; d <= top; ++d) {
        Complex acc = 0.0;
        for (int m = 0; m + d <= top; ++m) acc += rho.entries(m, m + d) * weight(m, m + d);
        c[static_cast<std::size_t>(d)] = acc;
    }
    return c;
}

// c_0 + 2 Re sum_{d>0} c_d e^{i d phi}
double fourier_real(const std::vector<Complex>& c, double phi) {
    double value = c.empty() ? 0.0 : c[0].real();
    for (std::size_t d = 1; d < c.size(); ++d) {
        value += 2.0 * (c[d] * std::polar(1.0, static_cast<double>(d) * phi)).real();
    }
    return value;
}

double require_linear_eps(const AmplifierParams& params) {
    if (params.schedule() != Schedule::linear || !params.eps()) {
        throw std::invalid_argument("limit_prefactor normalization needs a linear schedule kappa = 1 + s eps");
    }
    return *params.eps();
}

double amplified_prefactor(int s, const AmplifierParams& params, AmplifiedNormalization norm) {
    if (norm == AmplifiedNormalization::limit_prefactor) {
        const double eps = require_linear_eps(params);
        return 1.0 / (kTwoPi * eps * (s + 1.0));
    }
    return 1.0 / (kTwoPi * params.kappa());
}

// log of q^{j/2} sqrt(C(j+m, j) kappa^{-m}); -inf when q = 0 and j > 0.
struct AmplifiedLogWeight {
    const LogFactorialTable& lf;
    double log_q;
    double log_kappa;

    double operator()(int j, int m) const {
        const double jq = (j == 0) ? 0.0 : j * log_q;
        return 0.5 * (jq + lf(j + m) - lf(j) - lf(m) - m * log_kappa);
    }
};

} // namespace

// ---------------------------------------------------------------------------

PhaseGrid::PhaseGrid(int size) : size_(size) {
    if (size < 1) throw std::invalid_argument("PhaseGrid: size must be >= 1");
}

std::vector<double> PhaseGrid::points() const {
    std::vector<double> p(static_cast<std::size_t>(size_));
    for (int i = 0; i < size_; ++i) p[static_cast<std::size_t>(i)] = point(i);
    return p;
}

double PhaseDistribution::integral() const {
    double sum = 0.0;
    for (double p : density) sum += p;
    return sum * grid.spacing();
}

double PhaseDistribution::normalization_error() const {
    return std::abs(integral() - (1.0 - truncation_deficit));
}

PhaseFunction::PhaseFunction(std::map<int, Complex> coefficients) : coefficients_(std::move(coefficients)) {}

PhaseFunction PhaseFunction::constant(Complex c) { return PhaseFunction({{0, c}}); }

PhaseFunction PhaseFunction::harmonic(int k, Complex c) { return PhaseFunction({{k, c}}); }

Complex PhaseFunction::operator()(double phi) const {
    Complex value = 0.0;
    for (const auto& [k, c] : coefficients_) value += c * std::polar(1.0, k * phi);
    return value;
}

Complex PhaseFunction::coefficient(int k) const {
    const auto it = coefficients_.find(k);
    return it == coefficients_.end() ? Complex{} : it->second;
}

int PhaseFunction::max_mode() const {
    int k_max = 0;
    for (const auto& [k, c] : coefficients_) k_max = std::max(k_max, std::abs(k));
    return k_max;
}

double PhaseFunction::bound() const {
    double b = 0.0;
    for (const auto& [k, c] : coefficients_) b += std::abs(c);
    return b;
}

QuadratureConfig QuadratureConfig::for_state(const DensityMatrix& rho, int grid_size) {
    QuadratureConfig cfg;
    cfg.r_max = std::sqrt(static_cast<double>(photon_number_quantile(rho))) + 8.0;
    cfg.grid_size = grid_size;
    return cfg;
}

void QuadratureConfig::check() const {
    if (radial_nodes < 16) throw std::invalid_argument("QuadratureConfig: radial_nodes must be >= 16");
    if (!(r_max > 0.0) || !std::isfinite(r_max)) throw std::invalid_argument("QuadratureConfig: r_max must be > 0");
    if (grid_size < 1) throw std::invalid_argument("QuadratureConfig: grid_size must be >= 1");
}

// ---------------------------------------------------------------------------
// Husimi / Paul

double husimi_q(const DensityMatrix& rho, Complex alpha) {
    const FockVector coh = coherent_state(alpha, rho.cutoff);
    const Complex value = coh.amplitudes.dot(rho.entries * coh.amplitudes);  // <alpha|rho|alpha>
    double q = value.real();
    clamp_jitter(q);
    return q;
}

PaulEvaluator::PaulEvaluator(int cutoff, const QuadratureConfig& cfg) : cutoff_(cutoff), cfg_(cfg) {
    if (cutoff < 0) throw std::invalid_argument("PaulEvaluator: cutoff must be >= 0");
    cfg_.check();
    const int panels = std::max(1, static_cast<int>(std::ceil(cfg_.r_max)));
    const QuadratureRule rule = composite_gauss_legendre(cfg_.radial_nodes, panels, 0.0, cfg_.r_max);
    const LogFactorialTable lf(cutoff);

    const auto nodes = static_cast<Eigen::Index>(rule.size());
    Eigen::MatrixXd v(nodes, cutoff + 1);
    Eigen::VectorXd w(nodes);
    for (Eigen::Index k = 0; k < nodes; ++k) {
        const double r = rule.nodes[static_cast<std::size_t>(k)];
        const double log_r = std::log(r);
        for (int m = 0; m <= cutoff; ++m) v(k, m) = std::exp(-0.5 * r * r + m * log_r - 0.5 * lf(m));
        w(k) = rule.weights[static_cast<std::size_t>(k)] * r / kPi;
    }
    moments_ = v.transpose() * w.asDiagonal() * v;
}

double PaulEvaluator::density(const DensityMatrix& rho, double phi) const {
    if (rho.cutoff > cutoff_) throw std::invalid_argument("PaulEvaluator: state exceeds evaluator cutoff");
    const auto c = offset_sums(rho, rho.cutoff, [&](int m, int n) { return moments_(m, n); });
    return fourier_real(c, phi);
}

double PaulEvaluator::tail_bound(const DensityMatrix& rho) const {
    // Q(alpha) <= (N+1) sum_n rho_nn |alpha_n|^2, and the radial tail of each
    // |alpha_n|^2 term is Gamma(n+1, r_max^2) / (2 pi n!).
    const double x = cfg_.r_max * cfg_.r_max;
    double sum = 0.0;
    for (int n = 0; n <= rho.cutoff; ++n) {
        const double p = rho.entries(n, n).real();
        if (p > 0.0) sum += p * boost::math::gamma_q(n + 1.0, x);
    }
    return (rho.cutoff + 1.0) * sum / kTwoPi;
}

PhaseDistribution paul_distribution(const DensityMatrix& rho, const QuadratureConfig& cfg) {
    const PaulEvaluator eval(rho.cutoff, cfg);
    PhaseDistribution dist{PhaseGrid(cfg.grid_size), {}, 0.0, rho.trace_deficit, false};
    dist.density.resize(static_cast<std::size_t>(cfg.grid_size));
    double clamped = 0.0;
    for (int i = 0; i < cfg.grid_size; ++i) {
        double p = eval.density(rho, dist.grid.point(i));
        clamped = std::max(clamped, clamp_jitter(p));
        dist.density[static_cast<std::size_t>(i)] = p;
    }
    // Harmonics d >= G alias onto the grid; |M_mn| <= 1/(2 pi).
    double aliased = 0.0;
    for (int d = cfg.grid_size; d <= rho.cutoff; ++d) {
        for (int m = 0; m + d <= rho.cutoff; ++m) aliased += std::abs(rho.entries(m, m + d)) / kPi;
    }
    dist.quad_error = eval.tail_bound(rho) + clamped + aliased;
    dist.warning = dist.quad_error > kQuadratureWarningThreshold || rho.truncation_warning;
    return dist;
}

PhaseDistribution paul_distribution(const DensityMatrix& rho) {
    return paul_distribution(rho, QuadratureConfig::for_state(rho));
}

double paul_density(const DensityMatrix& rho, double phi, const QuadratureConfig& cfg) {
    double p = PaulEvaluator(rho.cutoff, cfg).density(rho, phi);
    clamp_jitter(p);
    return p;
}

double paul_coherent_closed_form(double r_prime, double psi, double phi) {
    if (!(r_prime >= 0.0)) throw std::domain_error("paul_coherent_closed_form: r' must be >= 0");
    const double c = std::cos(phi - psi);
    const double x = r_prime * c;
    const double r2 = r_prime * r_prime;
    // e^{-r'^2} e^{r'^2 c^2} folded into one exponent; erf(x) + 1 = erfc(-x).
    const double peak = std::sqrt(kPi) * x * std::exp(-r2 * (1.0 - c * c)) * std::erfc(-x);
    return (std::exp(-r2) + peak) / kTwoPi;
}

Complex grid_expectation(const PhaseDistribution& dist, const PhaseFunction& f) {
    Complex sum = 0.0;
    for (int i = 0; i < dist.grid.size(); ++i) {
        sum += f(dist.grid.point(i)) * dist.density[static_cast<std::size_t>(i)];
    }
    return sum * dist.grid.spacing();
}

Complex paul_expectation(const DensityMatrix& rho, const PhaseFunction& f, const QuadratureConfig& cfg) {
    return grid_expectation(paul_distribution(rho, cfg), f);
}

// ---------------------------------------------------------------------------
// Pegg-Barnett

std::vector<double> pb_discrete_distribution(const DensityMatrix& rho, int s) {
    if (s < 0) throw std::invalid_argument("pb_discrete_distribution: s must be >= 0");
    const int top = std::min(s, rho.cutoff);
    const auto c = offset_sums(rho, top, [](int, int) { return 1.0; });
    std::vector<double> p(static_cast<std::size_t>(s) + 1);
    for (int t = 0; t <= s; ++t) {
        double value = fourier_real(c, number_phase_angle(t, s)) / (s + 1.0);
        clamp_jitter(value);
        p[static_cast<std::size_t>(t)] = value;
    }
    return p;
}

double pb_continuous_density(const DensityMatrix& rho, int s, double phi) {
    if (s < 0) throw std::invalid_argument("pb_continuous_density: s must be >= 0");
    const int top = std::min(s, rho.cutoff);
    const FockVector state = continuous_phase_state(phi, s);
    const auto v = state.amplitudes.head(top + 1);
    const Complex overlap = v.dot(rho.entries.topLeftCorner(top + 1, top + 1) * v);
    double value = (s + 1.0) / kTwoPi * overlap.real();
    clamp_jitter(value);
    return value;
}

PhaseDistribution pb_continuous_distribution(const DensityMatrix& rho, int s, const PhaseGrid& grid) {
    if (s < 0) throw std::invalid_argument("pb_continuous_distribution: s must be >= 0");
    const int top = std::min(s, rho.cutoff);
    const auto c = offset_sums(rho, top, [](int, int) { return 1.0; });
    PhaseDistribution dist{grid, {}, 0.0, 0.0, false};
    dist.density.resize(static_cast<std::size_t>(grid.size()));
    double clamped = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
        double p = fourier_real(c, grid.point(i)) / kTwoPi;
        clamped = std::max(clamped, clamp_jitter(p));
        dist.density[static_cast<std::size_t>(i)] = p;
    }
    // Offsets d >= G alias onto lower harmonics of the grid.
    double aliased = 0.0;
    for (int d = grid.size(); d <= top; ++d) aliased += 2.0 * std::abs(c[static_cast<std::size_t>(d)]);
    dist.quad_error = clamped + aliased;
    dist.truncation_deficit = std::max(0.0, 1.0 - c[0].real());
    dist.warning = dist.quad_error > kQuadratureWarningThreshold || rho.truncation_warning;
    return dist;
}

Complex pb_expectation(const DensityMatrix& rho, int s, const PhaseFunction& f) {
    const std::vector<double> p = pb_discrete_distribution(rho, s);
    Complex sum = 0.0;
    for (int t = 0; t <= s; ++t) sum += f(number_phase_angle(t, s)) * p[static_cast<std::size_t>(t)];
    return sum;
}

Matrix pb_operator(int s, const PhaseFunction& f) {
    if (s < 0) throw std::invalid_argument("pb_operator: s must be >= 0");
    // <m| sum_t f(theta_t) |theta_t><theta_t| |n> = sum_k c_k [k + m - n = 0 mod (s+1)]
    const int period = s + 1;
    Matrix op = Matrix::Zero(period, period);
    for (const auto& [k, c] : f.coefficients()) {
        for (int m = 0; m <= s; ++m) {
            for (int n = 0; n <= s; ++n) {
                const int r = ((k + m - n) % period + period) % period;
                if (r == 0) op(m, n) += c;
            }
        }
    }
    return op;
}

double pb_coherent_series(double r_prime, double psi, double phi, int terms) {
    if (terms < 1) throw std::invalid_argument("pb_coherent_series: terms must be >= 1");
    if (!(r_prime >= 0.0)) throw std::domain_error("pb_coherent_series: r' must be >= 0");
    if (r_prime == 0.0) return 1.0 / kTwoPi;
    const double log_r = std::log(r_prime);
    const double half_r2 = 0.5 * r_prime * r_prime;
    Complex sum = 0.0;
    for (int n = 0; n < terms; ++n) {
        const double log_mag = n * log_r - 0.5 * log_factorial(n) - half_r2;
        sum += std::exp(log_mag) * std::polar(1.0, n * (psi - phi));
    }
    return std::norm(sum) / kTwoPi;
}

// ---------------------------------------------------------------------------
// Amplified Pegg-Barnett

double pb_amplified_density(const FockVector& psi, int s, const AmplifierParams& params, double phi,
                            const AmplifiedPbOptions& options) {
    if (s < 0) throw std::invalid_argument("pb_amplified_density: s must be >= 0");
    if (options.inner_terms && *options.inner_terms < 1) {
        throw std::invalid_argument("pb_amplified_density: inner_terms must be >= 1");
    }
    const double kappa = params.kappa();
    const double prefactor = amplified_prefactor(s, params, options.normalization);
    const bool capped = options.normalization == AmplifiedNormalization::finite_dimension;

    int m_lim = psi.cutoff;
    if (options.inner_terms) m_lim = std::min(m_lim, *options.inner_terms - 1);

    const LogFactorialTable lf(s + m_lim + 1);
    const AmplifiedLogWeight log_weight{lf, std::log1p(-1.0 / kappa), std::log(kappa)};
    const int j_max = (kappa == 1.0) ? 0 : s;

    std::vector<Complex> a(static_cast<std::size_t>(m_lim) + 1);
    for (int m = 0; m <= m_lim; ++m) a[static_cast<std::size_t>(m)] = psi[m] * std::polar(1.0, -m * phi);

    double total = 0.0;
    for (int j = 0; j <= j_max; ++j) {
        const int top = capped ? std::min(m_lim, s - j) : m_lim;
        Complex inner = 0.0;
        for (int m = 0; m <= top; ++m) {
            const Complex am = a[static_cast<std::size_t>(m)];
            if (am == Complex{}) continue;
            const double lw = log_weight(j, m);
            if (lw > kMaxLogWeight) throw std::overflow_error("pb_amplified_density: weight overflow");
            inner += am * std::exp(lw);
        }
        total += std::norm(inner);
    }
    const double value = prefactor * total;
    if (!std::isfinite(value)) throw std::overflow_error("pb_amplified_density: non-finite result");
    return value;
}

double pb_amplified_density(const FockVector& psi, int s, double eps, double phi, const AmplifiedPbOptions& options) {
    return pb_amplified_density(psi, s, AmplifierParams::linear(s, eps), phi, options);
}

AmplifiedPhaseKernel::AmplifiedPhaseKernel(int s, const AmplifierParams& params, int state_cutoff,
                                           const AmplifiedPbOptions& options)
    : s_(s), cutoff_(state_cutoff) {
    if (s < 0) throw std::invalid_argument("AmplifiedPhaseKernel: s must be >= 0");
    if (state_cutoff < 0) throw std::invalid_argument("AmplifiedPhaseKernel: cutoff must be >= 0");
    const double kappa = params.kappa();
    const double prefactor = amplified_prefactor(s, params, options.normalization);
    const bool capped = options.normalization == AmplifiedNormalization::finite_dimension;

    int m_lim = state_cutoff;
    if (options.inner_terms) m_lim = std::min(m_lim, *options.inner_terms - 1);

    const LogFactorialTable lf(s + m_lim + 1);
    const AmplifiedLogWeight log_weight{lf, std::log1p(-1.0 / kappa), std::log(kappa)};
    const int j_max = (kappa == 1.0) ? 0 : s;

    weights_ = Eigen::MatrixXd::Zero(state_cutoff + 1, state_cutoff + 1);
    Eigen::VectorXd t(m_lim + 1);
    for (int j = 0; j <= j_max; ++j) {
        const int top = capped ? std::min(m_lim, s - j) : m_lim;
        if (top < 0) break;
        for (int m = 0; m <= top; ++m) {
            const double lw = log_weight(j, m);
            if (lw > kMaxLogWeight) throw std::overflow_error("AmplifiedPhaseKernel: weight overflow");
            t(m) = std::exp(lw);
        }
        weights_.topLeftCorner(top + 1, top + 1).noalias() += t.head(top + 1) * t.head(top + 1).transpose();
    }
    weights_ *= prefactor;
    if (!weights_.allFinite()) throw std::overflow_error("AmplifiedPhaseKernel: non-finite weights");
}

double AmplifiedPhaseKernel::density(const DensityMatrix& rho, double phi) const {
    if (rho.cutoff > cutoff_) throw std::invalid_argument("AmplifiedPhaseKernel: state exceeds kernel cutoff");
    const auto c = offset_sums(rho, rho.cutoff, [&](int m, int n) { return weights_(m, n); });
    double value = fourier_real(c, phi);
    clamp_jitter(value);
    return value;
}

PhaseDistribution AmplifiedPhaseKernel::distribution(const DensityMatrix& rho, const PhaseGrid& grid) const {
    if (rho.cutoff > cutoff_) throw std::invalid_argument("AmplifiedPhaseKernel: state exceeds kernel cutoff");
    const auto c = offset_sums(rho, rho.cutoff, [&](int m, int n) { return weights_(m, n); });
    PhaseDistribution dist{grid, {}, 0.0, 0.0, false};
    dist.density.resize(static_cast<std::size_t>(grid.size()));
    double clamped = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
        double p = fourier_real(c, grid.point(i));
        clamped = std::max(clamped, clamp_jitter(p));
        dist.density[static_cast<std::size_t>(i)] = p;
    }
    double aliased = 0.0;
    for (int d = grid.size(); d <= rho.cutoff; ++d) aliased += 2.0 * kTwoPi * std::abs(c[static_cast<std::size_t>(d)]);
    dist.quad_error = clamped + aliased;
    dist.truncation_deficit = std::max(0.0, 1.0 - kTwoPi * c[0].real());
    dist.warning = dist.quad_error > kQuadratureWarningThreshold;
    return dist;
}

Complex AmplifiedPhaseKernel::expectation(const DensityMatrix& rho, const PhaseFunction& f) const {
    if (rho.cutoff > cutoff_) throw std::invalid_argument("AmplifiedPhaseKernel: state exceeds kernel cutoff");
    const int top = rho.cutoff;
    const auto c = offset_sums(rho, top, [&](int m, int n) { return weights_(m, n); });
    // Block offset sums D_d = sum_m X_{m, m+d} of the amplified state X.
    auto block_sum = [&](int d) -> Complex {
        const Complex cd = c[static_cast<std::size_t>(std::abs(d))];
        return kTwoPi * (d >= 0 ? cd : std::conj(cd));
    };
    const int period = s_ + 1;
    Complex sum = 0.0;
    for (const auto& [k, ck] : f.coefficients()) {
        for (int d = -top; d <= top; ++d) {
            if (((d + k) % period + period) % period == 0) sum += ck * block_sum(d);
        }
    }
    return sum;
}

double AmplifiedPhaseKernel::block_mass(const DensityMatrix& rho) const {
    double mass = 0.0;
    for (int m = 0; m <= std::min(rho.cutoff, cutoff_); ++m) mass += rho.entries(m, m).real() * weights_(m, m);
    return kTwoPi * mass;
}

double pb_amplified_density(const DensityMatrix& rho, int s, const AmplifierParams& params, double phi,
                            const AmplifiedPbOptions& options) {
    return AmplifiedPhaseKernel(s, params, rho.cutoff, options).density(rho, phi);
}

double dominating_series(double eps, int start) {
    if (!(eps > 0.0)) throw std::domain_error("dominating_series: eps must be > 0");
    if (start < 0) throw std::invalid_argument("dominating_series: start must be >= 0");
    const double log_eps = std::log(eps);
    const double peak = 1.0 / eps;
    double sum = 0.0;
    for (int m = start;; ++m) {
        const double term = std::exp(-0.5 * (log_factorial(m) + m * log_eps));
        sum += term;
        if (m > peak && term < 1e-16) break;
        if (m > 1000000) throw std::runtime_error("dominating_series: no convergence");
    }
    return sum;
}

DominationPair appendix_a_bound(double eps, int s, double phi, const FockVector& psi, double f_bound) {
    if (!(eps > 0.0)) throw std::domain_error("appendix_a_bound: eps must be > 0");
    if (!(f_bound >= 0.0)) throw std::domain_error("appendix_a_bound: f_bound must be >= 0");
    if (f_bound == 0.0) return {0.0, 0.0};
    const double density = pb_amplified_density(psi, s, eps, phi);
    const double series = dominating_series(eps);
    return {f_bound * density, f_bound / (kTwoPi * eps) * series * series};
}

} // namespace qphase
