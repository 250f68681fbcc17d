#include "qphase/channels.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qphase {

AmplifierParams AmplifierParams::strength(double kappa) {
    if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw std::domain_error("amplifier: kappa must be >= 1");
    return {kappa, Schedule::fixed, std::nullopt, std::nullopt};
}

AmplifierParams AmplifierParams::linear(int s, double eps) {
    if (s < 0) throw std::domain_error("amplifier: s must be >= 0");
    if (!(eps > 0.0) || !std::isfinite(eps)) throw std::domain_error("amplifier: eps must be > 0");
    return {1.0 + s * eps, Schedule::linear, s, eps};
}

AmplifierParams AmplifierParams::quadratic(int s, double eps) {
    if (s < 0) throw std::domain_error("amplifier: s must be >= 0");
    if (!(eps > 0.0) || !std::isfinite(eps)) throw std::domain_error("amplifier: eps must be > 0");
    const double sd = static_cast<double>(s);
    return {1.0 + sd * sd * eps, Schedule::quadratic, s, eps};
}

AttenuatorParams::AttenuatorParams(double lambda) : lambda_(lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::domain_error("attenuator: lambda must lie in [0, 1]");
}

int default_out_cutoff(int in_cutoff, double kappa, double tail_tol) {
    if (in_cutoff < 0) throw std::invalid_argument("default_out_cutoff: negative cutoff");
    if (!(kappa >= 1.0)) throw std::domain_error("default_out_cutoff: kappa must be >= 1");
    const double mean = kappa * (in_cutoff + 1.0);
    const int base = static_cast<int>(std::ceil(mean + 4.0 * std::sqrt(mean) + 10.0));
    if (kappa == 1.0) return std::max(base, in_cutoff);

    // P(J > k) for the j-distribution of the top input level is I_q(k+1, N+1).
    const double q = (kappa - 1.0) / kappa;
    const double levels = in_cutoff + 1.0;
    auto tail = [&](int k) { return boost::math::ibeta(k + 1.0, levels, q); };

    constexpr int kCap = 1 << 16;
    int hi = std::max(1, base - in_cutoff);
    while (tail(hi) > tail_tol && hi < kCap) hi = std::min(kCap, 2 * hi);
    int lo = 0;
    while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        if (tail(mid) > tail_tol) lo = mid; else hi = mid;
    }
    return std::max(base, in_cutoff + hi);
}

DensityMatrix qla_apply(const DensityMatrix& rho, const AmplifierParams& params, int out_cutoff) {
    const double kappa = params.kappa();
    if (!(kappa >= 1.0)) throw std::domain_error("qla_apply: kappa must be >= 1");
    if (out_cutoff < rho.cutoff) throw std::invalid_argument("qla_apply: out_cutoff below input cutoff");

    const int n_in = rho.cutoff;
    DensityMatrix out;
    out.cutoff = out_cutoff;
    out.entries = Matrix::Zero(out_cutoff + 1, out_cutoff + 1);

    if (kappa == 1.0) {
        out.entries.topLeftCorner(n_in + 1, n_in + 1) = rho.entries;
        out.trace_deficit = rho.trace_deficit;
        out.truncation_warning = rho.truncation_warning;
        return out;
    }

    const LogFactorialTable lf(out_cutoff + 1);
    const double log_kappa = std::log(kappa);
    const double log_q = std::log1p(-1.0 / kappa);
    const double q = std::exp(log_q);

    // A_kappa(rho) = sum_j T_j rho T_j^dag with diagonal-shift factors
    // t(j, m) = sqrt(kappa^{-1} q^j kappa^{-m} C(j+m, j)).
    std::vector<double> t(static_cast<std::size_t>(n_in) + 1);
    double accumulated = 0.0;
    for (int j = 0; j <= out_cutoff; ++j) {
        const int m_max = std::min(n_in, out_cutoff - j);
        for (int m = 0; m <= m_max; ++m) {
            const double log_t = 0.5 * (-log_kappa + j * log_q - m * log_kappa + lf(j + m) - lf(j) - lf(m));
            t[static_cast<std::size_t>(m)] = std::exp(log_t);
        }
        double mass = 0.0;
        for (int n = 0; n <= m_max; ++n) {
            const double tn = t[static_cast<std::size_t>(n)];
            for (int m = 0; m <= m_max; ++m) {
                out.entries(j + m, j + n) += t[static_cast<std::size_t>(m)] * tn * rho.entries(m, n);
            }
            mass += tn * tn * rho.entries(n, n).real();
        }
        accumulated += mass;

        // Past the mode the j-terms fall at least geometrically with ratio r.
        const double r = q * (j + n_in + 1.0) / (j + 1.0);
        if (r < 1.0 && accumulated > 0.0 && mass * r / (1.0 - r) < 1e-14 * accumulated) break;
    }

    const double discarded = std::max(0.0, rho.trace() - out.trace());
    out.trace_deficit = rho.trace_deficit + discarded;
    out.truncation_warning = rho.truncation_warning || discarded > kDiscardWarningThreshold;
    return out;
}

DensityMatrix qla_apply(const DensityMatrix& rho, const AmplifierParams& params) {
    return qla_apply(rho, params, default_out_cutoff(rho.cutoff, params.kappa()));
}

double qla_thermal_closed_form(double beta, double kappa) {
    if (!(beta > 0.0)) throw std::domain_error("qla_thermal_closed_form: beta must be > 0");
    if (!(kappa >= 1.0)) throw std::domain_error("qla_thermal_closed_form: kappa must be >= 1");
    return std::log(kappa / (std::exp(-beta) + kappa - 1.0));
}

Matrix attenuator_apply(const Matrix& op, const AttenuatorParams& params, int out_cutoff) {
    if (op.rows() != op.cols() || op.rows() == 0) throw std::invalid_argument("attenuator_apply: need a square operator");
    if (out_cutoff < 0) throw std::invalid_argument("attenuator_apply: out_cutoff must be >= 0");
    const double lambda = params.lambda();
    const int n_in = static_cast<int>(op.rows()) - 1;

    Matrix out = Matrix::Zero(out_cutoff + 1, out_cutoff + 1);
    const LogFactorialTable lf(n_in);
    const double log_lambda = std::log(lambda);
    const double log_loss = std::log1p(-lambda);

    // k(j, n) = <n-j|K_j|n>; zero powers handled explicitly so that lambda = 0
    // and lambda = 1 give the exact vacuum and identity maps.
    auto kraus = [&](int j, int n) -> double {
        const int kept = n - j;
        if (kept > 0 && lambda == 0.0) return 0.0;
        if (j > 0 && lambda == 1.0) return 0.0;
        double log_k = 0.5 * (lf(n) - lf(j) - lf(kept));
        if (kept > 0) log_k += 0.5 * kept * log_lambda;
        if (j > 0) log_k += 0.5 * j * log_loss;
        return std::exp(log_k);
    };

    std::vector<double> k(static_cast<std::size_t>(n_in) + 1);
    for (int j = 0; j <= n_in; ++j) {
        for (int n = j; n <= n_in; ++n) k[static_cast<std::size_t>(n)] = kraus(j, n);
        const int n_max = std::min(n_in, out_cutoff + j);
        for (int n2 = j; n2 <= n_max; ++n2) {
            const double k2 = k[static_cast<std::size_t>(n2)];
            if (k2 == 0.0) continue;
            for (int n1 = j; n1 <= n_max; ++n1) {
                out(n1 - j, n2 - j) += k[static_cast<std::size_t>(n1)] * k2 * op(n1, n2);
            }
        }
    }
    return out;
}

Matrix gkls_generator(const DensityMatrix& rho) {
    const int n = rho.cutoff + 1;
    Matrix out = Matrix::Zero(n + 1, n + 1);
    for (int m = 0; m <= n; ++m) {
        for (int k = 0; k <= n; ++k) {
            Complex value = 0.0;
            // a^dag rho a
            if (m >= 1 && k >= 1) value += std::sqrt(static_cast<double>(m) * k) * rho.entries(m - 1, k - 1);
            // -1/2 (a a^dag rho + rho a a^dag), with a a^dag = N + 1
            if (m <= rho.cutoff && k <= rho.cutoff) value -= 0.5 * (m + k + 2.0) * rho.entries(m, k);
            out(m, k) = value;
        }
    }
    return out;
}

std::pair<double, double> duality_pair(const DensityMatrix& rho, const Matrix& obs, double kappa) {
    if (!(kappa >= 1.0)) throw std::domain_error("duality_pair: kappa must be >= 1");
    if (obs.rows() != obs.cols() || obs.rows() < rho.dim()) {
        throw std::invalid_argument("duality_pair: observable must be square and cover the state block");
    }
    const int obs_cutoff = static_cast<int>(obs.rows()) - 1;

    const DensityMatrix amplified = qla_apply(rho, AmplifierParams::strength(kappa), obs_cutoff);
    const double forward = (amplified.entries * obs).trace().real();

    const Matrix attenuated = attenuator_apply(obs, AttenuatorParams(1.0 / kappa), rho.cutoff) / kappa;
    const double backward = (rho.entries * attenuated).trace().real();
    return {forward, backward};
}

Matrix number_operator(int cutoff) {
    Matrix n = Matrix::Zero(cutoff + 1, cutoff + 1);
    for (int k = 0; k <= cutoff; ++k) n(k, k) = static_cast<double>(k);
    return n;
}

Matrix annihilation_operator(int cutoff) {
    Matrix a = Matrix::Zero(cutoff + 1, cutoff + 1);
    for (int k = 1; k <= cutoff; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    return a;
}

} // namespace qphase
