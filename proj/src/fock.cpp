#include "qphase/fock.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace qphase {

namespace {

void require_cutoff(int cutoff, const char* where) {
    if (cutoff < 0) throw std::invalid_argument(std::string(where) + ": cutoff must be >= 0");
}

double reduce_angle(double phi) {
    double r = std::fmod(phi, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    return r;
}

} // namespace

DensityMatrix DensityMatrix::from_matrix(Matrix m, double trace_deficit) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw std::invalid_argument("DensityMatrix::from_matrix: need a non-empty square matrix");
    }
    DensityMatrix rho;
    rho.cutoff = static_cast<int>(m.rows()) - 1;
    rho.entries = std::move(m);
    rho.trace_deficit = trace_deficit;
    return rho;
}

FockVector coherent_state(Complex alpha, int cutoff) {
    require_cutoff(cutoff, "coherent_state");
    if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag())) {
        throw std::invalid_argument("coherent_state: amplitude must be finite");
    }
    FockVector psi;
    psi.cutoff = cutoff;
    psi.amplitudes = Vector::Zero(cutoff + 1);

    const double r = std::abs(alpha);
    if (r == 0.0) {
        psi.amplitudes(0) = 1.0;
    } else {
        const double log_r = std::log(r);
        const double theta = std::arg(alpha);
        for (int m = 0; m <= cutoff; ++m) {
            const double log_mag = -0.5 * r * r + m * log_r - 0.5 * log_factorial(m);
            psi.amplitudes(m) = std::exp(log_mag) * std::polar(1.0, m * theta);
        }
    }
    psi.tail_mass = std::max(0.0, 1.0 - psi.norm_squared());
    psi.truncation_warning = psi.tail_mass > kTailWarningThreshold;
    return psi;
}

FockVector fock_basis_state(int n, int cutoff) {
    require_cutoff(cutoff, "fock_basis_state");
    if (n < 0 || n > cutoff) throw std::out_of_range("fock_basis_state: n outside [0, cutoff]");
    FockVector psi;
    psi.cutoff = cutoff;
    psi.amplitudes = Vector::Zero(cutoff + 1);
    psi.amplitudes(n) = 1.0;
    return psi;
}

DensityMatrix thermal_state(double beta, int cutoff) {
    require_cutoff(cutoff, "thermal_state");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw std::domain_error("thermal_state: beta must be > 0");
    DensityMatrix rho;
    rho.cutoff = cutoff;
    rho.entries = Matrix::Zero(cutoff + 1, cutoff + 1);
    const double ground = -std::expm1(-beta);  // 1 - e^{-beta}
    for (int n = 0; n <= cutoff; ++n) rho.entries(n, n) = ground * std::exp(-beta * n);
    rho.trace_deficit = std::exp(-beta * (cutoff + 1.0));
    rho.truncation_warning = rho.trace_deficit > kTailWarningThreshold;
    return rho;
}

DensityMatrix random_hs_density(int dim, int cutoff, std::uint64_t seed, std::uint64_t sample) {
    require_cutoff(cutoff, "random_hs_density");
    if (dim < 1 || dim > cutoff + 1) throw std::out_of_range("random_hs_density: need 1 <= dim <= cutoff + 1");

    CounterRng rng(seed, sample);
    Matrix g(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) g(i, j) = rng.complex_normal();
    }
    Matrix w = g * g.adjoint();
    w /= w.trace().real();
    w = 0.5 * (w + w.adjoint());

    DensityMatrix rho;
    rho.cutoff = cutoff;
    rho.entries = Matrix::Zero(cutoff + 1, cutoff + 1);
    rho.entries.topLeftCorner(dim, dim) = w;
    return rho;
}

DensityMatrix pure_density(const FockVector& psi) {
    DensityMatrix rho;
    rho.cutoff = psi.cutoff;
    rho.entries = psi.amplitudes * psi.amplitudes.adjoint();
    rho.trace_deficit = psi.tail_mass;
    rho.truncation_warning = psi.truncation_warning;
    return rho;
}

double number_phase_angle(int t, int s) {
    return kTwoPi * t / (s + 1.0);
}

FockVector number_phase_state(int t, int s) {
    if (s < 0) throw std::invalid_argument("number_phase_state: s must be >= 0");
    if (t < 0 || t > s) throw std::out_of_range("number_phase_state: t outside [0, s]");
    return continuous_phase_state(number_phase_angle(t, s), s);
}

FockVector continuous_phase_state(double phi, int s) {
    if (s < 0) throw std::invalid_argument("continuous_phase_state: s must be >= 0");
    const double angle = reduce_angle(phi);
    const double norm = 1.0 / std::sqrt(s + 1.0);
    FockVector v;
    v.cutoff = s;
    v.amplitudes.resize(s + 1);
    for (int n = 0; n <= s; ++n) v.amplitudes(n) = norm * std::polar(1.0, n * angle);
    return v;
}

std::vector<std::string> validate(const DensityMatrix& rho, double tol) {
    std::vector<std::string> issues;
    if (rho.entries.rows() != rho.cutoff + 1 || rho.entries.cols() != rho.cutoff + 1) {
        issues.emplace_back("shape does not match cutoff");
        return issues;
    }
    if (!rho.entries.allFinite()) {
        issues.emplace_back("non-finite entries");
        return issues;
    }
    if (hermiticity_defect(rho.entries) > 1e-12) issues.emplace_back("not Hermitian");
    const double tr = rho.trace();
    if (tr < 1.0 - rho.trace_deficit - tol || tr > 1.0 + tol) issues.emplace_back("trace outside tolerance");
    if (min_eigenvalue(rho.entries) < -tol) issues.emplace_back("negative eigenvalue");
    return issues;
}

std::vector<std::string> validate(const FockVector& psi, double tol) {
    std::vector<std::string> issues;
    if (psi.amplitudes.size() != psi.cutoff + 1) {
        issues.emplace_back("shape does not match cutoff");
        return issues;
    }
    if (!psi.amplitudes.allFinite()) issues.emplace_back("non-finite amplitudes");
    const double total = psi.norm_squared() + psi.tail_mass;
    if (std::abs(total - 1.0) > tol) issues.emplace_back("norm plus tail mass differs from one");
    return issues;
}

int photon_number_quantile(const DensityMatrix& rho, double level) {
    const double target = level * rho.trace();
    double cumulative = 0.0;
    for (int n = 0; n <= rho.cutoff; ++n) {
        cumulative += rho.entries(n, n).real();
        if (cumulative >= target) return n;
    }
    return rho.cutoff;
}

// ---------------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::map<std::string, std::string_view> parse_fields(std::string_view body, std::string_view text) {
    std::map<std::string, std::string_view> fields;
    if (body.empty()) return fields;
    std::size_t pos = 0;
    while (pos <= body.size()) {
        const std::size_t comma = body.find(',', pos);
        const std::string_view item = trim(body.substr(pos, comma == std::string_view::npos ? body.npos : comma - pos));
        const std::size_t eq = item.find('=');
        if (eq == std::string_view::npos || eq == 0) {
            throw StateSpecError("malformed state spec '" + std::string(text) + "': expected key=value");
        }
        const std::string key(trim(item.substr(0, eq)));
        if (!fields.emplace(key, trim(item.substr(eq + 1))).second) {
            throw StateSpecError("malformed state spec '" + std::string(text) + "': duplicate key '" + key + "'");
        }
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return fields;
}

template <class T>
T parse_number(std::string_view value, const std::string& key, std::string_view text) {
    T out{};
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw StateSpecError("malformed state spec '" + std::string(text) + "': bad value for '" + key + "'");
    }
    return out;
}

void require_keys(const std::map<std::string, std::string_view>& fields,
                  std::initializer_list<const char*> keys, std::string_view text) {
    for (const auto& [key, value] : fields) {
        bool known = false;
        for (const char* k : keys) known = known || key == k;
        if (!known) throw StateSpecError("malformed state spec '" + std::string(text) + "': unknown key '" + key + "'");
    }
    for (const char* k : keys) {
        if (!fields.count(k)) {
            throw StateSpecError("malformed state spec '" + std::string(text) + "': missing key '" + k + "'");
        }
    }
}

std::string format_double(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

} // namespace

StateSpec parse_state_spec(std::string_view text) {
    const std::string_view s = trim(text);
    const std::size_t colon = s.find(':');
    if (colon == std::string_view::npos) {
        throw StateSpecError("malformed state spec '" + std::string(text) + "': expected <kind>:<fields>");
    }
    const std::string_view kind = trim(s.substr(0, colon));
    const auto fields = parse_fields(s.substr(colon + 1), text);

    if (kind == "coherent") {
        require_keys(fields, {"r", "psi"}, text);
        CoherentSpec spec{parse_number<double>(fields.at("r"), "r", text),
                          parse_number<double>(fields.at("psi"), "psi", text)};
        if (!(spec.r >= 0.0) || !std::isfinite(spec.r) || !std::isfinite(spec.psi)) {
            throw StateSpecError("state spec '" + std::string(text) + "': r must be finite and >= 0");
        }
        return spec;
    }
    if (kind == "thermal") {
        require_keys(fields, {"beta"}, text);
        ThermalSpec spec{parse_number<double>(fields.at("beta"), "beta", text)};
        if (!(spec.beta > 0.0) || !std::isfinite(spec.beta)) {
            throw StateSpecError("state spec '" + std::string(text) + "': beta must be > 0");
        }
        return spec;
    }
    if (kind == "fock") {
        require_keys(fields, {"n"}, text);
        FockSpec spec{parse_number<int>(fields.at("n"), "n", text)};
        if (spec.n < 0) throw StateSpecError("state spec '" + std::string(text) + "': n must be >= 0");
        return spec;
    }
    if (kind == "random") {
        require_keys(fields, {"dim", "seed"}, text);
        RandomSpec spec{parse_number<int>(fields.at("dim"), "dim", text),
                        parse_number<std::uint64_t>(fields.at("seed"), "seed", text)};
        if (spec.dim < 1) throw StateSpecError("state spec '" + std::string(text) + "': dim must be >= 1");
        return spec;
    }
    throw StateSpecError("malformed state spec '" + std::string(text) + "': unknown kind '" + std::string(kind) + "'");
}

std::string to_string(const StateSpec& spec) {
    struct Printer {
        std::string operator()(const CoherentSpec& c) const {
            return "coherent:r=" + format_double(c.r) + ",psi=" + format_double(c.psi);
        }
        std::string operator()(const ThermalSpec& t) const { return "thermal:beta=" + format_double(t.beta); }
        std::string operator()(const FockSpec& f) const { return "fock:n=" + std::to_string(f.n); }
        std::string operator()(const RandomSpec& r) const {
            return "random:dim=" + std::to_string(r.dim) + ",seed=" + std::to_string(r.seed);
        }
    };
    return std::visit(Printer{}, spec);
}

int default_cutoff(const StateSpec& spec) {
    struct Chooser {
        int operator()(const CoherentSpec& c) const {
            // Poisson(r^2) tail below ~1e-14 for r <= 6.
            return std::max(40, static_cast<int>(std::ceil(c.r * c.r + 10.0 * c.r + 30.0)));
        }
        int operator()(const ThermalSpec& t) const {
            const double n = std::ceil(std::log(1e12) / t.beta) - 1.0;
            return static_cast<int>(std::clamp(n, 1.0, 4000.0));
        }
        int operator()(const FockSpec& f) const { return f.n; }
        int operator()(const RandomSpec& r) const { return r.dim - 1; }
    };
    return std::visit(Chooser{}, spec);
}

PreparedState prepare_state(const StateSpec& spec, int cutoff) {
    struct Builder {
        int cutoff;
        PreparedState operator()(const CoherentSpec& c) const {
            FockVector psi = coherent_state(std::polar(c.r, c.psi), cutoff);
            DensityMatrix rho = pure_density(psi);
            return {std::move(rho), std::move(psi)};
        }
        PreparedState operator()(const ThermalSpec& t) const { return {thermal_state(t.beta, cutoff), std::nullopt}; }
        PreparedState operator()(const FockSpec& f) const {
            FockVector psi = fock_basis_state(f.n, cutoff);
            DensityMatrix rho = pure_density(psi);
            return {std::move(rho), std::move(psi)};
        }
        PreparedState operator()(const RandomSpec& r) const {
            return {random_hs_density(r.dim, cutoff, r.seed), std::nullopt};
        }
    };
    return std::visit(Builder{cutoff}, spec);
}

} // namespace qphase
