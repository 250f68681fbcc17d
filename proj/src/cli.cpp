#include "qphase/cli.hpp"

#include "qphase/emit.hpp"
#include "qphase/experiments.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

namespace qphase::cli {

namespace {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Validation failure on a computed result (exit 3).
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string state;
    std::optional<int> s;
    std::optional<double> eps;
    std::optional<double> kappa;
    std::optional<double> lambda;
    int grid = 512;
    std::optional<int> cutoff;
    int samples = 1000;
    std::uint64_t seed = 42;
    int terms = 100;
    double phi = 0.3;
    int threads = 1;
    std::string normalization;
    std::string format = "csv";
    std::string out_path;
};

constexpr double kNormTolerance = 1e-6;

std::string sci(double v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

std::int64_t as_int(std::uint64_t v) { return static_cast<std::int64_t>(v); }

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

AmplifiedNormalization parse_normalization(const std::string& text, AmplifiedNormalization fallback) {
    if (text.empty()) return fallback;
    if (text == "exact") return AmplifiedNormalization::finite_dimension;
    if (text == "table") return AmplifiedNormalization::limit_prefactor;
    throw std::invalid_argument("unknown normalization '" + text + "' (expected exact or table)");
}

const char* normalization_name(AmplifiedNormalization n) {
    return n == AmplifiedNormalization::finite_dimension ? "exact" : "table";
}

struct LoadedState {
    StateSpec spec;
    PreparedState prepared;
    int cutoff = 0;
};

LoadedState load_state(const Options& o, Table& table) {
    require(!o.state.empty(), "--state is required");
    LoadedState st;
    st.spec = parse_state_spec(o.state);
    st.cutoff = o.cutoff ? *o.cutoff : default_cutoff(st.spec);
    require(st.cutoff >= 0, "--cutoff must be >= 0");
    st.prepared = prepare_state(st.spec, st.cutoff);
    table.add_meta("state", to_string(st.spec));
    table.add_meta("cutoff", static_cast<std::int64_t>(st.cutoff));
    const DensityMatrix& rho = st.prepared.rho;
    table.add_meta("state_trace_deficit", rho.trace_deficit);
    if (rho.truncation_warning) {
        table.warnings.push_back("state tail mass " + sci(rho.trace_deficit) + " lies above the cutoff");
    }
    return st;
}

AmplifierParams amplifier_from(const Options& o, Table& table) {
    if (o.eps) {
        require(o.s.has_value(), "--eps needs --s (kappa = 1 + s eps)");
        require(!o.kappa, "give either --eps or --kappa, not both");
        const AmplifierParams p = AmplifierParams::linear(*o.s, *o.eps);
        table.add_meta("eps", *o.eps);
        table.add_meta("kappa", p.kappa());
        return p;
    }
    require(o.kappa.has_value(), "amplifier strength needs --kappa or --s with --eps");
    const AmplifierParams p = AmplifierParams::strength(*o.kappa);
    table.add_meta("kappa", p.kappa());
    return p;
}

void add_distribution(const PhaseDistribution& d, Table& table, bool validate) {
    table.add_meta("grid", static_cast<std::int64_t>(d.grid.size()));
    table.add_meta("quad_error", d.quad_error);
    table.add_meta("truncation_deficit", d.truncation_deficit);
    table.add_meta("integral", d.integral());
    if (d.quad_error > kQuadratureWarningThreshold) {
        table.warnings.push_back("quadrature error bound " + sci(d.quad_error) + " exceeds 1e-6");
    }
    if (d.truncation_deficit > kDiscardWarningThreshold) {
        table.warnings.push_back("mass outside the represented block " + sci(d.truncation_deficit));
    }
    table.columns = {"phi", "density"};
    for (int i = 0; i < d.grid.size(); ++i) {
        table.rows.push_back({d.grid.point(i), d.density[static_cast<std::size_t>(i)]});
    }
    if (validate && d.normalization_error() > kNormTolerance + d.quad_error) {
        throw NumericalFailure("distribution integrates to " + format_double(d.integral()) +
                               ", expected " + format_double(1.0 - d.truncation_deficit));
    }
}

void add_matrix(const Matrix& m, Table& table) {
    table.columns = {"m", "n", "re", "im"};
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            table.rows.push_back({static_cast<std::int64_t>(i), static_cast<std::int64_t>(j), m(i, j).real(),
                                  m(i, j).imag()});
        }
    }
}

// ---------------------------------------------------------------------------

void cmd_paul(const Options& o, Table& t) {
    const LoadedState st = load_state(o, t);
    const QuadratureConfig qc = QuadratureConfig::for_state(st.prepared.rho, o.grid);
    t.add_meta("radial_nodes", static_cast<std::int64_t>(qc.radial_nodes));
    t.add_meta("r_max", qc.r_max);
    add_distribution(paul_distribution(st.prepared.rho, qc), t, true);
}

void cmd_pb(const Options& o, Table& t) {
    require(o.s.has_value(), "--s is required");
    const LoadedState st = load_state(o, t);
    t.add_meta("s", static_cast<std::int64_t>(*o.s));
    add_distribution(pb_continuous_distribution(st.prepared.rho, *o.s, PhaseGrid(o.grid)), t, true);
}

void cmd_pb_discrete(const Options& o, Table& t) {
    require(o.s.has_value(), "--s is required");
    const LoadedState st = load_state(o, t);
    const int s = *o.s;
    t.add_meta("s", static_cast<std::int64_t>(s));
    const std::vector<double> p = pb_discrete_distribution(st.prepared.rho, s);
    t.columns = {"t", "theta", "probability"};
    for (int k = 0; k <= s; ++k) {
        t.rows.push_back({static_cast<std::int64_t>(k), number_phase_angle(k, s), p[static_cast<std::size_t>(k)]});
    }
}

void cmd_amplified_pb(const Options& o, Table& t) {
    require(o.s.has_value(), "--s is required");
    const LoadedState st = load_state(o, t);
    t.add_meta("s", static_cast<std::int64_t>(*o.s));
    const AmplifierParams params = amplifier_from(o, t);
    const AmplifiedNormalization norm = parse_normalization(o.normalization, AmplifiedNormalization::finite_dimension);
    t.add_meta("normalization", std::string(normalization_name(norm)));
    const AmplifiedPhaseKernel kernel(*o.s, params, st.cutoff, {norm, std::nullopt});
    const PhaseDistribution d = kernel.distribution(st.prepared.rho, PhaseGrid(o.grid));
    // The table convention is not a normalised density at finite s.
    add_distribution(d, t, norm == AmplifiedNormalization::finite_dimension);
}

void cmd_amplify(const Options& o, Table& t) {
    const LoadedState st = load_state(o, t);
    const AmplifierParams params = amplifier_from(o, t);
    const DensityMatrix out = qla_apply(st.prepared.rho, params);
    t.add_meta("out_cutoff", static_cast<std::int64_t>(out.cutoff));
    t.add_meta("trace", out.trace());
    t.add_meta("trace_deficit", out.trace_deficit);
    if (out.truncation_warning) {
        t.warnings.push_back("amplifier output lost " + sci(out.trace_deficit) + " of trace to truncation");
    }
    add_matrix(out.entries, t);
}

void cmd_attenuate(const Options& o, Table& t) {
    require(o.lambda.has_value(), "--lambda is required");
    const LoadedState st = load_state(o, t);
    const AttenuatorParams params(*o.lambda);
    t.add_meta("lambda", params.lambda());
    const Matrix out = attenuator_apply(st.prepared.rho.entries, params, st.cutoff);
    t.add_meta("trace", out.trace().real());
    add_matrix(out, t);
}

void add_ratio_columns(Table& t) { t.columns = {"s", "eps", "phi", "mean", "max_dev", "n_samples", "seed"}; }

void add_ratio_row(const RatioEntry& e, Table& t) {
    t.rows.push_back({static_cast<std::int64_t>(e.s), e.eps, e.phi, e.mean, e.max_dev,
                      static_cast<std::int64_t>(e.n_samples), as_int(e.seed)});
}

void cmd_ratio(const Options& o, Table& t) {
    require(o.s.has_value(), "--s is required");
    require(o.eps.has_value(), "--eps is required");
    const LoadedState st = load_state(o, t);
    const AmplifiedNormalization norm = parse_normalization(o.normalization, AmplifiedNormalization::finite_dimension);
    t.add_meta("normalization", std::string(normalization_name(norm)));
    const auto* random = std::get_if<RandomSpec>(&st.spec);
    const std::uint64_t seed = random ? random->seed : 0;
    const double r = ratio_R(st.prepared.rho, *o.s, *o.eps, o.phi, norm);
    add_ratio_columns(t);
    add_ratio_row({*o.s, *o.eps, o.phi, r, 0.0, 1, seed}, t);
}

void cmd_table1(const Options& o, Table& t) {
    RatioTableConfig cfg;
    cfg.samples = o.samples;
    cfg.seed = o.seed;
    cfg.phi = o.phi;
    cfg.threads = o.threads;
    cfg.normalization = parse_normalization(o.normalization, AmplifiedNormalization::limit_prefactor);
    require(cfg.samples >= 1, "--samples must be >= 1");
    require(cfg.threads >= 1, "--threads must be >= 1");
    t.add_meta("samples", static_cast<std::int64_t>(cfg.samples));
    t.add_meta("seed", as_int(cfg.seed));
    t.add_meta("phi", cfg.phi);
    t.add_meta("normalization", std::string(normalization_name(cfg.normalization)));
    t.add_meta("ensemble", std::string("hilbert-schmidt qubit"));
    const RatioReport report = ratio_table_run(cfg);
    add_ratio_columns(t);
    for (const auto& e : report.entries) add_ratio_row(e, t);
}

void cmd_fig1a(const Options& o, Table& t) {
    const std::vector<double> r_primes{0.5, 2.0};
    t.add_meta("psi", kPi);
    t.add_meta("grid", static_cast<std::int64_t>(o.grid));
    t.add_meta("terms", static_cast<std::int64_t>(o.terms));
    const ProfileData data = phase_profiles_run(r_primes, kPi, PhaseGrid(o.grid), o.terms);
    t.columns = {"phi"};
    for (double r : r_primes) {
        t.columns.push_back("paul_r" + format_double(r));
        t.columns.push_back("pb_r" + format_double(r));
    }
    for (const auto& row : data.rows) {
        std::vector<Cell> cells{row.phi};
        for (std::size_t k = 0; k < r_primes.size(); ++k) {
            cells.emplace_back(row.paul[k]);
            cells.emplace_back(row.pb[k]);
        }
        t.rows.push_back(std::move(cells));
    }
}

void cmd_fig1b(const Options& o, Table& t) {
    const double eps = o.eps.value_or(0.01);
    t.add_meta("r_prime", 2.0);
    t.add_meta("psi", kPi);
    t.add_meta("eps", eps);
    t.add_meta("terms", static_cast<std::int64_t>(o.terms));
    t.add_meta("normalization", std::string("exact"));
    const auto rows = ratio_convergence_run(2.0, kPi, eps, {100, 1000, 10000}, {1, 2, 3, 4, 5, 6, 7, 8, 9}, o.terms);
    t.columns = {"s_plus_1", "t", "phi", "ratio"};
    for (const auto& r : rows) {
        t.rows.push_back({static_cast<std::int64_t>(r.s_plus_1), static_cast<std::int64_t>(r.t), r.phi, r.ratio});
    }
}

void cmd_nonlinear(const Options& o, Table& t) {
    const StateSpec spec = parse_state_spec(o.state.empty() ? "thermal:beta=0.69314718055994531" : o.state);
    const auto* thermal = std::get_if<ThermalSpec>(&spec);
    require(thermal != nullptr, "nonlinear needs a thermal state");
    const double eps = o.eps.value_or(0.01);
    std::vector<int> s_list{100, 200, 400};
    if (o.s) s_list = {*o.s};
    t.add_meta("state", to_string(spec));
    t.add_meta("eps", eps);
    t.add_meta("schedule", std::string("kappa = 1 + s^2 eps"));
    t.columns = {"s", "eps", "kappa", "closed_form", "numerical"};
    for (const auto& r : nonlinear_amplification_scan(thermal->beta, eps, s_list)) {
        t.rows.push_back({static_cast<std::int64_t>(r.s), r.eps, r.kappa, r.closed_form, r.numerical});
    }
}

void cmd_checks(const Options&, Table& t) {
    t.columns = {"name", "passed", "value", "threshold"};
    std::vector<std::string> failed;
    for (const auto& c : run_checks()) {
        t.rows.push_back({c.name, static_cast<std::int64_t>(c.passed ? 1 : 0), c.value, c.threshold});
        if (!c.passed) failed.push_back(c.name);
    }
    for (const auto& name : failed) t.warnings.push_back("check failed: " + name);
}

// ---------------------------------------------------------------------------

struct Command {
    std::string name;
    std::string help;
    std::vector<std::string> flags;
    std::function<void(const Options&, Table&)> body;
};

void add_flags(CLI::App& sub, Options& o, const std::vector<std::string>& flags) {
    for (const auto& f : flags) {
        if (f == "state") sub.add_option("--state", o.state, "state spec, e.g. coherent:r=2,psi=3.14159");
        else if (f == "s") sub.add_option("--s", o.s, "Pegg-Barnett dimension parameter")->check(CLI::NonNegativeNumber);
        else if (f == "eps") sub.add_option("--eps", o.eps, "amplification rate, kappa = 1 + s eps");
        else if (f == "kappa") sub.add_option("--kappa", o.kappa, "amplification strength (>= 1)");
        else if (f == "lambda") sub.add_option("--lambda", o.lambda, "attenuator transmissivity in [0, 1]");
        else if (f == "grid") sub.add_option("--grid", o.grid, "phase grid size")->check(CLI::PositiveNumber);
        else if (f == "cutoff") sub.add_option("--cutoff", o.cutoff, "Fock cutoff")->check(CLI::NonNegativeNumber);
        else if (f == "samples") sub.add_option("--samples", o.samples, "Monte Carlo samples")->check(CLI::PositiveNumber);
        else if (f == "seed") sub.add_option("--seed", o.seed, "random seed");
        else if (f == "terms") sub.add_option("--terms", o.terms, "series terms")->check(CLI::PositiveNumber);
        else if (f == "phi") sub.add_option("--phi", o.phi, "phase angle in radians");
        else if (f == "threads") sub.add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
        else if (f == "normalization") sub.add_option("--normalization", o.normalization, "exact | table");
    }
    sub.add_option("--format", o.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    sub.add_option("--out", o.out_path, "output path (default: standard output)");
}

std::vector<Command> commands() {
    return {
        {"paul", "Paul phase distribution on a grid", {"state", "grid", "cutoff"}, cmd_paul},
        {"pb", "continuous Pegg-Barnett phase density", {"state", "s", "grid", "cutoff"}, cmd_pb},
        {"pb-discrete", "Pegg-Barnett probabilities at the number-phase angles", {"state", "s", "cutoff"},
         cmd_pb_discrete},
        {"amplified-pb", "Pegg-Barnett density of the amplified state",
         {"state", "s", "eps", "kappa", "grid", "cutoff", "normalization"}, cmd_amplified_pb},
        {"amplify", "apply the quantum limited amplifier", {"state", "s", "eps", "kappa", "cutoff"}, cmd_amplify},
        {"attenuate", "apply the pure-loss attenuator", {"state", "lambda", "cutoff"}, cmd_attenuate},
        {"ratio", "amplified Pegg-Barnett over Paul density at one angle",
         {"state", "s", "eps", "phi", "cutoff", "normalization"}, cmd_ratio},
        {"table1", "ratio table over Hilbert-Schmidt random qubits",
         {"samples", "seed", "phi", "threads", "normalization"}, cmd_table1},
        {"fig1a", "Paul and Pegg-Barnett densities of two coherent states", {"grid", "terms"}, cmd_fig1a},
        {"fig1b", "ratio convergence for a coherent state", {"eps", "terms"}, cmd_fig1b},
        {"nonlinear", "thermal density under kappa = 1 + s^2 eps", {"state", "s", "eps"}, cmd_nonlinear},
        {"checks", "run the built-in property suite", {}, cmd_checks},
    };
}

void emit(const Table& table, const Options& o, std::ostream& out) {
    const Format format = parse_format(o.format);
    if (o.out_path.empty() || o.out_path == "-") {
        write_table(table, format, out);
        return;
    }
    std::ofstream file(o.out_path, std::ios::binary);
    if (!file) throw IoError("cannot open output file '" + o.out_path + "'");
    write_table(table, format, file);
    file.flush();
    if (!file) throw IoError("write failed for '" + o.out_path + "'");
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Phase distributions of amplified single-mode states", "qphase"};
    app.require_subcommand(1);
    Options o;
    const auto cmds = commands();
    std::map<CLI::App*, const Command*> dispatch;
    for (const auto& c : cmds) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        add_flags(*sub, o, c.flags);
        dispatch[sub] = &c;
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    const Command* cmd = nullptr;
    for (const auto& [sub, c] : dispatch) {
        if (sub->parsed()) cmd = c;
    }
    if (cmd == nullptr) {
        err << "error: no subcommand\n";
        return kExitUsage;
    }

    Table table;
    table.add_meta("command", cmd->name);
    table.add_meta("format", o.format);
    try {
        cmd->body(o, table);
        emit(table, o, out);
    } catch (const NumericalFailure& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const DegenerateDenominator& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::overflow_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::out_of_range& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    }

    if (cmd->name == "checks") {
        for (const auto& w : table.warnings) err << w << '\n';
        if (!table.warnings.empty()) return kExitNumerical;
    }
    return kExitOk;
}

} // namespace qphase::cli
