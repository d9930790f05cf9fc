#include "fisherlab/io.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

namespace {

using namespace fisherlab;

Params parse_theta(const std::string &text, int expected) {
    std::vector<double> values;
    if (!text.empty()) {
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                std::size_t pos = 0;
                values.push_back(std::stod(item, &pos));
                if (pos != item.size()) {
                    throw std::invalid_argument(item);
                }
            } catch (const std::exception &) {
                throw ConfigError("cannot parse parameter value \"" + item + "\"");
            }
        }
    }
    if (static_cast<int>(values.size()) != expected) {
        std::ostringstream msg;
        msg << "expected " << expected << " parameter value(s), got " << values.size();
        throw ConfigError(msg.str());
    }
    Params theta(expected);
    for (int i = 0; i < expected; ++i) {
        theta(i) = values[static_cast<std::size_t>(i)];
    }
    return theta;
}

Measurement parse_basis(const std::string &basis, int n_qubits) {
    if (basis == "z") {
        return Measurement::computational(n_qubits);
    }
    if (basis == "x") {
        if (n_qubits > 8) {
            throw ConfigError("x basis measurement is materialized explicitly; 8 qubits max");
        }
        Eigen::MatrixXcd h(2, 2);
        const double s = 1.0 / std::sqrt(2.0);
        h << s, s, s, -s;
        Eigen::MatrixXcd u = h;
        for (int q = 1; q < n_qubits; ++q) {
            u = linalg::kron(u, h);
        }
        std::vector<Eigen::MatrixXcd> effects;
        for (Eigen::Index l = 0; l < u.cols(); ++l) {
            effects.push_back(u.col(l) * u.col(l).adjoint());
        }
        return Measurement::from_effects(std::move(effects));
    }
    throw ConfigError("unknown basis \"" + basis + "\" (use z or x)");
}

// "depolarizing:0.1", "dephasing:0.2@1", "damping:0.3@0" -- optional @GATE
// pins the channel after one gate, otherwise it fires after every gate.
NoiseSpec parse_noise(const std::vector<std::string> &specs, const ParamCircuit &circuit) {
    NoiseSpec noise;
    for (const std::string &raw : specs) {
        std::string body = raw;
        std::optional<std::size_t> at;
        if (auto pos = raw.find('@'); pos != std::string::npos) {
            body = raw.substr(0, pos);
            try {
                at = std::stoul(raw.substr(pos + 1));
            } catch (const std::exception &) {
                throw ConfigError("cannot parse gate index in noise spec \"" + raw + "\"");
            }
        }
        auto colon = body.find(':');
        if (colon == std::string::npos) {
            throw ConfigError("noise spec must look like NAME:P[@GATE], got \"" + raw + "\"");
        }
        const std::string name = body.substr(0, colon);
        double p = 0.0;
        try {
            p = std::stod(body.substr(colon + 1));
        } catch (const std::exception &) {
            throw ConfigError("cannot parse probability in noise spec \"" + raw + "\"");
        }

        auto channel_on = [&](int q) -> NoiseChannel {
            if (name == "depolarizing") {
                return depolarizing(p, q);
            }
            if (name == "dephasing") {
                return dephasing(p, q);
            }
            if (name == "damping") {
                return amplitude_damping(p, q);
            }
            throw ConfigError("unknown noise channel \"" + name + "\"");
        };

        std::vector<std::size_t> positions;
        if (at) {
            if (*at >= circuit.gates.size()) {
                throw ConfigError("noise spec refers to a gate index out of range");
            }
            positions.push_back(*at);
        } else {
            for (std::size_t g = 0; g < circuit.gates.size(); ++g) {
                positions.push_back(g);
            }
        }
        for (std::size_t g : positions) {
            for (int q : circuit.gates[g].targets) {
                noise.push_back(GateNoise{g, channel_on(q)});
            }
        }
    }
    return noise;
}

void emit(const std::string &out_path, const std::string &content) {
    if (out_path.empty()) {
        std::cout << content;
    } else {
        io::write_file(out_path, content);
    }
}

struct CommonFlags {
    std::string circuit_path;
    std::string theta_text;
    std::string method = "exact";
    std::string basis = "z";
    std::string out_path;
    std::string format = "json";
    std::int64_t shots = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;
    double epsilon = 0.0;
};

void require_seed(const CommonFlags &flags, const std::string &what) {
    if (!flags.seed_given) {
        throw ConfigError("seed required for " + what);
    }
}

int run_cfim(const CommonFlags &flags) {
    ParamCircuit circuit = io::circuit_from_file(flags.circuit_path);
    Params theta = parse_theta(flags.theta_text, circuit.n_params);
    Measurement m = parse_basis(flags.basis, circuit.n_qubits);

    FisherMatrix result;
    if (flags.method == "exact") {
        result = cfim_exact(circuit, theta, m);
    } else if (flags.method == "sampled") {
        require_seed(flags, "--method sampled");
        if (flags.shots <= 0) {
            throw ConfigError("--shots must be positive for --method sampled");
        }
        JacobianMode mode = flags.epsilon > 0.0 ? JacobianMode(CentralFDMode{flags.epsilon})
                                                : JacobianMode(ParamShiftMode{});
        result = cfim_sampled(circuit, theta, m, flags.shots, flags.seed, mode);
    } else {
        throw ConfigError("cfim method must be exact or sampled");
    }
    emit(flags.out_path, io::fisher_to_json(result));
    return 0;
}

int run_qfim(const CommonFlags &flags, int ghz_n, const std::string &encoding, int samples,
             const std::vector<std::string> &noise_specs) {
    ParamCircuit circuit;
    Params theta;
    if (ghz_n > 0) {
        if (encoding != "collective-phase") {
            throw ConfigError("--ghz requires --encoding collective-phase");
        }
        SensingModel model{ghz_probe(ghz_n), collective_phase_encoding(ghz_n),
                           empty_stage(ghz_n)};
        ComposedModel composed = compose(model);
        circuit = composed.circuit;
        theta = flags.theta_text.empty() ? Params::Zero(1)
                                         : parse_theta(flags.theta_text, circuit.n_params);
    } else {
        circuit = io::circuit_from_file(flags.circuit_path);
        theta = parse_theta(flags.theta_text, circuit.n_params);
    }

    FisherMatrix result;
    if (flags.method == "exact") {
        result = qfim_pure(circuit, theta);
    } else if (flags.method == "param-shift") {
        result = qfim_param_shift(circuit, theta);
    } else if (flags.method == "spsa") {
        require_seed(flags, "--method spsa");
        const double eps = flags.epsilon > 0.0 ? flags.epsilon : 0.01;
        result = qfim_spsa(circuit, theta, eps, samples, flags.seed, /*psd_project=*/false);
    } else if (flags.method == "fd-projection") {
        // full matrix from directional projections by polarization
        const double eps = flags.epsilon > 0.0 ? flags.epsilon : 1e-3;
        const int d = circuit.n_params;
        Eigen::MatrixXd entries(d, d);
        for (int i = 0; i < d; ++i) {
            Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
            e(i) = 1.0;
            entries(i, i) = qfim_projection_fd(circuit, theta, e, eps);
        }
        for (int i = 0; i < d; ++i) {
            for (int j = i + 1; j < d; ++j) {
                Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
                v(i) = 1.0 / std::sqrt(2.0);
                v(j) = 1.0 / std::sqrt(2.0);
                const double q = qfim_projection_fd(circuit, theta, v, eps);
                entries(i, j) = q - 0.5 * (entries(i, i) + entries(j, j));
                entries(j, i) = entries(i, j);
            }
        }
        result.entries = std::move(entries);
        result.kind = FisherKind::Quantum;
        result.method = FisherMethod::FiniteDiff;
        result.meta.epsilon = eps;
    } else if (flags.method == "mixed") {
        if (noise_specs.empty()) {
            throw ConfigError("--method mixed requires at least one --noise spec");
        }
        NoiseSpec noise = parse_noise(noise_specs, circuit);
        MixedFamily family = mixed_family(circuit, theta, noise);
        result = qfim_mixed(family.rho, family.derivatives);
    } else {
        throw ConfigError("qfim method must be exact, param-shift, spsa, fd-projection or mixed");
    }
    emit(flags.out_path, io::fisher_to_json(result));
    return 0;
}

Observable parse_observable(const std::string &text, int n_qubits) {
    // "ZZ:1.0,XI:0.5" -> sum of weighted Pauli words
    std::vector<std::pair<std::string, double>> terms;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto colon = item.find(':');
        if (colon == std::string::npos) {
            throw ConfigError("observable terms must look like WORD:COEFF, got \"" + item + "\"");
        }
        try {
            terms.emplace_back(item.substr(0, colon), std::stod(item.substr(colon + 1)));
        } catch (const std::exception &) {
            throw ConfigError("cannot parse observable coefficient in \"" + item + "\"");
        }
    }
    if (terms.empty()) {
        throw ConfigError("empty observable");
    }
    try {
        return pauli_observable(terms, n_qubits);
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
}

int run_qng(const CommonFlags &flags, const std::string &observable_text, double eta,
            double lambda, int max_iters, double grad_tol, const std::string &opt_method,
            double beta, int spsa_samples) {
    ParamCircuit circuit = io::circuit_from_file(flags.circuit_path);
    Params theta0 = parse_theta(flags.theta_text, circuit.n_params);
    CostFunction cost{circuit, parse_observable(observable_text, circuit.n_qubits)};

    OptimizerConfig config;
    config.eta = eta;
    config.lambda_reg = lambda;
    config.max_iters = max_iters;
    config.grad_norm_tol = grad_tol;
    config.beta = beta;
    config.seed = flags.seed;
    config.spsa_samples = spsa_samples;
    if (flags.epsilon > 0.0) {
        config.spsa_epsilon = flags.epsilon;
    }
    if (opt_method == "gd") {
        config.method = OptMethod::GradientDescent;
    } else if (opt_method == "qng") {
        config.method = OptMethod::QuantumNaturalGradient;
    } else if (opt_method == "spsa-qng") {
        require_seed(flags, "--method spsa-qng");
        if (spsa_samples < 1) {
            throw ConfigError("--samples must be positive for spsa-qng");
        }
        config.method = OptMethod::SpsaQng;
    } else {
        throw ConfigError("qng method must be gd, qng or spsa-qng");
    }

    OptTrace trace = minimize(cost, theta0, config);
    if (flags.format == "jsonl" || flags.format == "json") {
        emit(flags.out_path, io::trace_to_jsonl(trace));
    } else if (flags.format == "csv") {
        emit(flags.out_path, io::trace_to_csv(trace));
    } else {
        throw ConfigError("trace format must be jsonl or csv");
    }

    const OptRecord &last = trace.records.back();
    std::cout << "{\"iterations\":" << trace.records.size() - 1 << ",\"converged\":"
              << (trace.converged ? "true" : "false")
              << ",\"finalCost\":" << io::format_double(last.cost)
              << ",\"finalGradNorm\":" << io::format_double(last.grad_norm) << "}\n";
    return 0;
}

int run_sense_scaling(const CommonFlags &flags, const std::string &strategy, int n_min, int n_max) {
    if (n_min < 1 || n_max < n_min) {
        throw ConfigError("scaling needs 1 <= n-min <= n-max");
    }
    ProbeStrategy probe;
    if (strategy == "ghz") {
        probe = ProbeStrategy::Ghz;
    } else if (strategy == "separate") {
        probe = ProbeStrategy::Separate;
    } else {
        throw ConfigError("strategy must be ghz or separate");
    }
    std::vector<int> counts;
    for (int n = n_min; n <= n_max; ++n) {
        counts.push_back(n);
    }
    ScalingResult result = scaling_experiment(counts, probe);
    emit(flags.out_path, io::scaling_to_csv(result));
    std::cout << "{\"strategy\":\"" << strategy
              << "\",\"loglogSlope\":" << io::format_double(result.loglog_slope) << "}\n";
    return 0;
}

int run_sense_mle(const CommonFlags &flags, double phi, int repeats, double grid_lo,
                  double grid_hi, int grid_points) {
    require_seed(flags, "sense mle");
    if (flags.shots <= 0) {
        throw ConfigError("--shots must be positive for sense mle");
    }
    SensingModel model{plus_probes(1), phase_encoding(1, 0), x_measurement_stage(1)};
    GridSpec grid{grid_lo, grid_hi, grid_points};
    EstimatorResult result =
        mle_estimate(model, Params(0), phi, Params(0), flags.shots, grid, flags.seed, repeats);
    emit(flags.out_path, io::estimates_to_csv(result));

    FisherMatrix info = sensing_cfim(model, Params(0), (Params(1) << phi).finished(), Params(0));
    const double crb = crb_bound(info, flags.shots).matrix(0, 0);
    std::cout << "{\"mean\":" << io::format_double(result.mean)
              << ",\"variance\":" << io::format_double(result.variance)
              << ",\"crb\":" << io::format_double(crb) << "}\n";
    return 0;
}

int run_spectrum(const std::string &matrix_path, double rank_tol, const std::string &out_path) {
    FisherMatrix fisher = io::fisher_from_file(matrix_path);
    Eigen::VectorXd spectrum = fisher_spectrum(fisher);
    int dimension = effective_quantum_dimension(fisher, rank_tol);
    emit(out_path, io::spectrum_to_json(spectrum, dimension, rank_tol));
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Fisher information toolkit for parametrized quantum circuits"};
    app.require_subcommand(1);

    CommonFlags flags;
    int ghz_n = 0;
    std::string encoding = "collective-phase";
    int samples = 100;
    std::vector<std::string> noise_specs;

    auto add_common = [&](CLI::App *cmd, bool with_circuit) {
        if (with_circuit) {
            cmd->add_option("--circuit", flags.circuit_path, "circuit JSON file");
            cmd->add_option("--theta", flags.theta_text, "comma-separated parameter values");
        }
        cmd->add_option("--method", flags.method, "computation method");
        cmd->add_option("--shots", flags.shots, "shot count for sampled estimates");
        cmd->add_option("--seed", flags.seed, "RNG seed (required for stochastic methods)")
            ->each([&](const std::string &) { flags.seed_given = true; });
        cmd->add_option("--epsilon", flags.epsilon, "finite-difference / SPSA step");
        cmd->add_option("--out", flags.out_path, "output file (stdout when omitted)");
        cmd->add_option("--format", flags.format, "output format (json|csv|jsonl)");
    };

    CLI::App *cfim = app.add_subcommand("cfim", "classical Fisher information matrix");
    add_common(cfim, true);
    cfim->add_option("--basis", flags.basis, "measurement basis (z|x)");

    CLI::App *qfim = app.add_subcommand("qfim", "quantum Fisher information matrix");
    add_common(qfim, true);
    qfim->add_option("--ghz", ghz_n, "build a GHZ probe with collective phase encoding");
    qfim->add_option("--encoding", encoding, "encoding for --ghz (collective-phase)");
    qfim->add_option("--samples", samples, "SPSA sample count");
    qfim->add_option("--noise", noise_specs, "noise spec NAME:P[@GATE] (mixed method)");

    std::string observable_text;
    double eta = 0.1, lambda = 1e-6, grad_tol = 1e-8, beta = 0.0;
    int max_iters = 100, spsa_samples = 0;
    CLI::App *qng = app.add_subcommand("qng", "quantum natural gradient descent");
    add_common(qng, true);
    qng->add_option("--observable", observable_text, "cost observable, e.g. ZZ:1.0,XI:0.5");
    qng->add_option("--eta", eta, "step size");
    qng->add_option("--lambda", lambda, "Tikhonov regularizer");
    qng->add_option("--max-iters", max_iters, "iteration budget");
    qng->add_option("--grad-tol", grad_tol, "gradient norm stopping tolerance");
    qng->add_option("--beta", beta, "metric smoothing weight (spsa-qng)");
    qng->add_option("--samples", spsa_samples, "SPSA samples per iteration (spsa-qng)");

    std::string strategy = "ghz";
    int n_min = 1, n_max = 5, repeats = 100, grid_points = 10000;
    double phi = 0.7, grid_lo = 0.05, grid_hi = M_PI - 0.05;
    CLI::App *sense = app.add_subcommand("sense", "sensing experiments");
    sense->require_subcommand(1);
    CLI::App *scaling = sense->add_subcommand("scaling", "Fisher information vs probe count");
    add_common(scaling, false);
    scaling->add_option("--strategy", strategy, "ghz|separate");
    scaling->add_option("--n-min", n_min, "smallest probe count");
    scaling->add_option("--n-max", n_max, "largest probe count");
    CLI::App *mle = sense->add_subcommand("mle", "grid maximum-likelihood phase estimation");
    add_common(mle, false);
    mle->add_option("--phi", phi, "true phase");
    mle->add_option("--repeats", repeats, "independent repeats");
    mle->add_option("--grid-lo", grid_lo, "grid lower end");
    mle->add_option("--grid-hi", grid_hi, "grid upper end");
    mle->add_option("--grid-points", grid_points, "grid resolution");

    std::string matrix_path;
    double rank_tol = 1e-8;
    std::string spectrum_out;
    CLI::App *spectrum = app.add_subcommand("spectrum", "eigenvalues and effective dimension");
    spectrum->add_option("--matrix", matrix_path, "FisherMatrix JSON file")->required();
    spectrum->add_option("--rank-tol", rank_tol, "relative rank threshold");
    spectrum->add_option("--out", spectrum_out, "output file (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e); // --help
        }
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (cfim->parsed()) {
            if (flags.circuit_path.empty()) {
                throw ConfigError("--circuit is required");
            }
            return run_cfim(flags);
        }
        if (qfim->parsed()) {
            if (ghz_n == 0 && flags.circuit_path.empty()) {
                throw ConfigError("--circuit or --ghz is required");
            }
            return run_qfim(flags, ghz_n, encoding, samples, noise_specs);
        }
        if (qng->parsed()) {
            if (flags.circuit_path.empty()) {
                throw ConfigError("--circuit is required");
            }
            if (qng->count("--method") == 0) {
                flags.method = "qng";
            }
            if (flags.format == "json") {
                flags.format = "jsonl";
            }
            return run_qng(flags, observable_text, eta, lambda, max_iters, grad_tol, flags.method,
                           beta, spsa_samples);
        }
        if (scaling->parsed()) {
            return run_sense_scaling(flags, strategy, n_min, n_max);
        }
        if (mle->parsed()) {
            return run_sense_mle(flags, phi, repeats, grid_lo, grid_hi, grid_points);
        }
        if (spectrum->parsed()) {
            return run_spectrum(matrix_path, rank_tol, spectrum_out);
        }
        std::cerr << "error: no command selected\n";
        return 2;
    } catch (const ConfigError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ComputationError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
