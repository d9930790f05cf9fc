#include "fisherlab/metrology.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace fisherlab {

namespace {

void append_stage(std::vector<Gate> &gates, std::vector<std::vector<std::size_t>> &layers,
                  const ParamCircuit &stage, int param_offset) {
    const std::size_t gate_offset = gates.size();
    for (Gate g : stage.gates) {
        if (g.is_rotation()) {
            g.param_index += param_offset;
        }
        gates.push_back(std::move(g));
    }
    for (const auto &layer : stage.layers) {
        std::vector<std::size_t> shifted;
        shifted.reserve(layer.size());
        for (std::size_t gi : layer) {
            shifted.push_back(gi + gate_offset);
        }
        layers.push_back(std::move(shifted));
    }
}

Eigen::MatrixXd invert_information(const FisherMatrix &info) {
    if (info.d() == 0) {
        throw ComputationError("parameter not identifiable: empty information matrix");
    }
    Eigen::MatrixXd sym = 0.5 * (info.entries + info.entries.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.eigenvalues().minCoeff() <= 1e-10) {
        throw ComputationError("parameter not identifiable: singular information matrix");
    }
    return es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
           es.eigenvectors().transpose();
}

} // namespace

ComposedModel compose(const SensingModel &model) {
    const int n = model.probe.n_qubits;
    if (model.encoding.n_qubits != n || model.measurement_stage.n_qubits != n) {
        throw std::invalid_argument("sensing stages must act on the same qubits");
    }
    ComposedModel out;
    out.n_theta = model.probe.n_params;
    out.n_phi = model.encoding.n_params;
    out.n_mu = model.measurement_stage.n_params;

    std::vector<Gate> gates;
    std::vector<std::vector<std::size_t>> layers;
    append_stage(gates, layers, model.probe, 0);
    append_stage(gates, layers, model.encoding, out.n_theta);
    append_stage(gates, layers, model.measurement_stage, out.n_theta + out.n_phi);
    out.circuit =
        make_circuit(n, out.n_theta + out.n_phi + out.n_mu, std::move(gates), std::move(layers));
    return out;
}

Params pack_params(const ComposedModel &composed, const Params &theta, const Params &phi,
                   const Params &mu) {
    if (theta.size() != composed.n_theta || phi.size() != composed.n_phi ||
        mu.size() != composed.n_mu) {
        throw std::invalid_argument("stage parameter lengths do not match the model");
    }
    Params packed(composed.n_theta + composed.n_phi + composed.n_mu);
    packed << theta, phi, mu;
    return packed;
}

CovarianceMatrix crb_bound(const FisherMatrix &info, std::int64_t n) {
    if (info.kind != FisherKind::Classical) {
        throw std::invalid_argument("crb_bound expects a classical information matrix");
    }
    if (n <= 0) {
        throw std::invalid_argument("repetition count must be positive");
    }
    return CovarianceMatrix{invert_information(info) / static_cast<double>(n)};
}

CovarianceMatrix qcrb_bound(const FisherMatrix &info, std::int64_t n) {
    if (info.kind != FisherKind::Quantum) {
        throw std::invalid_argument("qcrb_bound expects a quantum information matrix");
    }
    if (n <= 0) {
        throw std::invalid_argument("repetition count must be positive");
    }
    return CovarianceMatrix{invert_information(info) / static_cast<double>(n)};
}

double weighted_bound(const Eigen::MatrixXd &weight, const FisherMatrix &info, std::int64_t n) {
    if (weight.rows() != info.d() || weight.cols() != info.d()) {
        throw std::invalid_argument("weight matrix dimension does not match");
    }
    if (linalg::min_eigenvalue(weight) < -1e-9) {
        throw std::invalid_argument("weight matrix must be positive semidefinite");
    }
    if (n <= 0) {
        throw std::invalid_argument("repetition count must be positive");
    }
    return (weight * invert_information(info)).trace() / static_cast<double>(n);
}

FisherMatrix sensing_cfim(const SensingModel &model, const Params &theta, const Params &phi,
                          const Params &mu) {
    ComposedModel composed = compose(model);
    Params packed = pack_params(composed, theta, phi, mu);
    FisherMatrix full = cfim_exact(composed.circuit, packed,
                                   Measurement::computational(composed.circuit.n_qubits));
    FisherMatrix out;
    out.entries = full.entries.block(composed.n_theta, composed.n_theta, composed.n_phi,
                                     composed.n_phi);
    out.kind = FisherKind::Classical;
    out.method = FisherMethod::Exact;
    return out;
}

FisherMatrix sensing_qfim(const SensingModel &model, const Params &theta, const Params &phi) {
    SensingModel probe_and_encoding{model.probe, model.encoding,
                                    empty_stage(model.probe.n_qubits)};
    ComposedModel composed = compose(probe_and_encoding);
    Params packed = pack_params(composed, theta, phi, Params(0));
    FisherMatrix full = qfim_pure(composed.circuit, packed);
    FisherMatrix out;
    out.entries = full.entries.block(composed.n_theta, composed.n_theta, composed.n_phi,
                                     composed.n_phi);
    out.kind = FisherKind::Quantum;
    out.method = FisherMethod::Exact;
    return out;
}

ParamCircuit ghz_probe(int n_qubits) {
    std::vector<Gate> gates;
    gates.push_back(gates::hadamard(0));
    for (int q = 1; q < n_qubits; ++q) {
        gates.push_back(gates::cnot(0, q));
    }
    return make_circuit(n_qubits, 0, std::move(gates));
}

ParamCircuit plus_probes(int n_qubits) {
    std::vector<Gate> gates;
    for (int q = 0; q < n_qubits; ++q) {
        gates.push_back(gates::hadamard(q));
    }
    return make_circuit(n_qubits, 0, std::move(gates));
}

ParamCircuit empty_stage(int n_qubits) { return make_circuit(n_qubits, 0, {}); }

namespace {

Eigen::MatrixXcd excited_projector() {
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(2, 2);
    p(1, 1) = 1.0;
    return p;
}

} // namespace

ParamCircuit phase_encoding(int n_qubits, int target) {
    std::vector<Gate> gates;
    gates.push_back(gates::rotation(excited_projector(), {target}, 0));
    return make_circuit(n_qubits, 1, std::move(gates));
}

ParamCircuit collective_phase_encoding(int n_qubits) {
    const Eigen::Index dim = static_cast<Eigen::Index>(1) << n_qubits;
    Eigen::MatrixXcd gen = Eigen::MatrixXcd::Zero(dim, dim);
    for (Eigen::Index idx = 0; idx < dim; ++idx) {
        gen(idx, idx) = static_cast<double>(__builtin_popcountll(static_cast<unsigned long long>(idx)));
    }
    std::vector<int> targets(n_qubits);
    for (int q = 0; q < n_qubits; ++q) {
        targets[static_cast<std::size_t>(q)] = q;
    }
    std::vector<Gate> gates;
    gates.push_back(gates::rotation(gen, targets, 0));
    return make_circuit(n_qubits, 1, std::move(gates));
}

ParamCircuit x_measurement_stage(int n_qubits) {
    std::vector<Gate> gates;
    for (int q = 0; q < n_qubits; ++q) {
        gates.push_back(gates::hadamard(q));
    }
    return make_circuit(n_qubits, 0, std::move(gates));
}

ScalingResult scaling_experiment(const std::vector<int> &probe_counts, ProbeStrategy strategy) {
    ScalingResult result;
    for (int n : probe_counts) {
        if (n < 1 || n > max_qubits_pure()) {
            std::ostringstream msg;
            msg << "probe count " << n << " outside simulable range";
            throw ComputationError(msg.str());
        }
        SensingModel model;
        model.probe = strategy == ProbeStrategy::Ghz ? ghz_probe(n) : plus_probes(n);
        model.encoding = collective_phase_encoding(n);
        model.measurement_stage = empty_stage(n);
        FisherMatrix f = sensing_qfim(model, Params(0), Params::Zero(1));
        result.table.emplace_back(n, f.entries(0, 0));
    }

    // least-squares slope of ln F vs ln n
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double m = static_cast<double>(result.table.size());
    for (const auto &[n, f] : result.table) {
        const double x = std::log(static_cast<double>(n));
        const double y = std::log(f);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = m * sxx - sx * sx;
    result.loglog_slope = denom != 0.0 ? (m * sxy - sx * sy) / denom : 0.0;
    return result;
}

EstimatorResult mle_estimate(const SensingModel &model, const Params &theta, double phi_true,
                             const Params &mu, std::int64_t shots, const GridSpec &grid,
                             std::uint64_t seed, int repeats) {
    ComposedModel composed = compose(model);
    if (composed.n_phi != 1) {
        throw std::invalid_argument("grid MLE handles exactly one physical parameter");
    }
    if (grid.points < 2 || grid.hi <= grid.lo) {
        throw std::invalid_argument("grid must contain at least two increasing points");
    }
    if (shots <= 0 || repeats < 1) {
        throw std::invalid_argument("shots and repeats must be positive");
    }

    const Measurement readout = Measurement::computational(composed.circuit.n_qubits);
    auto probs_for = [&](double phi) {
        Params packed = pack_params(composed, theta, (Params(1) << phi).finished(), mu);
        return probabilities(run_pure(composed.circuit, packed), readout).probs;
    };

    // probability table over the grid, computed once and reused by all repeats
    std::vector<Eigen::VectorXd> table(static_cast<std::size_t>(grid.points));
    Eigen::VectorXd grid_values(grid.points);
    for (int g = 0; g < grid.points; ++g) {
        const double phi =
            grid.lo + (grid.hi - grid.lo) * static_cast<double>(g) /
                          static_cast<double>(grid.points - 1);
        grid_values(g) = phi;
        table[static_cast<std::size_t>(g)] = probs_for(phi);
    }
    const Eigen::VectorXd truth = probs_for(phi_true);

    EstimatorResult result;
    result.estimates.reserve(static_cast<std::size_t>(repeats));
    for (int r = 0; r < repeats; ++r) {
        SampleCounts counts =
            sample(ProbDist{truth}, shots, rng::derive_seed(seed, static_cast<std::uint64_t>(r)));

        double best = -std::numeric_limits<double>::infinity();
        double worst = std::numeric_limits<double>::infinity();
        int best_index = 0;
        for (int g = 0; g < grid.points; ++g) {
            const Eigen::VectorXd &p = table[static_cast<std::size_t>(g)];
            double loglik = 0.0;
            for (Eigen::Index l = 0; l < p.size(); ++l) {
                const std::int64_t c = counts.counts[static_cast<std::size_t>(l)];
                if (c == 0) {
                    continue;
                }
                if (p(l) <= 0.0) {
                    loglik = -std::numeric_limits<double>::infinity();
                    break;
                }
                loglik += static_cast<double>(c) * std::log(p(l));
            }
            if (loglik > best) {
                best = loglik;
                best_index = g;
            }
            if (loglik < worst) {
                worst = loglik;
            }
        }
        if (!std::isfinite(best) || best - worst <= 1e-12 * std::max(1.0, std::abs(best))) {
            throw ComputationError("non-identifiable on grid: flat likelihood");
        }
        result.estimates.push_back(grid_values(best_index));
    }

    double sum = 0.0;
    for (double e : result.estimates) {
        sum += e;
    }
    result.mean = sum / static_cast<double>(repeats);
    if (repeats > 1) {
        double ss = 0.0;
        for (double e : result.estimates) {
            ss += (e - result.mean) * (e - result.mean);
        }
        result.variance = ss / static_cast<double>(repeats - 1);
    }
    return result;
}

int effective_quantum_dimension(const FisherMatrix &fisher, double rank_tol) {
    if (fisher.d() == 0) {
        return 0;
    }
    Eigen::VectorXd spectrum = fisher_spectrum(fisher);
    const double threshold = rank_tol * std::max(spectrum(0), 1e-12);
    int rank = 0;
    for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
        if (spectrum(i) > threshold) {
            ++rank;
        }
    }
    return rank;
}

Eigen::VectorXd fisher_spectrum(const FisherMatrix &fisher) {
    Eigen::MatrixXd sym = 0.5 * (fisher.entries + fisher.entries.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues().reverse();
}

} // namespace fisherlab
