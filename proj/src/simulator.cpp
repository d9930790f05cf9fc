#include "fisherlab/simulator.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

namespace fisherlab {

namespace {

int qubits_from_dim(Eigen::Index dim) {
    int n = 0;
    while ((static_cast<Eigen::Index>(1) << n) < dim) {
        ++n;
    }
    if ((static_cast<Eigen::Index>(1) << n) != dim || dim <= 0) {
        throw std::invalid_argument("dimension is not a power of two");
    }
    return n;
}

int env_qubit_cap(int fallback) {
    const char *raw = std::getenv("FISHERLAB_MAX_QUBITS");
    if (raw == nullptr) {
        return fallback;
    }
    int value = std::atoi(raw);
    return value > 0 ? value : fallback;
}

void check_theta(const ParamCircuit &circuit, const Params &theta) {
    if (theta.size() != circuit.n_params) {
        std::ostringstream msg;
        msg << "parameter vector has length " << theta.size() << ", circuit expects "
            << circuit.n_params;
        throw std::invalid_argument(msg.str());
    }
}

} // namespace

int StateVector::n_qubits() const { return qubits_from_dim(amplitudes.size()); }

int DensityMatrix::n_qubits() const { return qubits_from_dim(matrix.rows()); }

ProbDist make_prob_dist(Eigen::VectorXd raw) {
    for (Eigen::Index l = 0; l < raw.size(); ++l) {
        if (raw(l) < -1e-12) {
            throw ComputationError("probability distribution has a negative entry");
        }
        if (raw(l) < 0.0) {
            raw(l) = 0.0;
        }
    }
    double total = raw.sum();
    if (std::abs(total - 1.0) > 1e-9) {
        throw ComputationError("probabilities do not sum to one");
    }
    raw /= total;
    return ProbDist{std::move(raw)};
}

Measurement Measurement::computational(int n_qubits) {
    if (n_qubits <= 0) {
        throw std::invalid_argument("measurement needs at least one qubit");
    }
    Measurement m;
    m.form_ = n_qubits;
    return m;
}

Measurement Measurement::from_effects(std::vector<Eigen::MatrixXcd> effects) {
    if (effects.empty()) {
        throw std::invalid_argument("measurement needs at least one effect");
    }
    const Eigen::Index dim = effects.front().rows();
    Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto &e : effects) {
        if (e.rows() != dim || e.cols() != dim) {
            throw std::invalid_argument("effects must share one dimension");
        }
        if (!linalg::is_hermitian(e, 1e-9)) {
            throw std::invalid_argument("effect is not Hermitian");
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(e, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-9) {
            throw std::invalid_argument("effect is not positive semidefinite");
        }
        total += e;
    }
    total -= Eigen::MatrixXcd::Identity(dim, dim);
    if (total.cwiseAbs().maxCoeff() > 1e-9) {
        throw std::invalid_argument("effects do not sum to the identity");
    }
    Measurement m;
    m.form_ = std::move(effects);
    return m;
}

Measurement Measurement::observable_basis(const Observable &obs) {
    const Eigen::MatrixXcd &vecs = obs.eigenvectors();
    std::vector<Eigen::MatrixXcd> effects;
    effects.reserve(vecs.cols());
    for (Eigen::Index l = 0; l < vecs.cols(); ++l) {
        effects.push_back(vecs.col(l) * vecs.col(l).adjoint());
    }
    return from_effects(std::move(effects));
}

int Measurement::n_outcomes() const {
    if (is_computational()) {
        return 1 << std::get<int>(form_);
    }
    return static_cast<int>(std::get<std::vector<Eigen::MatrixXcd>>(form_).size());
}

Eigen::Index Measurement::dim() const {
    if (is_computational()) {
        return static_cast<Eigen::Index>(1) << std::get<int>(form_);
    }
    return std::get<std::vector<Eigen::MatrixXcd>>(form_).front().rows();
}

const std::vector<Eigen::MatrixXcd> &Measurement::effects() const {
    if (is_computational()) {
        throw std::logic_error("computational measurement has no materialized effects");
    }
    return std::get<std::vector<Eigen::MatrixXcd>>(form_);
}

NoiseChannel depolarizing(double p, int target) {
    if (p < 0.0 || p > 1.0) {
        throw std::invalid_argument("depolarizing probability must be in [0, 1]");
    }
    // rho -> (1 - p) rho + p I/2
    std::vector<Eigen::MatrixXcd> kraus;
    kraus.push_back(std::sqrt(1.0 - 0.75 * p) * Eigen::MatrixXcd::Identity(2, 2));
    kraus.push_back(std::sqrt(0.25 * p) * linalg::pauli_matrix('X'));
    kraus.push_back(std::sqrt(0.25 * p) * linalg::pauli_matrix('Y'));
    kraus.push_back(std::sqrt(0.25 * p) * linalg::pauli_matrix('Z'));
    return NoiseChannel{"depolarizing", std::move(kraus), {target}};
}

NoiseChannel dephasing(double p, int target) {
    if (p < 0.0 || p > 1.0) {
        throw std::invalid_argument("dephasing probability must be in [0, 1]");
    }
    // off-diagonal elements shrink by (1 - p)
    std::vector<Eigen::MatrixXcd> kraus;
    kraus.push_back(std::sqrt(1.0 - 0.5 * p) * Eigen::MatrixXcd::Identity(2, 2));
    kraus.push_back(std::sqrt(0.5 * p) * linalg::pauli_matrix('Z'));
    return NoiseChannel{"dephasing", std::move(kraus), {target}};
}

NoiseChannel amplitude_damping(double gamma, int target) {
    if (gamma < 0.0 || gamma > 1.0) {
        throw std::invalid_argument("damping probability must be in [0, 1]");
    }
    Eigen::MatrixXcd k0(2, 2), k1(2, 2);
    k0 << 1, 0, 0, std::sqrt(1.0 - gamma);
    k1 << 0, std::sqrt(gamma), 0, 0;
    return NoiseChannel{"amplitude_damping", {k0, k1}, {target}};
}

NoiseChannel kraus_channel(std::vector<Eigen::MatrixXcd> kraus, std::vector<int> targets,
                           const std::string &name) {
    return NoiseChannel{name, std::move(kraus), std::move(targets)};
}

namespace {

void check_trace_preserving(const NoiseChannel &channel) {
    if (channel.kraus.empty()) {
        throw ComputationError("noise channel has no Kraus operators");
    }
    const Eigen::Index dim = channel.kraus.front().rows();
    Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto &k : channel.kraus) {
        if (k.rows() != dim || k.cols() != dim) {
            throw ComputationError("Kraus operators must share one dimension");
        }
        total += k.adjoint() * k;
    }
    total -= Eigen::MatrixXcd::Identity(dim, dim);
    if (total.cwiseAbs().maxCoeff() > 1e-9) {
        throw ComputationError("noise channel is not trace preserving");
    }
}

} // namespace

int max_qubits_pure() { return env_qubit_cap(12); }

int max_qubits_mixed() { return env_qubit_cap(7); }

void apply_gate(Eigen::VectorXcd &state, const Gate &gate, const Params &theta, int n_qubits) {
    if (gate.is_rotation()) {
        linalg::apply_matrix(state, gate.rotation_unitary(theta(gate.param_index)), gate.targets,
                             n_qubits);
    } else {
        linalg::apply_matrix(state, gate.unitary, gate.targets, n_qubits);
    }
}

void apply_gate_inverse(Eigen::VectorXcd &state, const Gate &gate, const Params &theta,
                        int n_qubits) {
    if (gate.is_rotation()) {
        linalg::apply_matrix(state, gate.rotation_unitary(-theta(gate.param_index)), gate.targets,
                             n_qubits);
    } else {
        linalg::apply_matrix(state, gate.unitary.adjoint(), gate.targets, n_qubits);
    }
}

void apply_channel(Eigen::MatrixXcd &rho, const NoiseChannel &channel, int n_qubits) {
    check_trace_preserving(channel);
    Eigen::MatrixXcd next = Eigen::MatrixXcd::Zero(rho.rows(), rho.cols());
    for (const auto &k : channel.kraus) {
        Eigen::MatrixXcd full = linalg::embed(k, channel.targets, n_qubits);
        next += full * rho * full.adjoint();
    }
    rho = std::move(next);
}

StateVector run_pure(const ParamCircuit &circuit, const Params &theta) {
    check_theta(circuit, theta);
    if (circuit.n_qubits > max_qubits_pure()) {
        std::ostringstream msg;
        msg << "statevector size limit exceeded: " << circuit.n_qubits << " qubits (cap "
            << max_qubits_pure() << ")";
        throw ComputationError(msg.str());
    }
    Eigen::VectorXcd state =
        Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(1) << circuit.n_qubits);
    state(0) = 1.0;
    for (const Gate &g : circuit.gates) {
        apply_gate(state, g, theta, circuit.n_qubits);
    }
    return StateVector{std::move(state)};
}

DensityMatrix run_mixed(const ParamCircuit &circuit, const Params &theta, const NoiseSpec &noise) {
    check_theta(circuit, theta);
    if (circuit.n_qubits > max_qubits_mixed()) {
        std::ostringstream msg;
        msg << "density matrix size limit exceeded: " << circuit.n_qubits << " qubits (cap "
            << max_qubits_mixed() << ")";
        throw ComputationError(msg.str());
    }
    for (const GateNoise &gn : noise) {
        if (gn.after_gate >= circuit.gates.size()) {
            throw std::invalid_argument("noise attached to a gate index out of range");
        }
    }

    const Eigen::Index dim = static_cast<Eigen::Index>(1) << circuit.n_qubits;
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
    rho(0, 0) = 1.0;
    for (std::size_t i = 0; i < circuit.gates.size(); ++i) {
        const Gate &g = circuit.gates[i];
        Eigen::MatrixXcd u = g.is_rotation() ? g.rotation_unitary(theta(g.param_index)) : g.unitary;
        Eigen::MatrixXcd full = linalg::embed(u, g.targets, circuit.n_qubits);
        rho = full * rho * full.adjoint();
        for (const GateNoise &gn : noise) {
            if (gn.after_gate == i) {
                apply_channel(rho, gn.channel, circuit.n_qubits);
            }
        }
    }
    return DensityMatrix{std::move(rho)};
}

ProbDist probabilities(const StateVector &state, const Measurement &m) {
    if (m.dim() != state.amplitudes.size()) {
        throw std::invalid_argument("measurement dimension does not match state");
    }
    Eigen::VectorXd raw(m.n_outcomes());
    if (m.is_computational()) {
        raw = state.amplitudes.cwiseAbs2();
    } else {
        const auto &effects = m.effects();
        for (std::size_t l = 0; l < effects.size(); ++l) {
            raw(static_cast<Eigen::Index>(l)) =
                std::real(state.amplitudes.dot(effects[l] * state.amplitudes));
        }
    }
    return make_prob_dist(std::move(raw));
}

ProbDist probabilities(const DensityMatrix &rho, const Measurement &m) {
    if (m.dim() != rho.matrix.rows()) {
        throw std::invalid_argument("measurement dimension does not match state");
    }
    Eigen::VectorXd raw(m.n_outcomes());
    if (m.is_computational()) {
        raw = rho.matrix.diagonal().real();
    } else {
        const auto &effects = m.effects();
        for (std::size_t l = 0; l < effects.size(); ++l) {
            raw(static_cast<Eigen::Index>(l)) = std::real((rho.matrix * effects[l]).trace());
        }
    }
    return make_prob_dist(std::move(raw));
}

double expectation(const StateVector &state, const Observable &obs) {
    if (obs.matrix().rows() != state.amplitudes.size()) {
        throw std::invalid_argument("observable dimension does not match state");
    }
    return std::real(state.amplitudes.dot(obs.matrix() * state.amplitudes));
}

double expectation(const DensityMatrix &rho, const Observable &obs) {
    if (obs.matrix().rows() != rho.matrix.rows()) {
        throw std::invalid_argument("observable dimension does not match state");
    }
    return std::real((rho.matrix * obs.matrix()).trace());
}

SampleCounts sample(const ProbDist &dist, std::int64_t shots, std::uint64_t seed) {
    if (shots < 0) {
        throw std::invalid_argument("shot count must be nonnegative");
    }
    SampleCounts out;
    out.shots = shots;
    out.counts.assign(dist.probs.size(), 0);

    Eigen::VectorXd cdf(dist.probs.size());
    double acc = 0.0;
    for (Eigen::Index l = 0; l < dist.probs.size(); ++l) {
        acc += dist.probs(l);
        cdf(l) = acc;
    }
    cdf(dist.probs.size() - 1) = 1.0;

    rng::Stream stream(seed);
    for (std::int64_t s = 0; s < shots; ++s) {
        const double u = stream.next_double();
        Eigen::Index lo = 0;
        Eigen::Index hi = cdf.size() - 1;
        while (lo < hi) {
            Eigen::Index mid = (lo + hi) / 2;
            if (u < cdf(mid)) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        out.counts[static_cast<std::size_t>(lo)] += 1;
    }
    return out;
}

Eigen::VectorXcd derivative_state(const ParamCircuit &circuit, const Params &theta, int i) {
    check_theta(circuit, theta);
    const std::size_t owner = gate_for_param(circuit, i);
    if (circuit.n_qubits > max_qubits_pure()) {
        throw ComputationError("statevector size limit exceeded");
    }

    Eigen::VectorXcd state =
        Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(1) << circuit.n_qubits);
    state(0) = 1.0;
    for (std::size_t g = 0; g < circuit.gates.size(); ++g) {
        apply_gate(state, circuit.gates[g], theta, circuit.n_qubits);
        if (g == owner) {
            linalg::apply_matrix(state, Complex(0.0, -1.0) * circuit.gates[g].generator.matrix,
                                 circuit.gates[g].targets, circuit.n_qubits);
        }
    }
    return state;
}

Spectrum eigendecompose(const DensityMatrix &rho, double zero_tol) {
    if (!linalg::is_hermitian(rho.matrix, 1e-10)) {
        throw std::invalid_argument("density matrix is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.matrix);
    if (es.info() != Eigen::Success) {
        throw ComputationError("eigendecomposition failed");
    }

    const Eigen::Index dim = rho.matrix.rows();
    Spectrum spec;
    spec.eigenvalues.resize(dim);
    spec.eigenvectors.resize(dim, dim);
    spec.zero_flag.assign(dim, false);
    // Eigen sorts ascending; flip to descending.
    for (Eigen::Index k = 0; k < dim; ++k) {
        const Eigen::Index src = dim - 1 - k;
        double lam = es.eigenvalues()(src);
        if (lam < zero_tol) {
            lam = 0.0;
            spec.zero_flag[k] = true;
        }
        spec.eigenvalues(k) = lam;
        spec.eigenvectors.col(k) = es.eigenvectors().col(src);
    }
    return spec;
}

} // namespace fisherlab
