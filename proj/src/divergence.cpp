#include "fisherlab/divergence.hpp"

#include <cmath>
#include <sstream>

namespace fisherlab {

double kl_divergence(const ProbDist &p, const ProbDist &q) {
    if (p.probs.size() != q.probs.size()) {
        throw std::invalid_argument("KL divergence needs a common outcome set");
    }
    double sum = 0.0;
    for (Eigen::Index l = 0; l < p.probs.size(); ++l) {
        if (p.probs(l) == 0.0) {
            continue;
        }
        if (q.probs(l) == 0.0) {
            throw ComputationError("KL undefined: p assigns probability where q vanishes");
        }
        sum += p.probs(l) * std::log(p.probs(l) / q.probs(l));
    }
    return sum;
}

double total_variation(const ProbDist &p, const ProbDist &q) {
    if (p.probs.size() != q.probs.size()) {
        throw std::invalid_argument("total variation needs a common outcome set");
    }
    return 0.5 * (p.probs - q.probs).cwiseAbs().sum();
}

double fidelity_pure(const StateVector &psi, const StateVector &phi) {
    if (psi.amplitudes.size() != phi.amplitudes.size()) {
        throw std::invalid_argument("states have different dimensions");
    }
    return std::norm(psi.amplitudes.dot(phi.amplitudes));
}

double fidelity_distance(const StateVector &psi, const StateVector &phi) {
    return 1.0 - fidelity_pure(psi, phi);
}

double bures_fidelity(const DensityMatrix &rho, const DensityMatrix &sigma) {
    if (rho.matrix.rows() != sigma.matrix.rows()) {
        throw std::invalid_argument("states have different dimensions");
    }
    // Tr sqrt(sqrt(rho) sigma sqrt(rho)) equals the sum of singular values of
    // sqrt(rho) sqrt(sigma); singular values carry absolute (not square-root)
    // accuracy, which keeps rank-deficient inputs at ~1e-14 error
    Eigen::MatrixXcd product = linalg::psd_sqrt(rho.matrix) * linalg::psd_sqrt(sigma.matrix);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(product);
    const double trace = svd.singularValues().sum();
    return trace * trace;
}

double bures_distance(const DensityMatrix &rho, const DensityMatrix &sigma) {
    return 2.0 - 2.0 * bures_fidelity(rho, sigma);
}

double overlap_compute_reverse(const ParamCircuit &circuit, const Params &theta,
                               const Params &theta_prime) {
    StateVector state = run_pure(circuit, theta);
    for (auto it = circuit.gates.rbegin(); it != circuit.gates.rend(); ++it) {
        apply_gate_inverse(state.amplitudes, *it, theta_prime, circuit.n_qubits);
    }
    return std::norm(state.amplitudes(0));
}

double overlap_swap_test(const ParamCircuit &circuit, const Params &theta,
                         const Params &theta_prime, std::int64_t shots, std::uint64_t seed) {
    const int n = circuit.n_qubits;
    const int total = 2 * n + 1;
    if (total > max_qubits_pure()) {
        std::ostringstream msg;
        msg << "SWAP test needs " << total << " qubits, cap is " << max_qubits_pure();
        throw ComputationError(msg.str());
    }

    StateVector a = run_pure(circuit, theta);
    StateVector b = run_pure(circuit, theta_prime);

    // ancilla (qubit 0, most significant) |0>, register A = 1..n, register B = n+1..2n
    const Eigen::Index reg_dim = a.amplitudes.size();
    Eigen::VectorXcd state = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(1) << total);
    for (Eigen::Index ia = 0; ia < reg_dim; ++ia) {
        for (Eigen::Index ib = 0; ib < reg_dim; ++ib) {
            state(ia * reg_dim + ib) = a.amplitudes(ia) * b.amplitudes(ib);
        }
    }

    Eigen::MatrixXcd h(2, 2);
    const double s = 1.0 / std::sqrt(2.0);
    h << s, s, s, -s;

    Eigen::MatrixXcd cswap = Eigen::MatrixXcd::Identity(8, 8);
    cswap(5, 5) = 0;
    cswap(6, 6) = 0;
    cswap(5, 6) = 1;
    cswap(6, 5) = 1;

    linalg::apply_matrix(state, h, {0}, total);
    for (int j = 0; j < n; ++j) {
        linalg::apply_matrix(state, cswap, {0, 1 + j, 1 + n + j}, total);
    }
    linalg::apply_matrix(state, h, {0}, total);

    const Eigen::Index half = static_cast<Eigen::Index>(1) << (total - 1);
    double p0 = 0.0;
    for (Eigen::Index idx = 0; idx < half; ++idx) {
        p0 += std::norm(state(idx));
    }
    p0 = std::min(std::max(p0, 0.0), 1.0);

    if (shots == 0) {
        return 2.0 * p0 - 1.0;
    }
    ProbDist ancilla = make_prob_dist((Eigen::VectorXd(2) << p0, 1.0 - p0).finished());
    SampleCounts counts = sample(ancilla, shots, seed);
    return (static_cast<double>(counts.counts[0]) - static_cast<double>(counts.counts[1])) /
           static_cast<double>(shots);
}

} // namespace fisherlab
