#pragma once

#include "fisherlab/simulator.hpp"

namespace fisherlab {

/// Relative entropy sum_l p_l ln(p_l / q_l) in nats. Terms with p_l = 0
/// contribute nothing; p_l > 0 with q_l = 0 is rejected as undefined.
double kl_divergence(const ProbDist &p, const ProbDist &q);

/// (1/2) sum_l |p_l - q_l|.
double total_variation(const ProbDist &p, const ProbDist &q);

/// |<psi|phi>|^2.
double fidelity_pure(const StateVector &psi, const StateVector &phi);

/// 1 - |<psi|phi>|^2.
double fidelity_distance(const StateVector &psi, const StateVector &phi);

/// Uhlmann fidelity Tr{(rho^{1/2} sigma rho^{1/2})^{1/2}}^2.
double bures_fidelity(const DensityMatrix &rho, const DensityMatrix &sigma);

/// 2 - 2 f_B.
double bures_distance(const DensityMatrix &rho, const DensityMatrix &sigma);

/// Runs U(theta) followed by U(theta')^dagger and returns the probability of
/// the all-zeros outcome, which equals |<psi(theta')|psi(theta)>|^2.
double overlap_compute_reverse(const ParamCircuit &circuit, const Params &theta,
                               const Params &theta_prime);

/// SWAP-test overlap estimate on 2n+1 qubits (ancilla + two registers holding
/// |psi(theta)> and |psi(theta')>). The ancilla's <Z> equals the overlap;
/// shots = 0 returns it exactly, shots > 0 estimates it from samples.
double overlap_swap_test(const ParamCircuit &circuit, const Params &theta,
                         const Params &theta_prime, std::int64_t shots, std::uint64_t seed);

} // namespace fisherlab
