#pragma once

#include "fisherlab/fisher.hpp"

namespace fisherlab {

/// Sensing pipeline: a probe preparation (parameters theta), the physical
/// encoding (parameters phi), and a tunable measurement stage (parameters mu)
/// followed by a computational-basis readout. All three act on the same
/// qubits; their parameter vectors are concatenated as (theta, phi, mu).
struct SensingModel {
    ParamCircuit probe;
    ParamCircuit encoding;
    ParamCircuit measurement_stage;
};

struct ComposedModel {
    ParamCircuit circuit;
    int n_theta = 0;
    int n_phi = 0;
    int n_mu = 0;
};

ComposedModel compose(const SensingModel &model);

/// Concatenates (theta, phi, mu) into the composed circuit's parameter vector.
Params pack_params(const ComposedModel &composed, const Params &theta, const Params &phi,
                   const Params &mu);

struct CovarianceMatrix {
    Eigen::MatrixXd matrix;
};

/// I^{-1} / n; a singular information matrix means the parameters cannot be
/// identified and is rejected.
CovarianceMatrix crb_bound(const FisherMatrix &info, std::int64_t n);

/// F^{-1} / n for a quantum information matrix.
CovarianceMatrix qcrb_bound(const FisherMatrix &info, std::int64_t n);

/// Tr{W M^{-1}} / n for a PSD weight matrix W; W = identity gives the
/// mean-squared-error bound.
double weighted_bound(const Eigen::MatrixXd &weight, const FisherMatrix &info, std::int64_t n);

/// Classical Fisher information of the full pipeline, restricted to the
/// physical parameters phi (theta and mu held fixed).
FisherMatrix sensing_cfim(const SensingModel &model, const Params &theta, const Params &phi,
                          const Params &mu);

/// QFIM of probe plus encoding, restricted to phi. Independent of the
/// measurement stage.
FisherMatrix sensing_qfim(const SensingModel &model, const Params &theta, const Params &phi);

// Builders for the standard phase-sensing setups.
ParamCircuit ghz_probe(int n_qubits);
ParamCircuit plus_probes(int n_qubits);
ParamCircuit empty_stage(int n_qubits);
/// exp(-i phi |1><1|) on one qubit.
ParamCircuit phase_encoding(int n_qubits, int target);
/// exp(-i phi sum_j |1><1|_j) as a single collective rotation.
ParamCircuit collective_phase_encoding(int n_qubits);
/// Basis change so the computational readout probes X.
ParamCircuit x_measurement_stage(int n_qubits);

enum class ProbeStrategy { Separate, Ghz };

struct ScalingResult {
    std::vector<std::pair<int, double>> table; // (n, F)
    double loglog_slope = 0.0;
};

/// Collective-phase QFIM as a function of probe count, with the slope of
/// ln F against ln n.
ScalingResult scaling_experiment(const std::vector<int> &probe_counts, ProbeStrategy strategy);

struct GridSpec {
    double lo = 0.0;
    double hi = M_PI;
    int points = 10000;
};

struct EstimatorResult {
    std::vector<double> estimates; // grid-argmax per repeat
    double mean = 0.0;
    double variance = 0.0; // unbiased sample variance over the repeats
};

/// Grid-search maximum likelihood for a single physical parameter: samples
/// counts at the true phi, maximizes the log-likelihood over the grid, and
/// repeats with derived seeds.
EstimatorResult mle_estimate(const SensingModel &model, const Params &theta, double phi_true,
                             const Params &mu, std::int64_t shots, const GridSpec &grid,
                             std::uint64_t seed, int repeats);

/// Number of eigenvalues above rank_tol * max(largest eigenvalue, 1e-12).
int effective_quantum_dimension(const FisherMatrix &fisher, double rank_tol = 1e-8);

/// Eigenvalues of the symmetrized matrix, sorted descending.
Eigen::VectorXd fisher_spectrum(const FisherMatrix &fisher);

} // namespace fisherlab
