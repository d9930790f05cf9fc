#pragma once

#include "fisherlab/circuit.hpp"

#include <cstdint>
#include <variant>

namespace fisherlab {

struct StateVector {
    Eigen::VectorXcd amplitudes;

    int n_qubits() const;
};

struct DensityMatrix {
    Eigen::MatrixXcd matrix;

    int n_qubits() const;
};

struct ProbDist {
    Eigen::VectorXd probs;
};

/// Builds a distribution from raw values: entries in [-1e-12, 0) are clamped
/// to zero, the result is renormalized when the total is within 1e-9 of one,
/// and anything worse is rejected.
ProbDist make_prob_dist(Eigen::VectorXd raw);

/// POVM. The computational form avoids materializing 2^n projectors; the
/// effects form holds explicit positive operators summing to the identity.
class Measurement {
  public:
    static Measurement computational(int n_qubits);
    static Measurement from_effects(std::vector<Eigen::MatrixXcd> effects);
    /// Rank-one projectors onto the observable's eigenvectors.
    static Measurement observable_basis(const Observable &obs);

    bool is_computational() const { return std::holds_alternative<int>(form_); }
    int n_outcomes() const;
    Eigen::Index dim() const;
    const std::vector<Eigen::MatrixXcd> &effects() const;

  private:
    Measurement() = default;
    // int = qubit count of a computational-basis measurement
    std::variant<int, std::vector<Eigen::MatrixXcd>> form_;
};

/// CPTP map given as Kraus operators on a set of target qubits.
struct NoiseChannel {
    std::string name;
    std::vector<Eigen::MatrixXcd> kraus;
    std::vector<int> targets;
};

NoiseChannel depolarizing(double p, int target);
NoiseChannel dephasing(double p, int target);
NoiseChannel amplitude_damping(double gamma, int target);
NoiseChannel kraus_channel(std::vector<Eigen::MatrixXcd> kraus, std::vector<int> targets,
                           const std::string &name = "kraus");

/// Channels attached to circuit positions: each entry fires right after the
/// gate with the given index has been applied.
struct GateNoise {
    std::size_t after_gate = 0;
    NoiseChannel channel;
};
using NoiseSpec = std::vector<GateNoise>;

struct SampleCounts {
    std::vector<std::int64_t> counts;
    std::int64_t shots = 0;
};

/// Qubit caps for exact dense simulation; FISHERLAB_MAX_QUBITS overrides both.
int max_qubits_pure();
int max_qubits_mixed();

/// Applies the circuit's gates in order to |0...0>.
StateVector run_pure(const ParamCircuit &circuit, const Params &theta);

/// Density-matrix evolution from |0...0><0...0| with optional noise.
DensityMatrix run_mixed(const ParamCircuit &circuit, const Params &theta,
                        const NoiseSpec &noise = {});

ProbDist probabilities(const StateVector &state, const Measurement &m);
ProbDist probabilities(const DensityMatrix &rho, const Measurement &m);

double expectation(const StateVector &state, const Observable &obs);
double expectation(const DensityMatrix &rho, const Observable &obs);

/// Multinomial draw by inverse CDF; identical seeds give identical counts.
SampleCounts sample(const ProbDist &dist, std::int64_t shots, std::uint64_t seed);

/// d|psi(theta)>/d theta_i, computed by inserting -i G_i right after the gate
/// owning parameter i. The result is not normalized.
Eigen::VectorXcd derivative_state(const ParamCircuit &circuit, const Params &theta, int i);

struct Spectrum {
    Eigen::VectorXd eigenvalues;  // sorted descending, entries < zero_tol set to 0
    Eigen::MatrixXcd eigenvectors; // columns, same order
    std::vector<bool> zero_flag;
};

Spectrum eigendecompose(const DensityMatrix &rho, double zero_tol = 1e-10);

/// In-place gate application helpers shared by the higher-level modules.
void apply_gate(Eigen::VectorXcd &state, const Gate &gate, const Params &theta, int n_qubits);
void apply_gate_inverse(Eigen::VectorXcd &state, const Gate &gate, const Params &theta,
                        int n_qubits);
void apply_channel(Eigen::MatrixXcd &rho, const NoiseChannel &channel, int n_qubits);

} // namespace fisherlab
