#pragma once

#include "fisherlab/linalg.hpp"

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace fisherlab {

/// Hermitian generator of a rotation gate, acting on an ordered set of qubits.
struct Generator {
    Eigen::MatrixXcd matrix;
    std::vector<int> targets;
};

enum class GateKind { FixedUnitary, Rotation };

/// One circuit element. Fixed gates carry a unitary; rotation gates realize
/// exp(-i theta G) for their generator and own exactly one parameter index.
/// `shift_constant` is the two-point parameter-shift constant r, present only
/// when the generator has exactly two distinct eigenvalues (then r equals
/// half their gap and derivatives follow from evaluations at theta +- pi/(4r)).
struct Gate {
    GateKind kind = GateKind::FixedUnitary;
    std::string name;
    std::vector<int> targets;

    // fixed kind
    Eigen::MatrixXcd unitary;

    // rotation kind
    Generator generator;
    int param_index = -1;
    std::optional<double> shift_constant;

    // cached eigendecomposition of the generator, filled by the factories
    Eigen::MatrixXcd gen_eigvecs;
    Eigen::VectorXd gen_eigvals;

    bool is_rotation() const { return kind == GateKind::Rotation; }

    /// exp(-i theta G) for rotation gates.
    Eigen::MatrixXcd rotation_unitary(double theta) const;
};

using Params = Eigen::VectorXd;

/// Parametrized circuit: ordered gates over n qubits with d parameters, plus a
/// partition of the gate list into layers of simultaneously acting gates.
struct ParamCircuit {
    int n_qubits = 0;
    int n_params = 0;
    std::vector<Gate> gates;
    std::vector<std::vector<std::size_t>> layers;
};

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> errors;
};

namespace gates {

Gate rx(int target, int param_index);
Gate ry(int target, int param_index);
Gate rz(int target, int param_index);

/// exp(-i theta P/2) for a Pauli string P on the given qubits.
Gate pauli_rotation(const std::string &pauli, const std::vector<int> &targets, int param_index);

/// Rotation with an arbitrary user-supplied Hermitian generator.
Gate rotation(const Eigen::MatrixXcd &generator, const std::vector<int> &targets, int param_index);

Gate fixed(const Eigen::MatrixXcd &unitary, const std::vector<int> &targets,
           const std::string &name = "fixed");
Gate hadamard(int target);
Gate pauli_x(int target);
Gate cnot(int control, int target);
Gate cz(int control, int target);

} // namespace gates

/// Builds a circuit, inferring layers greedily when none are given, and throws
/// std::invalid_argument if validation fails.
ParamCircuit make_circuit(int n_qubits, int n_params, std::vector<Gate> gate_list,
                          std::optional<std::vector<std::vector<std::size_t>>> layers = {});

/// Checks every structural invariant; violations are collected, not thrown.
ValidationReport validate(const ParamCircuit &circuit);

/// theta + s * e_i; the input is left untouched.
Params shift(const Params &theta, int i, double s);

/// Parameter-index groups of the rotation gates in each layer, in layer order.
/// Layers without rotation gates contribute no group.
std::vector<std::vector<int>> layers_of(const ParamCircuit &circuit);

/// Locates the rotation gate owning parameter i (throws if there is none).
std::size_t gate_for_param(const ParamCircuit &circuit, int param_index);

/// Hermitian observable with a lazily computed eigendecomposition.
class Observable {
  public:
    explicit Observable(Eigen::MatrixXcd matrix);

    const Eigen::MatrixXcd &matrix() const { return matrix_; }
    int n_qubits() const { return n_qubits_; }
    const Eigen::VectorXd &eigenvalues() const;
    const Eigen::MatrixXcd &eigenvectors() const;

  private:
    void ensure_decomposed() const;

    Eigen::MatrixXcd matrix_;
    int n_qubits_ = 0;
    mutable std::shared_ptr<std::pair<Eigen::VectorXd, Eigen::MatrixXcd>> decomp_;
    mutable std::shared_ptr<std::once_flag> once_;
};

/// Sum of weighted Pauli strings over n qubits, e.g. {{"ZZ", 1.0}, {"XI", 0.5}}.
Observable pauli_observable(const std::vector<std::pair<std::string, double>> &terms, int n_qubits);

} // namespace fisherlab
