#include "fisherlab/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <set>
#include <sstream>

namespace fisherlab {

namespace {

constexpr double kHermitianTol = 1e-12;
constexpr double kUnitaryTol = 1e-12;
// Two generator eigenvalues are "the same" below this gap when deciding
// whether a two-point shift rule exists.
constexpr double kEigGapTol = 1e-10;

void attach_generator_cache(Gate &g) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g.generator.matrix);
    g.gen_eigvecs = es.eigenvectors();
    g.gen_eigvals = es.eigenvalues();

    std::vector<double> distinct;
    for (Eigen::Index i = 0; i < g.gen_eigvals.size(); ++i) {
        double v = g.gen_eigvals(i);
        bool seen = false;
        for (double d : distinct) {
            seen = seen || std::abs(d - v) <= kEigGapTol;
        }
        if (!seen) {
            distinct.push_back(v);
        }
    }
    if (distinct.size() == 2) {
        g.shift_constant = std::abs(distinct[0] - distinct[1]) / 2.0;
    } else {
        g.shift_constant.reset();
    }
}

Gate make_rotation(Eigen::MatrixXcd generator, std::vector<int> targets, int param_index,
                   std::string name) {
    if (!linalg::is_hermitian(generator, kHermitianTol)) {
        throw std::invalid_argument("rotation generator must be Hermitian");
    }
    Gate g;
    g.kind = GateKind::Rotation;
    g.name = std::move(name);
    g.targets = targets;
    g.generator = Generator{std::move(generator), std::move(targets)};
    g.param_index = param_index;
    attach_generator_cache(g);
    return g;
}

} // namespace

Eigen::MatrixXcd Gate::rotation_unitary(double theta) const {
    if (kind != GateKind::Rotation) {
        throw std::invalid_argument("rotation_unitary called on a fixed gate");
    }
    Eigen::VectorXcd phases(gen_eigvals.size());
    for (Eigen::Index i = 0; i < gen_eigvals.size(); ++i) {
        phases(i) = std::exp(Complex(0.0, -theta * gen_eigvals(i)));
    }
    return gen_eigvecs * phases.asDiagonal() * gen_eigvecs.adjoint();
}

namespace gates {

Gate rx(int target, int param_index) {
    return make_rotation(0.5 * linalg::pauli_matrix('X'), {target}, param_index, "rx");
}

Gate ry(int target, int param_index) {
    return make_rotation(0.5 * linalg::pauli_matrix('Y'), {target}, param_index, "ry");
}

Gate rz(int target, int param_index) {
    return make_rotation(0.5 * linalg::pauli_matrix('Z'), {target}, param_index, "rz");
}

Gate pauli_rotation(const std::string &pauli, const std::vector<int> &targets, int param_index) {
    if (pauli.size() != targets.size()) {
        throw std::invalid_argument("Pauli string length must match target count");
    }
    return make_rotation(0.5 * linalg::pauli_string(pauli), targets, param_index, "rot");
}

Gate rotation(const Eigen::MatrixXcd &generator, const std::vector<int> &targets,
              int param_index) {
    return make_rotation(generator, targets, param_index, "gen");
}

Gate fixed(const Eigen::MatrixXcd &unitary, const std::vector<int> &targets,
           const std::string &name) {
    if (!linalg::is_unitary(unitary, kUnitaryTol)) {
        throw std::invalid_argument("fixed gate matrix must be unitary");
    }
    Gate g;
    g.kind = GateKind::FixedUnitary;
    g.name = name;
    g.targets = targets;
    g.unitary = unitary;
    return g;
}

Gate hadamard(int target) {
    Eigen::MatrixXcd h(2, 2);
    const double s = 1.0 / std::sqrt(2.0);
    h << s, s, s, -s;
    return fixed(h, {target}, "h");
}

Gate pauli_x(int target) { return fixed(linalg::pauli_matrix('X'), {target}, "x"); }

Gate cnot(int control, int target) {
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(4, 4);
    u(0, 0) = 1;
    u(1, 1) = 1;
    u(2, 3) = 1;
    u(3, 2) = 1;
    return fixed(u, {control, target}, "cnot");
}

Gate cz(int control, int target) {
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(4, 4);
    u(3, 3) = -1;
    return fixed(u, {control, target}, "cz");
}

} // namespace gates

namespace {

std::vector<std::vector<std::size_t>> infer_layers(const std::vector<Gate> &gate_list) {
    std::vector<std::vector<std::size_t>> layers;
    std::set<int> used;
    for (std::size_t i = 0; i < gate_list.size(); ++i) {
        bool overlaps = false;
        for (int q : gate_list[i].targets) {
            overlaps = overlaps || used.count(q) > 0;
        }
        if (overlaps || layers.empty()) {
            layers.emplace_back();
            used.clear();
        }
        layers.back().push_back(i);
        used.insert(gate_list[i].targets.begin(), gate_list[i].targets.end());
    }
    return layers;
}

} // namespace

ParamCircuit make_circuit(int n_qubits, int n_params, std::vector<Gate> gate_list,
                          std::optional<std::vector<std::vector<std::size_t>>> layers) {
    ParamCircuit c;
    c.n_qubits = n_qubits;
    c.n_params = n_params;
    c.gates = std::move(gate_list);
    c.layers = layers ? std::move(*layers) : infer_layers(c.gates);

    ValidationReport report = validate(c);
    if (!report.ok) {
        std::ostringstream msg;
        msg << "invalid circuit:";
        for (const auto &e : report.errors) {
            msg << "\n  - " << e;
        }
        throw std::invalid_argument(msg.str());
    }
    return c;
}

ValidationReport validate(const ParamCircuit &circuit) {
    ValidationReport report;
    auto fail = [&report](const std::string &msg) {
        report.ok = false;
        report.errors.push_back(msg);
    };

    if (circuit.n_qubits <= 0) {
        fail("circuit must have at least one qubit");
    }
    if (circuit.n_params < 0) {
        fail("negative parameter count");
    }

    std::vector<int> param_owner(std::max(circuit.n_params, 0), -1);
    for (std::size_t i = 0; i < circuit.gates.size(); ++i) {
        const Gate &g = circuit.gates[i];
        std::ostringstream where;
        where << "gate " << i << " (" << g.name << ")";

        std::set<int> distinct(g.targets.begin(), g.targets.end());
        if (distinct.size() != g.targets.size()) {
            fail(where.str() + ": repeated target qubit");
        }
        for (int q : g.targets) {
            if (q < 0 || q >= circuit.n_qubits) {
                fail(where.str() + ": target qubit out of range");
            }
        }

        const Eigen::Index dim = static_cast<Eigen::Index>(1) << g.targets.size();
        if (g.kind == GateKind::FixedUnitary) {
            if (g.unitary.rows() != dim || g.unitary.cols() != dim) {
                fail(where.str() + ": unitary dimension does not match targets");
            } else if (!linalg::is_unitary(g.unitary, kUnitaryTol)) {
                fail(where.str() + ": matrix is not unitary");
            }
        } else {
            if (g.generator.matrix.rows() != dim || g.generator.matrix.cols() != dim) {
                fail(where.str() + ": generator dimension does not match targets");
            } else if (!linalg::is_hermitian(g.generator.matrix, kHermitianTol)) {
                fail(where.str() + ": generator is not Hermitian");
            }
            if (g.param_index < 0 || g.param_index >= circuit.n_params) {
                fail(where.str() + ": parameter index out of range");
            } else if (param_owner[g.param_index] >= 0) {
                std::ostringstream msg;
                msg << where.str() << ": parameter " << g.param_index
                    << " already used by gate " << param_owner[g.param_index]
                    << " (no parameter sharing)";
                fail(msg.str());
            } else {
                param_owner[g.param_index] = static_cast<int>(i);
            }
            if (g.shift_constant && *g.shift_constant <= 0.0) {
                fail(where.str() + ": shift constant must be positive");
            }
        }
    }

    // layers must partition the gate list, each layer on pairwise-disjoint qubits
    std::vector<int> seen(circuit.gates.size(), 0);
    for (std::size_t li = 0; li < circuit.layers.size(); ++li) {
        std::set<int> used;
        for (std::size_t gi : circuit.layers[li]) {
            if (gi >= circuit.gates.size()) {
                fail("layer refers to a gate index out of range");
                continue;
            }
            seen[gi] += 1;
            for (int q : circuit.gates[gi].targets) {
                if (used.count(q)) {
                    std::ostringstream msg;
                    msg << "overlapping layer " << li << ": qubit " << q
                        << " targeted by two gates";
                    fail(msg.str());
                }
                used.insert(q);
            }
        }
    }
    for (std::size_t gi = 0; gi < seen.size(); ++gi) {
        if (seen[gi] != 1) {
            std::ostringstream msg;
            msg << "layers do not partition the gate list (gate " << gi << " appears " << seen[gi]
                << " times)";
            fail(msg.str());
        }
    }
    // layer order must follow gate order so "the state before a layer" is
    // well defined
    std::size_t previous_max = 0;
    bool first_layer = true;
    for (std::size_t li = 0; li < circuit.layers.size(); ++li) {
        if (circuit.layers[li].empty()) {
            fail("empty layer");
            continue;
        }
        std::size_t lo = circuit.layers[li].front();
        std::size_t hi = lo;
        for (std::size_t gi : circuit.layers[li]) {
            lo = std::min(lo, gi);
            hi = std::max(hi, gi);
        }
        if (!first_layer && lo <= previous_max) {
            std::ostringstream msg;
            msg << "layer " << li << " is out of order with the gate list";
            fail(msg.str());
        }
        previous_max = hi;
        first_layer = false;
    }

    return report;
}

Params shift(const Params &theta, int i, double s) {
    if (i < 0 || i >= theta.size()) {
        throw std::invalid_argument("shift: parameter index out of range");
    }
    Params out = theta;
    out(i) += s;
    return out;
}

std::vector<std::vector<int>> layers_of(const ParamCircuit &circuit) {
    std::vector<std::vector<int>> groups;
    for (const auto &layer : circuit.layers) {
        std::vector<int> group;
        for (std::size_t gi : layer) {
            if (circuit.gates[gi].is_rotation()) {
                group.push_back(circuit.gates[gi].param_index);
            }
        }
        if (!group.empty()) {
            groups.push_back(std::move(group));
        }
    }
    return groups;
}

std::size_t gate_for_param(const ParamCircuit &circuit, int param_index) {
    for (std::size_t i = 0; i < circuit.gates.size(); ++i) {
        if (circuit.gates[i].is_rotation() && circuit.gates[i].param_index == param_index) {
            return i;
        }
    }
    std::ostringstream msg;
    msg << "parameter " << param_index << " does not belong to any rotation gate";
    throw std::invalid_argument(msg.str());
}

Observable::Observable(Eigen::MatrixXcd matrix) : matrix_(std::move(matrix)) {
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) {
        throw std::invalid_argument("observable must be a square matrix");
    }
    if (!linalg::is_hermitian(matrix_, 1e-12)) {
        throw std::invalid_argument("observable must be Hermitian");
    }
    Eigen::Index dim = matrix_.rows();
    while ((static_cast<Eigen::Index>(1) << n_qubits_) < dim) {
        ++n_qubits_;
    }
    if ((static_cast<Eigen::Index>(1) << n_qubits_) != dim) {
        throw std::invalid_argument("observable dimension must be a power of two");
    }
    decomp_ = std::make_shared<std::pair<Eigen::VectorXd, Eigen::MatrixXcd>>();
    once_ = std::make_shared<std::once_flag>();
}

void Observable::ensure_decomposed() const {
    std::call_once(*once_, [this]() {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(matrix_);
        Eigen::MatrixXcd rebuilt =
            es.eigenvectors() * es.eigenvalues().asDiagonal() * es.eigenvectors().adjoint();
        if ((rebuilt - matrix_).cwiseAbs().maxCoeff() > 1e-10) {
            throw ComputationError("observable eigendecomposition failed to reconstruct matrix");
        }
        decomp_->first = es.eigenvalues();
        decomp_->second = es.eigenvectors();
    });
}

const Eigen::VectorXd &Observable::eigenvalues() const {
    ensure_decomposed();
    return decomp_->first;
}

const Eigen::MatrixXcd &Observable::eigenvectors() const {
    ensure_decomposed();
    return decomp_->second;
}

Observable pauli_observable(const std::vector<std::pair<std::string, double>> &terms,
                            int n_qubits) {
    const Eigen::Index dim = static_cast<Eigen::Index>(1) << n_qubits;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto &[word, coeff] : terms) {
        if (static_cast<int>(word.size()) != n_qubits) {
            throw std::invalid_argument("Pauli word length must equal qubit count");
        }
        m += coeff * linalg::pauli_string(word);
    }
    return Observable(m);
}

} // namespace fisherlab
