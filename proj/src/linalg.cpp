#include "fisherlab/linalg.hpp"

#include <cmath>

namespace fisherlab {
namespace linalg {

Eigen::MatrixXcd kron(const Eigen::MatrixXcd &a, const Eigen::MatrixXcd &b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

namespace {

// Scatters the k target-qubit bits of a local pattern into a full basis index.
// Qubit q occupies bit (n - 1 - q); target j supplies local bit (k - 1 - j).
std::size_t compose_index(std::size_t rest, std::size_t pattern,
                          const std::vector<int> &target_bits, const std::vector<int> &rest_bits) {
    std::size_t idx = 0;
    for (std::size_t j = 0; j < rest_bits.size(); ++j) {
        if ((rest >> j) & 1ULL) {
            idx |= 1ULL << rest_bits[j];
        }
    }
    const std::size_t k = target_bits.size();
    for (std::size_t j = 0; j < k; ++j) {
        if ((pattern >> (k - 1 - j)) & 1ULL) {
            idx |= 1ULL << target_bits[j];
        }
    }
    return idx;
}

void target_layout(const std::vector<int> &targets, int n_qubits, std::vector<int> &target_bits,
                   std::vector<int> &rest_bits) {
    target_bits.clear();
    rest_bits.clear();
    for (int t : targets) {
        if (t < 0 || t >= n_qubits) {
            throw std::invalid_argument("target qubit out of range");
        }
        target_bits.push_back(n_qubits - 1 - t);
    }
    for (int q = 0; q < n_qubits; ++q) {
        bool is_target = false;
        for (int t : targets) {
            is_target = is_target || (t == q);
        }
        if (!is_target) {
            rest_bits.push_back(n_qubits - 1 - q);
        }
    }
}

} // namespace

Eigen::MatrixXcd embed(const Eigen::MatrixXcd &op, const std::vector<int> &targets, int n_qubits) {
    const std::size_t k = targets.size();
    const std::size_t local_dim = 1ULL << k;
    if (op.rows() != static_cast<Eigen::Index>(local_dim) || op.cols() != op.rows()) {
        throw std::invalid_argument("operator dimension does not match target count");
    }
    const std::size_t dim = 1ULL << n_qubits;
    std::vector<int> target_bits, rest_bits;
    target_layout(targets, n_qubits, target_bits, rest_bits);

    Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(dim, dim);
    const std::size_t n_rest = 1ULL << rest_bits.size();
    for (std::size_t rest = 0; rest < n_rest; ++rest) {
        for (std::size_t a = 0; a < local_dim; ++a) {
            const std::size_t row = compose_index(rest, a, target_bits, rest_bits);
            for (std::size_t b = 0; b < local_dim; ++b) {
                full(row, compose_index(rest, b, target_bits, rest_bits)) = op(a, b);
            }
        }
    }
    return full;
}

void apply_matrix(Eigen::VectorXcd &state, const Eigen::MatrixXcd &op,
                  const std::vector<int> &targets, int n_qubits) {
    const std::size_t k = targets.size();
    const std::size_t local_dim = 1ULL << k;
    if (op.rows() != static_cast<Eigen::Index>(local_dim) || op.cols() != op.rows()) {
        throw std::invalid_argument("operator dimension does not match target count");
    }
    if (state.size() != static_cast<Eigen::Index>(1ULL << n_qubits)) {
        throw std::invalid_argument("state dimension mismatch");
    }
    std::vector<int> target_bits, rest_bits;
    target_layout(targets, n_qubits, target_bits, rest_bits);

    std::vector<std::size_t> idx(local_dim);
    Eigen::VectorXcd gathered(local_dim);
    const std::size_t n_rest = 1ULL << rest_bits.size();
    for (std::size_t rest = 0; rest < n_rest; ++rest) {
        for (std::size_t a = 0; a < local_dim; ++a) {
            idx[a] = compose_index(rest, a, target_bits, rest_bits);
            gathered(a) = state(idx[a]);
        }
        Eigen::VectorXcd mixed = op * gathered;
        for (std::size_t a = 0; a < local_dim; ++a) {
            state(idx[a]) = mixed(a);
        }
    }
}

Eigen::MatrixXcd hermitian_function(const Eigen::MatrixXcd &m,
                                    const std::function<Complex(double)> &f) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    if (es.info() != Eigen::Success) {
        throw ComputationError("hermitian eigendecomposition failed");
    }
    Eigen::VectorXcd fvals(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < fvals.size(); ++i) {
        fvals(i) = f(es.eigenvalues()(i));
    }
    return es.eigenvectors() * fvals.asDiagonal() * es.eigenvectors().adjoint();
}

Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd &m, double neg_tol) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    if (es.info() != Eigen::Success) {
        throw ComputationError("hermitian eigendecomposition failed");
    }
    // eigenvalues at round-off scale are zeroed before the square root; the
    // infinite slope of sqrt at 0 would otherwise amplify 1e-16 noise to 1e-8
    const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
    const double zero_clamp = 1e-14 * std::max(scale, 1e-300);
    Eigen::VectorXcd roots(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < roots.size(); ++i) {
        double lam = es.eigenvalues()(i);
        if (lam < -neg_tol) {
            throw ComputationError("matrix square root of a non-PSD matrix");
        }
        roots(i) = lam > zero_clamp ? std::sqrt(lam) : 0.0;
    }
    return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().adjoint();
}

Eigen::MatrixXd psd_project(const Eigen::MatrixXd &m) {
    Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
}

double min_eigenvalue(const Eigen::MatrixXd &m) {
    if (m.rows() == 0) {
        return 0.0;
    }
    Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

Eigen::MatrixXcd pauli_matrix(char p) {
    Eigen::MatrixXcd m(2, 2);
    switch (p) {
    case 'I':
        m << 1, 0, 0, 1;
        break;
    case 'X':
        m << 0, 1, 1, 0;
        break;
    case 'Y':
        m << 0, Complex(0, -1), Complex(0, 1), 0;
        break;
    case 'Z':
        m << 1, 0, 0, -1;
        break;
    default:
        throw std::invalid_argument(std::string("unknown Pauli label '") + p + "'");
    }
    return m;
}

Eigen::MatrixXcd pauli_string(const std::string &s) {
    if (s.empty()) {
        throw std::invalid_argument("empty Pauli string");
    }
    Eigen::MatrixXcd out = pauli_matrix(s[0]);
    for (std::size_t i = 1; i < s.size(); ++i) {
        out = kron(out, pauli_matrix(s[i]));
    }
    return out;
}

} // namespace linalg

namespace rng {

double Stream::next_normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = 0.0;
    do {
        u1 = next_double();
    } while (u1 <= 0.0);
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

} // namespace rng
} // namespace fisherlab
