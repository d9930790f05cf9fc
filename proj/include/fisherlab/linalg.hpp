#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fisherlab {

using Complex = std::complex<double>;

/// Thrown when a computation fails for a mathematically meaningful reason
/// (singular metric, KL support violation, Fisher discontinuity, size limit).
/// Precondition violations use std::invalid_argument instead.
class ComputationError : public std::runtime_error {
  public:
    explicit ComputationError(const std::string &what) : std::runtime_error(what) {}
};

namespace linalg {

inline bool is_hermitian(const Eigen::MatrixXcd &m, double tol) {
    if (m.rows() != m.cols()) {
        return false;
    }
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

inline bool is_unitary(const Eigen::MatrixXcd &m, double tol) {
    if (m.rows() != m.cols()) {
        return false;
    }
    Eigen::MatrixXcd prod = m.adjoint() * m;
    prod -= Eigen::MatrixXcd::Identity(m.rows(), m.cols());
    return prod.cwiseAbs().maxCoeff() <= tol;
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd &a, const Eigen::MatrixXcd &b);

/// Embeds a 2^k x 2^k operator acting on the given (ordered, distinct) target
/// qubits into the full 2^n x 2^n space. Qubit 0 is the most significant bit
/// of the basis index; the first target supplies the most significant bit of
/// the operator's local index.
Eigen::MatrixXcd embed(const Eigen::MatrixXcd &op, const std::vector<int> &targets, int n_qubits);

/// Applies a 2^k x 2^k matrix to the targeted qubits of a length-2^n vector
/// in place. Works for non-unitary matrices too (used for generator insertion).
void apply_matrix(Eigen::VectorXcd &state, const Eigen::MatrixXcd &op,
                  const std::vector<int> &targets, int n_qubits);

/// Hermitian matrix function via eigendecomposition: f applied to eigenvalues.
Eigen::MatrixXcd hermitian_function(const Eigen::MatrixXcd &m,
                                    const std::function<Complex(double)> &f);

/// Unique PSD square root; eigenvalues in [-neg_tol, 0) are clamped to zero,
/// anything below -neg_tol is rejected.
Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd &m, double neg_tol = 1e-9);

/// Clips negative eigenvalues of a real symmetric matrix at zero.
Eigen::MatrixXd psd_project(const Eigen::MatrixXd &m);

/// Smallest eigenvalue of the symmetrized matrix.
double min_eigenvalue(const Eigen::MatrixXd &m);

Eigen::MatrixXcd pauli_matrix(char p);

/// Tensor product of single-qubit Paulis, e.g. "XZ" -> X (x) Z.
Eigen::MatrixXcd pauli_string(const std::string &s);

} // namespace linalg

namespace rng {

/// splitmix64 step; used both as a generator and as a seed mixer.
inline std::uint64_t splitmix64(std::uint64_t &state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministically derives an independent sub-seed for evaluation `stream`.
/// Estimators hand every internal evaluation its own stream index, so results
/// do not depend on evaluation order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s = a ^ (stream * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
    return splitmix64(s);
}

/// Small deterministic PRNG. All sampling in the library goes through this
/// (inverse-CDF draws), keeping outputs bit-reproducible across platforms
/// with identical IEEE doubles.
class Stream {
  public:
    explicit Stream(std::uint64_t seed) : state_(seed) {
        // decorrelate trivially close seeds
        splitmix64(state_);
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform sign +/-1.
    double next_sign() { return (next_u64() & 1ULL) ? 1.0 : -1.0; }

    /// Standard normal via Box-Muller.
    double next_normal();

  private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace rng
} // namespace fisherlab
