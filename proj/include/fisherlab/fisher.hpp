#pragma once

#include "fisherlab/divergence.hpp"
#include "fisherlab/simulator.hpp"

#include <optional>
#include <variant>

namespace fisherlab {

enum class FisherKind { Classical, Quantum };
enum class FisherMethod { Exact, Sampled, ParamShift, FiniteDiff, Spsa, MixedExact };

std::string to_string(FisherKind kind);
std::string to_string(FisherMethod method);

struct FisherMeta {
    std::optional<std::int64_t> shots;
    std::optional<std::uint64_t> seed;
    std::optional<double> epsilon;
    std::optional<int> n_samples;
    std::optional<std::string> note;
};

/// d x d real symmetric information matrix, tagged by origin. Exact methods
/// produce symmetric PSD matrices; estimators are symmetrized on output.
struct FisherMatrix {
    Eigen::MatrixXd entries;
    FisherKind kind = FisherKind::Classical;
    FisherMethod method = FisherMethod::Exact;
    FisherMeta meta;

    Eigen::Index d() const { return entries.rows(); }
};

/// Matrix of output-probability derivatives, outcomes x parameters.
/// Columns sum to zero since the probabilities always sum to one.
struct ProbJacobian {
    Eigen::MatrixXd matrix;
};

struct ParamShiftMode {};
struct CentralFDMode {
    double epsilon = 1e-5;
};
using JacobianMode = std::variant<ParamShiftMode, CentralFDMode>;

/// Probability derivatives from shifted evaluations: the two-point shift rule
/// r (p(theta + pi/(4r) e_i) - p(theta - pi/(4r) e_i)) where every rotation
/// generator supports one, or central finite differences.
ProbJacobian prob_jacobian(const ParamCircuit &circuit, const Params &theta, const Measurement &m,
                           const JacobianMode &mode);

/// Analytically exact derivatives 2 Re <d_i psi| Pi_l |psi> via generator
/// insertion; works for any Hermitian generator. This is the route behind
/// cfim_exact.
ProbJacobian prob_jacobian_exact(const ParamCircuit &circuit, const Params &theta,
                                 const Measurement &m);

// Zero-probability handling: outcomes with p <= p_tol are dropped when all
// their derivatives stay under grad_tol and rejected as a discontinuity
// otherwise.
constexpr double kProbTol = 1e-12;
constexpr double kGradTol = 1e-8;

/// I_ij = sum_l (d_i p_l)(d_j p_l) / p_l over outcomes with p_l > p_tol.
FisherMatrix cfim_exact(const ParamCircuit &circuit, const Params &theta, const Measurement &m);

/// Same formula on empirical frequencies; every evaluation point (base and
/// each shift) gets an independent shot batch with a derived seed. Passing
/// nullopt shots runs the identical pipeline on exact probabilities.
FisherMatrix cfim_sampled(const ParamCircuit &circuit, const Params &theta, const Measurement &m,
                          std::optional<std::int64_t> shots, std::uint64_t seed,
                          const JacobianMode &mode = ParamShiftMode{});

/// F_ij = 4 Re[<d_i psi|d_j psi> - <d_i psi|psi><psi|d_j psi>].
FisherMatrix qfim_pure(const ParamCircuit &circuit, const Params &theta);

/// Entries corresponding to rotation gates inside one layer, computed as the
/// fourfold covariance of their generators on the state entering the layer.
/// Entries across layers are left unset.
struct PartialFisherMatrix {
    Eigen::MatrixXd entries;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> is_set;
    std::vector<std::vector<int>> blocks;
};

PartialFisherMatrix qfim_layer_blocks(const ParamCircuit &circuit, const Params &theta);

/// Four-overlap expression with pi/2 shifts; requires r = 1/2 on every gate.
FisherMatrix qfim_param_shift(const ParamCircuit &circuit, const Params &theta);

/// v^T F v ~ 4 d_f(psi(theta), psi(theta + eps v)) / eps^2 for a unit vector v.
double qfim_projection_fd(const ParamCircuit &circuit, const Params &theta,
                          const Eigen::VectorXd &v, double epsilon);

/// Averaged rank-2 stochastic estimates from random simultaneous
/// perturbations. Directions have i.i.d. components in {-1,+1}/sqrt(d); the
/// raw outer-product estimate then carries expectation F/d^2, so results are
/// rescaled by d^2 (for d = 1 a single estimate already reproduces F up to
/// O(eps^2)). With psd_project, negative eigenvalues of the average are
/// clipped at zero.
FisherMatrix qfim_spsa(const ParamCircuit &circuit, const Params &theta, double epsilon,
                       int n_samples, std::uint64_t seed, bool psd_project = false);

/// A mixed-state family snapshot: rho(theta) and its parameter derivatives.
struct MixedFamily {
    DensityMatrix rho;
    std::vector<Eigen::MatrixXcd> derivatives;
};

/// Builds the family from noisy circuit runs, with central finite differences
/// of step fd_step for the derivatives.
MixedFamily mixed_family(const ParamCircuit &circuit, const Params &theta, const NoiseSpec &noise,
                         double fd_step = 1e-5);

/// F_ij = sum over eigenvalue pairs with lambda_k + lambda_l > zero_tol of
/// 2 Re(<k|d_i rho|l><l|d_j rho|k>) / (lambda_k + lambda_l).
FisherMatrix qfim_mixed(const DensityMatrix &rho, const std::vector<Eigen::MatrixXcd> &derivatives,
                        double zero_tol = 1e-10, double grad_tol = kGradTol);

/// Symmetric logarithmic derivatives: (L_i)_kl = 2 <k|d_i rho|l> / (l_k + l_l)
/// in the eigenbasis, zero where the denominator falls below zero_tol.
struct SLDSet {
    std::vector<Eigen::MatrixXcd> operators;
};

SLDSet sld_operators(const DensityMatrix &rho, const std::vector<Eigen::MatrixXcd> &derivatives,
                     double zero_tol = 1e-10, double grad_tol = kGradTol);

/// Information matrix in new coordinates: J F J^T for a d' x d Jacobian J.
FisherMatrix reparametrize(const FisherMatrix &fisher, const Eigen::MatrixXd &jacobian);

} // namespace fisherlab
