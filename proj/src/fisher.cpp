#include "fisherlab/fisher.hpp"

#include <cmath>
#include <sstream>

namespace fisherlab {

std::string to_string(FisherKind kind) {
    return kind == FisherKind::Classical ? "classical" : "quantum";
}

std::string to_string(FisherMethod method) {
    switch (method) {
    case FisherMethod::Exact:
        return "exact";
    case FisherMethod::Sampled:
        return "sampled";
    case FisherMethod::ParamShift:
        return "param-shift";
    case FisherMethod::FiniteDiff:
        return "finite-diff";
    case FisherMethod::Spsa:
        return "spsa";
    case FisherMethod::MixedExact:
        return "mixed-exact";
    }
    return "unknown";
}

namespace {

double shift_amount(const ParamCircuit &circuit, int param) {
    const Gate &g = circuit.gates[gate_for_param(circuit, param)];
    if (!g.shift_constant) {
        std::ostringstream msg;
        msg << "gate for parameter " << param << " (" << g.name
            << ") has no two-point parameter-shift rule";
        throw ComputationError(msg.str());
    }
    return M_PI / (4.0 * *g.shift_constant);
}

Eigen::VectorXd probs_at(const ParamCircuit &circuit, const Params &theta, const Measurement &m) {
    return probabilities(run_pure(circuit, theta), m).probs;
}

/// Shared CFIM assembly with the zero-probability term handling.
Eigen::MatrixXd cfim_from_probs(const Eigen::VectorXd &probs, const Eigen::MatrixXd &jac,
                                double p_tol, double grad_tol) {
    const Eigen::Index d = jac.cols();
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index l = 0; l < probs.size(); ++l) {
        if (probs(l) <= p_tol) {
            if (jac.row(l).cwiseAbs().maxCoeff() > grad_tol) {
                std::ostringstream msg;
                msg << "Fisher discontinuity: outcome " << l
                    << " has vanishing probability but a non-vanishing derivative";
                throw ComputationError(msg.str());
            }
            continue;
        }
        info += jac.row(l).transpose() * jac.row(l) / probs(l);
    }
    return info;
}

} // namespace

ProbJacobian prob_jacobian(const ParamCircuit &circuit, const Params &theta, const Measurement &m,
                           const JacobianMode &mode) {
    const int d = circuit.n_params;
    Eigen::MatrixXd jac(m.n_outcomes(), d);
    if (const auto *fd = std::get_if<CentralFDMode>(&mode)) {
        if (fd->epsilon <= 0.0) {
            throw std::invalid_argument("finite-difference step must be positive");
        }
        for (int i = 0; i < d; ++i) {
            Eigen::VectorXd plus = probs_at(circuit, shift(theta, i, fd->epsilon), m);
            Eigen::VectorXd minus = probs_at(circuit, shift(theta, i, -fd->epsilon), m);
            jac.col(i) = (plus - minus) / (2.0 * fd->epsilon);
        }
    } else {
        for (int i = 0; i < d; ++i) {
            const double s = shift_amount(circuit, i);
            const double r = M_PI / (4.0 * s);
            Eigen::VectorXd plus = probs_at(circuit, shift(theta, i, s), m);
            Eigen::VectorXd minus = probs_at(circuit, shift(theta, i, -s), m);
            jac.col(i) = r * (plus - minus);
        }
    }
    return ProbJacobian{std::move(jac)};
}

ProbJacobian prob_jacobian_exact(const ParamCircuit &circuit, const Params &theta,
                                 const Measurement &m) {
    const int d = circuit.n_params;
    StateVector psi = run_pure(circuit, theta);
    Eigen::MatrixXd jac(m.n_outcomes(), d);
    for (int i = 0; i < d; ++i) {
        Eigen::VectorXcd dpsi = derivative_state(circuit, theta, i);
        if (m.is_computational()) {
            for (Eigen::Index l = 0; l < psi.amplitudes.size(); ++l) {
                jac(l, i) = 2.0 * std::real(std::conj(dpsi(l)) * psi.amplitudes(l));
            }
        } else {
            const auto &effects = m.effects();
            for (std::size_t l = 0; l < effects.size(); ++l) {
                jac(static_cast<Eigen::Index>(l), i) =
                    2.0 * std::real(dpsi.dot(effects[l] * psi.amplitudes));
            }
        }
    }
    return ProbJacobian{std::move(jac)};
}

FisherMatrix cfim_exact(const ParamCircuit &circuit, const Params &theta, const Measurement &m) {
    Eigen::VectorXd probs = probs_at(circuit, theta, m);
    ProbJacobian jac = prob_jacobian_exact(circuit, theta, m);
    FisherMatrix out;
    out.entries = cfim_from_probs(probs, jac.matrix, kProbTol, kGradTol);
    out.kind = FisherKind::Classical;
    out.method = FisherMethod::Exact;
    return out;
}

FisherMatrix cfim_sampled(const ParamCircuit &circuit, const Params &theta, const Measurement &m,
                          std::optional<std::int64_t> shots, std::uint64_t seed,
                          const JacobianMode &mode) {
    if (shots && *shots <= 0) {
        throw std::invalid_argument("cfim_sampled needs a positive shot count");
    }
    // evaluation k: 0 = base point, 2i+1 / 2i+2 = plus / minus shift of
    // parameter i; each gets its own derived seed so scheduling cannot matter
    auto estimate = [&](const Params &at, std::uint64_t stream) {
        Eigen::VectorXd exact = probs_at(circuit, at, m);
        if (!shots) {
            return exact;
        }
        SampleCounts counts = sample(ProbDist{exact}, *shots, rng::derive_seed(seed, stream));
        Eigen::VectorXd freq(exact.size());
        for (Eigen::Index l = 0; l < freq.size(); ++l) {
            freq(l) = static_cast<double>(counts.counts[static_cast<std::size_t>(l)]) /
                      static_cast<double>(*shots);
        }
        return freq;
    };

    const int d = circuit.n_params;
    Eigen::VectorXd base = estimate(theta, 0);
    Eigen::MatrixXd jac(m.n_outcomes(), d);
    for (int i = 0; i < d; ++i) {
        double s = 0.0;
        double scale = 0.0;
        if (const auto *fd = std::get_if<CentralFDMode>(&mode)) {
            if (fd->epsilon <= 0.0) {
                throw std::invalid_argument("finite-difference step must be positive");
            }
            s = fd->epsilon;
            scale = 1.0 / (2.0 * fd->epsilon);
        } else {
            s = shift_amount(circuit, i);
            scale = M_PI / (4.0 * s);
        }
        Eigen::VectorXd plus = estimate(shift(theta, i, s), 2 * static_cast<std::uint64_t>(i) + 1);
        Eigen::VectorXd minus =
            estimate(shift(theta, i, -s), 2 * static_cast<std::uint64_t>(i) + 2);
        jac.col(i) = scale * (plus - minus);
    }

    const double p_tol = shots ? 0.0 : kProbTol;
    Eigen::MatrixXd info = cfim_from_probs(base, jac, p_tol, kGradTol);
    FisherMatrix out;
    out.entries = 0.5 * (info + info.transpose());
    out.kind = FisherKind::Classical;
    out.method = FisherMethod::Sampled;
    if (shots) {
        out.meta.shots = *shots;
        out.meta.seed = seed;
    }
    if (const auto *fd = std::get_if<CentralFDMode>(&mode)) {
        out.meta.epsilon = fd->epsilon;
    }
    return out;
}

FisherMatrix qfim_pure(const ParamCircuit &circuit, const Params &theta) {
    const int d = circuit.n_params;
    StateVector psi = run_pure(circuit, theta);
    std::vector<Eigen::VectorXcd> dpsi;
    dpsi.reserve(d);
    for (int i = 0; i < d; ++i) {
        dpsi.push_back(derivative_state(circuit, theta, i));
    }
    Eigen::VectorXcd berry(d);
    for (int i = 0; i < d; ++i) {
        berry(i) = dpsi[static_cast<std::size_t>(i)].dot(psi.amplitudes); // <d_i psi|psi>
    }
    FisherMatrix out;
    out.entries = Eigen::MatrixXd(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            const Complex overlap =
                dpsi[static_cast<std::size_t>(i)].dot(dpsi[static_cast<std::size_t>(j)]);
            const double value = 4.0 * std::real(overlap - berry(i) * std::conj(berry(j)));
            out.entries(i, j) = value;
            out.entries(j, i) = value;
        }
    }
    out.kind = FisherKind::Quantum;
    out.method = FisherMethod::Exact;
    return out;
}

PartialFisherMatrix qfim_layer_blocks(const ParamCircuit &circuit, const Params &theta) {
    const int d = circuit.n_params;
    PartialFisherMatrix out;
    out.entries = Eigen::MatrixXd::Constant(d, d, std::nan(""));
    out.is_set = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(d, d, false);
    out.blocks = layers_of(circuit);

    Eigen::VectorXcd state =
        Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(1) << circuit.n_qubits);
    state(0) = 1.0;

    for (const auto &layer : circuit.layers) {
        std::vector<int> params;
        std::vector<Eigen::VectorXcd> applied; // G_i |psi_0>
        for (std::size_t gi : layer) {
            const Gate &g = circuit.gates[gi];
            if (!g.is_rotation()) {
                continue;
            }
            Eigen::VectorXcd w = state;
            linalg::apply_matrix(w, g.generator.matrix, g.targets, circuit.n_qubits);
            params.push_back(g.param_index);
            applied.push_back(std::move(w));
        }
        for (std::size_t a = 0; a < params.size(); ++a) {
            const double ea = std::real(state.dot(applied[a]));
            for (std::size_t b = a; b < params.size(); ++b) {
                const double eb = std::real(state.dot(applied[b]));
                const double cross = std::real(applied[a].dot(applied[b]));
                const double value = 4.0 * (cross - ea * eb);
                out.entries(params[a], params[b]) = value;
                out.entries(params[b], params[a]) = value;
                out.is_set(params[a], params[b]) = true;
                out.is_set(params[b], params[a]) = true;
            }
        }
        for (std::size_t gi : layer) {
            apply_gate(state, circuit.gates[gi], theta, circuit.n_qubits);
        }
    }
    return out;
}

FisherMatrix qfim_param_shift(const ParamCircuit &circuit, const Params &theta) {
    for (const Gate &g : circuit.gates) {
        if (g.is_rotation() && (!g.shift_constant || std::abs(*g.shift_constant - 0.5) > 1e-12)) {
            throw ComputationError(
                "parameter-shift QFIM needs two-eigenvalue generators with r = 1/2");
        }
    }
    const int d = circuit.n_params;
    const double half_pi = M_PI / 2.0;

    auto overlap = [&](int i, double si, int j, double sj) {
        Params shifted = shift(shift(theta, i, si), j, sj);
        return overlap_compute_reverse(circuit, theta, shifted);
    };

    FisherMatrix out;
    out.entries = Eigen::MatrixXd(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            const double value = -0.5 * (overlap(i, half_pi, j, half_pi) -
                                         overlap(i, half_pi, j, -half_pi) -
                                         overlap(i, -half_pi, j, half_pi) +
                                         overlap(i, -half_pi, j, -half_pi));
            out.entries(i, j) = value;
            out.entries(j, i) = value;
        }
    }
    out.kind = FisherKind::Quantum;
    out.method = FisherMethod::ParamShift;
    return out;
}

double qfim_projection_fd(const ParamCircuit &circuit, const Params &theta,
                          const Eigen::VectorXd &v, double epsilon) {
    if (v.size() != circuit.n_params) {
        throw std::invalid_argument("direction length does not match parameter count");
    }
    if (std::abs(v.norm() - 1.0) > 1e-9) {
        throw std::invalid_argument("direction must be a unit vector");
    }
    if (epsilon <= 0.0) {
        throw std::invalid_argument("step must be positive");
    }
    StateVector base = run_pure(circuit, theta);
    StateVector moved = run_pure(circuit, theta + epsilon * v);
    return 4.0 * fidelity_distance(base, moved) / (epsilon * epsilon);
}

FisherMatrix qfim_spsa(const ParamCircuit &circuit, const Params &theta, double epsilon,
                       int n_samples, std::uint64_t seed, bool psd_project) {
    if (n_samples < 1) {
        throw std::invalid_argument("SPSA needs at least one sample");
    }
    if (epsilon <= 0.0) {
        throw std::invalid_argument("SPSA perturbation must be positive");
    }
    const int d = circuit.n_params;
    StateVector base = run_pure(circuit, theta);

    auto fidelity_at = [&](const Eigen::VectorXd &delta) {
        StateVector moved = run_pure(circuit, theta + delta);
        return fidelity_pure(base, moved);
    };

    const double unit = 1.0 / std::sqrt(static_cast<double>(d));
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
    for (int s = 0; s < n_samples; ++s) {
        rng::Stream stream(rng::derive_seed(seed, static_cast<std::uint64_t>(s)));
        Eigen::VectorXd v1(d), v2(d);
        for (int i = 0; i < d; ++i) {
            v1(i) = stream.next_sign() * unit;
        }
        for (int i = 0; i < d; ++i) {
            v2(i) = stream.next_sign() * unit;
        }
        const double delta_f =
            fidelity_at(epsilon * (v1 + v2)) - fidelity_at(-epsilon * v1) -
            fidelity_at(epsilon * (v2 - v1)) + fidelity_at(epsilon * v1);
        acc += -delta_f / (2.0 * epsilon * epsilon) *
               (v1 * v2.transpose() + v2 * v1.transpose());
    }
    // directions of unit length make the raw estimate carry E[..] = F / d^2
    const double calibration = static_cast<double>(d) * static_cast<double>(d);
    Eigen::MatrixXd estimate = calibration * acc / static_cast<double>(n_samples);
    estimate = 0.5 * (estimate + estimate.transpose().eval());
    if (psd_project) {
        estimate = linalg::psd_project(estimate);
    }

    FisherMatrix out;
    out.entries = std::move(estimate);
    out.kind = FisherKind::Quantum;
    out.method = FisherMethod::Spsa;
    out.meta.epsilon = epsilon;
    out.meta.n_samples = n_samples;
    out.meta.seed = seed;
    if (n_samples == 1) {
        out.meta.note = "single-sample estimate has rank <= 2";
    }
    return out;
}

MixedFamily mixed_family(const ParamCircuit &circuit, const Params &theta, const NoiseSpec &noise,
                         double fd_step) {
    if (fd_step <= 0.0) {
        throw std::invalid_argument("finite-difference step must be positive");
    }
    MixedFamily family;
    family.rho = run_mixed(circuit, theta, noise);
    for (int i = 0; i < circuit.n_params; ++i) {
        DensityMatrix plus = run_mixed(circuit, shift(theta, i, fd_step), noise);
        DensityMatrix minus = run_mixed(circuit, shift(theta, i, -fd_step), noise);
        family.derivatives.push_back((plus.matrix - minus.matrix) / (2.0 * fd_step));
    }
    return family;
}

namespace {

struct EigenFrame {
    Spectrum spec;
    std::vector<Eigen::MatrixXcd> derivs_in_basis;
};

EigenFrame to_eigenbasis(const DensityMatrix &rho, const std::vector<Eigen::MatrixXcd> &derivatives,
                         double zero_tol, double grad_tol) {
    EigenFrame frame;
    frame.spec = eigendecompose(rho, zero_tol);
    const Eigen::MatrixXcd &v = frame.spec.eigenvectors;
    for (const auto &drho : derivatives) {
        if (drho.rows() != rho.matrix.rows() || drho.cols() != rho.matrix.cols()) {
            throw std::invalid_argument("derivative dimension does not match the state");
        }
        frame.derivs_in_basis.push_back(v.adjoint() * drho * v);
    }
    // a zero eigenvalue whose own derivative is non-vanishing means the rank
    // changes at theta and the information matrix is not defined there
    for (Eigen::Index k = 0; k < frame.spec.eigenvalues.size(); ++k) {
        if (!frame.spec.zero_flag[static_cast<std::size_t>(k)]) {
            continue;
        }
        for (const auto &a : frame.derivs_in_basis) {
            if (std::abs(a(k, k)) > grad_tol) {
                throw ComputationError("rank-change discontinuity: vanishing eigenvalue with "
                                       "non-vanishing derivative");
            }
        }
    }
    return frame;
}

} // namespace

FisherMatrix qfim_mixed(const DensityMatrix &rho, const std::vector<Eigen::MatrixXcd> &derivatives,
                        double zero_tol, double grad_tol) {
    EigenFrame frame = to_eigenbasis(rho, derivatives, zero_tol, grad_tol);
    const Eigen::Index dim = rho.matrix.rows();
    const int d = static_cast<int>(derivatives.size());

    FisherMatrix out;
    out.entries = Eigen::MatrixXd(d, d);
    for (int i = 0; i < d; ++i) {
        const Eigen::MatrixXcd &a = frame.derivs_in_basis[static_cast<std::size_t>(i)];
        for (int j = i; j < d; ++j) {
            const Eigen::MatrixXcd &b = frame.derivs_in_basis[static_cast<std::size_t>(j)];
            double sum = 0.0;
            for (Eigen::Index k = 0; k < dim; ++k) {
                for (Eigen::Index l = 0; l < dim; ++l) {
                    const double denom = frame.spec.eigenvalues(k) + frame.spec.eigenvalues(l);
                    if (denom <= zero_tol) {
                        continue;
                    }
                    sum += 2.0 * std::real(a(k, l) * b(l, k)) / denom;
                }
            }
            out.entries(i, j) = sum;
            out.entries(j, i) = sum;
        }
    }
    out.kind = FisherKind::Quantum;
    out.method = FisherMethod::MixedExact;
    return out;
}

SLDSet sld_operators(const DensityMatrix &rho, const std::vector<Eigen::MatrixXcd> &derivatives,
                     double zero_tol, double grad_tol) {
    EigenFrame frame = to_eigenbasis(rho, derivatives, zero_tol, grad_tol);
    const Eigen::Index dim = rho.matrix.rows();
    const Eigen::MatrixXcd &v = frame.spec.eigenvectors;

    SLDSet out;
    for (const auto &a : frame.derivs_in_basis) {
        Eigen::MatrixXcd l_tilde = Eigen::MatrixXcd::Zero(dim, dim);
        for (Eigen::Index k = 0; k < dim; ++k) {
            for (Eigen::Index l = 0; l < dim; ++l) {
                const double denom = frame.spec.eigenvalues(k) + frame.spec.eigenvalues(l);
                if (denom > zero_tol) {
                    l_tilde(k, l) = 2.0 * a(k, l) / denom;
                }
            }
        }
        out.operators.push_back(v * l_tilde * v.adjoint());
    }
    return out;
}

FisherMatrix reparametrize(const FisherMatrix &fisher, const Eigen::MatrixXd &jacobian) {
    if (jacobian.cols() != fisher.d()) {
        throw std::invalid_argument("Jacobian column count must match the matrix dimension");
    }
    FisherMatrix out;
    out.entries = jacobian * fisher.entries * jacobian.transpose();
    out.entries = 0.5 * (out.entries + out.entries.transpose().eval());
    out.kind = fisher.kind;
    out.method = fisher.method;
    out.meta = fisher.meta;
    return out;
}

} // namespace fisherlab
