// Acceptance suite: one check per release criterion, one pass/fail line each.
// Exit code is the number of failed criteria.

#include "fisherlab/divergence.hpp"
#include "fisherlab/fisher.hpp"
#include "fisherlab/metrology.hpp"
#include "fisherlab/optimize.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstring>
#include <functional>
#include <iostream>
#include <sstream>

using namespace fisherlab;

namespace {

void check(bool condition, const std::string &message) {
    if (!condition) {
        throw std::runtime_error(message);
    }
}

void check_close(double actual, double expected, double tol, const std::string &what) {
    if (std::abs(actual - expected) > tol) {
        std::ostringstream msg;
        msg.precision(17);
        msg << what << ": got " << actual << ", expected " << expected << " (tol " << tol << ")";
        throw std::runtime_error(msg.str());
    }
}

Params scalar(double x) { return (Params(1) << x).finished(); }

// ---- 1. Heisenberg scaling --------------------------------------------------

void criterion_heisenberg() {
    for (int n = 1; n <= 5; ++n) {
        SensingModel ghz{ghz_probe(n), collective_phase_encoding(n), empty_stage(n)};
        const double f = sensing_qfim(ghz, Params(0), Params::Zero(1)).entries(0, 0);
        check_close(f, static_cast<double>(n) * n, 1e-9, "GHZ probe, n = " + std::to_string(n));

        SensingModel sep{plus_probes(n), collective_phase_encoding(n), empty_stage(n)};
        const double g = sensing_qfim(sep, Params(0), Params::Zero(1)).entries(0, 0);
        check_close(g, static_cast<double>(n), 1e-9, "separate probes, n = " + std::to_string(n));
    }
}

// ---- 2. QFIM method cross-agreement -----------------------------------------

void criterion_qfim_methods() {
    rng::Stream rng(20250801);
    for (int instance = 0; instance < 20; ++instance) {
        const int n_qubits = 2 + static_cast<int>(rng.next_u64() % 3); // 2..4
        const int depth = 3 + static_cast<int>(rng.next_u64() % 4);    // 3..6
        ParamCircuit c = oracle::random_pauli_circuit(rng, n_qubits, depth, 8);
        Params theta = oracle::random_params(rng, c.n_params);

        FisherMatrix exact = qfim_pure(c, theta);
        FisherMatrix shifted = qfim_param_shift(c, theta);
        check((exact.entries - shifted.entries).norm() <= 1e-8,
              "parameter-shift QFIM drifted from the exact matrix");

        // along a single coordinate the fidelity is even in the step, so the
        // one-sided projection carries no odd-order error; generic directions
        // are only O(eps) accurate and are covered by the unit tests
        for (int i = 0; i < c.n_params; ++i) {
            Eigen::VectorXd v = Eigen::VectorXd::Zero(c.n_params);
            v(i) = 1.0;
            check_close(qfim_projection_fd(c, theta, v, 1e-3), exact.entries(i, i), 1e-4,
                        "finite-difference projection along a coordinate");
        }

        PartialFisherMatrix blocks = qfim_layer_blocks(c, theta);
        for (int i = 0; i < c.n_params; ++i) {
            for (int j = 0; j < c.n_params; ++j) {
                if (blocks.is_set(i, j)) {
                    check(std::abs(blocks.entries(i, j) - exact.entries(i, j)) <= 1e-10,
                          "layer block disagrees with the exact sub-block");
                }
            }
        }
    }
}

// ---- 3. CFIM below QFIM ------------------------------------------------------

void criterion_cfim_below_qfim() {
    rng::Stream rng(20250803);
    for (int instance = 0; instance < 100; ++instance) {
        const int n_qubits = 2 + static_cast<int>(rng.next_u64() % 3);
        ParamCircuit c = oracle::random_pauli_circuit(rng, n_qubits, 4, 6);
        Params theta = oracle::random_params(rng, c.n_params);
        Measurement m = oracle::random_projective_measurement(rng, n_qubits);
        FisherMatrix classical = cfim_exact(c, theta, m);
        FisherMatrix quantum = qfim_pure(c, theta);
        check(linalg::min_eigenvalue(quantum.entries - classical.entries) >= -1e-8,
              "a measurement produced more information than the quantum bound");
    }
}

// ---- 4. Classical embedding ---------------------------------------------------

void criterion_classical_embedding() {
    rng::Stream rng(20250804);
    for (int instance = 0; instance < 20; ++instance) {
        const bool entangle = instance % 2 == 1;
        const int n_qubits = 2 + static_cast<int>(rng.next_u64() % 2);
        ParamCircuit c = oracle::random_real_circuit(rng, n_qubits, 2, entangle);
        Params theta = oracle::random_params(rng, c.n_params, 0.3, M_PI - 0.3);
        FisherMatrix classical = cfim_exact(c, theta, Measurement::computational(n_qubits));
        FisherMatrix quantum = qfim_pure(c, theta);
        check((classical.entries - quantum.entries).cwiseAbs().maxCoeff() <= 1e-8,
              "classical embedding split CFIM from QFIM");
    }

    Eigen::MatrixXcd rho = 0.5 * Eigen::MatrixXcd::Identity(2, 2);
    Eigen::MatrixXcd drho = Eigen::MatrixXcd::Zero(2, 2);
    drho(0, 0) = 0.5;
    drho(1, 1) = -0.5;
    const double f = qfim_mixed(DensityMatrix{rho}, {drho}).entries(0, 0);
    check_close(f, 1.0, 1e-9, "classical two-level family at theta = 0");
}

// ---- 5. Appendix property suite -----------------------------------------------

void criterion_property_suite() {
    rng::Stream rng(20250805);

    // symmetry and positive semidefiniteness
    for (int instance = 0; instance < 20; ++instance) {
        const int n_qubits = 2 + static_cast<int>(rng.next_u64() % 2);
        ParamCircuit c = oracle::random_pauli_circuit(rng, n_qubits, 4, 6);
        Params theta = oracle::random_params(rng, c.n_params);
        FisherMatrix classical =
            cfim_exact(c, theta, Measurement::computational(n_qubits));
        FisherMatrix quantum = qfim_pure(c, theta);
        check((classical.entries - classical.entries.transpose()).cwiseAbs().maxCoeff() <= 1e-9,
              "CFIM symmetry");
        check((quantum.entries - quantum.entries.transpose()).cwiseAbs().maxCoeff() <= 1e-9,
              "QFIM symmetry");
        check(linalg::min_eigenvalue(classical.entries) >= -1e-8, "CFIM positivity");
        check(linalg::min_eigenvalue(quantum.entries) >= -1e-8, "QFIM positivity");
    }

    // monotonicity under stochastic post-processing of the outcomes
    for (int instance = 0; instance < 20; ++instance) {
        ParamCircuit c = oracle::random_pauli_circuit(rng, 2, 3, 4);
        Params theta = oracle::random_params(rng, c.n_params);
        Measurement m = oracle::random_projective_measurement(rng, 2);
        FisherMatrix before = cfim_exact(c, theta, m);

        Eigen::MatrixXd t = oracle::random_stochastic(rng, 3, 4);
        std::vector<Eigen::MatrixXcd> coarse(3, Eigen::MatrixXcd::Zero(4, 4));
        for (int row = 0; row < 3; ++row) {
            for (int col = 0; col < 4; ++col) {
                coarse[static_cast<std::size_t>(row)] +=
                    t(row, col) * m.effects()[static_cast<std::size_t>(col)];
            }
        }
        FisherMatrix after = cfim_exact(c, theta, Measurement::from_effects(coarse));
        check(linalg::min_eigenvalue(before.entries - after.entries) >= -1e-8,
              "stochastic post-processing increased the CFIM");
    }

    // monotonicity under channels
    for (int instance = 0; instance < 20; ++instance) {
        ParamCircuit c = oracle::random_pauli_circuit(rng, 1, 3, 2);
        Params theta = oracle::random_params(rng, c.n_params);
        MixedFamily clean = mixed_family(c, theta, {});
        const double p = 0.05 + 0.4 * rng.next_double();
        NoiseSpec noise{{c.gates.size() - 1,
                         instance % 2 == 0 ? depolarizing(p, 0) : dephasing(p, 0)}};
        MixedFamily noisy = mixed_family(c, theta, noise);
        Eigen::MatrixXd before = qfim_mixed(clean.rho, clean.derivatives).entries;
        Eigen::MatrixXd after = qfim_mixed(noisy.rho, noisy.derivatives).entries;
        check(linalg::min_eigenvalue(before - after) >= -1e-8,
              "a channel increased the QFIM");
    }

    // invariance under appended parameter-independent unitaries
    for (int instance = 0; instance < 20; ++instance) {
        ParamCircuit c = oracle::random_pauli_circuit(rng, 2, 3, 4);
        Params theta = oracle::random_params(rng, c.n_params);
        FisherMatrix before = qfim_pure(c, theta);
        std::vector<Gate> extended = c.gates;
        extended.push_back(gates::fixed(oracle::random_unitary(rng, 4), {0, 1}, "haar"));
        FisherMatrix after = qfim_pure(make_circuit(2, c.n_params, std::move(extended)), theta);
        check((before.entries - after.entries).cwiseAbs().maxCoeff() <= 1e-10,
              "appended unitary changed the QFIM");
    }

    // additivity under direct sums of distributions
    for (int instance = 0; instance < 20; ++instance) {
        ParamCircuit c1 = oracle::random_pauli_circuit(rng, 2, 3, 3);
        ParamCircuit c2 = oracle::random_pauli_circuit(rng, 2, 3, 3);
        const int d = std::min(c1.n_params, c2.n_params);
        Params theta = oracle::random_params(rng, d);
        const double w = 0.2 + 0.6 * rng.next_double();

        auto probs_of = [&](const ParamCircuit &c) {
            return [&c, d](const Params &at) {
                Params padded = Params::Zero(c.n_params);
                padded.head(d) = at;
                return probabilities(run_pure(c, padded), Measurement::computational(2)).probs;
            };
        };
        auto p1 = probs_of(c1);
        auto p2 = probs_of(c2);
        auto stitched = [&](const Params &at) {
            Eigen::VectorXd a = p1(at);
            Eigen::VectorXd b = p2(at);
            Eigen::VectorXd joint(a.size() + b.size());
            joint << w * a, (1.0 - w) * b;
            return joint;
        };
        auto cfim_of = [&](const std::function<Eigen::VectorXd(const Params &)> &f) {
            Eigen::MatrixXd jac = oracle::fd_jacobian(f, theta, 1e-5);
            Eigen::VectorXd p = f(theta);
            Eigen::MatrixXd info = Eigen::MatrixXd::Zero(d, d);
            for (Eigen::Index l = 0; l < p.size(); ++l) {
                if (p(l) > 1e-12) {
                    info += jac.row(l).transpose() * jac.row(l) / p(l);
                }
            }
            return info;
        };
        Eigen::MatrixXd lhs = cfim_of(stitched);
        Eigen::MatrixXd rhs = w * cfim_of(p1) + (1.0 - w) * cfim_of(p2);
        check((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-6, "direct-sum additivity failed");
    }

    // additivity under tensor products (disjoint blocks, zero cross terms)
    for (int instance = 0; instance < 20; ++instance) {
        ParamCircuit left = oracle::random_pauli_circuit(rng, 2, 3, 3);
        ParamCircuit right = oracle::random_pauli_circuit(rng, 2, 3, 3);
        std::vector<Gate> joint_gates = left.gates;
        for (Gate g : right.gates) {
            for (int &t : g.targets) {
                t += 2;
            }
            if (g.is_rotation()) {
                for (int &t : g.generator.targets) {
                    t += 2;
                }
                g.param_index += left.n_params;
            }
            joint_gates.push_back(std::move(g));
        }
        ParamCircuit joint =
            make_circuit(4, left.n_params + right.n_params, std::move(joint_gates));
        Params theta_left = oracle::random_params(rng, left.n_params);
        Params theta_right = oracle::random_params(rng, right.n_params);
        Params theta(joint.n_params);
        theta << theta_left, theta_right;

        FisherMatrix f_joint = qfim_pure(joint, theta);
        FisherMatrix f_left = qfim_pure(left, theta_left);
        FisherMatrix f_right = qfim_pure(right, theta_right);
        check((f_joint.entries.topLeftCorner(left.n_params, left.n_params) - f_left.entries)
                      .cwiseAbs()
                      .maxCoeff() <= 1e-10 &&
                  (f_joint.entries.bottomRightCorner(right.n_params, right.n_params) -
                   f_right.entries)
                          .cwiseAbs()
                          .maxCoeff() <= 1e-10 &&
                  f_joint.entries.topRightCorner(left.n_params, right.n_params)
                          .cwiseAbs()
                          .maxCoeff() <= 1e-10,
              "tensor-product additivity failed");
    }

    // convexity spot checks
    for (int instance = 0; instance < 20; ++instance) {
        ParamCircuit c1 = oracle::random_pauli_circuit(rng, 2, 3, 2);
        ParamCircuit c2 = oracle::random_pauli_circuit(rng, 2, 3, 2);
        const int d = std::min(c1.n_params, c2.n_params);
        Params theta = oracle::random_params(rng, d);
        const double lam = 0.2 + 0.6 * rng.next_double();
        auto family_of = [&](const ParamCircuit &c) {
            Params padded = Params::Zero(c.n_params);
            padded.head(d) = theta;
            MixedFamily fam = mixed_family(c, padded, {});
            fam.derivatives.resize(static_cast<std::size_t>(d));
            return fam;
        };
        MixedFamily f1 = family_of(c1);
        MixedFamily f2 = family_of(c2);
        DensityMatrix mix{lam * f1.rho.matrix + (1.0 - lam) * f2.rho.matrix};
        std::vector<Eigen::MatrixXcd> mix_derivs;
        for (int i = 0; i < d; ++i) {
            mix_derivs.push_back(lam * f1.derivatives[static_cast<std::size_t>(i)] +
                                 (1.0 - lam) * f2.derivatives[static_cast<std::size_t>(i)]);
        }
        Eigen::MatrixXd bound = lam * qfim_mixed(f1.rho, f1.derivatives).entries +
                                (1.0 - lam) * qfim_mixed(f2.rho, f2.derivatives).entries;
        Eigen::MatrixXd mixture = qfim_mixed(mix, mix_derivs).entries;
        check(linalg::min_eigenvalue(bound - mixture) >= -1e-8, "convexity violated");
    }

    // Jacobian transformation rule
    for (int instance = 0; instance < 20; ++instance) {
        ParamCircuit c = make_circuit(1, 2, {gates::ry(0, 0), gates::rz(0, 1)});
        Params theta = oracle::random_params(rng, 2, 0.3, 2.5);
        Eigen::MatrixXd a(2, 2);
        do {
            a << rng.next_normal(), rng.next_normal(), rng.next_normal(), rng.next_normal();
        } while (std::abs(a.determinant()) < 0.2);

        Measurement m = Measurement::computational(1);
        FisherMatrix info_theta = cfim_exact(c, theta, m);
        Params f_point = a.inverse() * theta;
        auto probs_f = [&](const Params &at) {
            return probabilities(run_pure(c, a * at), m).probs;
        };
        Eigen::MatrixXd jac = oracle::fd_jacobian(probs_f, f_point, 1e-6);
        Eigen::VectorXd p = probs_f(f_point);
        Eigen::MatrixXd direct = Eigen::MatrixXd::Zero(2, 2);
        for (Eigen::Index l = 0; l < p.size(); ++l) {
            direct += jac.row(l).transpose() * jac.row(l) / p(l);
        }
        FisherMatrix transformed = reparametrize(info_theta, a.transpose());
        check((transformed.entries - direct).cwiseAbs().maxCoeff() <= 1e-6,
              "Jacobian transformation rule failed");
    }
}

// ---- 6. sqrt-fidelity convention ----------------------------------------------

void criterion_sqrt_convention() {
    rng::Stream rng(20250806);
    int accepted = 0;
    while (accepted < 10) {
        ParamCircuit c = oracle::random_pauli_circuit(rng, 2, 3, 1);
        Params theta = oracle::random_params(rng, 1);
        if (qfim_pure(c, theta).entries(0, 0) < 0.05) {
            continue; // skip near-flat draws where the ratio is 0/0
        }
        ++accepted;
        StateVector base = run_pure(c, theta);
        auto hess_of = [&](auto transform) {
            auto g = [&](const Eigen::VectorXd &delta) {
                return transform(fidelity_pure(base, run_pure(c, theta + delta)));
            };
            return oracle::fd_hessian_at_zero(g, 1, 1e-3)(0, 0);
        };
        const double h_f = hess_of([](double f) { return 1.0 - f; });
        const double h_sqrt = hess_of([](double f) { return 1.0 - std::sqrt(f); });
        check_close(h_f / h_sqrt, 2.0, 1e-4, "Hessian convention ratio");
    }
}

// ---- 7. SLD cross-check --------------------------------------------------------

void criterion_sld() {
    rng::Stream rng(20250807);
    for (int instance = 0; instance < 10; ++instance) {
        const int n_qubits = instance % 2 == 0 ? 1 : 2;
        ParamCircuit c = oracle::random_pauli_circuit(rng, n_qubits, 3, 2 * n_qubits);
        Params theta = oracle::random_params(rng, c.n_params);
        NoiseSpec noise;
        for (int q = 0; q < n_qubits; ++q) {
            noise.push_back({c.gates.size() - 1, depolarizing(0.15, q)});
        }
        MixedFamily family = mixed_family(c, theta, noise);
        FisherMatrix f = qfim_mixed(family.rho, family.derivatives);
        SLDSet sld = sld_operators(family.rho, family.derivatives);
        for (int i = 0; i < c.n_params; ++i) {
            for (int j = 0; j < c.n_params; ++j) {
                const Complex anti = (family.rho.matrix *
                                      (sld.operators[static_cast<std::size_t>(i)] *
                                           sld.operators[static_cast<std::size_t>(j)] +
                                       sld.operators[static_cast<std::size_t>(j)] *
                                           sld.operators[static_cast<std::size_t>(i)]))
                                         .trace();
                check_close(0.5 * std::real(anti), f.entries(i, j), 1e-8,
                            "SLD trace formula");
            }
        }
    }
}

// ---- 8. SPSA estimator ----------------------------------------------------------

void criterion_spsa() {
    ParamCircuit c = make_circuit(2, 4,
                                  {gates::ry(0, 0), gates::ry(1, 1), gates::cnot(0, 1),
                                   gates::rz(0, 2), gates::rx(1, 3)});
    Params theta = (Params(4) << 0.7, -0.3, 1.2, 0.5).finished();
    FisherMatrix exact = qfim_pure(c, theta);
    FisherMatrix estimate = qfim_spsa(c, theta, 0.01, 2000, 42, false);
    const double rel = (estimate.entries - exact.entries).norm() / exact.entries.norm();
    check(rel <= 0.1, "SPSA relative Frobenius error " + std::to_string(rel) + " above 0.1");

    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        FisherMatrix single = qfim_spsa(c, theta, 0.01, 1, seed, false);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(single.entries,
                                                          Eigen::EigenvaluesOnly);
        int nonzero = 0;
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
            if (std::abs(es.eigenvalues()(i)) > 1e-9) {
                ++nonzero;
            }
        }
        check(nonzero <= 2, "single SPSA sample exceeded rank 2");
    }
}

// ---- 9. Sampled CFIM convergence -------------------------------------------------

void criterion_sampled_cfim() {
    ParamCircuit c = make_circuit(1, 1, {gates::ry(0, 0)});
    Measurement m = Measurement::computational(1);
    const std::uint64_t master = 20250810;

    double previous_error = std::numeric_limits<double>::infinity();
    std::int64_t shots = 1000;
    for (int level = 0; level < 4; ++level, shots *= 10) {
        FisherMatrix f = cfim_sampled(c, scalar(0.7), m, shots,
                                      rng::derive_seed(master, static_cast<std::uint64_t>(level)),
                                      ParamShiftMode{});
        const double error = std::abs(f.entries(0, 0) - 1.0);
        check(error < previous_error,
              "error did not decrease at " + std::to_string(shots) + " shots");
        previous_error = error;
        if (shots == 1000000) {
            check(error <= 0.02, "error at 1e6 shots is " + std::to_string(error));
        }
    }

    FisherMatrix a = cfim_sampled(c, scalar(0.7), m, 100000, 77, ParamShiftMode{});
    FisherMatrix b = cfim_sampled(c, scalar(0.7), m, 100000, 77, ParamShiftMode{});
    check(std::memcmp(a.entries.data(), b.entries.data(), sizeof(double)) == 0,
          "same seed gave different sampled matrices");
}

// ---- 10. QNG behavior --------------------------------------------------------------

void criterion_qng() {
    // identity metric: the natural-gradient direction is the gradient, bitwise
    Eigen::VectorXd grad(3);
    grad << 0.25, -1.75, 0.0625;
    MetricSolve solve = qng_direction(Eigen::MatrixXd::Identity(3, 3), grad, 0.0);
    for (int i = 0; i < 3; ++i) {
        check(solve.direction(i) == grad(i), "identity-metric solve is not the gradient");
    }
    CostFunction ry{make_circuit(1, 1, {gates::ry(0, 0)}), Observable(linalg::pauli_matrix('Z'))};
    OptimizerConfig plain;
    plain.eta = 0.2;
    plain.lambda_reg = 0.0;
    check(qng_step(ry, scalar(0.0), plain)(0) == gd_step(ry, scalar(0.0), plain)(0),
          "qng and gd disagree where F is exactly the identity");

    // toy eigensolver against dense diagonalization
    CostFunction toy{make_circuit(2, 4,
                                  {gates::ry(0, 0), gates::ry(1, 1), gates::cnot(0, 1),
                                   gates::ry(0, 2), gates::ry(1, 3)}),
                     pauli_observable({{"ZZ", 1.0}, {"XI", 0.5}}, 2)};
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(toy.observable.matrix());
    const double ground = es.eigenvalues().minCoeff();
    OptimizerConfig config;
    config.method = OptMethod::QuantumNaturalGradient;
    config.eta = 0.2;
    config.lambda_reg = 1e-6;
    config.max_iters = 200;
    config.grad_norm_tol = 1e-7;
    OptTrace trace = minimize(toy, (Params(4) << 0.1, 0.2, 0.3, 0.4).finished(), config);
    check(trace.records.size() <= 201, "iteration budget exceeded");
    check_close(trace.records.back().cost, ground, 1e-4, "toy eigensolver final cost");

    // covariance of the trajectory under a linear reparametrization
    CostFunction cov{make_circuit(2, 4,
                                  {gates::ry(0, 0), gates::ry(1, 1), gates::cnot(0, 1),
                                   gates::rz(0, 2), gates::rx(1, 3)}),
                     pauli_observable({{"ZZ", 1.0}, {"XI", 0.5}}, 2)};
    Eigen::MatrixXd a(4, 4);
    a << 1.0, 0.2, 0.0, 0.0, -0.3, 0.9, 0.1, 0.0, 0.0, 0.4, 1.2, -0.2, 0.1, 0.0, 0.3, 0.8;
    Params theta = (Params(4) << 0.4, 0.1, -0.2, 0.6).finished();
    Params f_point = a.inverse() * theta;
    for (int step = 0; step < 5; ++step) {
        FisherMatrix metric = qfim_pure(cov.circuit, theta);
        Eigen::VectorXd g = gradient(cov, theta);
        Params theta_next = theta - 0.1 * qng_direction(metric.entries, g, 0.0).direction;
        FisherMatrix metric_f = reparametrize(metric, a.transpose());
        Params f_next =
            f_point - 0.1 * qng_direction(metric_f.entries, a.transpose() * g, 0.0).direction;
        check(((a * f_next) - theta_next).cwiseAbs().maxCoeff() <= 1e-8,
              "reparametrized trajectory diverged at step " + std::to_string(step));
        theta = theta_next;
        f_point = f_next;
    }
}

// ---- 11. CRB saturation --------------------------------------------------------------

void criterion_crb_saturation() {
    SensingModel model{plus_probes(1), phase_encoding(1, 0), x_measurement_stage(1)};
    const std::int64_t shots = 10000;
    const int repeats = 200;
    GridSpec grid{0.05, M_PI - 0.05, 10000};
    EstimatorResult result =
        mle_estimate(model, Params(0), 0.7, Params(0), shots, grid, 20250812, repeats);

    FisherMatrix info = sensing_cfim(model, Params(0), scalar(0.7), Params(0));
    const double crb = crb_bound(info, shots).matrix(0, 0);
    const double ratio = result.variance / crb;
    check(ratio >= 1.0 && ratio <= 1.5,
          "variance/CRB ratio " + std::to_string(ratio) + " outside [1.0, 1.5]");

    // standard error of a sample variance over `repeats` draws
    const double se = result.variance * std::sqrt(2.0 / (repeats - 1));
    check(result.variance >= crb - 3.0 * se, "variance fell below CRB minus 3 standard errors");
}

// ---- 12. Noise monotonicity ------------------------------------------------------------

void criterion_noise_monotonicity() {
    ParamCircuit c = make_circuit(1, 1, {gates::ry(0, 0)});
    Params theta = scalar(0.9);
    auto fisher_at = [&](double p) {
        NoiseSpec noise;
        if (p > 0.0) {
            noise.push_back({0, depolarizing(p, 0)});
        }
        MixedFamily family = mixed_family(c, theta, noise);
        return qfim_mixed(family.rho, family.derivatives).entries(0, 0);
    };
    const double f0 = fisher_at(0.0);
    const double f1 = fisher_at(0.1);
    const double f3 = fisher_at(0.3);
    check(f0 - f1 >= 1e-6, "p = 0 -> 0.1 margin too small");
    check(f1 - f3 >= 1e-6, "p = 0.1 -> 0.3 margin too small");
}

struct Criterion {
    int id;
    std::string name;
    std::function<void()> body;
    double time_limit_s; // 0 = unlimited
};

} // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "Heisenberg scaling: GHZ probes reach n^2, separate probes n", criterion_heisenberg,
         5.0},
        {2, "QFIM methods agree: exact, parameter-shift, FD projection, layer blocks",
         criterion_qfim_methods, 60.0},
        {3, "CFIM never exceeds QFIM on 100 random instances", criterion_cfim_below_qfim, 120.0},
        {4, "classical embeddings: CFIM equals QFIM, two-level family gives 1",
         criterion_classical_embedding, 0.0},
        {5, "appendix properties: symmetry, PSD, monotonicity, additivity, convexity, Jacobian",
         criterion_property_suite, 0.0},
        {6, "1 - f and 1 - sqrt(f) Hessians differ by exactly a factor 2",
         criterion_sqrt_convention, 0.0},
        {7, "SLD trace formula reproduces the eigendecomposition QFIM", criterion_sld, 0.0},
        {8, "SPSA estimate converges and single samples stay rank <= 2", criterion_spsa, 60.0},
        {9, "sampled CFIM error shrinks with shots and is reproducible", criterion_sampled_cfim,
         0.0},
        {10, "QNG: identity-metric equality, eigensolver convergence, covariance",
         criterion_qng, 0.0},
        {11, "grid MLE saturates the Cramer-Rao bound", criterion_crb_saturation, 120.0},
        {12, "depolarizing noise strictly decreases the QFIM", criterion_noise_monotonicity,
         0.0},
    };

    int failures = 0;
    for (const Criterion &criterion : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string failure;
        try {
            criterion.body();
        } catch (const std::exception &e) {
            failure = e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (failure.empty() && criterion.time_limit_s > 0.0 &&
            elapsed > criterion.time_limit_s) {
            std::ostringstream msg;
            msg << "runtime " << elapsed << " s exceeded the " << criterion.time_limit_s
                << " s budget";
            failure = msg.str();
        }

        std::ostringstream line;
        line.setf(std::ios::fixed);
        line.precision(2);
        if (failure.empty()) {
            line << "[PASS] " << criterion.id << ". " << criterion.name << " (" << elapsed
                 << " s)";
        } else {
            line << "[FAIL] " << criterion.id << ". " << criterion.name << ": " << failure
                 << " (" << elapsed << " s)";
            ++failures;
        }
        std::cout << line.str() << std::endl;
    }
    return failures;
}
