#pragma once

#include "fisherlab/fisher.hpp"

namespace fisherlab {

/// Expectation-value cost C(theta) = <psi(theta)|H|psi(theta)>.
struct CostFunction {
    ParamCircuit circuit;
    Observable observable;

    double value(const Params &theta) const;
};

enum class OptMethod { GradientDescent, QuantumNaturalGradient, SpsaQng };

struct OptimizerConfig {
    double eta = 0.1;           // step size
    double lambda_reg = 1e-6;   // Tikhonov term added to the metric
    int max_iters = 100;
    double grad_norm_tol = 1e-8;
    OptMethod method = OptMethod::QuantumNaturalGradient;
    double beta = 0.0;          // metric smoothing weight for SpsaQng
    std::uint64_t seed = 0;
    double spsa_epsilon = 0.01;
    int spsa_samples = 0;       // 0 = analytic metric (exact QFIM)
};

struct OptRecord {
    Params theta;
    double cost = 0.0;
    double grad_norm = 0.0;
    /// Condition number of the (regularized) metric; absent for plain GD.
    std::optional<double> metric_cond;
};

struct OptTrace {
    std::vector<OptRecord> records;
    bool converged = false;
};

/// Exact parameter-shift gradient of the cost; every rotation gate must
/// support a two-point shift rule.
Eigen::VectorXd gradient(const CostFunction &cost, const Params &theta);

/// theta - eta * grad C.
Params gd_step(const CostFunction &cost, const Params &theta, const OptimizerConfig &config);

/// Solves (metric + lambda I) x = grad and reports the system's condition
/// number. A singular system with lambda = 0 is rejected.
struct MetricSolve {
    Eigen::VectorXd direction;
    double condition = 0.0;
};

MetricSolve qng_direction(const Eigen::MatrixXd &metric, const Eigen::VectorXd &grad,
                          double lambda_reg);

/// theta - eta * (F + lambda I)^{-1} grad C with F the exact pure-state QFIM.
Params qng_step(const CostFunction &cost, const Params &theta, const OptimizerConfig &config);

/// Exponential smoothing of the metric estimate between iterations.
Eigen::MatrixXd smooth_metric(const Eigen::MatrixXd &previous, const Eigen::MatrixXd &fresh,
                              double beta);

struct SpsaQngResult {
    Params theta;
    Eigen::MatrixXd metric; // updated smoothed metric
    double condition = 0.0;
};

/// One natural-gradient step on the running smoothed metric. The fresh
/// estimate comes from qfim_spsa with the given per-step seed (or the exact
/// QFIM when config.spsa_samples is zero); the smoothed metric is
/// PSD-projected before the solve.
SpsaQngResult spsa_qng_step(const CostFunction &cost, const Params &theta,
                            const OptimizerConfig &config,
                            const std::optional<Eigen::MatrixXd> &previous_metric,
                            std::uint64_t step_seed);

/// Iterates the configured step until the gradient norm drops below
/// grad_norm_tol or max_iters is reached.
OptTrace minimize(const CostFunction &cost, const Params &theta0, const OptimizerConfig &config);

} // namespace fisherlab
