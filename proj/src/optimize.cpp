#include "fisherlab/optimize.hpp"

#include <cmath>

namespace fisherlab {

namespace {

void check_config(const OptimizerConfig &config) {
    if (config.eta <= 0.0) {
        throw std::invalid_argument("step size must be positive");
    }
    if (config.lambda_reg < 0.0) {
        throw std::invalid_argument("regularizer must be nonnegative");
    }
    if (config.beta < 0.0 || config.beta >= 1.0) {
        throw std::invalid_argument("smoothing weight must lie in [0, 1)");
    }
    if (config.max_iters < 0) {
        throw std::invalid_argument("iteration budget must be nonnegative");
    }
}

} // namespace

double CostFunction::value(const Params &theta) const {
    return expectation(run_pure(circuit, theta), observable);
}

Eigen::VectorXd gradient(const CostFunction &cost, const Params &theta) {
    const int d = cost.circuit.n_params;
    Eigen::VectorXd grad(d);
    for (int i = 0; i < d; ++i) {
        const Gate &g = cost.circuit.gates[gate_for_param(cost.circuit, i)];
        if (!g.shift_constant) {
            throw ComputationError("unsupported gate: no parameter-shift rule for parameter " +
                                   std::to_string(i));
        }
        const double r = *g.shift_constant;
        const double s = M_PI / (4.0 * r);
        grad(i) = r * (cost.value(shift(theta, i, s)) - cost.value(shift(theta, i, -s)));
    }
    return grad;
}

Params gd_step(const CostFunction &cost, const Params &theta, const OptimizerConfig &config) {
    check_config(config);
    return theta - config.eta * gradient(cost, theta);
}

MetricSolve qng_direction(const Eigen::MatrixXd &metric, const Eigen::VectorXd &grad,
                          double lambda_reg) {
    if (metric.rows() != metric.cols() || metric.rows() != grad.size()) {
        throw std::invalid_argument("metric and gradient dimensions do not match");
    }
    Eigen::MatrixXd system = metric;
    system.diagonal().array() += lambda_reg;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(system, Eigen::EigenvaluesOnly);
    const double min_eig = es.eigenvalues().minCoeff();
    const double max_eig = es.eigenvalues().maxCoeff();
    if (min_eig <= 1e-12 * std::max(1.0, max_eig)) {
        throw ComputationError("metric singular -- increase lambdaReg");
    }

    MetricSolve out;
    out.direction = system.ldlt().solve(grad);
    out.condition = max_eig / min_eig;
    return out;
}

Params qng_step(const CostFunction &cost, const Params &theta, const OptimizerConfig &config) {
    check_config(config);
    FisherMatrix metric = qfim_pure(cost.circuit, theta);
    MetricSolve solve = qng_direction(metric.entries, gradient(cost, theta), config.lambda_reg);
    return theta - config.eta * solve.direction;
}

Eigen::MatrixXd smooth_metric(const Eigen::MatrixXd &previous, const Eigen::MatrixXd &fresh,
                              double beta) {
    return beta * previous + (1.0 - beta) * fresh;
}

SpsaQngResult spsa_qng_step(const CostFunction &cost, const Params &theta,
                            const OptimizerConfig &config,
                            const std::optional<Eigen::MatrixXd> &previous_metric,
                            std::uint64_t step_seed) {
    check_config(config);
    const bool analytic = config.spsa_samples == 0;
    Eigen::MatrixXd fresh =
        analytic ? qfim_pure(cost.circuit, theta).entries
                 : qfim_spsa(cost.circuit, theta, config.spsa_epsilon, config.spsa_samples,
                             step_seed, /*psd_project=*/false)
                       .entries;

    Eigen::MatrixXd smoothed =
        previous_metric ? smooth_metric(*previous_metric, fresh, config.beta) : fresh;
    if (!analytic) {
        smoothed = linalg::psd_project(smoothed);
    }

    MetricSolve solve = qng_direction(smoothed, gradient(cost, theta), config.lambda_reg);
    SpsaQngResult out;
    out.theta = theta - config.eta * solve.direction;
    out.metric = std::move(smoothed);
    out.condition = solve.condition;
    return out;
}

OptTrace minimize(const CostFunction &cost, const Params &theta0, const OptimizerConfig &config) {
    check_config(config);
    OptTrace trace;
    Params theta = theta0;
    std::optional<Eigen::MatrixXd> smoothed;

    for (int t = 0; t <= config.max_iters; ++t) {
        Eigen::VectorXd grad = gradient(cost, theta);
        OptRecord record;
        record.theta = theta;
        record.cost = cost.value(theta);
        record.grad_norm = grad.norm();
        if (record.grad_norm <= config.grad_norm_tol) {
            trace.records.push_back(std::move(record));
            trace.converged = true;
            break;
        }
        if (t == config.max_iters) {
            trace.records.push_back(std::move(record));
            break;
        }

        switch (config.method) {
        case OptMethod::GradientDescent:
            theta = theta - config.eta * grad;
            break;
        case OptMethod::QuantumNaturalGradient: {
            FisherMatrix metric = qfim_pure(cost.circuit, theta);
            MetricSolve solve = qng_direction(metric.entries, grad, config.lambda_reg);
            record.metric_cond = solve.condition;
            theta = theta - config.eta * solve.direction;
            break;
        }
        case OptMethod::SpsaQng: {
            SpsaQngResult step = spsa_qng_step(cost, theta, config, smoothed,
                                               rng::derive_seed(config.seed,
                                                                static_cast<std::uint64_t>(t)));
            record.metric_cond = step.condition;
            smoothed = step.metric;
            theta = step.theta;
            break;
        }
        }
        trace.records.push_back(std::move(record));
    }
    return trace;
}

} // namespace fisherlab
