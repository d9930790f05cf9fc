#include <doctest.h>

#include "fisherlab/metrology.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace fisherlab;

namespace {

SensingModel plus_phase_model() {
    return SensingModel{plus_probes(1), phase_encoding(1, 0), x_measurement_stage(1)};
}

FisherMatrix classical(const Eigen::MatrixXd &entries) {
    FisherMatrix f;
    f.entries = entries;
    f.kind = FisherKind::Classical;
    f.method = FisherMethod::Exact;
    return f;
}

FisherMatrix quantum(const Eigen::MatrixXd &entries) {
    FisherMatrix f;
    f.entries = entries;
    f.kind = FisherKind::Quantum;
    f.method = FisherMethod::Exact;
    return f;
}

} // namespace

TEST_CASE("crb_bound inverts and scales the information matrix") {
    FisherMatrix unit = classical(Eigen::MatrixXd::Identity(1, 1));
    CHECK(crb_bound(unit, 100).matrix(0, 0) == 0.01);

    FisherMatrix four = classical(4.0 * Eigen::MatrixXd::Identity(1, 1));
    CHECK(crb_bound(four, 1).matrix(0, 0) == 0.25);

    Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(3, 3);
    diag.diagonal() << 2.0, 5.0, 0.5;
    CovarianceMatrix cov = crb_bound(classical(diag), 10);
    CHECK(cov.matrix(0, 0) == doctest::Approx(1.0 / 20.0).epsilon(1e-14));
    CHECK(cov.matrix(1, 1) == doctest::Approx(1.0 / 50.0).epsilon(1e-14));
    CHECK(cov.matrix(2, 2) == doctest::Approx(1.0 / 5.0).epsilon(1e-14));
    CHECK(std::abs(cov.matrix(0, 1)) <= 1e-15);
}

TEST_CASE("crb_bound rejects singular information") {
    Eigen::MatrixXd singular = Eigen::MatrixXd::Zero(2, 2);
    singular(0, 0) = 1.0;
    CHECK_THROWS_WITH_AS(crb_bound(classical(singular), 1),
                         doctest::Contains("not identifiable"), ComputationError);
}

TEST_CASE("bounds check the matrix kind") {
    FisherMatrix c = classical(Eigen::MatrixXd::Identity(1, 1));
    FisherMatrix q = quantum(Eigen::MatrixXd::Identity(1, 1));
    CHECK_THROWS_AS(crb_bound(q, 1), std::invalid_argument);
    CHECK_THROWS_AS(qcrb_bound(c, 1), std::invalid_argument);
    CHECK(qcrb_bound(q, 4).matrix(0, 0) == 0.25);
}

TEST_CASE("weighted_bound traces the weighted inverse") {
    FisherMatrix eye = classical(Eigen::MatrixXd::Identity(2, 2));
    CHECK(weighted_bound(Eigen::MatrixXd::Identity(2, 2), eye, 1) == doctest::Approx(2.0));
    CHECK(weighted_bound(Eigen::MatrixXd::Zero(2, 2), eye, 1) == 0.0);

    Eigen::MatrixXd first = Eigen::MatrixXd::Zero(2, 2);
    first(0, 0) = 1.0;
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(2, 2);
    info.diagonal() << 4.0, 9.0;
    CHECK(weighted_bound(first, classical(info), 1) == doctest::Approx(0.25).epsilon(1e-14));

    Eigen::MatrixXd negative = -Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(weighted_bound(negative, eye, 1), std::invalid_argument);
}

TEST_CASE("the plus-probe phase model has unit information") {
    SensingModel model = plus_phase_model();
    for (double phi : {0.3, 0.7, 1.9}) {
        FisherMatrix info = sensing_cfim(model, Params(0), (Params(1) << phi).finished(),
                                         Params(0));
        CHECK(info.entries(0, 0) == doctest::Approx(1.0).epsilon(1e-10));

        FisherMatrix qinfo = sensing_qfim(model, Params(0), (Params(1) << phi).finished());
        CHECK(qinfo.entries(0, 0) == doctest::Approx(1.0).epsilon(1e-10));

        CHECK(linalg::min_eigenvalue(qinfo.entries - info.entries) >= -1e-8);
    }
}

TEST_CASE("a z-basis readout is blind to the phase") {
    SensingModel blind{plus_probes(1), phase_encoding(1, 0), empty_stage(1)};
    FisherMatrix info = sensing_cfim(blind, Params(0), (Params(1) << 0.7).finished(), Params(0));
    CHECK(std::abs(info.entries(0, 0)) <= 1e-10);
}

TEST_CASE("GHZ probes scale quadratically, separate probes linearly") {
    for (int n = 1; n <= 5; ++n) {
        SensingModel ghz{ghz_probe(n), collective_phase_encoding(n), empty_stage(n)};
        FisherMatrix f = sensing_qfim(ghz, Params(0), Params::Zero(1));
        CHECK(f.entries(0, 0) ==
              doctest::Approx(static_cast<double>(n) * n).epsilon(1e-9));

        SensingModel sep{plus_probes(n), collective_phase_encoding(n), empty_stage(n)};
        FisherMatrix g = sensing_qfim(sep, Params(0), Params::Zero(1));
        CHECK(g.entries(0, 0) == doctest::Approx(static_cast<double>(n)).epsilon(1e-9));
    }
}

TEST_CASE("scaling_experiment reports exact log-log slopes") {
    ScalingResult ghz = scaling_experiment({1, 2, 3, 4, 5}, ProbeStrategy::Ghz);
    REQUIRE(ghz.table.size() == 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(ghz.table[static_cast<std::size_t>(i)].second ==
              doctest::Approx(static_cast<double>((i + 1) * (i + 1))).epsilon(1e-9));
    }
    CHECK(std::abs(ghz.loglog_slope - 2.0) <= 1e-6);

    ScalingResult sep = scaling_experiment({1, 2, 3, 4, 5}, ProbeStrategy::Separate);
    CHECK(std::abs(sep.loglog_slope - 1.0) <= 1e-6);
}

TEST_CASE("scaling_experiment rejects oversized probes") {
    CHECK_THROWS_AS(scaling_experiment({20}, ProbeStrategy::Ghz), ComputationError);
}

TEST_CASE("mle_estimate recovers the phase at CRB-limited variance") {
    SensingModel model = plus_phase_model();
    GridSpec grid{0.05, M_PI - 0.05, 4001};
    EstimatorResult result =
        mle_estimate(model, Params(0), 0.7, Params(0), 10000, grid, 555, 50);

    CHECK(std::abs(result.mean - 0.7) <= 0.01);
    const double crb = 1.0 / 10000.0;
    CHECK(result.variance >= 0.5 * crb);
    CHECK(result.variance <= 2.0 * crb);

    // deterministic given the seed
    EstimatorResult again =
        mle_estimate(model, Params(0), 0.7, Params(0), 10000, grid, 555, 50);
    CHECK(again.estimates == result.estimates);
}

TEST_CASE("quadrupling the shots quarters the variance") {
    SensingModel model = plus_phase_model();
    GridSpec grid{0.05, M_PI - 0.05, 4001};
    EstimatorResult small =
        mle_estimate(model, Params(0), 0.7, Params(0), 2500, grid, 808, 300);
    EstimatorResult large =
        mle_estimate(model, Params(0), 0.7, Params(0), 10000, grid, 809, 300);
    const double ratio = large.variance / small.variance;
    CHECK(ratio == doctest::Approx(0.25).epsilon(0.2));
}

TEST_CASE("mle_estimate rejects flat likelihoods") {
    SensingModel blind{plus_probes(1), phase_encoding(1, 0), empty_stage(1)};
    GridSpec grid{0.1, 1.0, 100};
    CHECK_THROWS_WITH_AS(mle_estimate(blind, Params(0), 0.5, Params(0), 100, grid, 3, 2),
                         doctest::Contains("non-identifiable"), ComputationError);
}

TEST_CASE("effective quantum dimension counts informative directions") {
    CHECK(effective_quantum_dimension(quantum(Eigen::MatrixXd::Identity(3, 3))) == 3);
    CHECK(effective_quantum_dimension(quantum(Eigen::MatrixXd::Zero(2, 2))) == 0);

    // duplicated adjacent RZ rotations leave one redundant direction
    ParamCircuit redundant = make_circuit(
        1, 2, {gates::hadamard(0), gates::rz(0, 0), gates::rz(0, 1)});
    FisherMatrix f = qfim_pure(redundant, (Params(2) << 0.4, 1.1).finished());
    CHECK(effective_quantum_dimension(f) == 1);

    // appending a parameter-independent unitary changes nothing
    rng::Stream rng(911);
    std::vector<Gate> extended = redundant.gates;
    extended.push_back(gates::fixed(oracle::random_unitary(rng, 2), {0}, "haar"));
    ParamCircuit rotated = make_circuit(1, 2, std::move(extended));
    FisherMatrix g = qfim_pure(rotated, (Params(2) << 0.4, 1.1).finished());
    CHECK(effective_quantum_dimension(g) == 1);
}

TEST_CASE("fisher_spectrum sorts eigenvalues descending") {
    Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(2, 2);
    diag.diagonal() << 1.0, 1.0;
    Eigen::VectorXd spec = fisher_spectrum(quantum(diag));
    CHECK(spec(0) == 1.0);
    CHECK(spec(1) == 1.0);

    diag.diagonal() << 1.0, 3.0;
    spec = fisher_spectrum(quantum(diag));
    CHECK(spec(0) == 3.0);
    CHECK(spec(1) == 1.0);

    // residual check against the defining equation
    rng::Stream rng(919);
    ParamCircuit c = oracle::random_pauli_circuit(rng, 3, 4, 5);
    Params theta = oracle::random_params(rng, c.n_params);
    FisherMatrix f = cfim_exact(c, theta, Measurement::computational(3));
    Eigen::VectorXd values = fisher_spectrum(f);
    CHECK(values.sum() == doctest::Approx(f.entries.trace()).epsilon(1e-9));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(f.entries);
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        const double lam = values(values.size() - 1 - i);
        CHECK((f.entries * es.eigenvectors().col(i) - lam * es.eigenvectors().col(i))
                  .cwiseAbs()
                  .maxCoeff() <= 1e-9);
    }
}

TEST_CASE("sandwich: quantum bound is tighter than the classical bound") {
    rng::Stream rng(929);
    for (int trial = 0; trial < 10; ++trial) {
        ParamCircuit probe = oracle::random_pauli_circuit(rng, 2, 2, 2);
        SensingModel model{probe, phase_encoding(2, 0), x_measurement_stage(2)};
        Params theta = oracle::random_params(rng, probe.n_params);
        Params phi = (Params(1) << 0.4 + rng.next_double()).finished();

        FisherMatrix info = sensing_cfim(model, theta, phi, Params(0));
        FisherMatrix qinfo = sensing_qfim(model, theta, phi);
        if (info.entries(0, 0) < 1e-8 || qinfo.entries(0, 0) < 1e-8) {
            continue; // bound undefined for non-identifiable draws
        }
        CovarianceMatrix crb = crb_bound(info, 7);
        CovarianceMatrix qcrb = qcrb_bound(qinfo, 7);
        CHECK(linalg::min_eigenvalue(crb.matrix - qcrb.matrix) >= -1e-8);
    }
}

TEST_CASE("compose validates stage compatibility") {
    SensingModel bad{plus_probes(1), phase_encoding(2, 0), empty_stage(1)};
    CHECK_THROWS_AS(compose(bad), std::invalid_argument);

    SensingModel model = plus_phase_model();
    ComposedModel composed = compose(model);
    CHECK(composed.circuit.n_params == 1);
    CHECK(composed.n_phi == 1);
    CHECK_THROWS_AS(pack_params(composed, Params(1), Params(1), Params(0)),
                    std::invalid_argument);
}
