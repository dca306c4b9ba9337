#include "bilrip/json_io.hpp"
#include "bilrip/sensing.hpp"

#include <doctest.h>

#include <cmath>

using namespace bilrip;

TEST_CASE("gaussian ensemble statistics and determinism") {
    const MeasurementEnsemble e{EnsembleKind::gaussian, 128, 256, 77};
    const Matrix a = generate(e);
    CHECK(a.rows() == 128);
    CHECK(a.cols() == 256);
    CHECK(std::abs(a.mean()) <= 0.003);
    const double var = a.array().square().mean();
    CHECK(var == doctest::Approx(1.0 / 128).epsilon(0.03));
    CHECK(a == generate(e));
    CHECK(a != generate(MeasurementEnsemble{EnsembleKind::gaussian, 128, 256, 78}));
}

TEST_CASE("rademacher entries are exactly plus or minus one over root M") {
    const MeasurementEnsemble e{EnsembleKind::rademacher, 50, 90, 3};
    const Matrix a = generate(e);
    const double v = 1.0 / std::sqrt(50.0);
    std::size_t plus = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        REQUIRE((a.data()[i] == v || a.data()[i] == -v));
        plus += a.data()[i] > 0;
    }
    CHECK(std::abs(double(plus) / double(a.size()) - 0.5) < 0.03);
}

TEST_CASE("ensemble validation") {
    CHECK_THROWS_AS(generate(MeasurementEnsemble{EnsembleKind::gaussian, 11, 10, 0}), PreconditionError);
    CHECK_THROWS_AS(generate(MeasurementEnsemble{EnsembleKind::gaussian, 0, 10, 0}), PreconditionError);
    CHECK_THROWS_AS(validate(MeasurementEnsemble{EnsembleKind::gaussian, 5000, 5000, 0}), PreconditionError);
    CHECK_NOTHROW(validate(MeasurementEnsemble{EnsembleKind::gaussian, 10, 10, 0}));
    CHECK_THROWS_AS(ensemble_kind_from_string("bernoulli"), PreconditionError);
}

TEST_CASE("matrix-free measurement equals the materialized product") {
    for (EnsembleKind k : {EnsembleKind::gaussian, EnsembleKind::rademacher}) {
        const MeasurementEnsemble e{k, 20, 40, 9};
        const Matrix a = generate(e);
        Vector r = Vector::Zero(40);
        r[3] = 1.5;
        r[17] = -2.0;
        r[39] = 0.25;
        CHECK((measure(e, r) - a * r).norm() <= 1e-12);
    }
}

TEST_CASE("distortion examples") {
    Matrix sel = Matrix::Identity(5, 9);
    Vector z = Vector::Zero(9);
    z.head(5) << 1, -2, 3, 0.5, 7;
    CHECK(distortion(sel, z) == 0.0);

    const Matrix a = generate(MeasurementEnsemble{EnsembleKind::gaussian, 30, 60, 4});
    Vector w = Vector::LinSpaced(60, -1.0, 2.0);
    for (double c : {-3.0, 1e-4, 250.0}) CHECK(std::abs(distortion(a, c * w) - distortion(a, w)) <= 1e-12);
    CHECK_THROWS_AS(distortion(a, Vector::Zero(60)), PreconditionError);
}

TEST_CASE("squared norm is preserved in expectation") {
    Vector z = Vector::Zero(128);
    z[0] = 1.0;
    z[5] = -2.0;
    z[77] = 0.5;
    double sum = 0.0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        const MeasurementEnsemble e{EnsembleKind::gaussian, 64, 128, derive_seed(1234, std::uint64_t(t))};
        const double r = measure(e, z).norm() / z.norm();
        sum += r * r;
    }
    CHECK(std::abs(sum / trials - 1.0) <= 0.02);
}

TEST_CASE("orthonormal rows give an exact isometry at M = N") {
    const MeasurementEnsemble e{EnsembleKind::gaussian, 32, 32, 5};
    const Matrix q = orthonormal_rows(e);
    CHECK((q * q.transpose() - Matrix::Identity(32, 32)).norm() <= 1e-12);
    RipMonteCarloOptions opt;
    opt.n_samples = 2000;
    opt.seed = 8;
    const ConeSpec c{Support(32, {0, 3, 9}), ConeKind::positive_orthant};
    const DistortionReport r = rip_monte_carlo(BilinearMapSpec::circular_convolution(32), c, c, q, opt);
    CHECK(r.max_abs_distortion <= 1e-9);
    const Matrix wide = orthonormal_rows(MeasurementEnsemble{EnsembleKind::gaussian, 10, 30, 5});
    CHECK((wide * wide.transpose() - Matrix::Identity(10, 10)).norm() <= 1e-12);
}

TEST_CASE("rip_monte_carlo report invariants and determinism") {
    const auto conv = BilinearMapSpec::circular_convolution(64);
    const ConeSpec cx{Support(64, {0, 5, 9, 30}), ConeKind::positive_orthant};
    const ConeSpec cy{Support(64, {1, 2, 40, 63}), ConeKind::positive_orthant};
    const MeasurementEnsemble e{EnsembleKind::gaussian, 48, 64, 31};
    RipMonteCarloOptions opt;
    opt.n_samples = 10000;
    opt.delta = 0.5;
    opt.seed = 4;
    const DistortionReport r = rip_monte_carlo(conv, cx, cy, e, opt);
    CHECK(std::isfinite(r.max_abs_distortion));
    CHECK(r.exceed_count <= r.n_samples);
    CHECK(r.n_skipped == 0);
    CHECK(r.abs_distortions.size() == r.n_samples);
    for (const auto& [q, v] : r.quantiles) CHECK(v <= r.max_abs_distortion);

    RipMonteCarloOptions one;
    one.n_samples = 1;
    one.seed = 17;
    const DistortionReport a = rip_monte_carlo(conv, cx, cy, e, one);
    const DistortionReport b = rip_monte_carlo(conv, cx, cy, e, one);
    CHECK(a.abs_distortions == b.abs_distortions);
    CHECK(a.max_abs_distortion == b.max_abs_distortion);
}

TEST_CASE("rip_monte_carlo skips null outputs and appends stress pairs") {
    const auto conv = BilinearMapSpec::circular_convolution(4);
    const ConeSpec c{Support(4, {0, 2}), ConeKind::subspace};
    const Matrix phi = generate(MeasurementEnsemble{EnsembleKind::gaussian, 3, 4, 1});
    RipMonteCarloOptions opt;
    opt.n_samples = 50;
    Vector s(4), h(4);
    s << 1, 0, 1, 0;
    h << 1, 0, -1, 0;
    Vector x(4), y(4);
    x << 1, 0, 0, 0;
    y << 0, 0, 1, 0;
    opt.extra_pairs = {{s, h}, {x, y}};
    const DistortionReport r = rip_monte_carlo(conv, c, c, phi, opt);
    CHECK(r.n_extra == 2);
    CHECK(r.n_samples == 52);
    CHECK(r.n_skipped >= 1);
    CHECK(r.abs_distortions.size() == r.n_samples - r.n_skipped);

    opt.extra_pairs.clear();
    const ConeSpec a{Support(4, {0}), ConeKind::subspace}, b{Support(4, {1}), ConeKind::subspace};
    CHECK_THROWS_AS(rip_monte_carlo(BilinearMapSpec::pointwise(4), a, b, phi, opt), NumericalError);
}

TEST_CASE("concentration test") {
    Vector r = Vector::Zero(200);
    r[0] = 1.0;
    r[50] = -1.0;
    r[199] = 2.0;
    const MeasurementEnsemble tmpl{EnsembleKind::gaussian, 100, 200, 6};
    const ConcentrationResult a = concentration_test(r, tmpl, 2000, 0.5);
    CHECK(a.theory_rate == doctest::Approx(2 * std::exp(-c0(0.5) * 100)).epsilon(1e-14));
    CHECK(a.empirical_rate <= a.theory_rate + 3 * a.standard_error);
    CHECK(a.squared_form_failures == 0);
    CHECK(a.trials == 2000);
    // the event is homogeneous in r
    const ConcentrationResult b = concentration_test(10.0 * r, tmpl, 2000, 0.5);
    CHECK(a.violations == b.violations);

    CHECK_THROWS_AS(concentration_test(Vector::Zero(200), tmpl, 200, 0.5), PreconditionError);
    CHECK_THROWS_AS(concentration_test(r, tmpl, 99, 0.5), PreconditionError);

    const Json j = a;
    CHECK(j.at("trials") == 2000);
}

TEST_CASE("sorted_quantile interpolates") {
    const std::vector<double> v{1, 2, 3, 4};
    CHECK(sorted_quantile(v, 0.0) == 1.0);
    CHECK(sorted_quantile(v, 1.0) == 4.0);
    CHECK(sorted_quantile(v, 0.5) == 2.5);
    CHECK_THROWS_AS(sorted_quantile({}, 0.5), PreconditionError);
}
