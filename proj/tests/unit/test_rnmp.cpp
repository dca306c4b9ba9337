#include "bilrip/json_io.hpp"
#include "bilrip/rnmp.hpp"

#include <doctest.h>

#include <cmath>

using namespace bilrip;

namespace {

ConeSpec sub(std::size_t n, std::vector<std::size_t> idx) {
    return {Support(n, std::move(idx)), ConeKind::subspace};
}
ConeSpec pos(std::size_t n, std::vector<std::size_t> idx) {
    return {Support(n, std::move(idx)), ConeKind::positive_orthant};
}

void check_witness(const BilinearMapSpec& map, const RnmpEstimate& e, double tol) {
    for (const auto* w : {&e.alpha_witness, &e.beta_witness}) {
        REQUIRE(std::abs(w->x.norm() - 1.0) <= 1e-12);
        REQUIRE(std::abs(w->y.norm() - 1.0) <= 1e-12);
        REQUIRE(e.cone_x.contains(w->x));
        REQUIRE(e.cone_y.contains(w->y));
        for (Eigen::Index i = 0; i < w->x.size(); ++i) {
            if (!e.cone_x.support.contains(std::size_t(i))) REQUIRE(w->x[i] == 0.0);
            if (!e.cone_y.support.contains(std::size_t(i))) REQUIRE(w->y[i] == 0.0);
        }
    }
    REQUIRE(std::abs(rnmp_ratio(map, e.alpha_witness.x, e.alpha_witness.y) - e.alpha_est) <= tol);
    REQUIRE(std::abs(rnmp_ratio(map, e.beta_witness.x, e.beta_witness.y) - e.beta_est) <= tol);
    REQUIRE(e.alpha_est >= 0.0);
    REQUIRE(e.alpha_est <= e.beta_est);
}

}  // namespace

TEST_CASE("matricize examples") {
    const auto conv = BilinearMapSpec::circular_convolution(4);
    Vector e0 = Vector::Zero(4), e1 = Vector::Zero(4);
    e0[0] = 1.0;
    e1[1] = 1.0;
    const Support J(4, {1, 3});
    const Matrix a0 = matricize(conv, J, e0);
    CHECK(a0 == Matrix::Identity(4, 4)(Eigen::all, std::vector<Eigen::Index>{1, 3}));

    const Matrix a1 = matricize(conv, Support(4, {0, 1}), e1);
    Matrix expected = Matrix::Zero(4, 2);
    expected(1, 0) = 1.0;
    expected(2, 1) = 1.0;
    CHECK(a1 == expected);

    const auto pw = BilinearMapSpec::pointwise(5);
    Vector x(5);
    x << 1, -2, 3, 0, 5;
    const Support K(5, {0, 2, 3});
    const Matrix d = matricize(pw, K, x);
    CHECK(d == Matrix(x.asDiagonal())(Eigen::all, std::vector<Eigen::Index>{0, 2, 3}));
}

TEST_CASE("matricize reproduces the map on random inputs") {
    Rng rng(1);
    const std::size_t n = 9;
    const std::vector<BilinearMapSpec> maps{BilinearMapSpec::pointwise(n),
                                            BilinearMapSpec::circular_convolution(n),
                                            BilinearMapSpec::unitary_product(dft_unitary(n))};
    for (const auto& map : maps) {
        for (int t = 0; t < 20; ++t) {
            const ConeSpec cx{Support::random(n, 3, rng), ConeKind::subspace};
            const ConeSpec cy{Support::random(n, 4, rng), ConeKind::subspace};
            const Vector x = sample_cone(cx, rng()).values();
            const Vector y = sample_cone(cy, rng()).values();
            Vector yj(cy.dim()), xi(cx.dim());
            for (std::size_t k = 0; k < cy.dim(); ++k) yj[Eigen::Index(k)] = y[Eigen::Index(cy.support[k])];
            for (std::size_t k = 0; k < cx.dim(); ++k) xi[Eigen::Index(k)] = x[Eigen::Index(cx.support[k])];
            const Vector z = apply(map, x, y);
            REQUIRE((matricize(map, cy.support, x) * yj - z).norm() <= 1e-9);
            REQUIRE((matricize_left(map, cx.support, y) * xi - z).norm() <= 1e-9);
        }
    }
}

TEST_CASE("brute estimate examples") {
    const auto conv = BilinearMapSpec::circular_convolution(4);
    const RnmpEstimate few = estimate_brute(conv, sub(4, {0, 2}), sub(4, {0, 2}), 100, 7);
    const RnmpEstimate many = estimate_brute(conv, sub(4, {0, 2}), sub(4, {0, 2}), 100000, 7);
    CHECK(many.alpha_est <= few.alpha_est);
    CHECK(many.alpha_est <= 0.05);
    check_witness(conv, many, 1e-12);

    const RnmpEstimate p = estimate_brute(BilinearMapSpec::circular_convolution(8), pos(8, {0, 1, 5}),
                                          pos(8, {2, 3}), 20000, 3);
    CHECK(p.alpha_est >= 1.0 - 1e-6);
    CHECK(p.beta_est <= std::sqrt(2.0) + 1e-9);

    const RnmpEstimate sep = estimate_brute(BilinearMapSpec::circular_convolution(16), sub(16, {0, 1}),
                                            sub(16, {0, 4}), 5000, 3);
    CHECK(std::abs(sep.alpha_est - 1.0) <= 1e-6);
    CHECK(std::abs(sep.beta_est - 1.0) <= 1e-6);
    CHECK(sep.multiplicative(1e-6));
    CHECK(sep.method == RnmpMethod::brute);
    CHECK_THROWS_AS(estimate_brute(conv, sub(4, {0}), sub(4, {0}), 0, 1), PreconditionError);
}

TEST_CASE("brute estimate is invariant to the sampling radius") {
    const auto conv = BilinearMapSpec::circular_convolution(6);
    const RnmpEstimate a = estimate_brute(conv, sub(6, {0, 1, 3}), sub(6, {2, 5}), 2000, 99, Exec::serial, 1.0);
    for (double r : {1e-3, 0.5, 37.0}) {
        const RnmpEstimate b = estimate_brute(conv, sub(6, {0, 1, 3}), sub(6, {2, 5}), 2000, 99, Exec::serial, r);
        CHECK(std::abs(a.alpha_est - b.alpha_est) <= 1e-12);
        CHECK(std::abs(a.beta_est - b.beta_est) <= 1e-12);
    }
}

TEST_CASE("alternating estimate examples") {
    const auto pw = BilinearMapSpec::pointwise(6);
    AlternatingOptions opt;
    opt.seed = 5;
    const RnmpEstimate disjoint = estimate_alternating(pw, sub(6, {0, 1}), sub(6, {2, 3, 4}), opt);
    CHECK(disjoint.alpha_est <= 1e-12);
    CHECK(disjoint.beta_est <= 1e-12);

    const auto conv = BilinearMapSpec::circular_convolution(10);
    Rng rng(8);
    for (int t = 0; t < 20; ++t) {
        const ConeSpec cx{Support::random(10, 1 + rng() % 4, rng), ConeKind::subspace};
        const ConeSpec cy{Support::random(10, 1 + rng() % 4, rng), ConeKind::subspace};
        opt.seed = rng();
        const RnmpEstimate e = estimate_alternating(conv, cx, cy, opt);
        REQUIRE(e.beta_est <= std::sqrt(double(std::min(cx.dim(), cy.dim()))) + 1e-9);
        check_witness(conv, e, 1e-9);
        const RnmpEstimate b = estimate_brute(conv, cx, cy, 2000, opt.seed);
        REQUIRE(e.alpha_est <= b.alpha_est + 1e-9);
        REQUIRE(e.beta_est >= b.beta_est - 1e-9);
    }

    CHECK_THROWS_AS(estimate_alternating(conv, sub(10, {0}), sub(10, {1}), AlternatingOptions{0}),
                    PreconditionError);
    AlternatingOptions bad;
    bad.tol = 0.0;
    CHECK_THROWS_AS(estimate_alternating(conv, sub(10, {0}), sub(10, {1}), bad), PreconditionError);
}

TEST_CASE("alternating estimate on positive orthants respects the floor") {
    const auto conv = BilinearMapSpec::circular_convolution(12);
    Rng rng(12);
    for (int t = 0; t < 20; ++t) {
        const ConeSpec cx{Support::random(12, 2 + rng() % 3, rng), ConeKind::positive_orthant};
        const ConeSpec cy{Support::random(12, 2 + rng() % 3, rng), ConeKind::positive_orthant};
        AlternatingOptions opt;
        opt.seed = rng();
        const RnmpEstimate e = estimate_alternating(conv, cx, cy, opt);
        REQUIRE(e.alpha_est >= 1.0 - 1e-6);
        REQUIRE(e.beta_est <= std::sqrt(double(std::min(cx.dim(), cy.dim()))) + 1e-9);
        check_witness(conv, e, 1e-9);
    }
}

TEST_CASE("exhaustive certification examples") {
    const auto conv = BilinearMapSpec::circular_convolution(4);
    const RnmpEstimate single = certify_exhaustive(conv, sub(4, {1}), sub(4, {2}), 8);
    CHECK(single.alpha_est == 1.0);
    CHECK(single.beta_est == 1.0);
    CHECK(!single.warnings.empty());

    const RnmpEstimate null = certify_exhaustive(conv, sub(4, {0, 2}), sub(4, {0, 2}), 400);
    CHECK(null.alpha_est <= 1e-3);
    check_witness(conv, null, 1e-9);

    ExhaustiveOptions grid_only{64, InnerSolve::grid};
    const RnmpEstimate null_grid = certify_exhaustive(conv, sub(4, {0, 2}), sub(4, {0, 2}),
                                                      ExhaustiveOptions{400, InnerSolve::grid});
    CHECK(null_grid.alpha_est <= 1e-3);

    const RnmpEstimate orth = certify_exhaustive(conv, pos(4, {0, 1}), pos(4, {0, 1}), 200);
    CHECK(orth.alpha_est >= 1.0 - 1e-12);
    CHECK(orth.alpha_est <= orth.beta_est);
    CHECK(orth.beta_est <= std::sqrt(2.0) + 1e-12);
    check_witness(conv, orth, 1e-9);
    const RnmpEstimate orth_grid = certify_exhaustive(conv, pos(4, {0, 1}), pos(4, {0, 1}), grid_only);
    CHECK(orth_grid.alpha_est >= 1.0 - 1e-12);

    CHECK_THROWS_AS(certify_exhaustive(conv, sub(4, {0, 2}), sub(4, {0, 2}), 2), PreconditionError);
    const auto big = BilinearMapSpec::circular_convolution(16);
    CHECK_THROWS_AS(certify_exhaustive(big, sub(16, {0, 1, 2, 3, 4}), sub(16, {5, 6, 7, 8, 9}),
                                       ExhaustiveOptions{200, InnerSolve::grid}),
                    PreconditionError);
}

TEST_CASE("sphere grid covers the unit sphere section") {
    const ConeSpec c = sub(6, {1, 2, 4});
    CHECK(sphere_grid_count(c, 5) == 25);
    CHECK(sphere_grid_count(sub(6, {3}), 5) == 1);
    Vector v;
    for (std::size_t i = 0; i < sphere_grid_count(c, 5); ++i) {
        sphere_grid_point(c, 5, i, v);
        REQUIRE(std::abs(v.norm() - 1.0) <= 1e-12);
        REQUIRE(v[0] == 0.0);
        REQUIRE(v[3] == 0.0);
    }
    const ConeSpec p = pos(6, {0, 5});
    for (std::size_t i = 0; i < sphere_grid_count(p, 7); ++i) {
        sphere_grid_point(p, 7, i, v);
        REQUIRE((v.array() >= 0.0).all());
    }
}

TEST_CASE("separated subspaces are multiplicative under all estimators") {
    const auto conv = BilinearMapSpec::circular_convolution(16);
    const ConeSpec cx = sub(16, {0, 1}), cy = sub(16, {0, 4, 8});
    REQUIRE(is_properly_separated(cx.support, cy.support));
    AlternatingOptions opt;
    opt.seed = 2;
    for (const RnmpEstimate& e : {estimate_brute(conv, cx, cy, 3000, 1), estimate_alternating(conv, cx, cy, opt),
                                  certify_exhaustive(conv, cx, cy, 32)}) {
        CHECK(std::abs(e.alpha_est - 1.0) <= 1e-6);
        CHECK(std::abs(e.beta_est - 1.0) <= 1e-6);
    }
}

TEST_CASE("estimate JSON carries witnesses and metadata") {
    const auto conv = BilinearMapSpec::circular_convolution(4);
    const Json j = estimate_brute(conv, sub(4, {0, 2}), pos(4, {1}), 50, 3);
    CHECK(j.at("method") == "brute");
    CHECK(j.at("cone_kinds") == Json::array({"subspace", "positive_orthant"}));
    CHECK(j.at("support_pair")[1] == Json::parse(R"({"n":4,"indices":[1]})"));
    CHECK(j.at("alpha_witness").at("x").size() == 4);
    CHECK(j.at("alpha_est").get<double>() <= j.at("beta_est").get<double>());
}
