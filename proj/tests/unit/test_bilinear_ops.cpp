#include "bilrip/bilinear_ops.hpp"
#include "bilrip/json_io.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace bilrip;

namespace {

Vector to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector basis(std::size_t n, std::size_t i) {
    Vector e = Vector::Zero(static_cast<Eigen::Index>(n));
    e[static_cast<Eigen::Index>(i)] = 1.0;
    return e;
}

SparseVector draw(std::size_t n, std::size_t k, ConeKind kind, Rng& rng) {
    const ConeSpec cone{Support::random(n, k, rng), kind};
    return sample_cone(cone, rng());
}

}  // namespace

TEST_CASE("convolution examples") {
    const auto conv = BilinearMapSpec::circular_convolution(4);
    const Vector h = to_eigen({0.5, -1.0, 2.0, 3.0});
    CHECK(apply(conv, basis(4, 0), h) == h);

    for (std::size_t n : {3, 4, 7})
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                CHECK(apply(BilinearMapSpec::circular_convolution(n), basis(n, i), basis(n, j)) ==
                      basis(n, (i + j) % n));

    const Vector z = apply(conv, to_eigen({1, 0, 1, 0}), to_eigen({1, 0, -1, 0}));
    CHECK(z.norm() <= 1e-12);
    CHECK(z == Vector::Zero(4));
}

TEST_CASE("pointwise examples") {
    const auto pw = BilinearMapSpec::pointwise(5);
    const Vector s = to_eigen({1.5, 0, -2, 0, 4});
    CHECK(apply(pw, Vector::Ones(5), s) == s);
    CHECK(apply(pw, s, to_eigen({1, 1, 0, 1, 2})) == to_eigen({1.5, 0, 0, 0, 8}));
}

TEST_CASE("apply rejects dimension mismatch") {
    const auto conv = BilinearMapSpec::circular_convolution(4);
    CHECK_THROWS_AS(apply(conv, Vector::Ones(3), Vector::Ones(4)), DimensionError);
    CHECK_THROWS_AS(apply(conv, Vector::Ones(5), Vector::Ones(5)), DimensionError);
}

TEST_CASE("direct convolution matches the independent oracle") {
    Rng rng(11);
    std::normal_distribution<double> g;
    for (std::size_t n : {1, 2, 5, 16, 33}) {
        std::vector<double> s(n), h(n);
        for (auto& v : s) v = g(rng);
        for (auto& v : h) v = g(rng);
        const auto expected = oracle::circular_convolution(s, h);
        const Vector got = convolve_serial(to_eigen(s), to_eigen(h));
        for (std::size_t k = 0; k < n; ++k) CHECK(got[Eigen::Index(k)] == doctest::Approx(expected[k]).epsilon(1e-12));
    }
}

TEST_CASE("dft_unitary examples") {
    const CMatrix f1 = dft_unitary(1);
    CHECK(f1.rows() == 1);
    CHECK(std::abs(f1(0, 0) - std::complex<double>(1.0, 0.0)) <= 1e-15);

    const CMatrix f2 = dft_unitary(2);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(f2(0, 0) - r) <= 1e-15);
    CHECK(std::abs(f2(0, 1) - r) <= 1e-15);
    CHECK(std::abs(f2(1, 0) - r) <= 1e-15);
    CHECK(std::abs(f2(1, 1) + r) <= 1e-15);

    for (std::size_t n : {1, 2, 3, 8, 17, 64}) {
        const CMatrix f = dft_unitary(n);
        CHECK(unitarity_defect(f) <= 1e-10);
        CHECK(max_abs_entry(f) == doctest::Approx(1.0 / std::sqrt(double(n))).epsilon(1e-14));
    }
    CHECK_THROWS_AS(dft_unitary(0), PreconditionError);
}

TEST_CASE("unitary_product rejects a non-unitary matrix") {
    CMatrix m = dft_unitary(4);
    m(0, 0) *= 1.01;
    CHECK_THROWS_AS(BilinearMapSpec::unitary_product(m), PreconditionError);
    CHECK_NOTHROW(BilinearMapSpec::unitary_product(dft_unitary(4)));
}

TEST_CASE("DFT unitary product equals convolution for N in 2..64") {
    Rng rng(5);
    std::normal_distribution<double> g;
    for (std::size_t n = 2; n <= 64; ++n) {
        const auto up = BilinearMapSpec::unitary_product(dft_unitary(n));
        const auto conv = BilinearMapSpec::circular_convolution(n);
        for (int t = 0; t < 3; ++t) {
            Vector s(n), h(n);
            for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = g(rng), h[i] = g(rng);
            const Vector a = apply(up, s, h);
            const Vector b = apply(conv, s, h);
            REQUIRE((a - b).norm() <= 1e-9 * std::max(1.0, b.norm()));
        }
    }
    // independent DFT-by-sums oracle
    const std::vector<double> s{1, 2, 0, -1, 0.5, 0}, h{0, 1, 0, 0, 3, -2};
    const auto ref = oracle::dft_product(s, h);
    const auto conv = oracle::circular_convolution(s, h);
    for (std::size_t k = 0; k < s.size(); ++k) CHECK(std::abs(ref[k] - conv[k]) <= 1e-9);
    const Vector lib = apply(BilinearMapSpec::unitary_product(dft_unitary(6)), to_eigen(s), to_eigen(h));
    for (std::size_t k = 0; k < s.size(); ++k) CHECK(std::abs(lib[Eigen::Index(k)] - ref[k]) <= 1e-9);
}

TEST_CASE("apply is commutative and bilinear for all kinds") {
    Rng rng(21);
    std::normal_distribution<double> g;
    const std::size_t n = 12;
    const std::vector<BilinearMapSpec> maps{BilinearMapSpec::pointwise(n),
                                            BilinearMapSpec::circular_convolution(n),
                                            BilinearMapSpec::unitary_product(dft_unitary(n))};
    for (const auto& map : maps) {
        for (int t = 0; t < 50; ++t) {
            Vector s1(n), s2(n), h(n);
            for (std::size_t i = 0; i < n; ++i) s1[Eigen::Index(i)] = g(rng), s2[Eigen::Index(i)] = g(rng), h[Eigen::Index(i)] = g(rng);
            const double a = g(rng), b = g(rng);
            const double tol = map.kind() == MapKind::unitary_product ? 1e-9 : 1e-12;
            const Vector st = apply(map, s1, h);
            REQUIRE((st - apply(map, h, s1)).cwiseAbs().maxCoeff() <= tol * std::max(1.0, st.norm()));
            const Vector lhs = apply(map, a * s1 + b * s2, h);
            const Vector rhs = a * st + b * apply(map, s2, h);
            REQUIRE((lhs - rhs).cwiseAbs().maxCoeff() <= tol * std::max(1.0, rhs.norm()) * 10);
        }
    }
}

TEST_CASE("convolution output stays inside the sumset") {
    Rng rng(3);
    for (int t = 0; t < 500; ++t) {
        const std::size_t n = 4 + rng() % 29;
        const SparseVector s = draw(n, 1 + rng() % 4, ConeKind::subspace, rng);
        const SparseVector h = draw(n, 1 + rng() % 4, ConeKind::subspace, rng);
        const Support sum = support_sum(s.support(), h.support());
        const Vector z = apply(BilinearMapSpec::circular_convolution(n), s, h);
        for (std::size_t k = 0; k < n; ++k)
            if (!sum.contains(k)) REQUIRE(z[Eigen::Index(k)] == 0.0);
        const Vector dense = convolve_serial(s.values(), h.values());
        REQUIRE((z - dense).norm() <= 1e-12 * std::max(1.0, dense.norm()));
    }
}

TEST_CASE("unitary upper bound examples and sweep") {
    const std::size_t n = 32;
    const auto up = BilinearMapSpec::unitary_product(dft_unitary(n));

    Rng rng(9);
    const SparseVector h = draw(n, 5, ConeKind::subspace, rng);
    const SparseVector e0(basis(n, 0), Support(n, {0}));
    const NormBoundCheck one = check_upper_bound_unitary(up, e0, h);
    CHECK(one.satisfied);
    CHECK(one.lhs == doctest::Approx(h.norm()).epsilon(1e-9));
    CHECK(one.rhs_upper * one.rhs_upper >= h.norm() * h.norm() * (1 - 1e-9));
    CHECK_FALSE(one.rhs_lower.has_value());

    for (int t = 0; t < 1000; ++t) {
        const SparseVector s = draw(n, 1 + rng() % 8, ConeKind::subspace, rng);
        const SparseVector hh = draw(n, 1 + rng() % 8, ConeKind::subspace, rng);
        const NormBoundCheck c = check_upper_bound_unitary(up, s, hh);
        REQUIRE(c.satisfied);
        // with the DFT the bound is √min{‖s‖₀,‖h‖₀}·‖s‖‖h‖
        const double k = double(std::min(s.sparsity(), hh.sparsity()));
        REQUIRE(c.rhs_upper == doctest::Approx(std::sqrt(k) * s.norm() * hh.norm()).epsilon(1e-9));
        REQUIRE(c.slack == doctest::Approx(c.rhs_upper - c.lhs));
    }
    CHECK_THROWS_AS(check_upper_bound_unitary(BilinearMapSpec::circular_convolution(n), e0, h),
                    PreconditionError);
}

TEST_CASE("positive cone sandwich examples and sweep") {
    const SparseVector s(basis(4, 0), Support(4, {0}));
    const SparseVector h(basis(4, 1) + basis(4, 2), Support(4, {1, 2}));
    const NormBoundCheck c = check_positive_cone_bounds(s, h);
    CHECK(c.satisfied);
    CHECK(c.lhs == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(*c.rhs_lower == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    Vector v = Vector::Zero(4);
    v[0] = v[1] = 1.0 / std::sqrt(2.0);
    const SparseVector u(v, Support(4, {0, 1}));
    const NormBoundCheck d = check_positive_cone_bounds(u, u);
    CHECK(d.lhs == doctest::Approx(1.224744871391589).epsilon(1e-12));
    CHECK(d.satisfied);
    CHECK(d.lhs > 1.0);
    CHECK(d.lhs < std::sqrt(2.0));

    Rng rng(17);
    for (int t = 0; t < 1000; ++t) {
        const SparseVector a = draw(16, 1 + rng() % 6, ConeKind::positive_orthant, rng);
        const SparseVector b = draw(16, 1 + rng() % 6, ConeKind::positive_orthant, rng);
        REQUIRE(check_positive_cone_bounds(a, b).satisfied);
    }

    Vector neg = basis(4, 0);
    neg[0] = -1.0;
    CHECK_THROWS_AS(check_positive_cone_bounds(SparseVector(neg, Support(4, {0})), h), PreconditionError);
}

TEST_CASE("multiplicativity examples") {
    Rng rng(23);
    const std::size_t n = 16;
    const Support I(n, {0, 1}), J(n, {0, 4});
    REQUIRE(is_properly_separated(I, J));
    for (int t = 0; t < 1000; ++t) {
        const SparseVector s = sample_cone(ConeSpec{I, ConeKind::subspace}, rng());
        const SparseVector h = sample_cone(ConeSpec{J, ConeKind::subspace}, rng());
        const NormBoundCheck c = check_multiplicativity(s, h, I, J);
        REQUIRE(c.satisfied);
        REQUIRE(std::abs(c.lhs - 1.0) <= 1e-9);
    }

    // scalar case: I = {0}
    const SparseVector c(3.0 * basis(n, 0), Support(n, {0}));
    const SparseVector h = sample_cone(ConeSpec{Support(n, {2, 5, 11}), ConeKind::subspace}, 4);
    const NormBoundCheck scalar = check_multiplicativity(c, h, Support(n, {0}), Support(n, {2, 5, 11}));
    CHECK(scalar.lhs == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(scalar.satisfied);

    const Support K(8, {0, 4});
    const SparseVector k = sample_cone(ConeSpec{K, ConeKind::subspace}, 1);
    CHECK_THROWS_AS(check_multiplicativity(k, k, K, K), PreconditionError);
    // support not contained in the declared pair
    CHECK_THROWS_AS(check_multiplicativity(h, h, I, J), PreconditionError);
}

TEST_CASE("NormBoundCheck JSON carries both sides") {
    const Json j = make_check(1.0, 2.0, 0.5);
    CHECK(j.at("lhs") == 1.0);
    CHECK(j.at("rhs_upper") == 2.0);
    CHECK(j.at("rhs_lower") == 0.5);
    CHECK(j.at("satisfied") == true);
    CHECK(j.at("slack") == 1.0);
    CHECK(Json(make_check(3.0, 2.0, std::nullopt)).at("rhs_lower").is_null());
    CHECK_FALSE(make_check(0.4, 2.0, 0.5).satisfied);
    CHECK(make_check(2.0 * (1 + 1e-11), 2.0, std::nullopt).satisfied);
}
