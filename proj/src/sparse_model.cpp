#include "bilrip/sparse_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace bilrip {

Support::Support(std::size_t ambient_dim, std::vector<std::size_t> indices)
    : n_(ambient_dim), indices_(std::move(indices)) {
    if (n_ == 0) throw PreconditionError("support: ambient dimension must be positive");
    if (indices_.empty()) throw PreconditionError("support: must contain at least one index");
    for (std::size_t k = 0; k < indices_.size(); ++k) {
        if (indices_[k] >= n_)
            throw PreconditionError("support: index " + std::to_string(indices_[k]) +
                                    " out of range for N=" + std::to_string(n_));
        if (k > 0 && indices_[k] <= indices_[k - 1])
            throw PreconditionError("support: indices must be strictly increasing");
    }
}

Support Support::from_unsorted(std::size_t ambient_dim, std::vector<std::size_t> indices) {
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    return Support(ambient_dim, std::move(indices));
}

Support Support::leading(std::size_t ambient_dim, std::size_t count) {
    std::vector<std::size_t> idx(count);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return Support(ambient_dim, std::move(idx));
}

Support Support::random(std::size_t ambient_dim, std::size_t count, Rng& rng) {
    if (count == 0 || count > ambient_dim)
        throw PreconditionError("support: random support size must be in [1, N]");
    // Partial Fisher-Yates over [0, N).
    std::vector<std::size_t> pool(ambient_dim);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t k = 0; k < count; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, ambient_dim - 1);
        std::swap(pool[k], pool[pick(rng)]);
    }
    pool.resize(count);
    std::sort(pool.begin(), pool.end());
    return Support(ambient_dim, std::move(pool));
}

bool Support::contains(std::size_t i) const {
    return std::binary_search(indices_.begin(), indices_.end(), i);
}

std::string_view to_string(ConeKind kind) {
    return kind == ConeKind::subspace ? "subspace" : "positive_orthant";
}

ConeKind cone_kind_from_string(std::string_view name) {
    if (name == "subspace") return ConeKind::subspace;
    if (name == "positive_orthant") return ConeKind::positive_orthant;
    throw PreconditionError("unknown cone kind '" + std::string(name) + "'");
}

bool ConeSpec::contains(const Vector& x, double tol) const {
    if (static_cast<std::size_t>(x.size()) != ambient_dim()) return false;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const auto idx = static_cast<std::size_t>(i);
        if (!support.contains(idx)) {
            if (x[i] != 0.0) return false;
        } else if (kind == ConeKind::positive_orthant && x[i] < -tol) {
            return false;
        }
    }
    return true;
}

SparseVector::SparseVector(Vector values, Support declared_support)
    : values_(std::move(values)), support_(std::move(declared_support)) {
    if (static_cast<std::size_t>(values_.size()) != support_.ambient_dim())
        throw DimensionError("sparse vector: value length " + std::to_string(values_.size()) +
                             " does not match N=" + std::to_string(support_.ambient_dim()));
    for (Eigen::Index i = 0; i < values_.size(); ++i) {
        if (values_[i] != 0.0 && !support_.contains(static_cast<std::size_t>(i)))
            throw PreconditionError("sparse vector: nonzero entry at index " + std::to_string(i) +
                                    " outside declared support");
    }
}

std::size_t SparseVector::sparsity() const {
    return static_cast<std::size_t>((values_.array() != 0.0).count());
}

Support SparseVector::nonzero_support() const {
    std::vector<std::size_t> idx;
    for (std::size_t i : support_)
        if (values_[static_cast<Eigen::Index>(i)] != 0.0) idx.push_back(i);
    if (idx.empty()) return support_;
    return Support(ambient_dim(), std::move(idx));
}

Support support_sum(const Support& lhs, const Support& rhs) {
    const std::size_t n = lhs.ambient_dim();
    if (rhs.ambient_dim() != n)
        throw DimensionError("support_sum: ambient dimensions differ (" + std::to_string(n) +
                             " vs " + std::to_string(rhs.ambient_dim()) + ")");
    std::vector<char> hit(n, 0);
    for (std::size_t i : lhs)
        for (std::size_t j : rhs) hit[(i + j) % n] = 1;
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < n; ++k)
        if (hit[k]) out.push_back(k);
    return Support(n, std::move(out));
}

bool is_properly_separated(const Support& lhs, const Support& rhs) {
    return support_sum(lhs, rhs).size() == lhs.size() * rhs.size();
}

void sample_cone_into(const ConeSpec& cone, Rng& rng, double norm, Vector& out) {
    if (!(norm > 0.0)) throw PreconditionError("sample_cone: norm must be positive");
    const auto n = static_cast<Eigen::Index>(cone.ambient_dim());
    if (out.size() != n) out.resize(n);
    out.setZero();
    std::normal_distribution<double> gauss(0.0, 1.0);
    double sq = 0.0;
    // A Gaussian draw is zero with probability 0, but guard the ratio anyway.
    while (sq == 0.0) {
        for (std::size_t i : cone.support) {
            const double g = gauss(rng);
            out[static_cast<Eigen::Index>(i)] = g;
            sq += g * g;
        }
    }
    const double scale = norm / std::sqrt(sq);
    for (std::size_t i : cone.support) {
        double& v = out[static_cast<Eigen::Index>(i)];
        v *= scale;
        if (cone.kind == ConeKind::positive_orthant) v = std::abs(v);
    }
}

SparseVector sample_cone(const ConeSpec& cone, std::uint64_t seed, double norm) {
    Rng rng(seed);
    Vector v;
    sample_cone_into(cone, rng, norm, v);
    return SparseVector(std::move(v), cone.support);
}

}  // namespace bilrip
