#pragma once

#include "bilrip/common.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace bilrip {

/// A nonempty, strictly increasing set of indices in [0, N).
class Support {
public:
    /// Throws PreconditionError unless `indices` is nonempty, strictly
    /// increasing and bounded by `ambient_dim`.
    Support(std::size_t ambient_dim, std::vector<std::size_t> indices);

    /// Sorts and deduplicates before validating.
    static Support from_unsorted(std::size_t ambient_dim, std::vector<std::size_t> indices);

    /// {0, 1, ..., count-1}
    static Support leading(std::size_t ambient_dim, std::size_t count);

    /// Uniformly random subset of the given size.
    static Support random(std::size_t ambient_dim, std::size_t count, Rng& rng);

    std::size_t ambient_dim() const noexcept { return n_; }
    std::size_t size() const noexcept { return indices_.size(); }
    const std::vector<std::size_t>& indices() const noexcept { return indices_; }
    std::size_t operator[](std::size_t k) const { return indices_[k]; }
    bool contains(std::size_t i) const;

    auto begin() const noexcept { return indices_.begin(); }
    auto end() const noexcept { return indices_.end(); }

    friend bool operator==(const Support&, const Support&) = default;

private:
    std::size_t n_;
    std::vector<std::size_t> indices_;
};

enum class ConeKind { subspace, positive_orthant };

std::string_view to_string(ConeKind kind);
ConeKind cone_kind_from_string(std::string_view name);

/// span{e_i : i in I}, or its nonnegative orthant.
struct ConeSpec {
    Support support;
    ConeKind kind = ConeKind::subspace;

    std::size_t dim() const noexcept { return support.size(); }
    std::size_t ambient_dim() const noexcept { return support.ambient_dim(); }

    /// Membership up to `tol` on the sign constraint.
    bool contains(const Vector& x, double tol = 0.0) const;

    friend bool operator==(const ConeSpec&, const ConeSpec&) = default;
};

/// Dense length-N storage with a declared support containing every nonzero.
class SparseVector {
public:
    SparseVector(Vector values, Support declared_support);

    const Vector& values() const noexcept { return values_; }
    const Support& support() const noexcept { return support_; }
    std::size_t ambient_dim() const noexcept { return support_.ambient_dim(); }

    /// Number of exactly nonzero entries.
    std::size_t sparsity() const;
    double norm() const { return values_.norm(); }
    bool nonnegative() const { return (values_.array() >= 0.0).all(); }

    /// Support of the exactly nonzero entries, or the declared support when
    /// the vector is identically zero.
    Support nonzero_support() const;

private:
    Vector values_;
    Support support_;
};

/// Modular sumset I ⊕ J = {(i + j) mod N}.
Support support_sum(const Support& lhs, const Support& rhs);

/// |I ⊕ J| == |I|·|J|.
bool is_properly_separated(const Support& lhs, const Support& rhs);

/// Uniform sample on the intersection of the cone with the sphere of radius
/// `norm`. Orthant cones fold a spherical Gaussian direction into the orthant
/// with absolute values. Pure function of (cone, seed, norm).
SparseVector sample_cone(const ConeSpec& cone, std::uint64_t seed, double norm = 1.0);

/// Same sampler writing into an existing length-N buffer (zeroed outside the
/// support). Used by the Monte Carlo loops to avoid per-sample allocation.
void sample_cone_into(const ConeSpec& cone, Rng& rng, double norm, Vector& out);

/// True when |I| < 2: outside the sparsity range the embedding theorem
/// covers. Operations still accept such supports.
inline bool below_theorem_range(const Support& s) { return s.size() < 2; }

}  // namespace bilrip
