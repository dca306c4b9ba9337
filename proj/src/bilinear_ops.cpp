#include "bilrip/bilinear_ops.hpp"

#include "bilrip/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace bilrip {

namespace {

constexpr double kUnitaryTol = 1e-10;
constexpr std::size_t kParallelConvolutionMin = 1024;

void require_dim(std::size_t n, const Vector& v, const char* what) {
    if (static_cast<std::size_t>(v.size()) != n)
        throw DimensionError(std::string(what) + ": expected length " + std::to_string(n) +
                             ", got " + std::to_string(v.size()));
}

}  // namespace

std::string_view to_string(MapKind kind) {
    switch (kind) {
        case MapKind::pointwise: return "pointwise";
        case MapKind::circular_convolution: return "circular_convolution";
        case MapKind::unitary_product: return "unitary_product";
    }
    return "unknown";
}

MapKind map_kind_from_string(std::string_view name) {
    if (name == "pointwise") return MapKind::pointwise;
    if (name == "circular_convolution" || name == "convolution") return MapKind::circular_convolution;
    if (name == "unitary_product") return MapKind::unitary_product;
    throw PreconditionError("unknown bilinear map kind '" + std::string(name) + "'");
}

BilinearMapSpec BilinearMapSpec::pointwise(std::size_t n) {
    if (n == 0) throw PreconditionError("bilinear map: N must be positive");
    return BilinearMapSpec(MapKind::pointwise, n, nullptr);
}

BilinearMapSpec BilinearMapSpec::circular_convolution(std::size_t n) {
    if (n == 0) throw PreconditionError("bilinear map: N must be positive");
    return BilinearMapSpec(MapKind::circular_convolution, n, nullptr);
}

BilinearMapSpec BilinearMapSpec::unitary_product(CMatrix unitary) {
    if (unitary.rows() == 0 || unitary.rows() != unitary.cols())
        throw PreconditionError("unitary_product: matrix must be square and nonempty");
    const double defect = unitarity_defect(unitary);
    if (!(defect <= kUnitaryTol))
        throw PreconditionError("unitary_product: stored matrix is not unitary (‖U*U - I‖_F = " +
                                std::to_string(defect) + ")");
    const auto n = static_cast<std::size_t>(unitary.rows());
    return BilinearMapSpec(MapKind::unitary_product, n,
                           std::make_shared<const CMatrix>(std::move(unitary)));
}

Vector convolve_serial(const Vector& s, const Vector& h) {
    const Eigen::Index n = s.size();
    if (h.size() != n) throw DimensionError("convolve: operand lengths differ");
    Vector z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double acc = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) acc += s[k] * h[(i - k + n) % n];
        z[i] = acc;
    }
    return z;
}

Vector convolve(const Vector& s, const Vector& h, Exec exec) {
    if (exec == Exec::serial) return convolve_serial(s, h);
    const Eigen::Index n = s.size();
    if (h.size() != n) throw DimensionError("convolve: operand lengths differ");
    Vector z(n);
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        double acc = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) acc += s[k] * h[(i - k + n) % n];
        z[i] = acc;
    }
    return z;
}

void convolve_supported(const Vector& s, const Support& I, const Vector& h, const Support& J,
                        Vector& out) {
    const std::size_t n = I.ambient_dim();
    if (J.ambient_dim() != n) throw DimensionError("convolve: support dimensions differ");
    require_dim(n, s, "convolve");
    require_dim(n, h, "convolve");
    out.setZero(static_cast<Eigen::Index>(n));
    // Outer loop over I ascending keeps the per-output summation order of the
    // direct kernel.
    for (std::size_t i : I) {
        const double si = s[static_cast<Eigen::Index>(i)];
        for (std::size_t j : J)
            out[static_cast<Eigen::Index>((i + j) % n)] += si * h[static_cast<Eigen::Index>(j)];
    }
}

CVector unitary_product_complex(const CMatrix& unitary, const Vector& s, const Vector& h) {
    const CVector us = unitary * s.cast<std::complex<double>>();
    const CVector uh = unitary * h.cast<std::complex<double>>();
    const double scale = std::sqrt(static_cast<double>(unitary.rows()));
    return scale * (unitary.adjoint() * us.cwiseProduct(uh));
}

Vector apply(const BilinearMapSpec& map, const Vector& s, const Vector& h) {
    const std::size_t n = map.ambient_dim();
    require_dim(n, s, "apply");
    require_dim(n, h, "apply");
    switch (map.kind()) {
        case MapKind::pointwise: return s.cwiseProduct(h);
        case MapKind::circular_convolution:
            return convolve(s, h, n >= kParallelConvolutionMin ? Exec::parallel : Exec::serial);
        case MapKind::unitary_product: {
            const CVector z = unitary_product_complex(*map.unitary(), s, h);
            const double residue = z.imag().norm();
            // Cancelling outputs (‖z‖ ≈ 0) are measured against ‖s‖‖h‖.
            const double scale = std::max(z.norm(), s.norm() * h.norm());
            if (residue > 1e-9 * scale)
                throw NumericalError("unitary_product: output is not real (imaginary residue " +
                                     std::to_string(residue) + ")");
            return z.real();
        }
    }
    throw PreconditionError("apply: unknown map kind");
}

Vector apply(const BilinearMapSpec& map, const SparseVector& s, const SparseVector& h) {
    if (map.kind() == MapKind::circular_convolution) {
        if (s.ambient_dim() != map.ambient_dim() || h.ambient_dim() != map.ambient_dim())
            throw DimensionError("apply: operand dimension differs from map dimension");
        Vector out;
        convolve_supported(s.values(), s.support(), h.values(), h.support(), out);
        return out;
    }
    return apply(map, s.values(), h.values());
}

CMatrix dft_unitary(std::size_t n) {
    if (n == 0) throw PreconditionError("dft_unitary: N must be positive");
    const auto size = static_cast<Eigen::Index>(n);
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(n));
    CMatrix f(size, size);
    for (std::size_t l = 0; l < n; ++l) {
        for (std::size_t k = 0; k < n; ++k) {
            // Reduce lk mod N before forming the angle.
            const double angle = -2.0 * std::numbers::pi * static_cast<double>((l * k) % n) /
                                 static_cast<double>(n);
            f(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) =
                std::polar(inv_sqrt, angle);
        }
    }
    return f;
}

double max_abs_entry(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

double unitarity_defect(const CMatrix& m) {
    return (m.adjoint() * m - CMatrix::Identity(m.rows(), m.cols())).norm();
}

NormBoundCheck make_check(double lhs, double upper, std::optional<double> lower) {
    NormBoundCheck c;
    c.lhs = lhs;
    c.rhs_upper = upper;
    c.rhs_lower = lower;
    c.slack = upper - lhs;
    bool ok = lhs <= upper + kAnalyticTol * std::abs(upper);
    if (lower) ok = ok && (*lower - kAnalyticTol * std::abs(*lower) <= lhs);
    c.satisfied = ok;
    return c;
}

NormBoundCheck check_upper_bound_unitary(const BilinearMapSpec& map, const SparseVector& s,
                                         const SparseVector& h) {
    if (map.kind() != MapKind::unitary_product)
        throw PreconditionError("check_upper_bound_unitary: map must be a unitary_product");
    if (s.ambient_dim() != map.ambient_dim() || h.ambient_dim() != map.ambient_dim())
        throw DimensionError("check_upper_bound_unitary: operand dimension differs");
    const CMatrix& u = *map.unitary();
    const double lhs = unitary_product_complex(u, s.values(), h.values()).norm();
    const double uinf = max_abs_entry(u);
    const auto sparsity = static_cast<double>(std::min(s.sparsity(), h.sparsity()));
    const double n = static_cast<double>(map.ambient_dim());
    const double upper = std::sqrt(n * uinf * uinf * sparsity) * s.norm() * h.norm();
    return make_check(lhs, upper, std::nullopt);
}

NormBoundCheck check_positive_cone_bounds(const SparseVector& s, const SparseVector& h) {
    if (s.ambient_dim() != h.ambient_dim())
        throw DimensionError("check_positive_cone_bounds: operand dimensions differ");
    if (!s.nonnegative() || !h.nonnegative())
        throw PreconditionError("check_positive_cone_bounds: inputs must be entrywise nonnegative");
    Vector z;
    convolve_supported(s.values(), s.support(), h.values(), h.support(), z);
    const double prod = s.norm() * h.norm();
    const auto m = static_cast<double>(std::min(s.sparsity(), h.sparsity()));
    return make_check(z.norm(), std::sqrt(m) * prod, prod);
}

NormBoundCheck check_multiplicativity(const SparseVector& s, const SparseVector& h,
                                      const Support& I, const Support& J) {
    if (s.ambient_dim() != I.ambient_dim() || h.ambient_dim() != J.ambient_dim() ||
        I.ambient_dim() != J.ambient_dim())
        throw DimensionError("check_multiplicativity: dimensions differ");
    if (!is_properly_separated(I, J))
        throw PreconditionError("check_multiplicativity: supports are not properly separated");
    for (Eigen::Index i = 0; i < s.values().size(); ++i)
        if (s.values()[i] != 0.0 && !I.contains(static_cast<std::size_t>(i)))
            throw PreconditionError("check_multiplicativity: s has a nonzero outside I");
    for (Eigen::Index j = 0; j < h.values().size(); ++j)
        if (h.values()[j] != 0.0 && !J.contains(static_cast<std::size_t>(j)))
            throw PreconditionError("check_multiplicativity: h has a nonzero outside J");
    Vector z;
    convolve_supported(s.values(), I, h.values(), J, z);
    const double prod = s.norm() * h.norm();
    return make_check(z.norm(), prod, prod);
}

}  // namespace bilrip
