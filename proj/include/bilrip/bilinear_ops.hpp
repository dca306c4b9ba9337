#pragma once

#include "bilrip/common.hpp"
#include "bilrip/sparse_model.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <string_view>

namespace bilrip {

enum class MapKind { pointwise, circular_convolution, unitary_product };

std::string_view to_string(MapKind kind);
MapKind map_kind_from_string(std::string_view name);

/// Descriptor of a bilinear map T: R^N x R^N -> R^N.
///
///  - pointwise:            T(s, h) = s ⊙ h
///  - circular_convolution: T(s, h)_n = Σ_k s_k h_{(n-k) mod N}
///  - unitary_product:      T(s, h) = √N U*(Us ⊙ Uh) for a stored unitary U
///
/// All three are commutative. With U the unitary DFT the third kind coincides
/// with circular convolution.
class BilinearMapSpec {
public:
    static BilinearMapSpec pointwise(std::size_t n);
    static BilinearMapSpec circular_convolution(std::size_t n);
    /// Throws PreconditionError if ‖U*U - I‖_F > 1e-10.
    static BilinearMapSpec unitary_product(CMatrix unitary);

    MapKind kind() const noexcept { return kind_; }
    std::size_t ambient_dim() const noexcept { return n_; }
    /// Null unless kind() == unitary_product.
    const CMatrix* unitary() const noexcept { return unitary_.get(); }

private:
    BilinearMapSpec(MapKind kind, std::size_t n, std::shared_ptr<const CMatrix> u)
        : kind_(kind), n_(n), unitary_(std::move(u)) {}

    MapKind kind_;
    std::size_t n_;
    std::shared_ptr<const CMatrix> unitary_;
};

// Kernels ------------------------------------------------------------------

/// Direct O(N²) circular convolution; the reference implementation.
Vector convolve_serial(const Vector& s, const Vector& h);

/// Same summation per output index as convolve_serial, distributed over
/// output indices. Bit-identical to the serial path.
Vector convolve(const Vector& s, const Vector& h, Exec exec = Exec::parallel);

/// Convolution touching only the declared supports: O(|I|·|J|). Accumulates
/// into `out` (resized and zeroed first). Entries outside I ⊕ J stay exactly 0.
void convolve_supported(const Vector& s, const Support& I, const Vector& h, const Support& J,
                        Vector& out);

/// Complex-valued √N U*(Us ⊙ Uh).
CVector unitary_product_complex(const CMatrix& unitary, const Vector& s, const Vector& h);

// Map application ------------------------------------------------------------

/// Evaluates T(s, h) on dense real vectors. For unitary_product the imaginary
/// residue must be below 1e-9·‖result‖, otherwise NumericalError is thrown
/// (the stored U does not produce a real-valued map on these inputs).
Vector apply(const BilinearMapSpec& map, const Vector& s, const Vector& h);
Vector apply(const BilinearMapSpec& map, const SparseVector& s, const SparseVector& h);

/// Unitary DFT with [F]_{lk} = exp(-2πi·lk/N)/√N.
CMatrix dft_unitary(std::size_t n);

/// max_{i,j} |U_ij|
double max_abs_entry(const CMatrix& m);

/// ‖U*U - I‖_F
double unitarity_defect(const CMatrix& m);

// Closed-form norm inequalities ----------------------------------------------

struct NormBoundCheck {
    double lhs = 0.0;
    double rhs_upper = 0.0;
    std::optional<double> rhs_lower;
    bool satisfied = false;
    double slack = 0.0;  // rhs_upper - lhs
};

/// Evaluates lower ≤ lhs ≤ upper with relative tolerance 1e-9.
NormBoundCheck make_check(double lhs, double upper, std::optional<double> lower);

/// ‖T(s,h)‖ ≤ √(N‖U‖∞² min{‖s‖₀,‖h‖₀})·‖s‖‖h‖ for a unitary_product map.
/// Works on the complex output, so it also covers unitaries that do not
/// yield a real-valued product.
NormBoundCheck check_upper_bound_unitary(const BilinearMapSpec& map, const SparseVector& s,
                                         const SparseVector& h);

/// ‖h‖‖s‖ ≤ ‖h ⊛ s‖ ≤ √min{S,F}·‖h‖‖s‖ with S = ‖s‖₀, F = ‖h‖₀.
/// Both inputs must be entrywise nonnegative.
NormBoundCheck check_positive_cone_bounds(const SparseVector& s, const SparseVector& h);

/// ‖s ⊛ h‖ = ‖s‖‖h‖ for s on I, h on J with I, J properly separated.
NormBoundCheck check_multiplicativity(const SparseVector& s, const SparseVector& h,
                                      const Support& I, const Support& J);

}  // namespace bilrip
