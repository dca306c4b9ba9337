#pragma once

#include "bilrip/bilinear_ops.hpp"
#include "bilrip/common.hpp"
#include "bilrip/sparse_model.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bilrip {

// Estimators for the restricted norm multiplicativity constants of a bilinear
// map on a pair of canonical cones:
//
//   alpha = inf ‖T(x,y)‖ / (‖x‖‖y‖),   beta = sup ‖T(x,y)‖ / (‖x‖‖y‖)
//
// over nonzero x in coneX, y in coneY. alpha is the pairwise infimum over the
// whole product (no representation-set refinement), which is a conservative
// lower bound for the refined constant.

enum class RnmpMethod { brute, alternating, exhaustive };

std::string_view to_string(RnmpMethod method);

struct DirectionPair {
    Vector x;
    Vector y;
    double ratio = 0.0;
};

struct RnmpEstimate {
    ConeSpec cone_x;
    ConeSpec cone_y;
    double alpha_est = 0.0;
    double beta_est = 0.0;
    DirectionPair alpha_witness;
    DirectionPair beta_witness;
    RnmpMethod method = RnmpMethod::brute;
    std::size_t restarts = 0;
    std::size_t evaluations = 0;
    double tol = 0.0;
    bool converged = true;
    std::vector<std::string> warnings;

    /// |alpha - beta| ≤ tol: callers treat the map as norm-multiplicative on
    /// the pair and may use the α = β branch of the d constant.
    bool multiplicative(double tolerance) const {
        return beta_est - alpha_est <= tolerance;
    }
};

/// ‖T(x,y)‖ / (‖x‖‖y‖). Uses the complex output norm for unitary products.
double rnmp_ratio(const BilinearMapSpec& map, const Vector& x, const Vector& y);

/// N x |J| matrix A(x) with columns T(x, e_j), j in J, so T(x, y) = A(x) y_J.
Matrix matricize(const BilinearMapSpec& map, const Support& J, const Vector& x);

/// N x |I| matrix with columns T(e_i, y), i in I, so T(x, y) = B(y) x_I.
Matrix matricize_left(const BilinearMapSpec& map, const Support& I, const Vector& y);

/// Random-sampling estimate: min and max of the ratio over `samples` pairs
/// drawn from the cones. alpha_est over-estimates the true infimum and
/// beta_est under-estimates the true supremum. `sample_norm` is the radius the
/// raw samples are drawn at; the ratio does not depend on it.
RnmpEstimate estimate_brute(const BilinearMapSpec& map, const ConeSpec& cone_x,
                            const ConeSpec& cone_y, std::size_t samples, std::uint64_t seed,
                            Exec exec = Exec::parallel, double sample_norm = 1.0);

struct AlternatingOptions {
    std::size_t restarts = 16;
    std::size_t max_iters = 200;
    double tol = 1e-12;
    std::uint64_t seed = 0;
    Exec exec = Exec::parallel;
};

/// Alternating extreme-singular-direction search. For alpha, fix x and take
/// the smallest right singular vector of A(x) as y, then fix y and update x
/// symmetrically; beta uses the largest singular vectors. On orthant cones
/// the singular vector is sign-aligned, clamped to the orthant and
/// renormalized, and a step is only accepted if it does not worsen the
/// objective. Best result over restarts is kept.
RnmpEstimate estimate_alternating(const BilinearMapSpec& map, const ConeSpec& cone_x,
                                  const ConeSpec& cone_y, const AlternatingOptions& options);

enum class InnerSolve {
    automatic,  ///< exact singular values over a subspace factor, grid otherwise
    grid        ///< angular grid over both factors
};

struct ExhaustiveOptions {
    std::size_t grid_per_dim = 64;
    InnerSolve inner = InnerSolve::automatic;
    Exec exec = Exec::parallel;
};

inline constexpr double kMaxExhaustiveGrid = 1e8;

/// Deterministic angular grid over the unit sphere of one (or both) cones.
/// Each S-dimensional factor gets grid_per_dim^(S-1) points in hyperspherical
/// coordinates (half-sphere for subspaces, since the ratio is sign
/// invariant). With InnerSolve::automatic, a subspace factor is optimized
/// exactly through the extreme singular values of the matricized map, and the
/// lower-dimensional subspace is the one that gets gridded.
RnmpEstimate certify_exhaustive(const BilinearMapSpec& map, const ConeSpec& cone_x,
                                const ConeSpec& cone_y, const ExhaustiveOptions& options);

inline RnmpEstimate certify_exhaustive(const BilinearMapSpec& map, const ConeSpec& cone_x,
                                       const ConeSpec& cone_y, std::size_t grid_per_dim) {
    return certify_exhaustive(map, cone_x, cone_y, ExhaustiveOptions{grid_per_dim});
}

/// Number of points the exhaustive grid would visit (before the guard).
double exhaustive_grid_size(const ConeSpec& cone_x, const ConeSpec& cone_y,
                            const ExhaustiveOptions& options);

/// Point number `index` of the angular grid on the unit sphere of `cone`,
/// written into a length-N vector.
void sphere_grid_point(const ConeSpec& cone, std::size_t grid_per_dim, std::size_t index,
                       Vector& out);

/// grid_per_dim^(dim-1); 1 for a one-dimensional cone.
std::size_t sphere_grid_count(const ConeSpec& cone, std::size_t grid_per_dim);

}  // namespace bilrip
