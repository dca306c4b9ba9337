#pragma once

#include "bilrip/bilinear_ops.hpp"
#include "bilrip/common.hpp"
#include "bilrip/sensing.hpp"
#include "bilrip/sparse_model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace bilrip {

/// Channel model z = T(s, h) with s, h drawn from canonical cones.
struct BilinearModel {
    BilinearMapSpec map;
    ConeSpec cone_x;
    ConeSpec cone_y;
};

struct GroundTruth {
    Vector s;
    Vector h;
    Vector z;
};

/// Receiver-side problem y = Φz + n.
struct RecoveryProblem {
    Matrix phi;
    Vector y;
    BilinearModel model;
    double noise_sigma = 0.0;
    std::optional<GroundTruth> truth;
};

struct RecoveryResult {
    Vector z_hat;
    Support support_hat;
    std::size_t iterations = 0;
    double residual = 0.0;                 ///< ‖Φ z_hat - y‖
    std::optional<double> relative_error;  ///< ‖z_hat - z‖/‖z‖ when truth is known
    bool converged = false;
    bool diverged = false;
    bool rank_deficient = false;
};

/// Output-sparsity budget of the model: min(S, F) for pointwise products,
/// |I ⊕ J| for circular convolution, N for a general unitary product.
std::size_t model_sparsity(const BilinearModel& model);

/// Draws s, h from the model cones (unit norm), forms z = T(s, h), measures
/// with Φ and adds i.i.d. N(0, noise_sigma²) noise.
RecoveryProblem make_problem(const BilinearModel& model, Matrix phi, double noise_sigma,
                             std::uint64_t seed);

/// Least squares restricted to a known support. Rank-deficient restrictions
/// get the minimum-norm solution and are flagged. Throws PreconditionError if
/// |support| > M.
RecoveryResult oracle_least_squares(const RecoveryProblem& problem, const Support& support);

/// Constant step 1/‖Φ‖², with ‖Φ‖² from spectral_norm_squared.
struct AdaptiveStep {};

/// Normalized step ‖g_Γ‖²/‖Φ g_Γ‖² on the current support Γ, halved while
/// a support change would overshoot (normalized IHT).
struct NormalizedStep {};

using IhtStep = std::variant<double, AdaptiveStep, NormalizedStep>;

struct IhtOptions {
    std::size_t k = 1;
    std::size_t max_iters = 3000;
    IhtStep step = NormalizedStep{};
    double tol = 1e-12;
    /// Least-squares refit on the final support (does not change the support).
    bool debias = false;
};

/// Largest singular value squared of Φ from 30 power iterations on ΦᵀΦ.
double spectral_norm_squared(const Matrix& phi, int iterations = 30);

/// Keeps the k largest-magnitude entries (ties: lowest index), zeroes the rest.
Vector hard_threshold(const Vector& v, std::size_t k);

/// Iterative hard thresholding z ← H_K(z + μ Φᵀ(y - Φz)). Stops when the
/// update norm is ≤ tol·‖z‖ or after max_iters; flags divergence when the
/// residual grows tenfold over 50 iterations. z_hat keeps exactly K entries;
/// support_hat lists those above 1e-9·max|z_hat|, so padding entries left at
/// roundoff level (K larger than the true sparsity) are not reported.
RecoveryResult iht(const RecoveryProblem& problem, const IhtOptions& options);

struct PhaseTransitionConfig {
    MapKind map = MapKind::circular_convolution;
    std::size_t n = 64;
    std::size_t s = 2;
    std::size_t f = 2;
    ConeKind cone_kind = ConeKind::positive_orthant;
    EnsembleKind ensemble = EnsembleKind::gaussian;
    std::vector<std::size_t> m_grid;
    std::size_t trials = 20;
    double delta_success = 1e-3;
    std::uint64_t seed = 0;
    IhtOptions iht;  ///< k is overwritten per trial with model_sparsity
    Exec exec = Exec::parallel;
};

struct PhasePoint {
    std::size_t m = 0;
    std::size_t trials = 0;
    std::size_t successes = 0;
    double rate = 0.0;
};

struct PhaseTransitionResult {
    PhaseTransitionConfig config;
    std::vector<PhasePoint> points;
    double additive_reference = 0.0;        ///< (S + F) ln N
    double multiplicative_reference = 0.0;  ///< S F ln N
    /// Smallest grid M with rate ≥ 1/2, if any.
    std::optional<std::size_t> m50;
};

/// Draws a random support pair for the model. Pointwise models force the
/// supports to intersect so the output is not identically zero.
std::pair<Support, Support> draw_support_pair(MapKind map, std::size_t n, std::size_t s,
                                              std::size_t f, Rng& rng);

/// Success-rate curve of IHT recovery over M. Each (M index, trial) pair
/// draws its own supports, cone samples and Φ from
/// derive_seed(seed, M index, trial).
PhaseTransitionResult phase_transition(const PhaseTransitionConfig& config);

/// Spearman rank correlation with average ranks for ties. Returns 1 when
/// either series is constant.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace bilrip
