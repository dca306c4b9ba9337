#pragma once

#include "bilrip/common.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace bilrip {

/// Net-radius divisor of the embedding theorem:
///   12                      if alpha == beta (exact comparison)
///   7 (beta/alpha)(2 + √alpha) otherwise.
/// Callers holding numerical estimates decide equality upstream.
double d_constant(double alpha, double beta);

/// Concentration exponent (3δ² - δ³)/48 for a RIP level δ in (0, 1).
double c0(double delta);

enum class CoveringKind {
    ball,                      ///< (3/ε)^S
    positive_cone_rogers,      ///< (4/ε)^S · 7S·ln S, S ≥ 3
    positive_cone_simplified,  ///< (18/ε)^S
};

std::string_view to_string(CoveringKind kind);
CoveringKind covering_kind_from_string(std::string_view name);

/// Covering number bound N(X¹, X^ε) for an S-dimensional ball or canonical
/// positive cone.
double covering_bound(CoveringKind kind, std::size_t dim, double eps);

/// Natural log of covering_bound, finite where the bound itself overflows.
double log_covering_bound(CoveringKind kind, std::size_t dim, double eps);

/// Raw lower bound 1 - 2·cov_x·cov_y·exp(-c0(δ)·M) on the probability that
/// Φ is a δ-embedding of T(X, Y). May be negative (vacuous). M = 0 is
/// accepted and yields 1 - 2·cov_x·cov_y.
double rip_probability(double cov_x, double cov_y, double delta, std::uint64_t m);

/// rip_probability with the coverings passed as logarithms.
double rip_probability_log(double log_cov_x, double log_cov_y, double delta, std::uint64_t m);

enum class ApplicationCase { pointwise, positive_cone_conv, tensor_conv };

std::string_view to_string(ApplicationCase c);
ApplicationCase application_case_from_string(std::string_view name);

/// Closed-form probability bounds for the three worked model classes:
///   pointwise:          1 - 2 (12/δ)^{min(S,F)} e^{-c0 M}
///   positive_cone_conv: 1 - 2 (378 √min(S,F) / δ)^{S+F} e^{-c0 M}
///   tensor_conv:        1 - 2 (36/δ)^{S+F} e^{-c0 M}
/// Requires S, F ≥ 2, δ in (0,1), M ≥ 1.
double application_probability(ApplicationCase c, std::size_t s, std::size_t f, double delta,
                               std::uint64_t m);

/// Same bounds assembled from d_constant, covering_bound and rip_probability
/// rather than from the closed forms: net radius δ/4 on a min(S,F)-ball for
/// pointwise, δ/d with d = d(1, √min(S,F)) on simplified cone coverings for
/// positive cones, δ/d(1,1) on balls for tensors.
double application_probability_composed(ApplicationCase c, std::size_t s, std::size_t f,
                                        double delta, std::uint64_t m);

/// log of the per-pair failure prefactor 2·(C/δ)^e, i.e. everything but
/// the exp(-c0 M) factor, from the closed forms.
double log_failure_prefactor(ApplicationCase c, std::size_t s, std::size_t f, double delta);

/// ln C(n, k) via log-gamma.
double log_binomial(std::size_t n, std::size_t k);

struct UnionBoundSamples {
    std::uint64_t m = 0;        ///< with the exact pair count L = C(N,S)·C(N,F)
    std::uint64_t m_loose = 0;  ///< with L ≤ N^{S+F}
    double log_pairs = 0.0;     ///< ln L
    double log_pairs_loose = 0.0;
    double c0 = 0.0;
};

/// Smallest M with 2·L·(C/δ)^e·exp(-c0 M) ≤ p_target, i.e. the measurement
/// count at which a single Φ is a δ-embedding for every canonical cone pair
/// with failure probability at most p_target. Requires S·F ≤ N, p_target in
/// (0, 1].
UnionBoundSamples union_bound_samples(std::size_t n, std::size_t s, std::size_t f, double delta,
                                      double p_target, ApplicationCase c);

/// Inputs accepted by make_bound_report. `case_tag` selects the covering
/// model: the three ApplicationCase names, or "subspace" / "cone" for a
/// generic pair with ball resp. simplified cone coverings at ε = δ/d(α,β).
struct BoundInputs {
    double alpha = 1.0;
    double beta = 1.0;
    double delta = 0.5;
    std::uint64_t m = 1;
    std::size_t s = 2;
    std::size_t f = 2;
    std::size_t n = 0;  // informational
    std::string case_tag = "tensor_conv";
};

struct BoundReport {
    BoundInputs inputs;
    double d = 0.0;
    double c0 = 0.0;
    double eps = 0.0;
    double covering_x = 0.0;
    double covering_y = 0.0;
    double log_covering_x = 0.0;
    double log_covering_y = 0.0;
    double success_probability_lower = 0.0;  ///< raw, may be negative
    double success_probability_clamped = 0.0;
};

BoundReport make_bound_report(const BoundInputs& inputs);

}  // namespace bilrip
