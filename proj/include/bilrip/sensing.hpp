#pragma once

#include "bilrip/bilinear_ops.hpp"
#include "bilrip/common.hpp"
#include "bilrip/sparse_model.hpp"

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace bilrip {

enum class EnsembleKind { gaussian, rademacher };

std::string_view to_string(EnsembleKind kind);
EnsembleKind ensemble_kind_from_string(std::string_view name);

/// Random M x N measurement matrix description. Entries are i.i.d.
/// N(0, 1/M) (gaussian) or ±1/√M (rademacher). Column j is drawn from its own
/// stream derive_seed(seed, j), so products with sparse vectors only need the
/// columns on the support.
struct MeasurementEnsemble {
    EnsembleKind kind = EnsembleKind::gaussian;
    std::size_t rows = 1;
    std::size_t cols = 1;
    std::uint64_t seed = 0;
};

inline constexpr double kMaxDenseEntries = 1e7;

/// Throws PreconditionError for M = 0, M > N or M·N > 1e7.
void validate(const MeasurementEnsemble& ensemble);

/// Materializes Φ. Deterministic in the ensemble; serial and parallel fill
/// the same columns from the same streams.
Matrix generate(const MeasurementEnsemble& ensemble, Exec exec = Exec::parallel);

/// Writes column j of Φ into `out` (length M).
void generate_column(const MeasurementEnsemble& ensemble, std::size_t j, Vector& out);

/// Φr without materializing Φ: only the columns where r is nonzero are drawn.
Vector measure(const MeasurementEnsemble& ensemble, const Vector& r);

/// Φ with orthonormal rows (M ≤ N), from a Householder QR of a Gaussian draw.
Matrix orthonormal_rows(const MeasurementEnsemble& ensemble);

/// ‖Φz‖/‖z‖ - 1. z must be nonzero.
double distortion(const Matrix& phi, const Vector& z);

struct DistortionReport {
    std::size_t n_samples = 0;   ///< pairs drawn, including extra pairs
    std::size_t n_skipped = 0;   ///< pairs with ‖T(x,y)‖ < 1e-12
    std::size_t n_extra = 0;     ///< caller-supplied stress pairs
    double max_abs_distortion = 0.0;
    std::vector<std::pair<double, double>> quantiles;  ///< (q, value) of |distortion|
    double delta = 0.0;
    std::size_t exceed_count = 0;  ///< samples with |distortion| > delta
    std::uint64_t seed = 0;
    std::vector<double> abs_distortions;  ///< per evaluated sample, in sample order
};

struct RipMonteCarloOptions {
    std::size_t n_samples = 1000;
    double delta = 0.5;
    std::uint64_t seed = 0;
    /// Pairs appended after the random draws; typically the alpha witness
    /// from an RNMP estimate, since near-null directions stress the lower
    /// RIP inequality.
    std::vector<std::pair<Vector, Vector>> extra_pairs;
    Exec exec = Exec::parallel;
};

/// Samples unit pairs from the cones, forms z = T(x, y) and records
/// |‖Φz‖/‖z‖ - 1| for one fixed Φ. Throws NumericalError if every sample is
/// degenerate.
DistortionReport rip_monte_carlo(const BilinearMapSpec& map, const ConeSpec& cone_x,
                                 const ConeSpec& cone_y, const Matrix& phi,
                                 const RipMonteCarloOptions& options);

DistortionReport rip_monte_carlo(const BilinearMapSpec& map, const ConeSpec& cone_x,
                                 const ConeSpec& cone_y, const MeasurementEnsemble& ensemble,
                                 const RipMonteCarloOptions& options);

/// Linear-interpolated quantile of an ascending-sorted sample.
double sorted_quantile(const std::vector<double>& sorted, double q);

struct ConcentrationResult {
    std::size_t trials = 0;
    std::size_t violations = 0;      ///< trials with |‖Φr‖ - ‖r‖| > (δ/2)‖r‖
    double empirical_rate = 0.0;
    double theory_rate = 0.0;        ///< 2 exp(-c0(δ) M)
    double standard_error = 0.0;     ///< sqrt(theory_rate (1 - theory_rate) / trials)
    /// Trials where the linear-form event held but the squared form
    /// |(‖Φr‖/‖r‖)² - 1| ≤ (δ/2)(2 + δ/2) did not; always 0 unless the
    /// arithmetic is broken.
    std::size_t squared_form_failures = 0;
};

/// Draws `trials` independent Φ from the template (trial t uses seed
/// derive_seed(template.seed, t)) and measures how often the single vector r
/// violates the δ/2 concentration event.
ConcentrationResult concentration_test(const Vector& r, const MeasurementEnsemble& ensemble_template,
                                       std::size_t trials, double delta,
                                       Exec exec = Exec::parallel);

}  // namespace bilrip
