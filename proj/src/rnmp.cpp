#include "bilrip/rnmp.hpp"

#include "bilrip/parallel.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

namespace bilrip {

namespace {

void require_compatible(const BilinearMapSpec& map, const ConeSpec& cx, const ConeSpec& cy) {
    if (cx.ambient_dim() != map.ambient_dim() || cy.ambient_dim() != map.ambient_dim())
        throw DimensionError("rnmp: cone dimension differs from map dimension");
}

std::vector<std::string> range_warnings(const ConeSpec& cx, const ConeSpec& cy) {
    std::vector<std::string> w;
    if (below_theorem_range(cx.support) || below_theorem_range(cy.support))
        w.emplace_back("cone dimension below 2: outside the sparsity range of the embedding theorem");
    return w;
}

/// Ratio evaluation specialized per map kind, reusing a scratch buffer.
class RatioKernel {
public:
    RatioKernel(const BilinearMapSpec& map, const ConeSpec& cx, const ConeSpec& cy)
        : map_(map), I_(cx.support), J_(cy.support) {}

    double operator()(const Vector& x, const Vector& y, Vector& scratch) const {
        const double denom = x.norm() * y.norm();
        double num = 0.0;
        switch (map_.kind()) {
            case MapKind::circular_convolution:
                convolve_supported(x, I_, y, J_, scratch);
                num = scratch.norm();
                break;
            case MapKind::pointwise:
                num = x.cwiseProduct(y).norm();
                break;
            case MapKind::unitary_product:
                num = unitary_product_complex(*map_.unitary(), x, y).norm();
                break;
        }
        return num / denom;
    }

private:
    const BilinearMapSpec& map_;
    const Support& I_;
    const Support& J_;
};

/// Extreme right singular direction of `a` (coefficients over its columns).
/// Ties go to the lowest singular index; the sign maximizes nonnegative mass.
/// Orthant cones clamp negatives and renormalize; nullopt if nothing is left.
std::optional<Vector> extreme_direction(const Matrix& a, bool smallest, ConeKind kind) {
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
    const Vector& sv = svd.singularValues();
    const Eigen::Index d = a.cols();
    // Columns of V past sv.size() span the kernel when rows < cols.
    auto sigma = [&](Eigen::Index k) { return k < sv.size() ? sv[k] : 0.0; };
    Eigen::Index pick = 0;
    if (smallest) {
        double lo = std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k < d; ++k) lo = std::min(lo, sigma(k));
        const double tie = 1e-12 * std::max(1.0, sigma(0));
        for (Eigen::Index k = 0; k < d; ++k)
            if (sigma(k) - lo <= tie) {
                pick = k;
                break;
            }
    }
    Vector v = svd.matrixV().col(pick);
    const double pos = v.cwiseMax(0.0).sum();
    const double neg = (-v).cwiseMax(0.0).sum();
    if (neg > pos) v = -v;
    if (kind == ConeKind::positive_orthant) {
        v = v.cwiseMax(0.0);
        const double nv = v.norm();
        if (nv == 0.0) return std::nullopt;
        v /= nv;
    }
    return v;
}

Vector embed(const Vector& coeffs, const Support& support) {
    Vector out = Vector::Zero(static_cast<Eigen::Index>(support.ambient_dim()));
    for (std::size_t k = 0; k < support.size(); ++k)
        out[static_cast<Eigen::Index>(support[k])] = coeffs[static_cast<Eigen::Index>(k)];
    return out;
}

DirectionPair make_witness(const RatioKernel& kernel, Vector x, Vector y) {
    x /= x.norm();
    y /= y.norm();
    Vector scratch;
    const double r = kernel(x, y, scratch);
    return DirectionPair{std::move(x), std::move(y), r};
}

struct AlternatingRun {
    DirectionPair best;
    bool found = false;
    bool converged = false;
    std::size_t evaluations = 0;
};

/// One restart of the alternating search for either the infimum (minimize)
/// or the supremum.
AlternatingRun alternate(const BilinearMapSpec& map, const ConeSpec& cx, const ConeSpec& cy,
                         const RatioKernel& kernel, const AlternatingOptions& opt, Rng& rng,
                         bool minimize) {
    constexpr int kMaxRedraws = 16;
    auto better = [minimize](double cand, double cur) {
        return minimize ? cand <= cur : cand >= cur;
    };
    AlternatingRun run;
    Vector scratch;
    for (int draw = 0; draw < kMaxRedraws; ++draw) {
        Vector x;
        sample_cone_into(cx, rng, 1.0, x);
        Vector y;
        double cur = minimize ? std::numeric_limits<double>::infinity() : -1.0;
        bool converged = false;
        for (std::size_t it = 0; it < opt.max_iters; ++it) {
            const double before = cur;
            auto ydir = extreme_direction(matricize(map, cy.support, x), minimize, cy.kind);
            if (!ydir) break;
            Vector ycand = embed(*ydir, cy.support);
            const double r1 = kernel(x, ycand, scratch);
            ++run.evaluations;
            if (y.size() == 0 || better(r1, cur)) {
                y = std::move(ycand);
                cur = r1;
            }
            if (auto xdir = extreme_direction(matricize_left(map, cx.support, y), minimize, cx.kind)) {
                Vector xcand = embed(*xdir, cx.support);
                const double r2 = kernel(xcand, y, scratch);
                ++run.evaluations;
                if (better(r2, cur)) {
                    x = std::move(xcand);
                    cur = r2;
                }
            }
            const double gain = minimize ? before - cur : cur - before;
            if (it > 0 && gain < opt.tol) {
                converged = true;
                break;
            }
        }
        // The clamp wiped out the very first direction: draw a new start.
        if (y.size() == 0) continue;
        run.found = true;
        run.converged = converged;
        run.best = DirectionPair{std::move(x), std::move(y), cur};
        break;
    }
    return run;
}

}  // namespace

std::string_view to_string(RnmpMethod method) {
    switch (method) {
        case RnmpMethod::brute: return "brute";
        case RnmpMethod::alternating: return "alternating";
        case RnmpMethod::exhaustive: return "exhaustive";
    }
    return "unknown";
}

double rnmp_ratio(const BilinearMapSpec& map, const Vector& x, const Vector& y) {
    const std::size_t n = map.ambient_dim();
    if (static_cast<std::size_t>(x.size()) != n || static_cast<std::size_t>(y.size()) != n)
        throw DimensionError("rnmp_ratio: operand dimension differs from map dimension");
    const double denom = x.norm() * y.norm();
    if (denom == 0.0) throw PreconditionError("rnmp_ratio: operands must be nonzero");
    if (map.kind() == MapKind::unitary_product)
        return unitary_product_complex(*map.unitary(), x, y).norm() / denom;
    return apply(map, x, y).norm() / denom;
}

Matrix matricize(const BilinearMapSpec& map, const Support& J, const Vector& x) {
    const auto n = static_cast<Eigen::Index>(map.ambient_dim());
    if (x.size() != n || J.ambient_dim() != map.ambient_dim())
        throw DimensionError("matricize: dimension differs from map dimension");
    Matrix a = Matrix::Zero(n, static_cast<Eigen::Index>(J.size()));
    for (std::size_t c = 0; c < J.size(); ++c) {
        const auto col = static_cast<Eigen::Index>(c);
        const auto j = static_cast<Eigen::Index>(J[c]);
        switch (map.kind()) {
            case MapKind::circular_convolution:
                // x ⊛ e_j is x cyclically shifted by j.
                for (Eigen::Index r = 0; r < n; ++r) a(r, col) = x[(r - j + n) % n];
                break;
            case MapKind::pointwise:
                a(j, col) = x[j];
                break;
            case MapKind::unitary_product: {
                Vector e = Vector::Zero(n);
                e[j] = 1.0;
                a.col(col) = apply(map, x, e);
                break;
            }
        }
    }
    return a;
}

Matrix matricize_left(const BilinearMapSpec& map, const Support& I, const Vector& y) {
    const auto n = static_cast<Eigen::Index>(map.ambient_dim());
    if (y.size() != n || I.ambient_dim() != map.ambient_dim())
        throw DimensionError("matricize: dimension differs from map dimension");
    Matrix b = Matrix::Zero(n, static_cast<Eigen::Index>(I.size()));
    for (std::size_t c = 0; c < I.size(); ++c) {
        const auto col = static_cast<Eigen::Index>(c);
        const auto i = static_cast<Eigen::Index>(I[c]);
        switch (map.kind()) {
            case MapKind::circular_convolution:
                for (Eigen::Index r = 0; r < n; ++r) b(r, col) = y[(r - i + n) % n];
                break;
            case MapKind::pointwise:
                b(i, col) = y[i];
                break;
            case MapKind::unitary_product: {
                Vector e = Vector::Zero(n);
                e[i] = 1.0;
                b.col(col) = apply(map, e, y);
                break;
            }
        }
    }
    return b;
}

RnmpEstimate estimate_brute(const BilinearMapSpec& map, const ConeSpec& cone_x,
                            const ConeSpec& cone_y, std::size_t samples, std::uint64_t seed,
                            Exec exec, double sample_norm) {
    require_compatible(map, cone_x, cone_y);
    if (samples < 1) throw PreconditionError("estimate_brute: samples must be >= 1");
    if (!(sample_norm > 0.0)) throw PreconditionError("estimate_brute: sample_norm must be positive");
    const RatioKernel kernel(map, cone_x, cone_y);

    // Samples come in fixed blocks, each with its own stream: seeding a
    // Mersenne twister per sample would cost more than the ratio itself.
    constexpr std::size_t kBlock = 1024;
    const std::size_t blocks = (samples + kBlock - 1) / kBlock;
    auto draw = [&](Rng& rng, Vector& x, Vector& y) {
        sample_cone_into(cone_x, rng, sample_norm, x);
        sample_cone_into(cone_y, rng, sample_norm, y);
    };

    std::vector<double> ratios(samples);
    parallel_for(exec, blocks, [&](std::size_t b) {
        thread_local Vector x, y, scratch;
        Rng rng(derive_seed(seed, b));
        const std::size_t end = std::min(samples, (b + 1) * kBlock);
        for (std::size_t t = b * kBlock; t < end; ++t) {
            draw(rng, x, y);
            ratios[t] = kernel(x, y, scratch);
        }
    });
    auto redraw = [&](std::size_t t, Vector& x, Vector& y) {
        Rng rng(derive_seed(seed, t / kBlock));
        for (std::size_t k = 0; k <= t % kBlock; ++k) draw(rng, x, y);
    };

    // First occurrence wins, so the witnesses do not depend on thread count.
    const auto lo = std::min_element(ratios.begin(), ratios.end());
    const auto hi = std::max_element(ratios.begin(), ratios.end());

    RnmpEstimate est{cone_x, cone_y};
    est.method = RnmpMethod::brute;
    est.evaluations = samples;
    est.warnings = range_warnings(cone_x, cone_y);
    Vector x, y;
    redraw(static_cast<std::size_t>(lo - ratios.begin()), x, y);
    est.alpha_witness = make_witness(kernel, x, y);
    redraw(static_cast<std::size_t>(hi - ratios.begin()), x, y);
    est.beta_witness = make_witness(kernel, x, y);
    est.alpha_est = est.alpha_witness.ratio;
    est.beta_est = est.beta_witness.ratio;
    est.tol = kExactTol;
    return est;
}

RnmpEstimate estimate_alternating(const BilinearMapSpec& map, const ConeSpec& cone_x,
                                  const ConeSpec& cone_y, const AlternatingOptions& options) {
    require_compatible(map, cone_x, cone_y);
    if (options.restarts < 1) throw PreconditionError("estimate_alternating: restarts must be >= 1");
    if (!(options.tol > 0.0)) throw PreconditionError("estimate_alternating: tol must be positive");
    if (options.max_iters < 1) throw PreconditionError("estimate_alternating: max_iters must be >= 1");
    const RatioKernel kernel(map, cone_x, cone_y);

    std::vector<AlternatingRun> lows(options.restarts), highs(options.restarts);
    parallel_for(options.exec, options.restarts, [&](std::size_t r) {
        Rng rng_lo(derive_seed(options.seed, r, 0));
        lows[r] = alternate(map, cone_x, cone_y, kernel, options, rng_lo, true);
        Rng rng_hi(derive_seed(options.seed, r, 1));
        highs[r] = alternate(map, cone_x, cone_y, kernel, options, rng_hi, false);
    });

    const AlternatingRun* best_lo = nullptr;
    const AlternatingRun* best_hi = nullptr;
    for (std::size_t r = 0; r < options.restarts; ++r) {
        if (lows[r].found && (!best_lo || lows[r].best.ratio < best_lo->best.ratio)) best_lo = &lows[r];
        if (highs[r].found && (!best_hi || highs[r].best.ratio > best_hi->best.ratio)) best_hi = &highs[r];
    }
    if (!best_lo || !best_hi)
        throw NumericalError("estimate_alternating: every restart collapsed to the zero vector");

    RnmpEstimate est{cone_x, cone_y};
    est.method = RnmpMethod::alternating;
    est.restarts = options.restarts;
    est.tol = options.tol;
    est.warnings = range_warnings(cone_x, cone_y);
    est.alpha_witness = make_witness(kernel, best_lo->best.x, best_lo->best.y);
    est.beta_witness = make_witness(kernel, best_hi->best.x, best_hi->best.y);
    est.alpha_est = est.alpha_witness.ratio;
    est.beta_est = est.beta_witness.ratio;
    est.converged = best_lo->converged && best_hi->converged;
    for (std::size_t r = 0; r < options.restarts; ++r) est.evaluations += lows[r].evaluations + highs[r].evaluations;
    if (!est.converged) est.warnings.emplace_back("alternating search hit max_iters before converging");
    return est;
}

std::size_t sphere_grid_count(const ConeSpec& cone, std::size_t grid_per_dim) {
    std::size_t count = 1;
    for (std::size_t a = 1; a < cone.dim(); ++a) count *= grid_per_dim;
    return count;
}

void sphere_grid_point(const ConeSpec& cone, std::size_t grid_per_dim, std::size_t index,
                       Vector& out) {
    const std::size_t d = cone.dim();
    out.setZero(static_cast<Eigen::Index>(cone.ambient_dim()));
    if (d == 1) {
        out[static_cast<Eigen::Index>(cone.support[0])] = 1.0;
        return;
    }
    const auto g = static_cast<double>(grid_per_dim);
    double sin_prod = 1.0;
    for (std::size_t a = 0; a + 1 < d; ++a) {
        const auto digit = static_cast<double>(index % grid_per_dim);
        index /= grid_per_dim;
        double phi = 0.0;
        if (cone.kind == ConeKind::positive_orthant)
            phi = 0.5 * std::numbers::pi * digit / (g - 1.0);
        else if (a + 2 < d)
            phi = std::numbers::pi * digit / (g - 1.0);
        else
            phi = std::numbers::pi * digit / g;  // last angle: half turn, ±x identified
        out[static_cast<Eigen::Index>(cone.support[a])] = sin_prod * std::cos(phi);
        sin_prod *= std::sin(phi);
    }
    out[static_cast<Eigen::Index>(cone.support[d - 1])] = sin_prod;
    if (cone.kind == ConeKind::positive_orthant) out = out.cwiseMax(0.0);
}

namespace {

enum class GridPlan { outer_x_exact_y, outer_y_exact_x, grid_both };

GridPlan plan_grid(const ConeSpec& cx, const ConeSpec& cy, InnerSolve inner) {
    if (inner == InnerSolve::grid) return GridPlan::grid_both;
    const bool xs = cx.kind == ConeKind::subspace;
    const bool ys = cy.kind == ConeKind::subspace;
    if (ys && (!xs || cx.dim() <= cy.dim())) return GridPlan::outer_x_exact_y;
    if (xs) return GridPlan::outer_y_exact_x;
    return GridPlan::grid_both;
}

double pow_count(std::size_t g, std::size_t d) {
    return d <= 1 ? 1.0 : std::pow(static_cast<double>(g), static_cast<double>(d - 1));
}

}  // namespace

double exhaustive_grid_size(const ConeSpec& cone_x, const ConeSpec& cone_y,
                            const ExhaustiveOptions& options) {
    const std::size_t g = options.grid_per_dim;
    switch (plan_grid(cone_x, cone_y, options.inner)) {
        case GridPlan::outer_x_exact_y: return pow_count(g, cone_x.dim());
        case GridPlan::outer_y_exact_x: return pow_count(g, cone_y.dim());
        case GridPlan::grid_both: return pow_count(g, cone_x.dim()) * pow_count(g, cone_y.dim());
    }
    return 0.0;
}

RnmpEstimate certify_exhaustive(const BilinearMapSpec& map, const ConeSpec& cone_x,
                                const ConeSpec& cone_y, const ExhaustiveOptions& options) {
    require_compatible(map, cone_x, cone_y);
    const std::size_t g = options.grid_per_dim;
    if (g < 3) throw PreconditionError("certify_exhaustive: grid_per_dim must be >= 3");
    const double total = exhaustive_grid_size(cone_x, cone_y, options);
    if (total > kMaxExhaustiveGrid)
        throw PreconditionError("certify_exhaustive: grid of " + std::to_string(total) +
                                " points exceeds the 1e8 guard");

    const GridPlan plan = plan_grid(cone_x, cone_y, options.inner);
    const bool outer_is_x = plan != GridPlan::outer_y_exact_x;
    const ConeSpec& outer = outer_is_x ? cone_x : cone_y;
    const ConeSpec& inner = outer_is_x ? cone_y : cone_x;
    const std::size_t n_outer = sphere_grid_count(outer, g);
    const std::size_t n_inner = sphere_grid_count(inner, g);
    const RatioKernel kernel(map, cone_x, cone_y);

    struct Extremes {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -1.0;
        std::size_t lo_inner = 0;
        std::size_t hi_inner = 0;
    };
    std::vector<Extremes> per_outer(n_outer);

    auto matricized = [&](const Vector& p) {
        return outer_is_x ? matricize(map, cone_y.support, p) : matricize_left(map, cone_x.support, p);
    };

    parallel_for(options.exec, n_outer, [&](std::size_t o) {
        thread_local Vector p, q, scratch;
        sphere_grid_point(outer, g, o, p);
        Extremes e;
        if (plan == GridPlan::grid_both) {
            for (std::size_t i = 0; i < n_inner; ++i) {
                sphere_grid_point(inner, g, i, q);
                const double r = kernel(p, q, scratch);
                if (r < e.lo) { e.lo = r; e.lo_inner = i; }
                if (r > e.hi) { e.hi = r; e.hi_inner = i; }
            }
        } else {
            const Matrix a = matricized(p);
            Eigen::JacobiSVD<Matrix> svd(a);
            const Vector& sv = svd.singularValues();
            e.hi = sv[0];
            e.lo = a.rows() < a.cols() ? 0.0 : sv[sv.size() - 1];
        }
        per_outer[o] = e;
    });

    std::size_t o_lo = 0, o_hi = 0;
    for (std::size_t o = 1; o < n_outer; ++o) {
        if (per_outer[o].lo < per_outer[o_lo].lo) o_lo = o;
        if (per_outer[o].hi > per_outer[o_hi].hi) o_hi = o;
    }

    auto witness = [&](std::size_t o, std::size_t i, bool smallest) {
        Vector p, q;
        sphere_grid_point(outer, g, o, p);
        if (plan == GridPlan::grid_both) {
            sphere_grid_point(inner, g, i, q);
        } else {
            auto dir = extreme_direction(matricized(p), smallest, ConeKind::subspace);
            q = embed(*dir, inner.support);
        }
        return outer_is_x ? make_witness(kernel, p, q) : make_witness(kernel, q, p);
    };

    RnmpEstimate est{cone_x, cone_y};
    est.method = RnmpMethod::exhaustive;
    est.evaluations = static_cast<std::size_t>(total);
    est.tol = kExactTol;
    est.warnings = range_warnings(cone_x, cone_y);
    est.alpha_witness = witness(o_lo, per_outer[o_lo].lo_inner, true);
    est.beta_witness = witness(o_hi, per_outer[o_hi].hi_inner, false);
    est.alpha_est = est.alpha_witness.ratio;
    est.beta_est = est.beta_witness.ratio;
    return est;
}

}  // namespace bilrip
