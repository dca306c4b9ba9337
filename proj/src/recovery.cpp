#include "bilrip/recovery.hpp"

#include "bilrip/parallel.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bilrip {

std::size_t model_sparsity(const BilinearModel& model) {
    const Support& I = model.cone_x.support;
    const Support& J = model.cone_y.support;
    switch (model.map.kind()) {
        case MapKind::pointwise: return std::min(I.size(), J.size());
        case MapKind::circular_convolution: return support_sum(I, J).size();
        case MapKind::unitary_product: return model.map.ambient_dim();
    }
    return model.map.ambient_dim();
}

RecoveryProblem make_problem(const BilinearModel& model, Matrix phi, double noise_sigma,
                             std::uint64_t seed) {
    if (!(noise_sigma >= 0.0)) throw PreconditionError("make_problem: noise_sigma must be >= 0");
    if (static_cast<std::size_t>(phi.cols()) != model.map.ambient_dim())
        throw DimensionError("make_problem: Φ column count differs from N");
    GroundTruth truth;
    truth.s = sample_cone(model.cone_x, derive_seed(seed, 0)).values();
    truth.h = sample_cone(model.cone_y, derive_seed(seed, 1)).values();
    truth.z = apply(model.map, truth.s, truth.h);
    Vector y = phi * truth.z;
    if (noise_sigma > 0.0) {
        Rng rng(derive_seed(seed, 2));
        std::normal_distribution<double> gauss(0.0, noise_sigma);
        for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += gauss(rng);
    }
    return RecoveryProblem{std::move(phi), std::move(y), model, noise_sigma, std::move(truth)};
}

namespace {

void score(const RecoveryProblem& p, RecoveryResult& r) {
    r.residual = (p.phi * r.z_hat - p.y).norm();
    if (p.truth) {
        const double nz = p.truth->z.norm();
        const double err = (r.z_hat - p.truth->z).norm();
        r.relative_error = nz > 0.0 ? err / nz : err;
    }
}

Vector least_squares_on(const Matrix& phi, const Vector& y, const Support& support, bool* rank_deficient) {
    Matrix sub(phi.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t c = 0; c < support.size(); ++c)
        sub.col(static_cast<Eigen::Index>(c)) = phi.col(static_cast<Eigen::Index>(support[c]));
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(sub);
    const Vector coef = cod.solve(y);
    if (rank_deficient) *rank_deficient = cod.rank() < sub.cols();
    Vector z = Vector::Zero(phi.cols());
    for (std::size_t c = 0; c < support.size(); ++c)
        z[static_cast<Eigen::Index>(support[c])] = coef[static_cast<Eigen::Index>(c)];
    return z;
}

}  // namespace

RecoveryResult oracle_least_squares(const RecoveryProblem& p, const Support& support) {
    if (support.ambient_dim() != static_cast<std::size_t>(p.phi.cols()))
        throw DimensionError("oracle_least_squares: support dimension differs from Φ columns");
    if (support.size() > static_cast<std::size_t>(p.phi.rows()))
        throw PreconditionError("oracle_least_squares: |support| exceeds M (underdetermined)");
    RecoveryResult r{.z_hat = {}, .support_hat = support};
    r.z_hat = least_squares_on(p.phi, p.y, support, &r.rank_deficient);
    r.iterations = 1;
    r.converged = true;
    score(p, r);
    return r;
}

double spectral_norm_squared(const Matrix& phi, int iterations) {
    Vector v = Vector::Constant(phi.cols(), 1.0 / std::sqrt(static_cast<double>(phi.cols())));
    double lambda = 0.0;
    for (int it = 0; it < iterations; ++it) {
        const Vector w = phi.transpose() * (phi * v);
        lambda = w.norm();
        if (lambda == 0.0) return 0.0;
        v = w / lambda;
    }
    return lambda;
}

Vector hard_threshold(const Vector& v, std::size_t k) {
    const auto n = static_cast<std::size_t>(v.size());
    if (k >= n) return v;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          const double fa = std::abs(v[static_cast<Eigen::Index>(a)]);
                          const double fb = std::abs(v[static_cast<Eigen::Index>(b)]);
                          return fa > fb || (fa == fb && a < b);
                      });
    Vector out = Vector::Zero(v.size());
    for (std::size_t t = 0; t < k; ++t) {
        const auto i = static_cast<Eigen::Index>(order[t]);
        out[i] = v[i];
    }
    return out;
}

namespace {

std::vector<std::size_t> nonzero_indices(const Vector& v) {
    std::vector<std::size_t> idx;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (v[i] != 0.0) idx.push_back(static_cast<std::size_t>(i));
    return idx;
}

// Normalized step on support `gamma`: ‖g_Γ‖² / ‖Φ_Γ g_Γ‖².
double normalized_step(const Matrix& phi, const Vector& grad, const std::vector<std::size_t>& gamma) {
    Vector gs = Vector::Zero(grad.size());
    for (std::size_t i : gamma) gs[static_cast<Eigen::Index>(i)] = grad[static_cast<Eigen::Index>(i)];
    const double den = (phi * gs).squaredNorm();
    return den > 0.0 ? gs.squaredNorm() / den : 1.0;
}

Support significant_support(const Vector& z, std::size_t n) {
    const double cut = 1e-9 * z.cwiseAbs().maxCoeff();
    std::vector<std::size_t> idx;
    for (Eigen::Index i = 0; i < z.size(); ++i)
        if (std::abs(z[i]) > cut) idx.push_back(static_cast<std::size_t>(i));
    if (idx.empty()) return Support(n, {0});
    return Support(n, std::move(idx));
}

}  // namespace

RecoveryResult iht(const RecoveryProblem& p, const IhtOptions& opt) {
    const auto m = static_cast<std::size_t>(p.phi.rows());
    const auto n = static_cast<std::size_t>(p.phi.cols());
    if (opt.k < 1 || opt.k > m) throw PreconditionError("iht: K must lie in [1, M]");
    if (static_cast<std::size_t>(p.y.size()) != m) throw DimensionError("iht: y length differs from M");

    const bool normalized = std::holds_alternative<NormalizedStep>(opt.step);
    double mu = 0.0;
    if (const double* fixed = std::get_if<double>(&opt.step)) {
        if (!(*fixed > 0.0)) throw PreconditionError("iht: step must be positive");
        mu = *fixed;
    } else if (!normalized) {
        const double l = spectral_norm_squared(p.phi);
        mu = l > 0.0 ? 1.0 / l : 1.0;
    }

    constexpr std::size_t kDivergenceWindow = 50;
    constexpr double kShrink = 0.01;  // c in the step safeguard
    constexpr int kMaxHalvings = 60;
    Vector z = Vector::Zero(static_cast<Eigen::Index>(n));
    std::vector<std::size_t> gamma;
    if (normalized) gamma = nonzero_indices(hard_threshold(p.phi.transpose() * p.y, opt.k));
    std::vector<double> residuals{p.y.norm()};
    RecoveryResult r{.z_hat = {}, .support_hat = Support(n, {0})};
    for (std::size_t it = 1; it <= opt.max_iters; ++it) {
        const Vector grad = p.phi.transpose() * (p.y - p.phi * z);
        if (normalized) mu = normalized_step(p.phi, grad, gamma);
        Vector next = hard_threshold(z + mu * grad, opt.k);
        if (normalized) {
            for (int h = 0; h < kMaxHalvings; ++h) {
                if (nonzero_indices(next) == gamma) break;
                const Vector diff = next - z;
                const double den = (p.phi * diff).squaredNorm();
                const double omega = den > 0.0 ? (1.0 - kShrink) * diff.squaredNorm() / den : mu;
                if (mu <= omega) break;
                mu /= 2.0 * (1.0 - kShrink);
                next = hard_threshold(z + mu * grad, opt.k);
            }
            gamma = nonzero_indices(next);
        }
        const double update = (next - z).norm();
        z = std::move(next);
        r.iterations = it;
        residuals.push_back((p.phi * z - p.y).norm());
        if (it >= kDivergenceWindow) {
            const double past = residuals[it - kDivergenceWindow];
            if (residuals[it] > 10.0 * past && residuals[it] > 0.0) {
                r.diverged = true;
                break;
            }
        }
        if (update <= opt.tol * z.norm()) {
            r.converged = true;
            break;
        }
    }
    if (z.any()) r.support_hat = significant_support(z, n);
    if (opt.debias && !r.diverged && z.any()) z = least_squares_on(p.phi, p.y, Support(n, nonzero_indices(z)), nullptr);
    r.z_hat = std::move(z);
    score(p, r);
    return r;
}

std::pair<Support, Support> draw_support_pair(MapKind map, std::size_t n, std::size_t s,
                                              std::size_t f, Rng& rng) {
    Support I = Support::random(n, s, rng);
    if (map != MapKind::pointwise) return {std::move(I), Support::random(n, f, rng)};
    // Shared anchor index keeps I ∩ J nonempty.
    std::uniform_int_distribution<std::size_t> pick(0, s - 1);
    const std::size_t anchor = I[pick(rng)];
    std::vector<std::size_t> pool;
    for (std::size_t k = 0; k < n; ++k)
        if (k != anchor) pool.push_back(k);
    for (std::size_t k = 0; k + 1 < f; ++k) {
        std::uniform_int_distribution<std::size_t> d(k, pool.size() - 1);
        std::swap(pool[k], pool[d(rng)]);
    }
    pool.resize(f - 1);
    pool.push_back(anchor);
    return {std::move(I), Support::from_unsorted(n, std::move(pool))};
}

PhaseTransitionResult phase_transition(const PhaseTransitionConfig& cfg) {
    if (cfg.m_grid.empty()) throw PreconditionError("phase_transition: M grid must be nonempty");
    if (cfg.trials < 1) throw PreconditionError("phase_transition: trials must be >= 1");
    if (cfg.map == MapKind::unitary_product)
        throw PreconditionError("phase_transition: supports pointwise and circular_convolution maps");
    if (cfg.s < 1 || cfg.f < 1 || cfg.s > cfg.n || cfg.f > cfg.n)
        throw PreconditionError("phase_transition: S and F must lie in [1, N]");
    for (std::size_t m : cfg.m_grid)
        if (m < 1 || m > cfg.n) throw PreconditionError("phase_transition: every M must lie in [1, N]");

    const BilinearMapSpec map = cfg.map == MapKind::pointwise ? BilinearMapSpec::pointwise(cfg.n)
                                                               : BilinearMapSpec::circular_convolution(cfg.n);
    const std::size_t n_m = cfg.m_grid.size();
    std::vector<unsigned char> success(n_m * cfg.trials, 0);
    parallel_for(cfg.exec, success.size(), [&](std::size_t idx) {
        const std::size_t mi = idx / cfg.trials;
        const std::size_t t = idx % cfg.trials;
        const std::uint64_t trial_seed = derive_seed(cfg.seed, mi, t);
        Rng rng(trial_seed);
        auto [I, J] = draw_support_pair(cfg.map, cfg.n, cfg.s, cfg.f, rng);
        BilinearModel model{map, ConeSpec{std::move(I), cfg.cone_kind}, ConeSpec{std::move(J), cfg.cone_kind}};
        const std::size_t k = model_sparsity(model);
        const std::size_t m = cfg.m_grid[mi];
        if (k > m) return;  // cannot even hold the budget: counted as failure
        Matrix phi = generate(MeasurementEnsemble{cfg.ensemble, m, cfg.n, derive_seed(trial_seed, 1)}, Exec::serial);
        const RecoveryProblem problem = make_problem(model, std::move(phi), 0.0, derive_seed(trial_seed, 2));
        IhtOptions opt = cfg.iht;
        opt.k = k;
        const RecoveryResult res = iht(problem, opt);
        success[idx] = res.relative_error && *res.relative_error <= cfg.delta_success;
    });

    PhaseTransitionResult out;
    out.config = cfg;
    const double log_n = std::log(static_cast<double>(cfg.n));
    out.additive_reference = static_cast<double>(cfg.s + cfg.f) * log_n;
    out.multiplicative_reference = static_cast<double>(cfg.s * cfg.f) * log_n;
    for (std::size_t mi = 0; mi < n_m; ++mi) {
        PhasePoint pt;
        pt.m = cfg.m_grid[mi];
        pt.trials = cfg.trials;
        for (std::size_t t = 0; t < cfg.trials; ++t) pt.successes += success[mi * cfg.trials + t];
        pt.rate = static_cast<double>(pt.successes) / static_cast<double>(pt.trials);
        out.points.push_back(pt);
    }
    for (const PhasePoint& pt : out.points) {
        if (pt.rate >= 0.5 && (!out.m50 || pt.m < *out.m50)) out.m50 = pt.m;
    }
    return out;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty()) throw PreconditionError("spearman: series must match and be nonempty");
    const std::vector<double> ra = average_ranks(a);
    const std::vector<double> rb = average_ranks(b);
    const auto n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 1.0;
    return sab / std::sqrt(saa * sbb);
}

}  // namespace bilrip
