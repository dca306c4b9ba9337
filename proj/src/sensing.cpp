#include "bilrip/sensing.hpp"

#include "bilrip/bounds.hpp"
#include "bilrip/parallel.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>

namespace bilrip {

std::string_view to_string(EnsembleKind kind) {
    return kind == EnsembleKind::gaussian ? "gaussian" : "rademacher";
}

EnsembleKind ensemble_kind_from_string(std::string_view name) {
    if (name == "gaussian") return EnsembleKind::gaussian;
    if (name == "rademacher") return EnsembleKind::rademacher;
    throw PreconditionError("unknown ensemble kind '" + std::string(name) + "'");
}

void validate(const MeasurementEnsemble& e) {
    if (e.rows == 0 || e.cols == 0) throw PreconditionError("ensemble: M and N must be positive");
    if (e.rows > e.cols) throw PreconditionError("ensemble: M must not exceed N");
    if (static_cast<double>(e.rows) * static_cast<double>(e.cols) > kMaxDenseEntries)
        throw PreconditionError("ensemble: M*N exceeds the 1e7 dense-matrix guard");
}

void generate_column(const MeasurementEnsemble& e, std::size_t j, Vector& out) {
    const auto m = static_cast<Eigen::Index>(e.rows);
    out.resize(m);
    const double scale = 1.0 / std::sqrt(static_cast<double>(e.rows));
    Rng rng(derive_seed(e.seed, j));
    if (e.kind == EnsembleKind::gaussian) {
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (Eigen::Index i = 0; i < m; ++i) out[i] = scale * gauss(rng);
    } else {
        // 64 signs per draw.
        std::uint64_t bits = 0;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (i % 64 == 0) bits = rng();
            out[i] = (bits & 1U) ? scale : -scale;
            bits >>= 1U;
        }
    }
}

Matrix generate(const MeasurementEnsemble& e, Exec exec) {
    validate(e);
    Matrix phi(static_cast<Eigen::Index>(e.rows), static_cast<Eigen::Index>(e.cols));
    parallel_for(exec, e.cols, [&](std::size_t j) {
        Vector col;
        generate_column(e, j, col);
        phi.col(static_cast<Eigen::Index>(j)) = col;
    });
    return phi;
}

Vector measure(const MeasurementEnsemble& e, const Vector& r) {
    if (static_cast<std::size_t>(r.size()) != e.cols)
        throw DimensionError("measure: vector length differs from ensemble column count");
    if (e.rows == 0 || e.rows > e.cols) throw PreconditionError("measure: invalid ensemble shape");
    Vector y = Vector::Zero(static_cast<Eigen::Index>(e.rows));
    Vector col;
    for (Eigen::Index j = 0; j < r.size(); ++j) {
        if (r[j] == 0.0) continue;
        generate_column(e, static_cast<std::size_t>(j), col);
        y.noalias() += r[j] * col;
    }
    return y;
}

Matrix orthonormal_rows(const MeasurementEnsemble& e) {
    const Matrix g = generate(MeasurementEnsemble{EnsembleKind::gaussian, e.rows, e.cols, e.seed});
    // Thin Q of gᵀ (N x M) has orthonormal columns.
    Eigen::HouseholderQR<Matrix> qr(g.transpose());
    const Matrix q = qr.householderQ() * Matrix::Identity(g.cols(), g.rows());
    return q.transpose();
}

double distortion(const Matrix& phi, const Vector& z) {
    if (z.size() != phi.cols()) throw DimensionError("distortion: vector length differs from Φ columns");
    const double nz = z.norm();
    if (nz == 0.0) throw PreconditionError("distortion: z must be nonzero");
    return (phi * z).norm() / nz - 1.0;
}

double sorted_quantile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw PreconditionError("quantile: empty sample");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

DistortionReport rip_monte_carlo(const BilinearMapSpec& map, const ConeSpec& cone_x,
                                 const ConeSpec& cone_y, const Matrix& phi,
                                 const RipMonteCarloOptions& opt) {
    const std::size_t n = map.ambient_dim();
    if (cone_x.ambient_dim() != n || cone_y.ambient_dim() != n || static_cast<std::size_t>(phi.cols()) != n)
        throw DimensionError("rip_monte_carlo: dimensions of map, cones and Φ differ");
    if (opt.n_samples < 1) throw PreconditionError("rip_monte_carlo: n_samples must be >= 1");

    const std::size_t total = opt.n_samples + opt.extra_pairs.size();
    constexpr double kSkip = 1e-12;
    constexpr double kSkipped = -1.0;
    std::vector<double> dist(total, kSkipped);
    parallel_for(opt.exec, total, [&](std::size_t t) {
        Vector z;
        if (t < opt.n_samples) {
            Rng rng(derive_seed(opt.seed, t));
            Vector x, y;
            sample_cone_into(cone_x, rng, 1.0, x);
            sample_cone_into(cone_y, rng, 1.0, y);
            z = apply(map, x, y);
        } else {
            const auto& [x, y] = opt.extra_pairs[t - opt.n_samples];
            z = apply(map, Vector(x / x.norm()), Vector(y / y.norm()));
        }
        if (z.norm() >= kSkip) dist[t] = std::abs(distortion(phi, z));
    });

    DistortionReport rep;
    rep.n_samples = total;
    rep.n_extra = opt.extra_pairs.size();
    rep.delta = opt.delta;
    rep.seed = opt.seed;
    rep.abs_distortions.reserve(total);
    for (double d : dist) {
        if (d == kSkipped) {
            ++rep.n_skipped;
            continue;
        }
        rep.abs_distortions.push_back(d);
        if (d > opt.delta) ++rep.exceed_count;
    }
    if (rep.abs_distortions.empty())
        throw NumericalError("rip_monte_carlo: every sampled pair mapped to (numerically) zero");
    std::vector<double> sorted = rep.abs_distortions;
    std::sort(sorted.begin(), sorted.end());
    rep.max_abs_distortion = sorted.back();
    for (double q : {0.5, 0.9, 0.99}) rep.quantiles.emplace_back(q, sorted_quantile(sorted, q));
    return rep;
}

DistortionReport rip_monte_carlo(const BilinearMapSpec& map, const ConeSpec& cone_x,
                                 const ConeSpec& cone_y, const MeasurementEnsemble& ensemble,
                                 const RipMonteCarloOptions& options) {
    return rip_monte_carlo(map, cone_x, cone_y, generate(ensemble, options.exec), options);
}

ConcentrationResult concentration_test(const Vector& r, const MeasurementEnsemble& tmpl,
                                       std::size_t trials, double delta, Exec exec) {
    if (trials < 100) throw PreconditionError("concentration_test: trials must be >= 100");
    const double nr = r.norm();
    if (nr == 0.0) throw PreconditionError("concentration_test: r must be nonzero");
    if (static_cast<std::size_t>(r.size()) != tmpl.cols)
        throw DimensionError("concentration_test: r length differs from ensemble column count");
    if (tmpl.rows == 0 || tmpl.rows > tmpl.cols)
        throw PreconditionError("concentration_test: ensemble requires 0 < M <= N");
    const double c = c0(delta);

    // 0: held, 1: violated, 2: held but squared form failed.
    std::vector<unsigned char> outcome(trials, 0);
    const double sq_bound = 0.5 * delta * (2.0 + 0.5 * delta);
    parallel_for(exec, trials, [&](std::size_t t) {
        MeasurementEnsemble e = tmpl;
        e.seed = derive_seed(tmpl.seed, t);
        const double ratio = measure(e, r).norm() / nr;
        if (std::abs(ratio - 1.0) > 0.5 * delta) {
            outcome[t] = 1;
        } else if (std::abs(ratio * ratio - 1.0) > sq_bound * (1.0 + 1e-12)) {
            outcome[t] = 2;
        }
    });

    ConcentrationResult res;
    res.trials = trials;
    for (unsigned char o : outcome) {
        if (o == 1) ++res.violations;
        if (o == 2) ++res.squared_form_failures;
    }
    res.empirical_rate = static_cast<double>(res.violations) / static_cast<double>(trials);
    res.theory_rate = 2.0 * std::exp(-c * static_cast<double>(tmpl.rows));
    const double p = std::min(res.theory_rate, 1.0);
    res.standard_error = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
    return res;
}

}  // namespace bilrip
