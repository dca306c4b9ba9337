#include "bilrip/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bilrip {

namespace {

void require_delta(double delta, const char* where) {
    if (!(delta > 0.0 && delta < 1.0))
        throw PreconditionError(std::string(where) + ": delta must lie in (0, 1)");
}

void require_application(std::size_t s, std::size_t f, double delta, const char* where) {
    if (s < 2 || f < 2) throw PreconditionError(std::string(where) + ": requires S, F >= 2");
    require_delta(delta, where);
}

// Base constant C and exponent e of the per-pair prefactor 2·(C/δ)^e.
struct Prefactor {
    double base;
    double exponent;
};

Prefactor prefactor(ApplicationCase c, std::size_t s, std::size_t f) {
    const auto m = static_cast<double>(std::min(s, f));
    switch (c) {
        case ApplicationCase::pointwise: return {12.0, m};
        case ApplicationCase::positive_cone_conv:
            return {378.0 * std::sqrt(m), static_cast<double>(s + f)};
        case ApplicationCase::tensor_conv: return {36.0, static_cast<double>(s + f)};
    }
    throw PreconditionError("unknown application case");
}

}  // namespace

double d_constant(double alpha, double beta) {
    if (!(alpha > 0.0)) throw PreconditionError("d_constant: alpha must be positive");
    if (!(beta >= alpha)) throw PreconditionError("d_constant: beta must be >= alpha");
    if (alpha == beta) return 12.0;
    return 7.0 * (beta / alpha) * (2.0 + std::sqrt(alpha));
}

double c0(double delta) {
    require_delta(delta, "c0");
    return (3.0 * delta * delta - delta * delta * delta) / 48.0;
}

std::string_view to_string(CoveringKind kind) {
    switch (kind) {
        case CoveringKind::ball: return "ball";
        case CoveringKind::positive_cone_rogers: return "positive_cone_rogers";
        case CoveringKind::positive_cone_simplified: return "positive_cone_simplified";
    }
    return "unknown";
}

CoveringKind covering_kind_from_string(std::string_view name) {
    if (name == "ball") return CoveringKind::ball;
    if (name == "positive_cone_rogers") return CoveringKind::positive_cone_rogers;
    if (name == "positive_cone_simplified") return CoveringKind::positive_cone_simplified;
    throw PreconditionError("unknown covering kind '" + std::string(name) + "'");
}

double log_covering_bound(CoveringKind kind, std::size_t dim, double eps) {
    if (!(eps > 0.0 && eps <= 1.0)) throw PreconditionError("covering_bound: eps must lie in (0, 1]");
    if (dim < 1) throw PreconditionError("covering_bound: dim must be >= 1");
    const auto s = static_cast<double>(dim);
    switch (kind) {
        case CoveringKind::ball: return s * std::log(3.0 / eps);
        case CoveringKind::positive_cone_rogers:
            if (dim < 3) throw PreconditionError("covering_bound: Rogers bound requires dim >= 3");
            return s * std::log(4.0 / eps) + std::log(7.0 * s * std::log(s));
        case CoveringKind::positive_cone_simplified: return s * std::log(18.0 / eps);
    }
    throw PreconditionError("unknown covering kind");
}

double covering_bound(CoveringKind kind, std::size_t dim, double eps) {
    if (!(eps > 0.0 && eps <= 1.0)) throw PreconditionError("covering_bound: eps must lie in (0, 1]");
    if (dim < 1) throw PreconditionError("covering_bound: dim must be >= 1");
    const auto s = static_cast<double>(dim);
    switch (kind) {
        case CoveringKind::ball: return std::pow(3.0 / eps, s);
        case CoveringKind::positive_cone_rogers:
            if (dim < 3) throw PreconditionError("covering_bound: Rogers bound requires dim >= 3");
            return std::pow(4.0 / eps, s) * 7.0 * s * std::log(s);
        case CoveringKind::positive_cone_simplified: return std::pow(18.0 / eps, s);
    }
    throw PreconditionError("unknown covering kind");
}

double rip_probability(double cov_x, double cov_y, double delta, std::uint64_t m) {
    if (!(cov_x >= 1.0 && cov_y >= 1.0))
        throw PreconditionError("rip_probability: covering numbers must be >= 1");
    return 1.0 - 2.0 * cov_x * cov_y * std::exp(-c0(delta) * static_cast<double>(m));
}

double rip_probability_log(double log_cov_x, double log_cov_y, double delta, std::uint64_t m) {
    if (!(log_cov_x >= 0.0 && log_cov_y >= 0.0))
        throw PreconditionError("rip_probability: covering numbers must be >= 1");
    return 1.0 - std::exp(std::log(2.0) + log_cov_x + log_cov_y - c0(delta) * static_cast<double>(m));
}

std::string_view to_string(ApplicationCase c) {
    switch (c) {
        case ApplicationCase::pointwise: return "pointwise";
        case ApplicationCase::positive_cone_conv: return "positive_cone_conv";
        case ApplicationCase::tensor_conv: return "tensor_conv";
    }
    return "unknown";
}

ApplicationCase application_case_from_string(std::string_view name) {
    if (name == "pointwise") return ApplicationCase::pointwise;
    if (name == "positive_cone_conv") return ApplicationCase::positive_cone_conv;
    if (name == "tensor_conv") return ApplicationCase::tensor_conv;
    throw PreconditionError("unknown application case '" + std::string(name) + "'");
}

double application_probability(ApplicationCase c, std::size_t s, std::size_t f, double delta,
                               std::uint64_t m) {
    require_application(s, f, delta, "application_probability");
    if (m < 1) throw PreconditionError("application_probability: M must be >= 1");
    const Prefactor p = prefactor(c, s, f);
    return 1.0 - 2.0 * std::pow(p.base / delta, p.exponent) *
                     std::exp(-c0(delta) * static_cast<double>(m));
}

double application_probability_composed(ApplicationCase c, std::size_t s, std::size_t f,
                                        double delta, std::uint64_t m) {
    require_application(s, f, delta, "application_probability");
    if (m < 1) throw PreconditionError("application_probability: M must be >= 1");
    switch (c) {
        case ApplicationCase::pointwise: {
            // Single min(S,F)-dimensional subspace with a δ/4-net.
            const double cov = covering_bound(CoveringKind::ball, std::min(s, f), delta / 4.0);
            return rip_probability(cov, 1.0, delta, m);
        }
        case ApplicationCase::positive_cone_conv: {
            const double beta = std::sqrt(static_cast<double>(std::min(s, f)));
            const double eps = delta / d_constant(1.0, beta);
            return rip_probability(covering_bound(CoveringKind::positive_cone_simplified, s, eps),
                                   covering_bound(CoveringKind::positive_cone_simplified, f, eps),
                                   delta, m);
        }
        case ApplicationCase::tensor_conv: {
            const double eps = delta / d_constant(1.0, 1.0);
            return rip_probability(covering_bound(CoveringKind::ball, s, eps),
                                   covering_bound(CoveringKind::ball, f, eps), delta, m);
        }
    }
    throw PreconditionError("unknown application case");
}

double log_failure_prefactor(ApplicationCase c, std::size_t s, std::size_t f, double delta) {
    require_application(s, f, delta, "log_failure_prefactor");
    const Prefactor p = prefactor(c, s, f);
    return std::log(2.0) + p.exponent * std::log(p.base / delta);
}

double log_binomial(std::size_t n, std::size_t k) {
    if (k > n) return -std::numeric_limits<double>::infinity();
    const auto dn = static_cast<double>(n);
    const auto dk = static_cast<double>(k);
    return std::lgamma(dn + 1.0) - std::lgamma(dk + 1.0) - std::lgamma(dn - dk + 1.0);
}

UnionBoundSamples union_bound_samples(std::size_t n, std::size_t s, std::size_t f, double delta,
                                      double p_target, ApplicationCase c) {
    require_application(s, f, delta, "union_bound_samples");
    if (s * f > n) throw PreconditionError("union_bound_samples: requires S*F <= N");
    if (!(p_target > 0.0 && p_target <= 1.0))
        throw PreconditionError("union_bound_samples: p_target must lie in (0, 1]");
    UnionBoundSamples out;
    out.c0 = c0(delta);
    out.log_pairs = log_binomial(n, s) + log_binomial(n, f);
    out.log_pairs_loose = static_cast<double>(s + f) * std::log(static_cast<double>(n));
    const double base = log_failure_prefactor(c, s, f, delta) - std::log(p_target);
    auto solve = [&](double log_pairs) {
        const double m = std::ceil((base + log_pairs) / out.c0);
        return static_cast<std::uint64_t>(std::max(1.0, m));
    };
    out.m = solve(out.log_pairs);
    out.m_loose = solve(out.log_pairs_loose);
    return out;
}

BoundReport make_bound_report(const BoundInputs& in) {
    if (in.s < 1 || in.f < 1) throw PreconditionError("bound report: S and F must be >= 1");
    BoundReport r;
    r.inputs = in;
    r.d = d_constant(in.alpha, in.beta);
    r.c0 = c0(in.delta);
    const std::string& tag = in.case_tag;
    CoveringKind kind = CoveringKind::ball;
    std::size_t dx = in.s;
    std::size_t dy = in.f;
    r.eps = in.delta / r.d;
    if (tag == "pointwise") {
        dx = std::min(in.s, in.f);
        dy = 0;
        r.eps = in.delta / 4.0;
    } else if (tag == "positive_cone_conv" || tag == "cone") {
        kind = CoveringKind::positive_cone_simplified;
    } else if (tag != "tensor_conv" && tag != "subspace") {
        throw PreconditionError("bound report: unknown case '" + tag + "'");
    }
    r.log_covering_x = log_covering_bound(kind, dx, r.eps);
    r.log_covering_y = dy == 0 ? 0.0 : log_covering_bound(kind, dy, r.eps);
    r.covering_x = covering_bound(kind, dx, r.eps);
    r.covering_y = dy == 0 ? 1.0 : covering_bound(kind, dy, r.eps);
    r.success_probability_lower =
        std::isfinite(r.covering_x * r.covering_y)
            ? rip_probability(r.covering_x, r.covering_y, in.delta, in.m)
            : rip_probability_log(r.log_covering_x, r.log_covering_y, in.delta, in.m);
    r.success_probability_clamped = std::clamp(r.success_probability_lower, 0.0, 1.0);
    return r;
}

}  // namespace bilrip
