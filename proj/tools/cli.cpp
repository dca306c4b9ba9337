#include "cli.hpp"

#include "bilrip/parallel.hpp"
#include "bilrip/version.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <type_traits>

namespace bilrip::cli {

namespace {

template <typename T>
struct is_vector : std::false_type {};
template <typename T>
struct is_vector<std::vector<T>> : std::true_type {};

template <typename T>
T convert(const Json& j, const std::string& field) {
    if constexpr (std::is_same_v<T, bool>) {
        if (!j.is_boolean()) throw UsageError(field, "expected a boolean");
        return j.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
        if (!j.is_number_integer()) throw UsageError(field, "expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
            if (!j.is_number_unsigned() && j.get<std::int64_t>() < 0)
                throw UsageError(field, "expected a nonnegative integer");
        }
        return j.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!j.is_number()) throw UsageError(field, "expected a number");
        return j.get<T>();
    } else if constexpr (std::is_same_v<T, std::string>) {
        if (!j.is_string()) throw UsageError(field, "expected a string");
        return j.get<std::string>();
    } else {
        static_assert(is_vector<T>::value);
        if (!j.is_array()) throw UsageError(field, "expected an array");
        T out;
        for (std::size_t i = 0; i < j.size(); ++i)
            out.push_back(convert<typename T::value_type>(j[i], field + "[" + std::to_string(i) + "]"));
        return out;
    }
}

/// Reads command parameters, records the values actually used (defaults
/// included) and rejects keys nobody asked for.
class Params {
public:
    Params(const Json& src, std::string prefix) : src_(src), prefix_(std::move(prefix)) {
        if (!src_.is_object()) throw UsageError(prefix_, "expected an object");
    }

    std::string field(const std::string& key) const { return prefix_ + "." + key; }
    bool has(const std::string& key) const { return src_.contains(key) && !src_.at(key).is_null(); }

    template <typename T>
    T get(const std::string& key, const T& fallback) {
        used_.insert(key);
        T v = has(key) ? convert<T>(src_.at(key), field(key)) : fallback;
        normalized_[key] = v;
        return v;
    }

    template <typename T>
    T req(const std::string& key) {
        used_.insert(key);
        if (!has(key)) throw UsageError(field(key), "required parameter is missing");
        T v = convert<T>(src_.at(key), field(key));
        normalized_[key] = v;
        return v;
    }

    template <typename T>
    std::optional<T> opt(const std::string& key) {
        used_.insert(key);
        if (!has(key)) {
            normalized_[key] = nullptr;
            return std::nullopt;
        }
        T v = convert<T>(src_.at(key), field(key));
        normalized_[key] = v;
        return v;
    }

    const Json* raw(const std::string& key) {
        used_.insert(key);
        return has(key) ? &src_.at(key) : nullptr;
    }

    void record(const std::string& key, Json value) { normalized_[key] = std::move(value); }

    void finish() const {
        for (const auto& item : src_.items())
            if (!used_.count(item.key())) throw UsageError(field(item.key()), "unknown parameter");
    }

    const Json& normalized() const { return normalized_; }

private:
    const Json& src_;
    std::string prefix_;
    std::set<std::string> used_;
    Json normalized_ = Json::object();
};

/// Runs `fn`; module precondition failures become usage errors on `field`.
template <typename Fn>
auto checked(const std::string& field, Fn&& fn) {
    try {
        return fn();
    } catch (const PreconditionError& e) {
        throw UsageError(field, e.what());
    } catch (const DimensionError& e) {
        throw UsageError(field, e.what());
    }
}

void require(bool ok, const std::string& field, const std::string& message) {
    if (!ok) throw UsageError(field, message);
}

BilinearMapSpec parse_map(Params& p, std::size_t n, bool allow_unitary = true) {
    const auto name = p.get<std::string>("map", "circular_convolution");
    const MapKind kind = checked(p.field("map"), [&] { return map_kind_from_string(name); });
    p.record("map", std::string(to_string(kind)));
    switch (kind) {
        case MapKind::pointwise: return BilinearMapSpec::pointwise(n);
        case MapKind::circular_convolution: return BilinearMapSpec::circular_convolution(n);
        case MapKind::unitary_product: {
            require(allow_unitary, p.field("map"), "unitary_product is not supported by this command");
            const auto u = p.get<std::string>("unitary", "dft");
            require(u == "dft", p.field("unitary"), "only \"dft\" is available");
            return BilinearMapSpec::unitary_product(dft_unitary(n));
        }
    }
    throw UsageError(p.field("map"), "unknown map");
}

ConeSpec parse_cone(Params& p, const std::string& key, std::size_t n) {
    const std::string field = p.field(key);
    const Json* raw = p.raw(key);
    if (!raw) throw UsageError(field, "required parameter is missing");
    Params c(*raw, field);
    const auto indices = c.req<std::vector<std::size_t>>("indices");
    const auto kind_name = c.get<std::string>("kind", "subspace");
    c.finish();
    const ConeKind kind = checked(c.field("kind"), [&] { return cone_kind_from_string(kind_name); });
    Support support = checked(c.field("indices"), [&] { return Support(n, indices); });
    p.record(key, c.normalized());
    return ConeSpec{std::move(support), kind};
}

std::size_t parse_n(Params& p) {
    const auto n = p.req<std::size_t>("n");
    require(n >= 1, p.field("n"), "N must be positive");
    return n;
}

EnsembleKind parse_ensemble(Params& p) {
    const auto name = p.get<std::string>("ensemble", "gaussian");
    return checked(p.field("ensemble"), [&] { return ensemble_kind_from_string(name); });
}

double parse_delta(Params& p, double fallback) {
    const auto delta = p.get<double>("delta", fallback);
    require(delta > 0.0 && delta < 1.0, p.field("delta"), "delta must lie in (0, 1)");
    return delta;
}

IhtOptions parse_iht(Params& p) {
    IhtOptions o;
    o.max_iters = p.get<std::size_t>("max_iters", o.max_iters);
    require(o.max_iters >= 1, p.field("max_iters"), "max_iters must be >= 1");
    o.tol = p.get<double>("tol", o.tol);
    require(o.tol >= 0.0, p.field("tol"), "tol must be >= 0");
    o.debias = p.get<bool>("debias", o.debias);
    const Json* step = p.raw("step");
    if (!step || (step->is_string() && step->get<std::string>() == "normalized")) {
        o.step = NormalizedStep{};
        p.record("step", "normalized");
    } else if (step->is_string() && step->get<std::string>() == "adaptive") {
        o.step = AdaptiveStep{};
        p.record("step", "adaptive");
    } else if (step->is_number()) {
        const double mu = step->get<double>();
        require(mu > 0.0, p.field("step"), "step must be positive");
        o.step = mu;
        p.record("step", mu);
    } else {
        throw UsageError(p.field("step"), "expected \"normalized\", \"adaptive\" or a positive number");
    }
    return o;
}

Outcome cmd_rnmp(const Json& params, std::uint64_t seed) {
    Params p(params, "parameters");
    const std::size_t n = parse_n(p);
    const BilinearMapSpec map = parse_map(p, n);
    const ConeSpec cx = parse_cone(p, "cone_x", n);
    const ConeSpec cy = parse_cone(p, "cone_y", n);
    const auto methods = p.get<std::vector<std::string>>("methods", {"brute", "alternating"});
    require(!methods.empty(), p.field("methods"), "at least one method is required");
    for (const auto& m : methods)
        require(m == "brute" || m == "alternating" || m == "exhaustive", p.field("methods"),
                "unknown method '" + m + "'");
    const auto samples = p.get<std::size_t>("samples", 10000);
    require(samples >= 1, p.field("samples"), "samples must be >= 1");
    AlternatingOptions alt;
    alt.restarts = p.get<std::size_t>("restarts", alt.restarts);
    require(alt.restarts >= 1, p.field("restarts"), "restarts must be >= 1");
    alt.max_iters = p.get<std::size_t>("max_iters", alt.max_iters);
    require(alt.max_iters >= 1, p.field("max_iters"), "max_iters must be >= 1");
    alt.tol = p.get<double>("tol", alt.tol);
    require(alt.tol > 0.0, p.field("tol"), "tol must be positive");
    alt.seed = derive_seed(seed, 1);
    ExhaustiveOptions ex;
    ex.grid_per_dim = p.get<std::size_t>("grid_per_dim", ex.grid_per_dim);
    require(ex.grid_per_dim >= 3, p.field("grid_per_dim"), "grid_per_dim must be >= 3");
    const auto inner = p.get<std::string>("inner", "automatic");
    require(inner == "automatic" || inner == "grid", p.field("inner"), "expected \"automatic\" or \"grid\"");
    ex.inner = inner == "grid" ? InnerSolve::grid : InnerSolve::automatic;
    if (std::find(methods.begin(), methods.end(), "exhaustive") != methods.end())
        require(exhaustive_grid_size(cx, cy, ex) <= kMaxExhaustiveGrid, p.field("grid_per_dim"),
                "exhaustive grid exceeds the 1e8 point guard");
    const auto mult_tol = p.get<double>("multiplicative_tol", 1e-6);
    require(mult_tol >= 0.0, p.field("multiplicative_tol"), "must be >= 0");
    p.finish();

    std::vector<RnmpEstimate> estimates;
    for (const auto& m : methods) {
        if (m == "brute") estimates.push_back(estimate_brute(map, cx, cy, samples, derive_seed(seed, 0)));
        if (m == "alternating") estimates.push_back(estimate_alternating(map, cx, cy, alt));
        if (m == "exhaustive") estimates.push_back(certify_exhaustive(map, cx, cy, ex));
    }

    Outcome o;
    o.config = p.normalized();
    double alpha = estimates.front().alpha_est, beta = estimates.front().beta_est;
    Json list = Json::array();
    o.table.columns = {"method", "alpha_est", "beta_est", "evaluations", "converged"};
    for (const auto& e : estimates) {
        alpha = std::min(alpha, e.alpha_est);
        beta = std::max(beta, e.beta_est);
        list.push_back(e);
        o.table.rows.push_back({std::string(to_string(e.method)), e.alpha_est, e.beta_est,
                                std::uint64_t{e.evaluations}, e.converged});
    }
    const bool multiplicative = beta - alpha <= mult_tol;
    o.result = Json{{"estimates", list},
                    {"alpha_est", alpha},
                    {"beta_est", beta},
                    {"multiplicative", multiplicative},
                    {"below_theorem_range", below_theorem_range(cx.support) || below_theorem_range(cy.support)}};
    o.result["d"] = multiplicative ? Json(12.0) : alpha > 0.0 ? Json(d_constant(alpha, beta)) : Json(nullptr);
    o.plot = o.table;
    return o;
}

Outcome cmd_bounds(const Json& params, std::uint64_t) {
    Params p(params, "parameters");
    BoundInputs in;
    in.alpha = p.get<double>("alpha", in.alpha);
    require(in.alpha > 0.0, p.field("alpha"), "alpha must be positive");
    in.beta = p.get<double>("beta", in.beta);
    require(in.beta >= in.alpha, p.field("beta"), "beta must be >= alpha");
    in.delta = parse_delta(p, in.delta);
    in.m = p.get<std::uint64_t>("M", 1000);
    in.s = p.get<std::size_t>("S", in.s);
    require(in.s >= 1, p.field("S"), "S must be >= 1");
    in.f = p.get<std::size_t>("F", in.f);
    require(in.f >= 1, p.field("F"), "F must be >= 1");
    in.n = p.get<std::size_t>("N", 0);
    in.case_tag = p.get<std::string>("case", in.case_tag);
    const auto grid = p.get<std::vector<std::uint64_t>>("M_grid", {});
    const auto p_target = p.opt<double>("p_target");
    p.finish();

    const BoundReport report = checked(p.field("case"), [&] { return make_bound_report(in); });
    std::optional<UnionBoundSamples> ub;
    if (p_target) {
        const ApplicationCase c = checked(p.field("case"), [&] { return application_case_from_string(in.case_tag); });
        require(in.n >= in.s * in.f, p.field("N"), "union bound requires S*F <= N");
        require(*p_target > 0.0 && *p_target <= 1.0, p.field("p_target"), "p_target must lie in (0, 1]");
        ub = union_bound_samples(in.n, in.s, in.f, in.delta, *p_target, c);
    }

    Outcome o;
    o.config = p.normalized();
    o.result = report;
    o.plot.columns = {"M", "raw_bound", "clamped_bound"};
    if (grid.empty()) {
        o.plot.rows.push_back({in.m, report.success_probability_lower, report.success_probability_clamped});
        o.table.columns = {"M",          "d",          "c0",
                           "eps",        "covering_x", "covering_y",
                           "success_probability_lower", "success_probability_clamped"};
        o.table.rows.push_back({in.m, report.d, report.c0, report.eps, report.covering_x, report.covering_y,
                                report.success_probability_lower, report.success_probability_clamped});
    } else {
        Json sweep = Json::array();
        for (std::uint64_t m : grid) {
            BoundInputs at = in;
            at.m = m;
            const BoundReport r = make_bound_report(at);
            sweep.push_back({{"M", m},
                             {"raw_bound", r.success_probability_lower},
                             {"clamped_bound", r.success_probability_clamped}});
            o.plot.rows.push_back({m, r.success_probability_lower, r.success_probability_clamped});
        }
        o.result["sweep"] = sweep;
        o.table = o.plot;
    }
    if (ub) o.result["union_bound"] = *ub;
    return o;
}

Outcome cmd_rip_mc(const Json& params, std::uint64_t seed) {
    Params p(params, "parameters");
    const std::size_t n = parse_n(p);
    const BilinearMapSpec map = parse_map(p, n);
    const ConeSpec cx = parse_cone(p, "cone_x", n);
    const ConeSpec cy = parse_cone(p, "cone_y", n);
    const MeasurementEnsemble ens{parse_ensemble(p), p.req<std::size_t>("M"), n, derive_seed(seed, 0)};
    checked(p.field("M"), [&] { validate(ens); return 0; });
    RipMonteCarloOptions opt;
    opt.n_samples = p.get<std::size_t>("n_samples", opt.n_samples);
    require(opt.n_samples >= 1, p.field("n_samples"), "n_samples must be >= 1");
    opt.delta = p.get<double>("delta", opt.delta);
    require(opt.delta > 0.0, p.field("delta"), "delta must be positive");
    opt.seed = derive_seed(seed, 1);
    const bool orthonormal = p.get<bool>("orthonormal", false);
    const bool stress = p.get<bool>("stress_witness", true);
    p.finish();

    std::optional<double> witness_ratio;
    if (stress) {
        AlternatingOptions alt;
        alt.restarts = 8;
        alt.seed = derive_seed(seed, 2);
        try {
            const RnmpEstimate w = estimate_alternating(map, cx, cy, alt);
            if (w.alpha_est > 0.0) {
                opt.extra_pairs.emplace_back(w.alpha_witness.x, w.alpha_witness.y);
                witness_ratio = w.alpha_est;
            }
        } catch (const NumericalError&) {
        }
    }
    const Matrix phi = orthonormal ? orthonormal_rows(ens) : generate(ens);
    const DistortionReport r = rip_monte_carlo(map, cx, cy, phi, opt);

    Outcome o;
    o.config = p.normalized();
    o.result = r;
    o.result["witness_ratio"] = witness_ratio ? Json(*witness_ratio) : Json(nullptr);
    o.plot.columns = {"sample_index", "abs_distortion"};
    for (std::size_t i = 0; i < r.abs_distortions.size(); ++i)
        o.plot.rows.push_back({std::uint64_t{i}, r.abs_distortions[i]});
    o.table = o.plot;
    return o;
}

Outcome cmd_concentration(const Json& params, std::uint64_t seed) {
    Params p(params, "parameters");
    const std::size_t n = parse_n(p);
    const MeasurementEnsemble ens{parse_ensemble(p), p.req<std::size_t>("M"), n, seed};
    checked(p.field("M"), [&] { validate(ens); return 0; });
    const auto trials = p.get<std::size_t>("trials", 1000);
    require(trials >= 100, p.field("trials"), "trials must be >= 100");
    const double delta = parse_delta(p, 0.5);
    Vector r;
    if (p.has("r")) {
        const auto values = p.get<std::vector<double>>("r", {});
        require(values.size() == n, p.field("r"), "r must have length N");
        r = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(n));
        require(!p.raw("r_indices"), p.field("r_indices"), "give either r or r_indices, not both");
        p.record("r_indices", nullptr);
    } else {
        p.record("r", nullptr);
        const auto idx = p.get<std::vector<std::size_t>>("r_indices", {0});
        r = Vector::Zero(static_cast<Eigen::Index>(n));
        for (std::size_t i : idx) {
            require(i < n, p.field("r_indices"), "index out of range");
            r[static_cast<Eigen::Index>(i)] = 1.0;
        }
    }
    require(r.norm() > 0.0, p.field("r"), "r must be nonzero");
    p.finish();

    const ConcentrationResult c = concentration_test(r, ens, trials, delta);
    Outcome o;
    o.config = p.normalized();
    o.result = c;
    o.table.columns = {"trials", "violations", "empirical_rate", "theory_rate", "standard_error",
                       "squared_form_failures"};
    o.table.rows.push_back({std::uint64_t{c.trials}, std::uint64_t{c.violations}, c.empirical_rate,
                            c.theory_rate, c.standard_error, std::uint64_t{c.squared_form_failures}});
    o.plot = o.table;
    return o;
}

Outcome cmd_recover(const Json& params, std::uint64_t seed) {
    Params p(params, "parameters");
    const std::size_t n = parse_n(p);
    const BilinearMapSpec map = parse_map(p, n);
    const ConeSpec cx = parse_cone(p, "cone_x", n);
    const ConeSpec cy = parse_cone(p, "cone_y", n);
    const MeasurementEnsemble ens{parse_ensemble(p), p.req<std::size_t>("M"), n, derive_seed(seed, 0)};
    checked(p.field("M"), [&] { validate(ens); return 0; });
    const auto sigma = p.get<double>("noise_sigma", 0.0);
    require(sigma >= 0.0, p.field("noise_sigma"), "noise_sigma must be >= 0");
    const auto solvers = p.get<std::vector<std::string>>("solvers", {"iht", "oracle_least_squares"});
    require(!solvers.empty(), p.field("solvers"), "at least one solver is required");
    for (const auto& s : solvers)
        require(s == "iht" || s == "oracle_least_squares", p.field("solvers"), "unknown solver '" + s + "'");
    const BilinearModel model{map, cx, cy};
    IhtOptions iht_opt = parse_iht(p);
    const auto k = p.get<std::size_t>("k", model_sparsity(model));
    require(k >= 1 && k <= ens.rows, p.field("k"), "K must lie in [1, M]");
    iht_opt.k = k;
    p.finish();

    const RecoveryProblem problem = make_problem(model, generate(ens), sigma, derive_seed(seed, 1));
    const Support truth_support = SparseVector(problem.truth->z, Support::leading(n, n)).nonzero_support();

    Outcome o;
    o.config = p.normalized();
    o.result = Json{{"model_sparsity", model_sparsity(model)}, {"truth_support", truth_support.indices()}};
    Json results = Json::object();
    o.table.columns = {"solver", "relative_error", "residual", "iterations", "converged", "diverged", "support_size"};
    for (const auto& s : solvers) {
        const RecoveryResult r = s == "iht" ? iht(problem, iht_opt) : oracle_least_squares(problem, truth_support);
        results[s] = r;
        o.table.rows.push_back({s, r.relative_error.value_or(0.0), r.residual, std::uint64_t{r.iterations},
                                r.converged, r.diverged, std::uint64_t{r.support_hat.size()}});
    }
    o.result["results"] = results;
    o.plot = o.table;
    return o;
}

Outcome cmd_phase(const Json& params, std::uint64_t seed) {
    Params p(params, "parameters");
    PhaseTransitionConfig cfg;
    cfg.n = parse_n(p);
    cfg.map = parse_map(p, cfg.n, false).kind();
    cfg.s = p.req<std::size_t>("S");
    require(cfg.s >= 1 && cfg.s <= cfg.n, p.field("S"), "S must lie in [1, N]");
    cfg.f = p.req<std::size_t>("F");
    require(cfg.f >= 1 && cfg.f <= cfg.n, p.field("F"), "F must lie in [1, N]");
    const auto kind = p.get<std::string>("cone_kind", "positive_orthant");
    cfg.cone_kind = checked(p.field("cone_kind"), [&] { return cone_kind_from_string(kind); });
    cfg.ensemble = parse_ensemble(p);
    cfg.m_grid = p.req<std::vector<std::size_t>>("M_grid");
    require(!cfg.m_grid.empty(), p.field("M_grid"), "M_grid must be nonempty");
    for (std::size_t m : cfg.m_grid) require(m >= 1 && m <= cfg.n, p.field("M_grid"), "every M must lie in [1, N]");
    cfg.trials = p.get<std::size_t>("trials", cfg.trials);
    require(cfg.trials >= 1, p.field("trials"), "trials must be >= 1");
    cfg.delta_success = p.get<double>("delta_success", cfg.delta_success);
    require(cfg.delta_success > 0.0, p.field("delta_success"), "delta_success must be positive");
    cfg.iht = parse_iht(p);
    cfg.seed = seed;
    p.finish();

    const PhaseTransitionResult r = phase_transition(cfg);
    Outcome o;
    o.config = p.normalized();
    o.result = r;
    std::vector<double> ms, rates;
    o.table.columns = {"N", "S", "F", "cone_kind", "M", "trials", "successes", "rate"};
    o.plot.columns = {"M", "rate"};
    for (const PhasePoint& pt : r.points) {
        o.table.rows.push_back({std::uint64_t{cfg.n}, std::uint64_t{cfg.s}, std::uint64_t{cfg.f},
                                std::string(to_string(cfg.cone_kind)), std::uint64_t{pt.m},
                                std::uint64_t{pt.trials}, std::uint64_t{pt.successes}, pt.rate});
        o.plot.rows.push_back({std::uint64_t{pt.m}, pt.rate});
        ms.push_back(static_cast<double>(pt.m));
        rates.push_back(pt.rate);
    }
    o.result["spearman_rate_vs_M"] = spearman(ms, rates);
    return o;
}

std::string format_cell(const Cell& c) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
                char buf[40];
                std::snprintf(buf, sizeof buf, "%.17g", v);
                return buf;
            } else if constexpr (std::is_same_v<T, bool>) {
                return v ? "true" : "false";
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (v.find_first_of(",\"\n") == std::string::npos) return v;
                std::string q = "\"";
                for (char ch : v) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
                return q + "\"";
            } else {
                return std::to_string(v);
            }
        },
        c);
}

std::string table_csv(const Table& t) {
    std::string s;
    for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + t.columns[i];
    s += "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + format_cell(row[i]);
        s += "\n";
    }
    return s;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    f << content;
    if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

const std::set<std::string> kTopLevelKeys{"schema", "command", "seed", "format", "parameters", "output", "plot", "threads"};

}  // namespace

const std::vector<std::string>& commands() {
    static const std::vector<std::string> names{"rnmp", "bounds", "rip-mc", "concentration", "recover", "phase"};
    return names;
}

Json load_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw UsageError("config", "cannot read '" + path + "'");
    std::stringstream buf;
    buf << f.rdbuf();
    const std::string text = buf.str();
    Json j = Json::parse(text, nullptr, false);
    if (!j.is_discarded()) {
        if (j.is_object() && j.contains("artifact") && j.contains("config")) return j.at("config");
        return j;
    }
    std::istringstream lines(text);
    const std::string tag = "# config: ";
    for (std::string line; std::getline(lines, line);) {
        if (line.rfind(tag, 0) == 0) {
            Json c = Json::parse(line.substr(tag.size()), nullptr, false);
            if (c.is_discarded()) break;
            return c;
        }
        if (line.empty() || line[0] != '#') break;
    }
    throw UsageError("config", "'" + path + "' is neither a JSON config nor an output of this tool");
}

Outcome execute(const Json& config) {
    if (!config.is_object()) throw UsageError("config", "expected a JSON object");
    for (const auto& item : config.items())
        if (!kTopLevelKeys.count(item.key())) throw UsageError(item.key(), "unknown configuration key");
    if (!config.contains("schema")) throw UsageError("schema", "required key is missing");
    if (convert<std::int64_t>(config.at("schema"), "schema") != kSchemaVersion)
        throw UsageError("schema", "unsupported schema version (expected 1)");
    if (!config.contains("command")) throw UsageError("command", "required key is missing");
    const auto command = convert<std::string>(config.at("command"), "command");
    const auto& names = commands();
    if (std::find(names.begin(), names.end(), command) == names.end())
        throw UsageError("command", "unknown command '" + command + "'");
    const std::uint64_t seed = config.contains("seed") ? convert<std::uint64_t>(config.at("seed"), "seed") : 0;
    const std::string format = config.contains("format") ? convert<std::string>(config.at("format"), "format") : "json";
    if (format != "json" && format != "csv") throw UsageError("format", "expected \"json\" or \"csv\"");
    const Json params = config.contains("parameters") ? config.at("parameters") : Json::object();

    Outcome o;
    if (command == "rnmp") o = cmd_rnmp(params, seed);
    else if (command == "bounds") o = cmd_bounds(params, seed);
    else if (command == "rip-mc") o = cmd_rip_mc(params, seed);
    else if (command == "concentration") o = cmd_concentration(params, seed);
    else if (command == "recover") o = cmd_recover(params, seed);
    else o = cmd_phase(params, seed);

    o.config = Json{{"schema", kSchemaVersion},
                    {"command", command},
                    {"seed", seed},
                    {"format", format},
                    {"parameters", o.config}};
    return o;
}

Json render_json(const Outcome& o) {
    return Json{{"artifact", {{"name", kArtifactName}, {"version", kArtifactVersion}}},
                {"config", o.config},
                {"result", o.result}};
}

std::string render_csv(const Outcome& o, const Table& table) {
    std::string s = std::string("# artifact: ") + kArtifactName + " " + kArtifactVersion + "\n";
    s += "# config: " + o.config.dump() + "\n";
    return s + table_csv(table);
}

void emit_plot_data(const Outcome& o, const std::string& path) { write_file(path, render_csv(o, o.plot)); }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    auto fail = [&](const char* type, const std::string& field, const std::string& message, int code) {
        Json e{{"error", {{"type", type}, {"field", field}, {"message", message}}}};
        err << e.dump() << "\n";
        return code;
    };

    CLI::App app{"Restricted norm multiplicativity and RIP experiments for bilinear maps", "bilrip"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kArtifactName) + " " + kArtifactVersion);

    std::string config_path, output_path, plot_path, format;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::vector<std::string> sets;
    std::vector<CLI::App*> subs;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config, or a previous output to re-run");
        sub->add_option("--seed", seed, "Master seed (overrides the config)");
        sub->add_option("--output", output_path, "Output file (default: stdout)");
        sub->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--threads", threads, "OpenMP thread count")->check(CLI::PositiveNumber);
        sub->add_option("--set", sets, "Parameter override key=value (value parsed as JSON)");
        sub->add_option("--plot", plot_path, "Also write the flat plotting CSV here");
        subs.push_back(sub);
    };
    for (const auto& name : commands()) add_common(app.add_subcommand(name, "Run the " + name + " experiment"));
    add_common(app.add_subcommand("run", "Run the command named in the config"));

    std::vector<const char*> argv{"bilrip"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << kArtifactName << " " << kArtifactVersion << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        return fail("usage", "arguments", e.what(), kExitUsage);
    }
    const CLI::App* sub = app.get_subcommands().front();
    if (sub->get_help_ptr() && sub->get_help_ptr()->count()) {
        out << sub->help();
        return 0;
    }

    Outcome outcome;
    Json config;
    try {
        config = config_path.empty() ? Json{{"schema", kSchemaVersion}} : load_config(config_path);
        if (!config.is_object()) throw UsageError("config", "expected a JSON object");
        const std::string name = sub->get_name();
        if (name == "run") {
            if (!config.contains("command")) throw UsageError("command", "the config must name a command");
        } else {
            if (config.contains("command") && config.at("command") != name)
                throw UsageError("command", "config is for '" + config.at("command").dump() + "', not '" + name + "'");
            config["command"] = name;
        }
        if (seed) config["seed"] = *seed;
        if (!format.empty()) config["format"] = format;
        if (!config.contains("parameters")) config["parameters"] = Json::object();
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos || eq == 0) throw UsageError("--set", "expected key=value, got '" + s + "'");
            std::string key = s.substr(0, eq);
            const std::string text = s.substr(eq + 1);
            Json value = Json::parse(text, nullptr, false);
            if (value.is_discarded()) value = text;
            std::replace(key.begin(), key.end(), '.', '/');
            config["parameters"][Json::json_pointer("/" + key)] = value;
        }
        if (!threads && config.contains("threads")) {
            const auto t = convert<std::int64_t>(config.at("threads"), "threads");
            if (t < 1) throw UsageError("threads", "must be >= 1");
            threads = static_cast<int>(t);
        }
        if (output_path.empty() && config.contains("output")) output_path = convert<std::string>(config.at("output"), "output");
        if (plot_path.empty() && config.contains("plot")) plot_path = convert<std::string>(config.at("plot"), "plot");
        if (threads) set_threads(*threads);
        outcome = execute(config);
    } catch (const UsageError& e) {
        return fail("usage", e.field(), e.what(), kExitUsage);
    } catch (const Json::exception& e) {
        return fail("usage", "config", e.what(), kExitUsage);
    } catch (const std::exception& e) {
        return fail("runtime", sub->get_name(), e.what(), kExitRuntime);
    }

    try {
        const std::string payload = outcome.config.at("format") == "csv" ? render_csv(outcome, outcome.table)
                                                                          : render_json(outcome).dump(2) + "\n";
        if (output_path.empty()) {
            out << payload;
        } else {
            write_file(output_path, payload);
        }
        if (!plot_path.empty()) emit_plot_data(outcome, plot_path);
    } catch (const std::exception& e) {
        return fail("runtime", "output", e.what(), kExitRuntime);
    }
    return 0;
}

}  // namespace bilrip::cli
