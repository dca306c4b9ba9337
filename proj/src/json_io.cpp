#include "bilrip/json_io.hpp"

namespace nlohmann {

bilrip::Support adl_serializer<bilrip::Support>::from_json(const json& j) {
    return bilrip::Support(j.at("n").get<std::size_t>(), j.at("indices").get<std::vector<std::size_t>>());
}

void adl_serializer<bilrip::Support>::to_json(json& j, const bilrip::Support& s) {
    j = json{{"n", s.ambient_dim()}, {"indices", s.indices()}};
}

bilrip::ConeSpec adl_serializer<bilrip::ConeSpec>::from_json(const json& j) {
    return bilrip::ConeSpec{j.get<bilrip::Support>(),
                            bilrip::cone_kind_from_string(j.at("kind").get<std::string>())};
}

void adl_serializer<bilrip::ConeSpec>::to_json(json& j, const bilrip::ConeSpec& c) {
    j = json(c.support);
    j["kind"] = std::string(bilrip::to_string(c.kind));
}

}  // namespace nlohmann

namespace bilrip {

Json vector_to_json(const Vector& v) {
    return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector vector_from_json(const Json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void to_json(Json& j, const NormBoundCheck& c) {
    j = Json{{"lhs", c.lhs}, {"rhs_upper", c.rhs_upper}, {"satisfied", c.satisfied}, {"slack", c.slack}};
    j["rhs_lower"] = c.rhs_lower ? Json(*c.rhs_lower) : Json(nullptr);
}

namespace {

Json witness_json(const DirectionPair& w) {
    return Json{{"x", vector_to_json(w.x)}, {"y", vector_to_json(w.y)}, {"ratio", w.ratio}};
}

}  // namespace

void to_json(Json& j, const RnmpEstimate& e) {
    j = Json{
        {"support_pair", {Json(e.cone_x.support), Json(e.cone_y.support)}},
        {"cone_kinds", {to_string(e.cone_x.kind), to_string(e.cone_y.kind)}},
        {"alpha_est", e.alpha_est},
        {"beta_est", e.beta_est},
        {"alpha_witness", witness_json(e.alpha_witness)},
        {"beta_witness", witness_json(e.beta_witness)},
        {"method", to_string(e.method)},
        {"restarts", e.restarts},
        {"evaluations", e.evaluations},
        {"tol", e.tol},
        {"converged", e.converged},
        {"warnings", e.warnings},
    };
}

void to_json(Json& j, const BoundReport& r) {
    const BoundInputs& in = r.inputs;
    j = Json{
        {"d", r.d},
        {"c0", r.c0},
        {"eps", r.eps},
        {"covering_x", r.covering_x},
        {"covering_y", r.covering_y},
        {"log_covering_x", r.log_covering_x},
        {"log_covering_y", r.log_covering_y},
        {"success_probability_lower", r.success_probability_lower},
        {"success_probability_clamped", r.success_probability_clamped},
        {"inputs",
         {{"alpha", in.alpha}, {"beta", in.beta}, {"delta", in.delta}, {"M", in.m}, {"S", in.s},
          {"F", in.f}, {"N", in.n}, {"case", in.case_tag}}},
    };
}

void to_json(Json& j, const UnionBoundSamples& u) {
    j = Json{{"M", u.m}, {"M_loose", u.m_loose}, {"log_pairs", u.log_pairs},
             {"log_pairs_loose", u.log_pairs_loose}, {"c0", u.c0}};
}

void to_json(Json& j, const DistortionReport& r) {
    Json q = Json::array();
    for (const auto& [level, value] : r.quantiles) q.push_back({{"q", level}, {"value", value}});
    j = Json{{"n_samples", r.n_samples},   {"n_skipped", r.n_skipped},
             {"n_extra", r.n_extra},       {"max_abs_distortion", r.max_abs_distortion},
             {"quantiles", q},             {"delta", r.delta},
             {"exceed_count", r.exceed_count}, {"seed", r.seed}};
}

void to_json(Json& j, const ConcentrationResult& r) {
    j = Json{{"trials", r.trials},
             {"violations", r.violations},
             {"empirical_rate", r.empirical_rate},
             {"theory_rate", r.theory_rate},
             {"standard_error", r.standard_error},
             {"squared_form_failures", r.squared_form_failures}};
}

void to_json(Json& j, const RecoveryResult& r) {
    j = Json{{"z_hat", vector_to_json(r.z_hat)},
             {"support_hat", Json(r.support_hat)},
             {"iterations", r.iterations},
             {"residual", r.residual},
             {"converged", r.converged},
             {"diverged", r.diverged},
             {"rank_deficient", r.rank_deficient}};
    j["relative_error"] = r.relative_error ? Json(*r.relative_error) : Json(nullptr);
}

void to_json(Json& j, const PhaseTransitionResult& r) {
    Json pts = Json::array();
    for (const PhasePoint& p : r.points)
        pts.push_back({{"M", p.m}, {"trials", p.trials}, {"successes", p.successes}, {"rate", p.rate}});
    j = Json{{"points", pts},
             {"additive_reference", r.additive_reference},
             {"multiplicative_reference", r.multiplicative_reference}};
    j["m50"] = r.m50 ? Json(*r.m50) : Json(nullptr);
}

}  // namespace bilrip
