#pragma once

#include "bilrip/bilinear_ops.hpp"
#include "bilrip/bounds.hpp"
#include "bilrip/recovery.hpp"
#include "bilrip/rnmp.hpp"
#include "bilrip/sensing.hpp"
#include "bilrip/sparse_model.hpp"

#include <json.hpp>

// Support  -> {"n": N, "indices": [...]}
// ConeSpec -> {"n": N, "indices": [...], "kind": "subspace" | "positive_orthant"}
// Neither type is default-constructible, hence the serializer specializations.
namespace nlohmann {
template <>
struct adl_serializer<bilrip::Support> {
    static bilrip::Support from_json(const json& j);
    static void to_json(json& j, const bilrip::Support& s);
};
template <>
struct adl_serializer<bilrip::ConeSpec> {
    static bilrip::ConeSpec from_json(const json& j);
    static void to_json(json& j, const bilrip::ConeSpec& c);
};
}  // namespace nlohmann

namespace bilrip {

using Json = nlohmann::json;

Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

void to_json(Json& j, const NormBoundCheck& c);
void to_json(Json& j, const RnmpEstimate& e);
void to_json(Json& j, const BoundReport& r);
void to_json(Json& j, const UnionBoundSamples& u);
/// Omits the per-sample distortions; those go to CSV.
void to_json(Json& j, const DistortionReport& r);
void to_json(Json& j, const ConcentrationResult& r);
void to_json(Json& j, const RecoveryResult& r);
void to_json(Json& j, const PhaseTransitionResult& r);

}  // namespace bilrip
