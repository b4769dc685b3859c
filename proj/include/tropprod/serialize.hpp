#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "tropprod/complexes.hpp"
#include "tropprod/curves.hpp"
#include "tropprod/pipeline.hpp"
#include "tropprod/tropmaps.hpp"

namespace tropprod {

using Json = nlohmann::ordered_json;

// Integers that do not fit a 64-bit word are written as decimal strings.
Json to_json(const Int& x);
Int int_from_json(const Json& j);

Json to_json(const IntVector& v);
IntVector vector_from_json(const Json& j);

// {"matrix": rows}; "source_rank" is added when there are no rows.
Json to_json(const LinearMap& f);
LinearMap map_from_json(const Json& j);

Json to_json(const RationalCone& c);
RationalCone cone_from_json(const Json& j);

Json to_json(const AbstractConeComplex& c);
AbstractConeComplex complex_from_json(const Json& j);

// {"cone-id": {"target": id, "map": map}, ..}
Json to_json(const ComplexMorphism& f);
std::map<ConeId, ConeImage> images_from_json(const Json& j);

Json to_json(const SubdivisionOf& s);
// `original` must serialize to the stored "original" entry.
SubdivisionOf subdivision_from_json(const Json& j, std::shared_ptr<const AbstractConeComplex> original);

Json to_json(const ConicalSubset& s);
ConicalSubset subset_from_json(const Json& j);

Json to_json(const DualGraph& g);
DualGraph graph_from_json(const Json& j);

Json to_json(const RubberMapType& t);
RubberMapType type_from_json(const Json& j);

Json to_json(const ContactData& c);

Json to_json(const SubdivisionSummary& s);
Json to_json(const CheckResult& c);
Json to_json(const Report& r);
Report report_from_json(const Json& j);
std::string to_text(const Report& r);

// Legs are drawn as arrowless dangling edges labeled by marking (and slope).
std::string to_dot(const DualGraph& g, const std::string& name = "G");
std::string to_dot(const RubberMapType& t, const std::string& name = "G");

}  // namespace tropprod
