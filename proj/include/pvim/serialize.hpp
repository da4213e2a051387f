#pragma once

#include "json.hpp"
#include "pvim/im.hpp"
#include "pvim/models.hpp"
#include "pvim/pvalue.hpp"
#include "pvim/validity.hpp"

namespace pvim {

using Json = nlohmann::ordered_json;

// Non-finite numbers serialize as null; interval sets also carry their text form.
Json to_json(const IntervalSet& s);
Json to_json(const SupConfig& c);
Json to_json(const PlausibilityReport& r);
Json to_json(const PValueReport& r);
Json to_json(const EquivalenceReport& r);
Json to_json(const AssumptionReport& r);
Json to_json(const ValidityAudit& a);
Json to_json(const UniformityReport& r);
Json to_json(const CoverageReport& r);
Json to_json(const CoherenceReport& r);
Json to_json(const DiagnosticReport& r);
Json to_json(const Summary& s);

SupConfig sup_config_from_json(const Json& j);

}  // namespace pvim
