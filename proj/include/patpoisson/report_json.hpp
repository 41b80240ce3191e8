#pragma once

// JSON encoding of reports. Every encoder has a matching decoder, and
// encode(decode(encode(x))) == encode(x) holds for all of them.
//
// A BigScalar is written as
//   {"display": "6.85456e157", "sign": 1, "log10": "157.83...", "exact": "p/q" | null}
// where "exact" is present only for values held as exact rationals.

#include "json.hpp"
#include "patpoisson/bounds.hpp"
#include "patpoisson/overlap.hpp"
#include "patpoisson/verify.hpp"

namespace patpoisson {

using Json = nlohmann::ordered_json;

Json to_json(const BigScalar& x);
BigScalar big_scalar_from_json(const Json& j);

Json to_json(const Real& x);  // 40-digit decimal string
Real real_from_json(const Json& j);

Json to_json(const UniformBoundsReport& r);
UniformBoundsReport uniform_report_from_json(const Json& j);

Json to_json(const MallowsBoundsReport& r);
MallowsBoundsReport mallows_report_from_json(const Json& j);

Json to_json(const FixedPointBound& r);
FixedPointBound fixed_point_bound_from_json(const Json& j);

Json to_json(const OverlapTable& t);
OverlapTable overlap_table_from_json(const Json& j);

Json to_json(const OccurrenceDistribution& d);
OccurrenceDistribution distribution_from_json(const Json& j);

Json to_json(const TVReport& r);
TVReport tv_report_from_json(const Json& j);

Json to_json(const CertificationResult& c);
CertificationResult certification_from_json(const Json& j);

Json to_json(const StatTest& t);
StatTest stat_test_from_json(const Json& j);

}  // namespace patpoisson
