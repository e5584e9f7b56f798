#pragma once

#include <string>

#include "json.hpp"

#include "dragonshare/chessboard.hpp"
#include "dragonshare/core.hpp"
#include "dragonshare/kkm.hpp"
#include "dragonshare/marriage.hpp"
#include "dragonshare/scenario.hpp"
#include "dragonshare/valuations.hpp"

namespace dragonshare {

using Json = nlohmann::json;

Json encode_cut(const Cut& cut);
Cut decode_cut(const Json& j);

// {"players": [{"breakpoints": [...], "values": [...]}], "regime": "hungry"|"signed"}
Json encode_profile(const ValuationProfile& profile);
// Decoding normalizes through make_profile, so re-decoding an encoded
// profile is the identity.
ValuationProfile decode_profile(const Json& j);

// {"n": .., "sets": [[..], ..]}
Json encode_family(const SetFamily& family);
SetFamily decode_family(const Json& j);

// {"vertices": .., "edges": [{"u":..,"w":..,"label":..}, ..]}
Json encode_tree(const LabeledTree& tree);
LabeledTree decode_tree(const Json& j);

// {"dragon": .., "shares": {"player": box, ..}}
Json encode_assignment(const Assignment& a);
Assignment decode_assignment(const Json& j);

// {"cut": [...], "alloc": [...]}
Json encode_partition_allocation(const PartitionAllocation& pa);
PartitionAllocation decode_partition_allocation(const Json& j);

// {"rooks": [{"box":..,"tile":..,"w":..}, ..]}
Json encode_chessboard_point(const ChessboardPoint& cp);
ChessboardPoint decode_chessboard_point(const Json& j);

// {"tol":..,"budget":..,"eps_fuzz":..,"eps_sign":..,"seed":..}; the thread
// count is deliberately not serialized (it never affects results).
Json encode_params(const SolveParams& params);
SolveParams decode_params(const Json& j);

Json encode_scenario_result(const ScenarioResult& r);
ScenarioResult decode_scenario_result(const Json& j);

// Canonical bytes: sorted keys, two-space indent, shortest round-trip
// floats, trailing newline. Identical values give identical files.
std::string dump_canonical(const Json& j);

}  // namespace dragonshare
