#pragma once

// JSON encodings of instances, schemes, partitions, graphs and reports.
// Files use 1-based bidder/good indices where indices appear; everything in
// memory is 0-based.

#include <filesystem>
#include <variant>

#include "json.hpp"
#include "rms/gadgets.hpp"
#include "rms/model.hpp"
#include "rms/simulate.hpp"
#include "rms/solver_known.hpp"

namespace rms::io {

using Json = nlohmann::ordered_json;
using AnyInstance = std::variant<KnownInstance, BayesInstance>;

Json to_json(const KnownInstance& inst);
Json to_json(const BayesInstance& inst);
Json to_json(const AnyInstance& inst);
Json to_json(const SignalingScheme& scheme);
Json to_json(const SchemeReport& report);
Json to_json(const ClusterPartition& partition);
Json to_json(const SimReport& report);
Json to_json(const Graph& graph);

/// All parsers throw ValidationError on malformed documents.
AnyInstance instance_from_json(const Json& doc, double tol = kProbabilityTolerance);
/// Accepts a bare scheme object or any object carrying one under "scheme".
SignalingScheme scheme_from_json(const Json& doc);
ClusterPartition partition_from_json(const Json& doc);
Graph graph_from_json(const Json& doc);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& doc);

}  // namespace rms::io
