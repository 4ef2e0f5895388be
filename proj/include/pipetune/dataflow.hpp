#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pipetune {

using StageId = std::string;

// Application structure: a DAG of processing stages joined by connectors.
// Stages carry the latency weights; connectors carry none (communication
// cost is an extension point that stays at zero here).
struct DataFlowGraph {
    std::vector<StageId> stages;
    std::vector<std::pair<StageId, StageId>> connectors;

    bool has_stage(const StageId& id) const;
    std::vector<StageId> sources() const;  // no incoming connector
    std::vector<StageId> sinks() const;    // no outgoing connector
};

using StageWeights = std::map<StageId, double>;

enum class GraphErrorKind { CycleDetected, DanglingConnector, UnreachableStage };

struct GraphIssue {
    GraphErrorKind kind;
    std::string detail;
    std::vector<StageId> stages;  // offending stages, when known
};

// Checks the DataFlowGraph invariants; returns the first violation found
// (dangling connectors, then cycles, then unreachable stages) or nullopt.
std::optional<GraphIssue> validate(const DataFlowGraph& graph);

struct CriticalPath {
    std::vector<StageId> path;
    double latency = 0.0;
};

// Maximum-weight source-to-sink path, computed by dynamic programming over a
// topological order. Ties between equal-latency paths are broken by the
// lexicographically smallest stage-id sequence so runs are reproducible.
// Throws MissingWeight if a stage has no weight; weights must be >= 0.
CriticalPath critical_path(const DataFlowGraph& graph, const StageWeights& weights);

// Topological order of the stages (Kahn). Requires a validated graph.
std::vector<StageId> topological_order(const DataFlowGraph& graph);

} // namespace pipetune
