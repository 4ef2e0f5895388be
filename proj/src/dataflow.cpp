#include "pipetune/dataflow.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "pipetune/errors.hpp"

namespace pipetune {

namespace {

std::unordered_map<StageId, std::size_t> index_stages(const DataFlowGraph& g) {
    std::unordered_map<StageId, std::size_t> idx;
    idx.reserve(g.stages.size());
    for (std::size_t i = 0; i < g.stages.size(); ++i) idx.emplace(g.stages[i], i);
    return idx;
}

struct Adjacency {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::vector<std::size_t>> in;
};

Adjacency build_adjacency(const DataFlowGraph& g,
                          const std::unordered_map<StageId, std::size_t>& idx) {
    Adjacency adj;
    adj.out.resize(g.stages.size());
    adj.in.resize(g.stages.size());
    for (const auto& [from, to] : g.connectors) {
        const std::size_t u = idx.at(from);
        const std::size_t v = idx.at(to);
        adj.out[u].push_back(v);
        adj.in[v].push_back(u);
    }
    return adj;
}

} // namespace

bool DataFlowGraph::has_stage(const StageId& id) const {
    return std::find(stages.begin(), stages.end(), id) != stages.end();
}

std::vector<StageId> DataFlowGraph::sources() const {
    std::unordered_set<StageId> has_in;
    for (const auto& c : connectors) has_in.insert(c.second);
    std::vector<StageId> out;
    for (const auto& s : stages)
        if (!has_in.count(s)) out.push_back(s);
    return out;
}

std::vector<StageId> DataFlowGraph::sinks() const {
    std::unordered_set<StageId> has_out;
    for (const auto& c : connectors) has_out.insert(c.first);
    std::vector<StageId> out;
    for (const auto& s : stages)
        if (!has_out.count(s)) out.push_back(s);
    return out;
}

std::optional<GraphIssue> validate(const DataFlowGraph& graph) {
    // Duplicate stage ids would make connector endpoints ambiguous.
    {
        std::unordered_set<StageId> seen;
        for (const auto& s : graph.stages) {
            if (!seen.insert(s).second)
                return GraphIssue{GraphErrorKind::DanglingConnector,
                                  "duplicate stage id: " + s,
                                  {s}};
        }
    }

    const auto idx = index_stages(graph);
    for (const auto& [from, to] : graph.connectors) {
        if (!idx.count(from) || !idx.count(to)) {
            return GraphIssue{GraphErrorKind::DanglingConnector,
                              "connector (" + from + ", " + to + ") references unknown stage",
                              {from, to}};
        }
    }

    const auto adj = build_adjacency(graph, idx);
    const std::size_t n = graph.stages.size();

    // Kahn's algorithm; anything left over sits on a cycle.
    std::vector<std::size_t> indeg(n, 0);
    for (std::size_t v = 0; v < n; ++v) indeg[v] = adj.in[v].size();
    std::deque<std::size_t> ready;
    for (std::size_t v = 0; v < n; ++v)
        if (indeg[v] == 0) ready.push_back(v);
    std::size_t emitted = 0;
    while (!ready.empty()) {
        const std::size_t u = ready.front();
        ready.pop_front();
        ++emitted;
        for (std::size_t v : adj.out[u])
            if (--indeg[v] == 0) ready.push_back(v);
    }
    if (emitted != n) {
        std::vector<StageId> cyclic;
        for (std::size_t v = 0; v < n; ++v)
            if (indeg[v] > 0) cyclic.push_back(graph.stages[v]);
        return GraphIssue{GraphErrorKind::CycleDetected, "graph contains a directed cycle",
                          cyclic};
    }

    // Every stage must lie on some source-to-sink path.
    std::vector<char> from_source(n, 0), to_sink(n, 0);
    std::deque<std::size_t> queue;
    for (std::size_t v = 0; v < n; ++v)
        if (adj.in[v].empty()) {
            from_source[v] = 1;
            queue.push_back(v);
        }
    while (!queue.empty()) {
        const std::size_t u = queue.front();
        queue.pop_front();
        for (std::size_t v : adj.out[u])
            if (!from_source[v]) {
                from_source[v] = 1;
                queue.push_back(v);
            }
    }
    for (std::size_t v = 0; v < n; ++v)
        if (adj.out[v].empty()) {
            to_sink[v] = 1;
            queue.push_back(v);
        }
    while (!queue.empty()) {
        const std::size_t u = queue.front();
        queue.pop_front();
        for (std::size_t v : adj.in[u])
            if (!to_sink[v]) {
                to_sink[v] = 1;
                queue.push_back(v);
            }
    }
    for (std::size_t v = 0; v < n; ++v) {
        if (!from_source[v] || !to_sink[v]) {
            return GraphIssue{GraphErrorKind::UnreachableStage,
                              "stage " + graph.stages[v] +
                                  " is not on any source-to-sink path",
                              {graph.stages[v]}};
        }
    }
    return std::nullopt;
}

std::vector<StageId> topological_order(const DataFlowGraph& graph) {
    const auto idx = index_stages(graph);
    const auto adj = build_adjacency(graph, idx);
    const std::size_t n = graph.stages.size();
    std::vector<std::size_t> indeg(n, 0);
    for (std::size_t v = 0; v < n; ++v) indeg[v] = adj.in[v].size();
    std::deque<std::size_t> ready;
    for (std::size_t v = 0; v < n; ++v)
        if (indeg[v] == 0) ready.push_back(v);
    std::vector<StageId> order;
    order.reserve(n);
    while (!ready.empty()) {
        const std::size_t u = ready.front();
        ready.pop_front();
        order.push_back(graph.stages[u]);
        for (std::size_t v : adj.out[u])
            if (--indeg[v] == 0) ready.push_back(v);
    }
    if (order.size() != n) throw Error("topological_order: graph has a cycle");
    return order;
}

CriticalPath critical_path(const DataFlowGraph& graph, const StageWeights& weights) {
    const auto idx = index_stages(graph);
    const auto adj = build_adjacency(graph, idx);
    const std::size_t n = graph.stages.size();

    std::vector<double> w(n);
    for (std::size_t v = 0; v < n; ++v) {
        const auto it = weights.find(graph.stages[v]);
        if (it == weights.end())
            throw MissingWeight("no weight for stage " + graph.stages[v]);
        w[v] = it->second;
    }

    // best[v] = max total weight of a path starting at v and ending at a sink,
    // including w[v]. Processed in reverse topological order.
    const auto order = topological_order(graph);
    std::vector<double> best(n, 0.0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const std::size_t v = idx.at(*it);
        double tail = 0.0;
        if (!adj.out[v].empty()) {
            tail = -std::numeric_limits<double>::infinity();
            for (std::size_t u : adj.out[v]) tail = std::max(tail, best[u]);
        }
        best[v] = w[v] + tail;
    }

    // Start at the best source; among equal-latency alternatives prefer the
    // lexicographically smallest id at every step, which yields the
    // lexicographically smallest optimal stage sequence.
    std::size_t cur = n;  // invalid
    for (std::size_t v = 0; v < n; ++v) {
        if (!adj.in[v].empty()) continue;
        if (cur == n || best[v] > best[cur] ||
            (best[v] == best[cur] && graph.stages[v] < graph.stages[cur]))
            cur = v;
    }
    if (cur == n) throw Error("critical_path: graph has no source");

    CriticalPath result;
    result.latency = best[cur];
    while (true) {
        result.path.push_back(graph.stages[cur]);
        if (adj.out[cur].empty()) break;
        std::size_t next = n;
        for (std::size_t u : adj.out[cur]) {
            if (best[u] + w[cur] < best[cur]) continue;  // not on an optimal path
            if (next == n || graph.stages[u] < graph.stages[next]) next = u;
        }
        cur = next;
    }
    return result;
}

} // namespace pipetune
