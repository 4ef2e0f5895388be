#include "pipetune/structured_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "pipetune/errors.hpp"

namespace pipetune {

MovingAverage::MovingAverage(std::size_t window) : window_(window) {
    if (window_ == 0) throw std::invalid_argument("MovingAverage: window must be >= 1");
}

void MovingAverage::push(double value) {
    buffer_.push_back(value);
    if (buffer_.size() > window_) buffer_.pop_front();
}

double MovingAverage::mean() const {
    if (buffer_.empty()) throw UntrainedStage("moving average has no observations");
    double sum = 0.0;
    for (double v : buffer_) sum += v;
    return sum / static_cast<double>(buffer_.size());
}

double evaluate_tree(const CompositionNode& node, const StageWeights& leaf_values) {
    switch (node.op) {
        case CompositionNode::Op::Leaf: {
            const auto it = leaf_values.find(node.stage);
            if (it == leaf_values.end())
                throw MissingWeight("no value for stage " + node.stage);
            return it->second;
        }
        case CompositionNode::Op::Sum: {
            double sum = 0.0;
            for (const auto& child : node.children) sum += evaluate_tree(child, leaf_values);
            return sum;
        }
        case CompositionNode::Op::Max: {
            double best = 0.0;
            bool first = true;
            for (const auto& child : node.children) {
                const double v = evaluate_tree(child, leaf_values);
                if (first || v > best) best = v;
                first = false;
            }
            return best;
        }
    }
    throw Error("evaluate_tree: corrupt node");
}

namespace {

using Expr = std::optional<CompositionNode>;

// Sequential composition. Nullopt stands for a zero-weight connector and
// drops out of the sum; nested sums are flattened so chains come out as one
// node in path order.
Expr seq(Expr a, Expr b) {
    if (!a) return b;
    if (!b) return a;
    CompositionNode node;
    node.op = CompositionNode::Op::Sum;
    auto absorb = [&node](CompositionNode& e) {
        if (e.op == CompositionNode::Op::Sum)
            for (auto& c : e.children) node.children.push_back(std::move(c));
        else
            node.children.push_back(std::move(e));
    };
    absorb(*a);
    absorb(*b);
    return node;
}

StageId smallest_leaf(const CompositionNode& node) {
    if (node.op == CompositionNode::Op::Leaf) return node.stage;
    StageId best;
    for (const auto& c : node.children) {
        StageId s = smallest_leaf(c);
        if (best.empty() || s < best) best = s;
    }
    return best;
}

// Parallel composition. Dropping a zero branch is exact because every leaf
// value is nonnegative by contract. Children are kept sorted by their
// smallest stage id so the tree shape does not depend on reduction order.
Expr par(Expr a, Expr b) {
    if (!a) return b;
    if (!b) return a;
    CompositionNode node;
    node.op = CompositionNode::Op::Max;
    auto absorb = [&node](CompositionNode& e) {
        if (e.op == CompositionNode::Op::Max)
            for (auto& c : e.children) node.children.push_back(std::move(c));
        else
            node.children.push_back(std::move(e));
    };
    absorb(*a);
    absorb(*b);
    std::stable_sort(node.children.begin(), node.children.end(),
                     [](const CompositionNode& x, const CompositionNode& y) {
                         return smallest_leaf(x) < smallest_leaf(y);
                     });
    return node;
}

struct REdge {
    int from = 0;
    int to = 0;
    Expr expr;
    bool alive = false;
};

} // namespace

std::optional<CompositionNode> series_parallel_tree(const DataFlowGraph& graph) {
    if (graph.stages.empty()) return std::nullopt;

    // Node-weighted graph turned into an edge-labeled one: stage v becomes
    // edge v_in -> v_out carrying leaf(v); connectors and the virtual
    // source/sink edges carry zero.
    std::unordered_map<StageId, int> in_node, out_node;
    int next = 2;  // 0 = super source, 1 = super sink
    for (const auto& s : graph.stages) {
        in_node[s] = next++;
        out_node[s] = next++;
    }

    std::vector<REdge> edges;
    auto add_edge = [&edges](int from, int to, Expr expr) {
        edges.push_back(REdge{from, to, std::move(expr), true});
    };
    for (const auto& s : graph.stages) {
        CompositionNode leaf;
        leaf.op = CompositionNode::Op::Leaf;
        leaf.stage = s;
        add_edge(in_node[s], out_node[s], leaf);
    }
    for (const auto& [from, to] : graph.connectors)
        add_edge(out_node[from], in_node[to], std::nullopt);
    for (const auto& s : graph.sources()) add_edge(0, in_node[s], std::nullopt);
    for (const auto& s : graph.sinks()) add_edge(out_node[s], 1, std::nullopt);

    auto degrees = [&edges, next]() {
        std::vector<std::vector<std::size_t>> in(next), out(next);
        for (std::size_t i = 0; i < edges.size(); ++i) {
            if (!edges[i].alive) continue;
            out[edges[i].from].push_back(i);
            in[edges[i].to].push_back(i);
        }
        return std::pair(std::move(in), std::move(out));
    };

    bool changed = true;
    while (changed) {
        changed = false;

        // Series: an internal node with exactly one edge in and one out.
        {
            auto [in, out] = degrees();
            for (int v = 2; v < next; ++v) {
                if (in[v].size() != 1 || out[v].size() != 1) continue;
                REdge& a = edges[in[v][0]];
                REdge& b = edges[out[v][0]];
                if (!a.alive || !b.alive) continue;
                a.expr = seq(std::move(a.expr), std::move(b.expr));
                a.to = b.to;
                b.alive = false;
                changed = true;
            }
        }

        // Parallel: merge all duplicate (from, to) pairs.
        {
            std::map<std::pair<int, int>, std::size_t> first_edge;
            for (std::size_t i = 0; i < edges.size(); ++i) {
                if (!edges[i].alive) continue;
                const auto key = std::pair(edges[i].from, edges[i].to);
                const auto it = first_edge.find(key);
                if (it == first_edge.end()) {
                    first_edge.emplace(key, i);
                } else {
                    REdge& keep = edges[it->second];
                    keep.expr = par(std::move(keep.expr), std::move(edges[i].expr));
                    edges[i].alive = false;
                    changed = true;
                }
            }
        }
    }

    std::vector<std::size_t> alive;
    for (std::size_t i = 0; i < edges.size(); ++i)
        if (edges[i].alive) alive.push_back(i);
    if (alive.size() != 1) return std::nullopt;  // not series-parallel
    const REdge& top = edges[alive[0]];
    if (top.from != 0 || top.to != 1 || !top.expr) return std::nullopt;
    return top.expr;
}

std::vector<StageId> identify_critical_stages(const DataFlowGraph& graph,
                                              const std::vector<StageSample>& samples,
                                              double contribution_threshold) {
    if (samples.empty()) throw EmptySampleSet("identify_critical_stages: no samples");
    if (contribution_threshold <= 0.0 || contribution_threshold > 1.0)
        throw std::invalid_argument("contribution threshold must be in (0, 1]");

    std::map<StageId, double> stage_sum;
    double end_to_end_sum = 0.0;
    for (const auto& sample : samples) {
        for (const auto& [stage, latency] : sample.per_stage) stage_sum[stage] += latency;
        end_to_end_sum += critical_path(graph, sample.per_stage).latency;
    }
    const double n = static_cast<double>(samples.size());
    const double mean_end_to_end = end_to_end_sum / n;

    std::vector<StageId> critical;
    if (mean_end_to_end <= 0.0) return critical;
    for (const auto& stage : graph.stages) {
        const auto it = stage_sum.find(stage);
        const double mean_stage = it == stage_sum.end() ? 0.0 : it->second / n;
        if (mean_stage / mean_end_to_end > contribution_threshold) critical.push_back(stage);
    }
    return critical;
}

std::optional<double> pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("pearson: need two equal-length series");
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

std::map<StageId, std::vector<std::size_t>> dependency_analysis(
    const std::vector<StageSample>& samples, const std::vector<Configuration>& configs,
    double threshold) {
    if (samples.empty()) throw EmptySampleSet("dependency_analysis: no samples");

    // Mean stage latency per configuration, in the order the configuration
    // list provides.
    std::unordered_map<std::string, const Configuration*> by_id;
    for (const auto& c : configs) by_id.emplace(c.id, &c);

    std::map<std::string, std::map<StageId, double>> sums;
    std::map<std::string, double> counts;
    for (const auto& sample : samples) {
        if (!by_id.count(sample.config_id))
            throw std::invalid_argument("dependency_analysis: sample references unknown config " +
                                        sample.config_id);
        counts[sample.config_id] += 1.0;
        for (const auto& [stage, latency] : sample.per_stage)
            sums[sample.config_id][stage] += latency;
    }
    if (counts.size() < 3)
        throw std::invalid_argument(
            "dependency_analysis: need at least 3 distinct configurations");

    std::vector<const Configuration*> present;
    for (const auto& c : configs)
        if (counts.count(c.id)) present.push_back(&c);

    const std::size_t n_params = present.front()->params.size();
    std::set<StageId> stage_ids;
    for (const auto& [id, per_stage] : sums)
        for (const auto& [stage, _] : per_stage) stage_ids.insert(stage);

    std::map<StageId, std::vector<std::size_t>> associations;
    for (const auto& stage : stage_ids) {
        std::vector<double> latencies;
        latencies.reserve(present.size());
        for (const auto* c : present)
            latencies.push_back(sums[c->id][stage] / counts[c->id]);

        std::vector<std::size_t> linked;
        for (std::size_t j = 0; j < n_params; ++j) {
            std::vector<double> values;
            values.reserve(present.size());
            for (const auto* c : present) values.push_back(c->params[j]);
            const auto rho = pearson(values, latencies);
            if (!rho) continue;  // constant parameter or constant latency
            if (std::abs(*rho) > threshold) linked.push_back(j);
        }
        if (!linked.empty()) associations[stage] = std::move(linked);
    }
    return associations;
}

FeatureVector subset_features(const ParamVector& params, const std::vector<ParamSpec>& specs,
                              const std::vector<std::size_t>& subset, int degree) {
    ParamVector sub_params;
    std::vector<ParamSpec> sub_specs;
    sub_params.reserve(subset.size());
    sub_specs.reserve(subset.size());
    for (std::size_t j : subset) {
        sub_params.push_back(params.at(j));
        sub_specs.push_back(specs.at(j));
    }
    return features_for(sub_params, sub_specs, degree);
}

bool StructuredLatencyModel::ready() const {
    for (const auto& [stage, model] : stage_models)
        if (model.kind == StageModel::Kind::Average && !model.average.ready()) return false;
    return !stage_models.empty();
}

StructuredLatencyModel build(const DataFlowGraph& graph,
                             const std::vector<StageSample>& samples,
                             const std::vector<Configuration>& configs,
                             const std::vector<ParamSpec>& specs,
                             const RegressorConfig& regressor_config,
                             const BuildOptions& options) {
    StructuredLatencyModel model;
    model.graph = graph;
    model.specs = specs;
    model.degree = regressor_config.degree;
    model.tree = series_parallel_tree(graph);

    const auto critical =
        identify_critical_stages(graph, samples, options.contribution_threshold);

    // Dependency analysis needs variation across configurations; with fewer
    // than three distinct configs in the bootstrap the fallback applies.
    std::map<StageId, std::vector<std::size_t>> discovered;
    std::set<std::string> distinct;
    for (const auto& s : samples) distinct.insert(s.config_id);
    if (distinct.size() >= 3)
        discovered = dependency_analysis(samples, configs, options.correlation_threshold);

    std::vector<std::size_t> all_params(specs.size());
    for (std::size_t j = 0; j < specs.size(); ++j) all_params[j] = j;

    for (const auto& stage : graph.stages) {
        StageModel sm;
        const bool is_critical =
            std::find(critical.begin(), critical.end(), stage) != critical.end();
        if (is_critical) {
            sm.kind = StageModel::Kind::Regressor;
            if (const auto it = options.declared_subsets.find(stage);
                it != options.declared_subsets.end() && !it->second.empty()) {
                sm.param_subset = it->second;
            } else if (const auto it2 = discovered.find(stage); it2 != discovered.end()) {
                sm.param_subset = it2->second;
            } else {
                sm.param_subset = all_params;
            }
            sm.regressor = OnlineRegressor(
                monomial_count(sm.param_subset.size(), regressor_config.degree),
                regressor_config);
        } else {
            sm.kind = StageModel::Kind::Average;
            sm.average = MovingAverage(options.ma_window);
        }
        model.stage_models.emplace(stage, std::move(sm));
    }
    return model;
}

double predict_end_to_end(const StructuredLatencyModel& model, const ParamVector& k) {
    StageWeights predictions;
    for (const auto& [stage, sm] : model.stage_models) {
        double value = 0.0;
        if (sm.kind == StageModel::Kind::Regressor) {
            const auto fv = subset_features(k, model.specs, sm.param_subset, model.degree);
            value = std::max(sm.regressor.predict(fv.values), 0.0);
        } else {
            value = sm.average.mean();
        }
        predictions[stage] = value;
    }
    if (model.tree) return evaluate_tree(*model.tree, predictions);
    return critical_path(model.graph, predictions).latency;
}

void update_structured(StructuredLatencyModel& model, const StageSample& sample,
                       const ParamVector& k) {
    for (auto& [stage, sm] : model.stage_models) {
        const auto it = sample.per_stage.find(stage);
        if (it == sample.per_stage.end())
            throw MissingWeight("sample does not cover stage " + stage);
        if (sm.kind == StageModel::Kind::Regressor) {
            const auto fv = subset_features(k, model.specs, sm.param_subset, model.degree);
            sm.regressor.update(fv.values, it->second);
        } else {
            sm.average.push(it->second);
        }
    }
}

std::size_t structured_feature_count(const StructuredLatencyModel& model) {
    std::set<std::vector<std::size_t>> subsets;
    for (const auto& [stage, sm] : model.stage_models)
        if (sm.kind == StageModel::Kind::Regressor) subsets.insert(sm.param_subset);
    std::size_t total = 0;
    for (const auto& s : subsets) total += monomial_count(s.size(), model.degree);
    return total;
}

} // namespace pipetune
