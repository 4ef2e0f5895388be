#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <vector>

#include "pipetune/dataflow.hpp"
#include "pipetune/online_regression.hpp"
#include "pipetune/paramspace.hpp"

namespace pipetune {

// One frame's stage-level latency observations under a known configuration.
struct StageSample {
    std::int64_t frame = 0;
    std::string config_id;
    std::map<StageId, double> per_stage;  // seconds, covers every stage
};

class MovingAverage {
public:
    explicit MovingAverage(std::size_t window = 16);

    void push(double value);
    double mean() const;  // throws UntrainedStage when empty
    bool ready() const { return !buffer_.empty(); }
    std::size_t window() const { return window_; }
    const std::deque<double>& buffer() const { return buffer_; }
    void set_buffer(std::deque<double> buffer) { buffer_ = std::move(buffer); }

private:
    std::size_t window_;
    std::deque<double> buffer_;
};

// A stage is modeled either by a regressor over the parameters it depends
// on, or by a moving average when its latency barely matters or varies.
struct StageModel {
    enum class Kind { Regressor, Average };
    Kind kind = Kind::Average;
    OnlineRegressor regressor;
    std::vector<std::size_t> param_subset;  // indices into the spec list
    MovingAverage average;
};

// Sum/max expression over stage leaves. Evaluating the tree on nonnegative
// per-stage values equals the critical-path latency of the graph with those
// values as weights.
struct CompositionNode {
    enum class Op { Leaf, Sum, Max };
    Op op = Op::Leaf;
    StageId stage;                          // leaf only
    std::vector<CompositionNode> children;  // sum/max only
};

double evaluate_tree(const CompositionNode& node, const StageWeights& leaf_values);

// Sum/max tree from series-parallel reduction of the DAG; nullopt when the
// graph is not series-parallel (callers then evaluate the critical path on
// predicted weights directly, which is semantically identical).
std::optional<CompositionNode> series_parallel_tree(const DataFlowGraph& graph);

struct StructuredLatencyModel {
    DataFlowGraph graph;
    std::vector<ParamSpec> specs;
    std::optional<CompositionNode> tree;
    std::map<StageId, StageModel> stage_models;
    int degree = 3;

    bool ready() const;  // every stage model can produce a prediction
};

// Stages whose mean latency share of the mean end-to-end (critical path)
// latency exceeds the threshold.
std::vector<StageId> identify_critical_stages(const DataFlowGraph& graph,
                                              const std::vector<StageSample>& samples,
                                              double contribution_threshold = 0.05);

// Pearson correlation of two equal-length series; nullopt when either side
// has zero variance.
std::optional<double> pearson(std::span<const double> xs, std::span<const double> ys);

// Per-stage parameter association: a parameter is linked to a stage when the
// absolute Pearson correlation between its value and the stage's mean
// latency across configurations exceeds the threshold. Parameters that are
// constant across the configurations are skipped. Requires at least three
// distinct configurations in the samples.
std::map<StageId, std::vector<std::size_t>> dependency_analysis(
    const std::vector<StageSample>& samples, const std::vector<Configuration>& configs,
    double threshold = 0.9);

struct BuildOptions {
    double contribution_threshold = 0.05;
    double correlation_threshold = 0.9;
    std::size_t ma_window = 16;
    // Parameter subsets declared by the application (e.g. per-branch knobs).
    // When a critical stage appears here, dependency analysis is skipped for
    // it; otherwise discovered associations are used, then all parameters.
    std::map<StageId, std::vector<std::size_t>> declared_subsets;
};

// Assembles the structured model from bootstrap observations: critical
// stages get regressors over their associated parameter subsets, the rest
// get moving averages, and the composition tree comes from series-parallel
// reduction of the graph.
StructuredLatencyModel build(const DataFlowGraph& graph,
                             const std::vector<StageSample>& samples,
                             const std::vector<Configuration>& configs,
                             const std::vector<ParamSpec>& specs,
                             const RegressorConfig& regressor_config,
                             const BuildOptions& options = {});

// Per-stage predictions (regressors clamped at zero, averages as-is) folded
// through the composition tree, or through the critical path when the graph
// was not series-parallel.
double predict_end_to_end(const StructuredLatencyModel& model, const ParamVector& k);

// Trains every leaf against its own stage latency.
void update_structured(StructuredLatencyModel& model, const StageSample& sample,
                       const ParamVector& k);

// Feature vector for a stage regressor: the stage's parameter subset is
// normalized against its specs and expanded to the model degree.
FeatureVector subset_features(const ParamVector& params, const std::vector<ParamSpec>& specs,
                              const std::vector<std::size_t>& subset, int degree);

// Total feature count across the distinct regressor subsets of the model,
// i.e. the size of the structured feature space.
std::size_t structured_feature_count(const StructuredLatencyModel& model);

} // namespace pipetune
