#include "pipetune/online_regression.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pipetune/errors.hpp"
#include "pipetune/rng.hpp"

namespace pipetune {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double squared_norm(std::span<const double> v) { return dot(v, v); }

void check_dims(std::size_t weights, std::size_t features) {
    if (weights != features)
        throw DimensionMismatch("feature length " + std::to_string(features) +
                                " does not match weight length " + std::to_string(weights));
}

// One projected subgradient step with an explicit rate; shared by the online
// update and the offline epochs.
void step(std::vector<double>& weights, std::span<const double> features, double observed,
          const RegressorConfig& cfg, double eta) {
    const double residual = dot(weights, features) - observed;
    double s = 0.0;
    if (std::abs(residual) > cfg.tube) s = residual > 0.0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
        weights[i] -= eta * (s * features[i] + 2.0 * cfg.gamma * weights[i]);
    project_ball(weights, cfg.radius);
}

} // namespace

void project_ball(std::vector<double>& v, double radius) {
    const double norm = std::sqrt(squared_norm(v));
    if (norm <= radius || norm == 0.0) return;
    const double scale = radius / norm;
    for (double& x : v) x *= scale;
}

std::vector<double> loss_subgradient(std::span<const double> weights,
                                     std::span<const double> features, double observed,
                                     double tube, double gamma) {
    check_dims(weights.size(), features.size());
    const double residual = dot(weights, features) - observed;
    double s = 0.0;
    if (std::abs(residual) > tube) s = residual > 0.0 ? 1.0 : -1.0;
    std::vector<double> g(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i)
        g[i] = s * features[i] + 2.0 * gamma * weights[i];
    return g;
}

OnlineRegressor::OnlineRegressor(std::size_t feature_dim, RegressorConfig config)
    : weights_(feature_dim, 0.0), config_(config) {
    if (config_.gamma < 0.0 || config_.tube < 0.0 || config_.eta0 <= 0.0 ||
        config_.radius <= 0.0)
        throw std::invalid_argument("OnlineRegressor: invalid config");
}

double OnlineRegressor::predict(std::span<const double> features) const {
    check_dims(weights_.size(), features.size());
    return dot(weights_, features);
}

double OnlineRegressor::loss(std::span<const double> features, double observed) const {
    const double residual = predict(features) - observed;
    return std::max(std::abs(residual) - config_.tube, 0.0) +
           config_.gamma * squared_norm(weights_);
}

LossRecord OnlineRegressor::update(std::span<const double> features, double observed) {
    check_dims(weights_.size(), features.size());
    if (!std::isfinite(observed))
        throw NonFiniteObservation("update: observation is not finite");

    LossRecord record;
    record.prediction = dot(weights_, features);
    record.observed = observed;
    record.loss = std::max(std::abs(record.prediction - observed) - config_.tube, 0.0) +
                  config_.gamma * squared_norm(weights_);

    const double eta = config_.eta0 / std::sqrt(static_cast<double>(steps_ + 1));
    step(weights_, features, observed, config_, eta);
    ++steps_;
    return record;
}

double batch_objective(const OnlineRegressor& model, const std::vector<Sample>& samples) {
    double sum = 0.0;
    for (const auto& s : samples) {
        const double residual = model.predict(s.features) - s.observed;
        sum += std::max(std::abs(residual) - model.config().tube, 0.0);
    }
    return sum / static_cast<double>(samples.size()) +
           model.config().gamma * squared_norm(model.weights());
}

OnlineRegressor fit_offline(const std::vector<Sample>& samples, RegressorConfig config,
                            std::uint64_t shuffle_seed) {
    if (samples.empty()) throw EmptySampleSet("fit_offline: no samples");
    const std::size_t dim = samples.front().features.size();
    for (const auto& s : samples)
        if (s.features.size() != dim)
            throw DimensionMismatch("fit_offline: ragged feature matrix");

    OnlineRegressor model(dim, config);
    std::vector<double> weights = model.weights();
    std::vector<double> best = weights;
    double best_objective = batch_objective(model, samples);

    Rng rng(shuffle_seed);
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);

    constexpr int kMaxEpochs = 500;
    constexpr double kWeightTol = 1e-8;
    for (int epoch = 1; epoch <= kMaxEpochs; ++epoch) {
        const double eta = config.eta0 / std::sqrt(static_cast<double>(epoch));
        rng.shuffle(order);
        const std::vector<double> before = weights;
        for (std::size_t i : order)
            step(weights, samples[i].features, samples[i].observed, config, eta);

        OnlineRegressor probe(dim, config);
        probe.mutable_weights() = weights;
        const double objective = batch_objective(probe, samples);
        if (objective < best_objective) {
            best_objective = objective;
            best = weights;
        }

        double change = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i)
            change += std::abs(weights[i] - before[i]);
        if (change / static_cast<double>(weights.size()) < kWeightTol) break;
    }

    model.mutable_weights() = best;
    model.set_steps_taken(0);
    return model;
}

double regret(std::span<const double> loss_history, double offline_batch_loss) {
    double online = 0.0;
    for (double l : loss_history) online += l;
    return online - offline_batch_loss;
}

} // namespace pipetune
