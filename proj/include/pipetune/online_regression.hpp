#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pipetune {

// Knobs of the online regressor. tube is the half-width of the insensitive
// zone around the target; radius bounds the L2 norm of the weight vector
// (the feasible set the projection step maps back into).
struct RegressorConfig {
    double gamma = 0.01;   // regularization weight
    double tube = 0.001;   // seconds
    double eta0 = 0.1;     // base learning rate, step t uses eta0/sqrt(t)
    double radius = 100.0; // projection ball radius
    int degree = 3;        // polynomial feature degree
};

struct LossRecord {
    double prediction = 0.0;
    double observed = 0.0;
    double loss = 0.0;
};

// Linear model over an externally supplied feature basis, trained by
// projected subgradient steps on the insensitive loss plus an L2 penalty.
// Predictions are raw dot products and may be negative; clamping is left to
// consumers that know the quantity is a latency.
class OnlineRegressor {
public:
    OnlineRegressor() = default;
    OnlineRegressor(std::size_t feature_dim, RegressorConfig config);

    double predict(std::span<const double> features) const;

    // Insensitive loss of the current weights on one observation, including
    // the gamma * ||w||^2 term.
    double loss(std::span<const double> features, double observed) const;

    // One projected subgradient step; increments the step counter and
    // returns the loss record measured before the step.
    LossRecord update(std::span<const double> features, double observed);

    const std::vector<double>& weights() const { return weights_; }
    std::vector<double>& mutable_weights() { return weights_; }
    std::uint64_t steps_taken() const { return steps_; }
    void set_steps_taken(std::uint64_t steps) { steps_ = steps; }
    const RegressorConfig& config() const { return config_; }

private:
    std::vector<double> weights_;
    std::uint64_t steps_ = 0;
    RegressorConfig config_;
};

// Subgradient of max{|w.phi - y| - tube, 0} + gamma*||w||^2 with respect to
// w. Zero residual direction at and inside the tube boundary.
std::vector<double> loss_subgradient(std::span<const double> weights,
                                     std::span<const double> features, double observed,
                                     double tube, double gamma);

// Scales v back onto the L2 ball of the given radius when it lies outside.
void project_ball(std::vector<double>& v, double radius);

struct Sample {
    std::vector<double> features;
    double observed = 0.0;
};

// Batch fit by repeated subgradient passes: epoch e steps with eta0/sqrt(e)
// over a deterministically shuffled sample order, until the mean absolute
// weight change over an epoch drops below 1e-8 or 500 epochs elapse. Returns
// the epoch-end snapshot with the best batch objective (mean insensitive
// loss + gamma*||w||^2); the zero initial model is a candidate too.
OnlineRegressor fit_offline(const std::vector<Sample>& samples, RegressorConfig config,
                            std::uint64_t shuffle_seed = 1);

// Mean insensitive loss over the samples plus the regularizer.
double batch_objective(const OnlineRegressor& model, const std::vector<Sample>& samples);

// Cumulative online loss minus the cumulative loss of a fixed comparator.
double regret(std::span<const double> loss_history, double offline_batch_loss);

} // namespace pipetune
