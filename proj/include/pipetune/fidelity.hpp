#pragma once

#include <cmath>
#include <vector>

namespace pipetune {

// Ground-truth outcome of a pose-detection frame: per-object recognition
// flags plus translation/rotation errors. Error units are whatever the trace
// generator documents; the reward formula is unit-dependent.
struct PoseOutcome {
    std::vector<int> recognized;          // 0 or 1 per object
    std::vector<double> translation_err;  // >= 0
    std::vector<double> rotation_err;     // >= 0, radians
};

struct PoseWeights {
    double w_tau = 0.7;
    double w_theta = 0.3;
};

struct ClassificationOutcome {
    double precision = 0.0;  // in [0, 1]
    double recall = 0.0;     // in [0, 1]
};

// Mean over objects of recognized * exp(-(w_tau*tau + w_theta*theta)).
inline double pose_reward(const PoseOutcome& outcome, const PoseWeights& weights = {}) {
    const std::size_t n = outcome.recognized.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!outcome.recognized[i]) continue;
        sum += std::exp(-(weights.w_tau * outcome.translation_err[i] +
                          weights.w_theta * outcome.rotation_err[i]));
    }
    return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

// F1 measure 2PR/(P+R); defined as 0 at P = R = 0 where the formula is 0/0.
inline double f1_reward(const ClassificationOutcome& outcome) {
    const double denom = outcome.precision + outcome.recall;
    if (denom <= 0.0) return 0.0;
    return 2.0 * outcome.precision * outcome.recall / denom;
}

} // namespace pipetune
