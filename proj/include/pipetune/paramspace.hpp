#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pipetune {

enum class ParamKind { Continuous, Discrete };

// One tunable knob: an inclusive range plus the fidelity-maximizing default.
struct ParamSpec {
    std::string name;
    ParamKind kind = ParamKind::Continuous;
    double lo = 0.0;
    double hi = 1.0;
    double def = 0.0;
};

using ParamVector = std::vector<double>;

struct Configuration {
    std::string id;
    ParamVector params;
};

// Monomial basis over d inputs, all total degrees <= degree, in graded
// lexicographic order. The first element is always the constant term.
struct FeatureVector {
    std::vector<double> values;
    int degree = 1;
    std::vector<std::vector<int>> basis;  // exponent tuple per monomial
};

// Number of monomials of total degree <= degree over dim variables,
// C(dim + degree, degree).
std::size_t monomial_count(std::size_t dim, int degree);

// Exponent tuples in graded lexicographic order (degree 0 first; within one
// degree block, lexicographically descending exponents, so x1^2 precedes
// x1*x2 precedes x2^2).
std::vector<std::vector<int>> monomial_basis(std::size_t dim, int degree);

// Evaluates the full monomial basis at x. degree must be 1, 2 or 3 and all
// inputs finite.
FeatureVector expand_features(std::span<const double> x, int degree);

// Affine map of each component onto [0, 1]; a degenerate (singleton) range
// maps to 0. Values must lie within their spec ranges.
std::vector<double> normalize(const ParamVector& x, const std::vector<ParamSpec>& specs);

// Uniform draw from each spec's range (continuous: uniform real; discrete:
// uniform integer). Deterministic for a fixed seed.
Configuration sample_random_configuration(const std::vector<ParamSpec>& specs,
                                          std::uint64_t rng_seed,
                                          std::string id = "config");

// Normalized parameters (optionally with appended per-frame content
// features) expanded into the monomial basis. This is the single place that
// fixes how raw configurations become regression features.
FeatureVector features_for(const ParamVector& params, const std::vector<ParamSpec>& specs,
                           int degree, std::span<const double> content = {});

} // namespace pipetune
