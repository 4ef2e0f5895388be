#include "pipetune/paramspace.hpp"

#include <cmath>
#include <stdexcept>

#include "pipetune/errors.hpp"
#include "pipetune/rng.hpp"

namespace pipetune {

std::size_t monomial_count(std::size_t dim, int degree) {
    // C(dim + degree, degree), built multiplicatively to stay exact.
    std::size_t num = 1, den = 1;
    for (int k = 1; k <= degree; ++k) {
        num *= dim + static_cast<std::size_t>(k);
        den *= static_cast<std::size_t>(k);
    }
    return num / den;
}

namespace {

void emit_monomials(std::size_t dim, std::size_t pos, int remaining,
                    std::vector<int>& current, std::vector<std::vector<int>>& out) {
    if (pos + 1 == dim) {
        current[pos] = remaining;
        out.push_back(current);
        return;
    }
    for (int e = remaining; e >= 0; --e) {
        current[pos] = e;
        emit_monomials(dim, pos + 1, remaining - e, current, out);
    }
}

} // namespace

std::vector<std::vector<int>> monomial_basis(std::size_t dim, int degree) {
    std::vector<std::vector<int>> basis;
    basis.reserve(monomial_count(dim, degree));
    std::vector<int> current(dim, 0);
    if (dim == 0) {
        basis.push_back({});
        return basis;
    }
    for (int d = 0; d <= degree; ++d) emit_monomials(dim, 0, d, current, basis);
    return basis;
}

FeatureVector expand_features(std::span<const double> x, int degree) {
    if (degree < 1 || degree > 3)
        throw std::invalid_argument("expand_features: degree must be 1, 2 or 3");
    for (double v : x)
        if (!std::isfinite(v)) throw NonFiniteObservation("expand_features: non-finite input");

    FeatureVector fv;
    fv.degree = degree;
    fv.basis = monomial_basis(x.size(), degree);
    fv.values.reserve(fv.basis.size());
    for (const auto& exps : fv.basis) {
        double m = 1.0;
        for (std::size_t i = 0; i < exps.size(); ++i)
            for (int e = 0; e < exps[i]; ++e) m *= x[i];
        fv.values.push_back(m);
    }
    return fv;
}

std::vector<double> normalize(const ParamVector& x, const std::vector<ParamSpec>& specs) {
    if (x.size() != specs.size())
        throw DimensionMismatch("normalize: parameter count does not match specs");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double span = specs[i].hi - specs[i].lo;
        out[i] = span > 0.0 ? (x[i] - specs[i].lo) / span : 0.0;
    }
    return out;
}

Configuration sample_random_configuration(const std::vector<ParamSpec>& specs,
                                          std::uint64_t rng_seed, std::string id) {
    if (specs.empty())
        throw std::invalid_argument("sample_random_configuration: empty spec list");
    Rng rng(rng_seed);
    Configuration cfg;
    cfg.id = std::move(id);
    cfg.params.reserve(specs.size());
    for (const auto& spec : specs) {
        if (spec.kind == ParamKind::Discrete) {
            cfg.params.push_back(static_cast<double>(
                rng.uniform_int(static_cast<std::int64_t>(spec.lo),
                                static_cast<std::int64_t>(spec.hi))));
        } else {
            cfg.params.push_back(rng.uniform_real(spec.lo, spec.hi));
        }
    }
    return cfg;
}

FeatureVector features_for(const ParamVector& params, const std::vector<ParamSpec>& specs,
                           int degree, std::span<const double> content) {
    std::vector<double> inputs = normalize(params, specs);
    inputs.insert(inputs.end(), content.begin(), content.end());
    return expand_features(inputs, degree);
}

} // namespace pipetune
