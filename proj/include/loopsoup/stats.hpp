#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "error.hpp"

namespace loopsoup
{

/// Monte Carlo mean with its standard error.
struct Estimate
{
    double mean = 0.0;
    double se = 0.0;
    std::size_t count = 0;
};

/// Mean and standard error of i.i.d. values.
inline Estimate mean_and_se(std::span<const double> values)
{
    if (values.empty())
        throw DomainError("cannot estimate from an empty sample");
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values)
        mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : values)
        ss += (v - mean) * (v - mean);
    double var = values.size() > 1 ? ss / (n - 1.0) : 0.0;
    return {mean, std::sqrt(var / n), values.size()};
}

/// Batch-means standard error for a correlated (Markov chain) sequence.
/// Uses floor(sqrt(n)) batches, at least 2 and at most n.
inline Estimate batch_means(std::span<const double> values)
{
    if (values.empty())
        throw DomainError("cannot estimate from an empty sample");
    const std::size_t n = values.size();
    std::size_t batches = std::clamp<std::size_t>(static_cast<std::size_t>(std::sqrt(static_cast<double>(n))), 2, n);
    if (n < 4)
        return mean_and_se(values);
    const std::size_t size = n / batches;
    std::vector<double> means;
    for (std::size_t b = 0; b < batches; ++b) {
        double acc = 0.0;
        for (std::size_t i = b * size; i < (b + 1) * size; ++i)
            acc += values[i];
        means.push_back(acc / static_cast<double>(size));
    }
    double mean = 0.0;
    for (double v : values)
        mean += v;
    mean /= static_cast<double>(n);
    auto batch = mean_and_se(means);
    return {mean, batch.se, n};
}

/// (mean - target) / se; zero when both the deviation and the error vanish.
inline double z_score(const Estimate& est, double target)
{
    double dev = est.mean - target;
    if (est.se > 0.0)
        return dev / est.se;
    return std::abs(dev) <= 1e-12 * std::max(1.0, std::abs(target))
               ? 0.0
               : std::copysign(std::numeric_limits<double>::infinity(), dev);
}

struct ChiSquareResult
{
    double statistic = 0.0;
    std::size_t dof = 0;
    double p_value = 1.0;
};

/// Pearson goodness of fit of counts against probabilities. A count in a
/// zero-probability cell gives p = 0.
inline ChiSquareResult chi_square(std::span<const std::uint64_t> counts, std::span<const double> probs,
                                  double inflation = 1.0)
{
    if (counts.size() != probs.size() || counts.empty())
        throw DomainError("chi-square needs matching count and probability vectors");
    double total = 0.0;
    for (auto c : counts)
        total += static_cast<double>(c);
    ChiSquareResult out;
    std::size_t cells = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        double expected = total * probs[i];
        if (expected <= 0.0) {
            if (counts[i] > 0) {
                out.statistic = std::numeric_limits<double>::infinity();
                out.p_value = 0.0;
                out.dof = counts.size() - 1;
                return out;
            }
            continue;
        }
        ++cells;
        double d = static_cast<double>(counts[i]) - expected;
        out.statistic += d * d / expected;
    }
    out.statistic /= inflation;
    out.dof = cells > 0 ? cells - 1 : 0;
    if (out.dof == 0)
        return out;
    boost::math::chi_squared dist(static_cast<double>(out.dof));
    out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
    return out;
}

/// Chi-square for a Markov chain's category sequence. The Pearson statistic
/// is divided by the mean variance inflation of the category indicators,
/// estimated by batch means (never below 1).
inline ChiSquareResult chi_square_chain(std::span<const std::size_t> sequence,
                                        std::span<const double> probs)
{
    std::vector<std::uint64_t> counts(probs.size(), 0);
    for (auto s : sequence)
        ++counts.at(s);
    double inflation = 0.0;
    std::size_t used = 0;
    std::vector<double> indicator(sequence.size());
    for (std::size_t k = 0; k < probs.size(); ++k) {
        if (probs[k] <= 0.0 || probs[k] >= 1.0)
            continue;
        for (std::size_t i = 0; i < sequence.size(); ++i)
            indicator[i] = sequence[i] == k ? 1.0 : 0.0;
        auto bm = batch_means(indicator);
        double iid_var = probs[k] * (1.0 - probs[k]) / static_cast<double>(sequence.size());
        inflation += bm.se * bm.se / iid_var;
        ++used;
    }
    inflation = used > 0 ? std::max(1.0, inflation / static_cast<double>(used)) : 1.0;
    return chi_square(counts, probs, inflation);
}

} // namespace loopsoup
