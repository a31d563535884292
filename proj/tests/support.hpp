#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include <loopsoup/loopsoup.hpp>

namespace loopsoup::testing
{

inline std::string fixture_path(const std::string& name) { return std::string(LOOPSOUP_FIXTURES) + "/" + name; }

inline ::testing::AssertionResult within_se(const Estimate& est, double target, double k = 3.0)
{
    double z = z_score(est, target);
    if (std::abs(z) <= k)
        return ::testing::AssertionSuccess();
    return ::testing::AssertionFailure() << "mean " << est.mean << " se " << est.se << " target " << target
                                         << " z " << z;
}

inline ::testing::AssertionResult rel_near(double a, double b, double tol = 1e-10)
{
    if (std::abs(a - b) <= tol * std::max(1.0, std::abs(b)))
        return ::testing::AssertionSuccess();
    return ::testing::AssertionFailure() << a << " vs " << b;
}

} // namespace loopsoup::testing

namespace loopsoup::testing
{

/// Position of each tree in enumerate_rooted_trees(g), keyed by parents.
inline std::map<std::vector<VertexIndex>, std::size_t> tree_index(const WeightedGraph& g)
{
    std::map<std::vector<VertexIndex>, std::size_t> index;
    auto trees = enumerate_rooted_trees(g);
    for (std::size_t k = 0; k < trees.size(); ++k)
        index[trees[k].tree.parents()] = k;
    return index;
}

} // namespace loopsoup::testing
