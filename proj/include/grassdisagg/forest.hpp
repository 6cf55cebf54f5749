#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "grassdisagg/features.hpp"

namespace grassdisagg {

struct ForestParams {
    std::size_t n_trees = 100;
    std::size_t min_leaf = 5;
    /// Candidate features per split; 0 selects ceil(d/3).
    std::size_t mtry = 0;
    /// Draw each tree's rows with replacement; off fits every tree on all rows.
    bool bootstrap = true;
    std::uint64_t seed = 0;

    bool operator==(const ForestParams&) const = default;
};

struct TreeNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;     // go left when x[feature] <= threshold
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;  // leaf mean
    std::uint32_t samples = 0;

    bool is_leaf() const { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double predict(std::span<const double> x) const;
    bool operator==(const RegressionTree&) const = default;
};

struct ForestModel {
    std::vector<RegressionTree> trees;
    std::vector<std::uint64_t> tree_seeds;
    std::size_t n_features = 0;
    std::size_t min_leaf = 5;

    /// Mean of the tree predictions, kept inside their [min, max] range.
    double predict(std::span<const double> x) const;
    bool operator==(const ForestModel&) const = default;
};

/// Grows one CART regression tree on the given (possibly repeated) rows.
RegressionTree grow_tree(const FeatureMatrix& x, std::span<const double> y, std::vector<std::size_t> rows,
                         std::size_t min_leaf, std::size_t mtry, std::uint64_t seed);

/// Trees are grown on up to `jobs` threads; tree k only depends on
/// (data, seed, k), so the model is identical for any thread count.
ForestModel fit_forest(const FeatureMatrix& x, std::span<const double> y, const ForestParams& params = {},
                       int jobs = 1);

}  // namespace grassdisagg
