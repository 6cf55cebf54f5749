#include "grassdisagg/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "grassdisagg/error.hpp"
#include "grassdisagg/parallel.hpp"
#include "grassdisagg/random.hpp"

namespace grassdisagg {

double RegressionTree::predict(std::span<const double> x) const {
    std::size_t k = 0;
    while (!nodes[k].is_leaf()) {
        const TreeNode& n = nodes[k];
        k = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes[k].value;
}

double ForestModel::predict(std::span<const double> x) const {
    if (x.size() != n_features)
        throw Error(ErrorCode::WidthMismatch,
                    "feature width " + std::to_string(x.size()) + " != " + std::to_string(n_features));
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& tree : trees) {
        const double v = tree.predict(x);
        sum += v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (lo == hi) return lo;
    return std::clamp(sum / static_cast<double>(trees.size()), lo, hi);
}

namespace {

struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    double score = -std::numeric_limits<double>::infinity();
    bool found = false;
};

double leaf_value(std::span<const double> y, std::span<const std::size_t> rows) {
    double sum = 0.0;
    double lo = y[rows[0]];
    double hi = y[rows[0]];
    for (std::size_t r : rows) {
        sum += y[r];
        lo = std::min(lo, y[r]);
        hi = std::max(hi, y[r]);
    }
    if (lo == hi) return lo;
    return std::clamp(sum / static_cast<double>(rows.size()), lo, hi);
}

class TreeBuilder {
public:
    TreeBuilder(const FeatureMatrix& x, std::span<const double> y, std::size_t min_leaf, std::size_t mtry,
                std::uint64_t seed)
        : x_(x), y_(y), min_leaf_(min_leaf), mtry_(std::min(mtry, x.cols())), rng_(seed),
          features_(x.cols()) {
        std::iota(features_.begin(), features_.end(), std::size_t{0});
    }

    RegressionTree build(std::vector<std::size_t> rows) {
        rows_ = std::move(rows);
        RegressionTree tree;
        struct Pending {
            std::size_t node;
            std::size_t begin;
            std::size_t end;
        };
        tree.nodes.emplace_back();
        std::vector<Pending> stack{{0, 0, rows_.size()}};
        while (!stack.empty()) {
            const Pending p = stack.back();
            stack.pop_back();
            const std::span<std::size_t> node_rows(rows_.data() + p.begin, p.end - p.begin);
            tree.nodes[p.node].samples = static_cast<std::uint32_t>(node_rows.size());

            const Split split = best_split(node_rows);
            if (!split.found) {
                tree.nodes[p.node].value = leaf_value(y_, node_rows);
                continue;
            }
            const auto mid = std::stable_partition(node_rows.begin(), node_rows.end(), [&](std::size_t r) {
                return x_(r, split.feature) <= split.threshold;
            });
            const std::size_t cut = p.begin + static_cast<std::size_t>(mid - node_rows.begin());

            const auto left = static_cast<std::int32_t>(tree.nodes.size());
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            TreeNode& n = tree.nodes[p.node];
            n.feature = static_cast<std::int32_t>(split.feature);
            n.threshold = split.threshold;
            n.left = left;
            n.right = left + 1;
            n.value = leaf_value(y_, node_rows);
            // Right pushed first so the left subtree is grown first.
            stack.push_back({static_cast<std::size_t>(left + 1), cut, p.end});
            stack.push_back({static_cast<std::size_t>(left), p.begin, cut});
        }
        return tree;
    }

private:
    Split best_split(std::span<const std::size_t> rows) {
        Split best;
        const std::size_t n = rows.size();
        if (n < 2 * min_leaf_) return best;

        double total = 0.0;
        bool constant = true;
        for (std::size_t r : rows) {
            total += y_[r];
            constant = constant && y_[r] == y_[rows[0]];
        }
        if (constant) return best;
        const double parent_score = total * total / static_cast<double>(n);

        // Partial Fisher-Yates draw of mtry candidate features.
        for (std::size_t k = 0; k < mtry_; ++k) {
            const std::size_t pick = k + rng_.index(features_.size() - k);
            std::swap(features_[k], features_[pick]);
        }

        pairs_.resize(n);
        for (std::size_t k = 0; k < mtry_; ++k) {
            const std::size_t f = features_[k];
            for (std::size_t i = 0; i < n; ++i) pairs_[i] = {x_(rows[i], f), y_[rows[i]]};
            std::sort(pairs_.begin(), pairs_.end());
            if (pairs_.front().first == pairs_.back().first) continue;

            double left_sum = 0.0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                left_sum += pairs_[i].second;
                const std::size_t n_left = i + 1;
                if (n_left < min_leaf_) continue;
                if (n - n_left < min_leaf_) break;
                if (pairs_[i].first == pairs_[i + 1].first) continue;
                const double right_sum = total - left_sum;
                const double score = left_sum * left_sum / static_cast<double>(n_left) +
                                     right_sum * right_sum / static_cast<double>(n - n_left);
                if (score > best.score) {
                    best.score = score;
                    best.feature = f;
                    double t = 0.5 * (pairs_[i].first + pairs_[i + 1].first);
                    if (!(t < pairs_[i + 1].first)) t = pairs_[i].first;
                    best.threshold = t;
                    best.found = true;
                }
            }
        }
        if (best.found && !(best.score > parent_score + 1e-12 * std::abs(parent_score))) best.found = false;
        return best;
    }

    const FeatureMatrix& x_;
    std::span<const double> y_;
    std::size_t min_leaf_;
    std::size_t mtry_;
    Rng rng_;
    std::vector<std::size_t> features_;
    std::vector<std::size_t> rows_;
    std::vector<std::pair<double, double>> pairs_;
};

}  // namespace

RegressionTree grow_tree(const FeatureMatrix& x, std::span<const double> y, std::vector<std::size_t> rows,
                         std::size_t min_leaf, std::size_t mtry, std::uint64_t seed) {
    if (rows.empty()) throw Error(ErrorCode::DegenerateInput, "tree needs at least one row");
    return TreeBuilder(x, y, std::max<std::size_t>(1, min_leaf), std::max<std::size_t>(1, mtry), seed)
        .build(std::move(rows));
}

ForestModel fit_forest(const FeatureMatrix& x, std::span<const double> y, const ForestParams& params, int jobs) {
    const std::size_t m = x.rows();
    const std::size_t d = x.cols();
    if (y.size() != m)
        throw Error(ErrorCode::ShapeError, std::to_string(m) + " rows but " + std::to_string(y.size()) + " targets");
    if (params.n_trees == 0) throw Error(ErrorCode::ConfigError, "forest needs at least one tree");
    if (params.min_leaf == 0) throw Error(ErrorCode::ConfigError, "min_leaf must be >= 1");
    if (m == 0 || m < params.min_leaf)
        throw Error(ErrorCode::DegenerateInput, std::to_string(m) + " rows cannot fill a leaf of " +
                                                    std::to_string(params.min_leaf));
    if (d == 0) throw Error(ErrorCode::DegenerateInput, "no features");

    const std::size_t mtry = params.mtry > 0 ? std::min(params.mtry, d) : (d + 2) / 3;

    ForestModel model;
    model.n_features = d;
    model.min_leaf = params.min_leaf;
    model.trees.resize(params.n_trees);
    model.tree_seeds.resize(params.n_trees);
    for (std::size_t k = 0; k < params.n_trees; ++k) model.tree_seeds[k] = derive_seed(params.seed, "tree", k);

    parallel_for(params.n_trees, jobs, [&](std::size_t k) {
        Rng bootstrap_rng(derive_seed(model.tree_seeds[k], "bootstrap"));
        std::vector<std::size_t> rows(m);
        if (params.bootstrap) {
            for (auto& r : rows) r = bootstrap_rng.index(m);
        } else {
            std::iota(rows.begin(), rows.end(), std::size_t{0});
        }
        model.trees[k] = grow_tree(x, y, std::move(rows), params.min_leaf, mtry, derive_seed(model.tree_seeds[k], "split"));
    });
    return model;
}

}  // namespace grassdisagg
