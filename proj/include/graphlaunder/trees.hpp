#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "graphlaunder/linalg.hpp"

namespace graphlaunder {

// Binary-split tree stored as a node array. Internal nodes route
// x[feature] <= threshold left, else right. Every node keeps its value so
// path contributions can be decomposed: classification trees store the
// class distribution [p0, p1], regression trees a single value.
struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> value;

    bool is_leaf() const noexcept { return feature < 0; }
};

struct DecisionTree {
    std::vector<TreeNode> nodes;
    int depth = 0;
    int n_features = 0;

    int leaf_index(std::span<const double> x) const;
    const TreeNode& leaf(std::span<const double> x) const { return nodes[static_cast<std::size_t>(leaf_index(x))]; }
    // Class-1 probability for classification trees, raw value for
    // regression trees.
    double predict_value(std::span<const double> x) const;
};

enum class SplitMode { exhaustive, random_threshold };

// Gini-impurity classification tree. feature_subsample features are
// considered per split; exhaustive mode scans midpoint thresholds,
// random_threshold draws one uniform threshold per candidate feature.
// Ties break toward the lowest feature index, then lowest threshold.
DecisionTree fit_tree(const Matrix& x, std::span<const int> y, int max_depth,
                      int min_samples_leaf, SplitMode mode, int feature_subsample,
                      std::uint64_t seed);

// Squared-error regression tree over real targets (boosting base learner).
DecisionTree fit_regression_tree(const Matrix& x, std::span<const double> targets, int max_depth,
                                 int min_samples_leaf);

enum class EnsembleKind { random_forest, extra_trees, gradient_boosted };

const char* to_string(EnsembleKind kind);

struct TreeEnsemble {
    std::vector<DecisionTree> trees;
    EnsembleKind kind = EnsembleKind::random_forest;
    double base_score = 0.0;    // boosted: initial log-odds
    double learning_rate = 0.1; // boosted shrinkage

    nlohmann::json to_json() const;
    static TreeEnsemble from_json(const nlohmann::json& j);
};

// Probability of class 1. Forests average leaf probabilities; boosted
// ensembles pass the shrunken score sum through a sigmoid.
double predict_ensemble(const TreeEnsemble& model, std::span<const double> x);

// Pre-link score: the probability itself for forests, base + lr * sum of
// tree outputs for boosted ensembles.
double predict_margin(const TreeEnsemble& model, std::span<const double> x);

struct ForestOptions {
    int n_trees = 100;
    int max_depth = 8;
    int min_samples_leaf = 1;
    int workers = 1;
};

TreeEnsemble fit_rf(const Matrix& x, std::span<const int> y, const ForestOptions& options,
                    std::uint64_t seed);
TreeEnsemble fit_ert(const Matrix& x, std::span<const int> y, const ForestOptions& options,
                     std::uint64_t seed);

struct GbtOptions {
    int n_trees = 100;
    int max_depth = 4;
    int min_samples_leaf = 1;
    double learning_rate = 0.1;
};

// Stagewise boosting: regression trees fit to logistic-loss negative
// gradients, shrunken by learning_rate.
TreeEnsemble fit_gbt(const Matrix& x, std::span<const int> y, const GbtOptions& options,
                     std::uint64_t seed, std::vector<double>* stage_losses = nullptr);

// prediction = c_full + sum_k contributions[k]; every split on the routing
// path attributes its child-minus-parent value change to the split feature.
struct ContributionDecomposition {
    double c_full = 0.0;
    std::vector<double> contributions;
    double prediction = 0.0; // margin scale: probability for forests, pre-link for boosted
};

ContributionDecomposition decompose_contributions(const TreeEnsemble& model,
                                                  std::span<const double> x);

void save_ensemble(const TreeEnsemble& model, const std::string& path);
TreeEnsemble load_ensemble(const std::string& path);

} // namespace graphlaunder
