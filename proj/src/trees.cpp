#include "graphlaunder/trees.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

#include "graphlaunder/errors.hpp"
#include "graphlaunder/rng.hpp"

namespace graphlaunder {

namespace {

constexpr double kMinGain = 1e-12;

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;

    // Strictly-better gain wins; exact ties keep the earlier candidate, so
    // scanning features and thresholds in ascending order fixes tie-breaks.
    void consider(int f, double t, double g) {
        if (g <= kMinGain) return;
        if (!found || g > gain) {
            found = true;
            feature = f;
            threshold = t;
            gain = g;
        }
    }
};

double gini(double n0, double n1) {
    double n = n0 + n1;
    if (n == 0.0) return 0.0;
    double p0 = n0 / n;
    double p1 = n1 / n;
    return 1.0 - p0 * p0 - p1 * p1;
}

std::vector<int> candidate_features(int n_features, int feature_subsample,
                                    std::mt19937_64& rng) {
    if (feature_subsample >= n_features) {
        std::vector<int> all(static_cast<std::size_t>(n_features));
        for (int f = 0; f < n_features; ++f) all[static_cast<std::size_t>(f)] = f;
        return all;
    }
    std::vector<int> pool(static_cast<std::size_t>(n_features));
    for (int f = 0; f < n_features; ++f) pool[static_cast<std::size_t>(f)] = f;
    partial_shuffle(pool, static_cast<std::size_t>(feature_subsample), rng);
    pool.resize(static_cast<std::size_t>(feature_subsample));
    std::sort(pool.begin(), pool.end());
    return pool;
}

class ClassificationBuilder {
public:
    ClassificationBuilder(const Matrix& x, std::span<const int> y, int max_depth,
                          int min_samples_leaf, SplitMode mode, int feature_subsample,
                          std::uint64_t seed)
        : x_(x),
          y_(y),
          max_depth_(max_depth),
          min_leaf_(std::max(1, min_samples_leaf)),
          mode_(mode),
          feature_subsample_(std::max(1, feature_subsample)),
          rng_(make_rng(mix_seed(seed, 0x73EEULL))) {}

    DecisionTree build() {
        std::vector<int> indices(static_cast<std::size_t>(x_.rows));
        for (int i = 0; i < x_.rows; ++i) indices[static_cast<std::size_t>(i)] = i;
        DecisionTree tree;
        tree.n_features = x_.cols;
        grow(tree, indices, 0);
        tree.depth = depth_reached_;
        return tree;
    }

private:
    int grow(DecisionTree& tree, std::vector<int>& indices, int depth) {
        depth_reached_ = std::max(depth_reached_, depth);
        double n1 = 0.0;
        for (int i : indices) n1 += y_[static_cast<std::size_t>(i)];
        const double n = static_cast<double>(indices.size());
        const double n0 = n - n1;

        int node_index = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes[static_cast<std::size_t>(node_index)].value = {n0 / n, n1 / n};

        bool pure = n0 == 0.0 || n1 == 0.0;
        if (pure || depth >= max_depth_ ||
            static_cast<int>(indices.size()) < 2 * min_leaf_) {
            return node_index;
        }

        SplitChoice choice = find_split(indices, n0, n1);
        if (!choice.found) return node_index;

        std::vector<int> left, right;
        left.reserve(indices.size());
        right.reserve(indices.size());
        for (int i : indices) {
            (x_(i, choice.feature) <= choice.threshold ? left : right).push_back(i);
        }
        indices.clear();
        indices.shrink_to_fit();

        int left_index = grow(tree, left, depth + 1);
        int right_index = grow(tree, right, depth + 1);
        auto& node = tree.nodes[static_cast<std::size_t>(node_index)];
        node.feature = choice.feature;
        node.threshold = choice.threshold;
        node.left = left_index;
        node.right = right_index;
        return node_index;
    }

    SplitChoice find_split(const std::vector<int>& indices, double n0, double n1) {
        SplitChoice choice;
        const double n = static_cast<double>(indices.size());
        const double parent = gini(n0, n1);
        auto features = candidate_features(x_.cols, feature_subsample_, rng_);

        std::vector<std::pair<double, int>> sorted; // (value, label)
        for (int f : features) {
            if (mode_ == SplitMode::exhaustive) {
                sorted.clear();
                for (int i : indices) {
                    sorted.emplace_back(x_(i, f), y_[static_cast<std::size_t>(i)]);
                }
                std::sort(sorted.begin(), sorted.end());
                double left1 = 0.0;
                for (std::size_t pos = 1; pos < sorted.size(); ++pos) {
                    left1 += sorted[pos - 1].second;
                    if (sorted[pos].first == sorted[pos - 1].first) continue;
                    double nl = static_cast<double>(pos);
                    double nr = n - nl;
                    if (nl < min_leaf_ || nr < min_leaf_) continue;
                    double gain = parent - (nl * gini(nl - left1, left1) +
                                            nr * gini(nr - (n1 - left1), n1 - left1)) /
                                               n;
                    double threshold =
                        sorted[pos - 1].first + (sorted[pos].first - sorted[pos - 1].first) / 2.0;
                    choice.consider(f, threshold, gain);
                }
            } else {
                double lo = std::numeric_limits<double>::infinity();
                double hi = -std::numeric_limits<double>::infinity();
                for (int i : indices) {
                    lo = std::min(lo, x_(i, f));
                    hi = std::max(hi, x_(i, f));
                }
                if (!(hi > lo)) continue;
                std::uniform_real_distribution<double> dist(lo, hi);
                double threshold = dist(rng_);
                double nl = 0.0, left1 = 0.0;
                for (int i : indices) {
                    if (x_(i, f) <= threshold) {
                        nl += 1.0;
                        left1 += y_[static_cast<std::size_t>(i)];
                    }
                }
                double nr = n - nl;
                if (nl < min_leaf_ || nr < min_leaf_) continue;
                double gain = parent - (nl * gini(nl - left1, left1) +
                                        nr * gini(nr - (n1 - left1), n1 - left1)) /
                                           n;
                choice.consider(f, threshold, gain);
            }
        }
        return choice;
    }

    const Matrix& x_;
    std::span<const int> y_;
    int max_depth_;
    int min_leaf_;
    SplitMode mode_;
    int feature_subsample_;
    std::mt19937_64 rng_;
    int depth_reached_ = 0;
};

class RegressionBuilder {
public:
    RegressionBuilder(const Matrix& x, std::span<const double> t, int max_depth,
                      int min_samples_leaf)
        : x_(x), t_(t), max_depth_(max_depth), min_leaf_(std::max(1, min_samples_leaf)) {}

    DecisionTree build() {
        std::vector<int> indices(static_cast<std::size_t>(x_.rows));
        for (int i = 0; i < x_.rows; ++i) indices[static_cast<std::size_t>(i)] = i;
        DecisionTree tree;
        tree.n_features = x_.cols;
        grow(tree, indices, 0);
        tree.depth = depth_reached_;
        return tree;
    }

private:
    int grow(DecisionTree& tree, std::vector<int>& indices, int depth) {
        depth_reached_ = std::max(depth_reached_, depth);
        double sum = 0.0, sumsq = 0.0;
        for (int i : indices) {
            sum += t_[static_cast<std::size_t>(i)];
            sumsq += t_[static_cast<std::size_t>(i)] * t_[static_cast<std::size_t>(i)];
        }
        const double n = static_cast<double>(indices.size());

        int node_index = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes[static_cast<std::size_t>(node_index)].value = {sum / n};

        double sse = sumsq - sum * sum / n;
        if (depth >= max_depth_ || static_cast<int>(indices.size()) < 2 * min_leaf_ ||
            sse <= kMinGain) {
            return node_index;
        }

        SplitChoice choice;
        std::vector<std::pair<double, double>> sorted; // (value, target)
        for (int f = 0; f < x_.cols; ++f) {
            sorted.clear();
            for (int i : indices) sorted.emplace_back(x_(i, f), t_[static_cast<std::size_t>(i)]);
            std::sort(sorted.begin(), sorted.end());
            double lsum = 0.0, lsumsq = 0.0;
            for (std::size_t pos = 1; pos < sorted.size(); ++pos) {
                lsum += sorted[pos - 1].second;
                lsumsq += sorted[pos - 1].second * sorted[pos - 1].second;
                if (sorted[pos].first == sorted[pos - 1].first) continue;
                double nl = static_cast<double>(pos);
                double nr = n - nl;
                if (nl < min_leaf_ || nr < min_leaf_) continue;
                double rsum = sum - lsum;
                double rsumsq = sumsq - lsumsq;
                double gain = sse - (lsumsq - lsum * lsum / nl) - (rsumsq - rsum * rsum / nr);
                double threshold =
                    sorted[pos - 1].first + (sorted[pos].first - sorted[pos - 1].first) / 2.0;
                choice.consider(f, threshold, gain);
            }
        }
        if (!choice.found) return node_index;

        std::vector<int> left, right;
        for (int i : indices) {
            (x_(i, choice.feature) <= choice.threshold ? left : right).push_back(i);
        }
        indices.clear();
        indices.shrink_to_fit();

        int left_index = grow(tree, left, depth + 1);
        int right_index = grow(tree, right, depth + 1);
        auto& node = tree.nodes[static_cast<std::size_t>(node_index)];
        node.feature = choice.feature;
        node.threshold = choice.threshold;
        node.left = left_index;
        node.right = right_index;
        return node_index;
    }

    const Matrix& x_;
    std::span<const double> t_;
    int max_depth_;
    int min_leaf_;
    int depth_reached_ = 0;
};

void check_dataset(const Matrix& x, std::size_t labels) {
    if (x.rows == 0 || labels == 0) throw EmptyDataset("cannot fit on an empty dataset");
    if (static_cast<std::size_t>(x.rows) != labels) {
        throw DimensionMismatch("row count differs from label count");
    }
}

void check_features(const DecisionTree& tree, std::span<const double> x) {
    if (static_cast<int>(x.size()) != tree.n_features) {
        throw DimensionMismatch("input has " + std::to_string(x.size()) + " features, tree expects " +
                                std::to_string(tree.n_features));
    }
}

int sqrt_features(int m) {
    return std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(m)))));
}

// Per-tree seeded fits, optionally across threads; slot order keeps the
// result independent of scheduling.
template <typename FitOne>
std::vector<DecisionTree> fit_parallel(int n_trees, int workers, FitOne fit_one) {
    std::vector<DecisionTree> trees(static_cast<std::size_t>(n_trees));
    workers = std::max(1, workers);
    if (workers == 1 || n_trees < 2) {
        for (int t = 0; t < n_trees; ++t) trees[static_cast<std::size_t>(t)] = fit_one(t);
        return trees;
    }
    std::vector<std::thread> pool;
    int chunk = (n_trees + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        int begin = w * chunk;
        int end = std::min(n_trees, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            for (int t = begin; t < end; ++t) trees[static_cast<std::size_t>(t)] = fit_one(t);
        });
    }
    for (auto& th : pool) th.join();
    return trees;
}

double tree_value_scalar(const TreeNode& node, EnsembleKind kind) {
    return kind == EnsembleKind::gradient_boosted ? node.value[0] : node.value[1];
}

} // namespace

int DecisionTree::leaf_index(std::span<const double> x) const {
    check_features(*this, x);
    int idx = 0;
    while (!nodes[static_cast<std::size_t>(idx)].is_leaf()) {
        const auto& node = nodes[static_cast<std::size_t>(idx)];
        idx = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    }
    return idx;
}

double DecisionTree::predict_value(std::span<const double> x) const {
    const TreeNode& l = leaf(x);
    return l.value.size() > 1 ? l.value[1] : l.value[0];
}

DecisionTree fit_tree(const Matrix& x, std::span<const int> y, int max_depth,
                      int min_samples_leaf, SplitMode mode, int feature_subsample,
                      std::uint64_t seed) {
    check_dataset(x, y.size());
    return ClassificationBuilder(x, y, max_depth, min_samples_leaf, mode, feature_subsample, seed)
        .build();
}

DecisionTree fit_regression_tree(const Matrix& x, std::span<const double> targets, int max_depth,
                                 int min_samples_leaf) {
    check_dataset(x, targets.size());
    return RegressionBuilder(x, targets, max_depth, min_samples_leaf).build();
}

const char* to_string(EnsembleKind kind) {
    switch (kind) {
        case EnsembleKind::random_forest: return "random_forest";
        case EnsembleKind::extra_trees: return "extra_trees";
        case EnsembleKind::gradient_boosted: return "gradient_boosted";
    }
    return "random_forest";
}

double predict_ensemble(const TreeEnsemble& model, std::span<const double> x) {
    if (model.kind == EnsembleKind::gradient_boosted) {
        return sigmoid(predict_margin(model, x));
    }
    return predict_margin(model, x);
}

double predict_margin(const TreeEnsemble& model, std::span<const double> x) {
    if (model.kind == EnsembleKind::gradient_boosted) {
        double score = model.base_score;
        for (const auto& tree : model.trees) {
            score += model.learning_rate * tree.predict_value(x);
        }
        return score;
    }
    if (model.trees.empty()) throw EmptyEnsemble("forest has no trees");
    double sum = 0.0;
    for (const auto& tree : model.trees) sum += tree.predict_value(x);
    return sum / static_cast<double>(model.trees.size());
}

TreeEnsemble fit_rf(const Matrix& x, std::span<const int> y, const ForestOptions& options,
                    std::uint64_t seed) {
    check_dataset(x, y.size());
    if (options.n_trees < 1) throw ConfigError("forest needs at least one tree");
    TreeEnsemble model;
    model.kind = EnsembleKind::random_forest;
    const int subsample = sqrt_features(x.cols);

    model.trees = fit_parallel(options.n_trees, options.workers, [&](int t) {
        auto rng = make_rng(mix_seed(seed, 0x2F0ULL, static_cast<std::uint64_t>(t)));
        std::uniform_int_distribution<int> pick(0, x.rows - 1);
        Matrix xb(x.rows, x.cols);
        std::vector<int> yb(static_cast<std::size_t>(x.rows));
        for (int i = 0; i < x.rows; ++i) {
            int j = pick(rng);
            std::copy_n(x.row(j).begin(), x.cols, xb.row(i).begin());
            yb[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(j)];
        }
        return fit_tree(xb, yb, options.max_depth, options.min_samples_leaf,
                        SplitMode::exhaustive, subsample,
                        mix_seed(seed, 0x2F1ULL, static_cast<std::uint64_t>(t)));
    });
    return model;
}

TreeEnsemble fit_ert(const Matrix& x, std::span<const int> y, const ForestOptions& options,
                     std::uint64_t seed) {
    check_dataset(x, y.size());
    if (options.n_trees < 1) throw ConfigError("forest needs at least one tree");
    TreeEnsemble model;
    model.kind = EnsembleKind::extra_trees;
    const int subsample = sqrt_features(x.cols);

    model.trees = fit_parallel(options.n_trees, options.workers, [&](int t) {
        return fit_tree(x, y, options.max_depth, options.min_samples_leaf,
                        SplitMode::random_threshold, subsample,
                        mix_seed(seed, 0xE27ULL, static_cast<std::uint64_t>(t)));
    });
    return model;
}

TreeEnsemble fit_gbt(const Matrix& x, std::span<const int> y, const GbtOptions& options,
                     std::uint64_t seed, std::vector<double>* stage_losses) {
    check_dataset(x, y.size());
    if (options.n_trees < 1) throw ConfigError("boosting needs at least one stage");
    (void)seed; // stagewise boosting is deterministic by construction

    TreeEnsemble model;
    model.kind = EnsembleKind::gradient_boosted;
    model.learning_rate = options.learning_rate;

    double positives = 0.0;
    for (int label : y) positives += label;
    double prior = std::clamp(positives / static_cast<double>(y.size()), 1e-6, 1.0 - 1e-6);
    model.base_score = std::log(prior / (1.0 - prior));

    std::vector<double> score(y.size(), model.base_score);
    std::vector<double> residual(y.size());
    auto record_loss = [&] {
        if (!stage_losses) return;
        double loss = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            double s = score[i];
            loss += y[i] ? -log_sigmoid(s) : -log_sigmoid(-s);
        }
        stage_losses->push_back(loss / static_cast<double>(y.size()));
    };
    record_loss();

    for (int stage = 0; stage < options.n_trees; ++stage) {
        for (std::size_t i = 0; i < y.size(); ++i) {
            residual[i] = static_cast<double>(y[i]) - sigmoid(score[i]);
        }
        DecisionTree tree =
            fit_regression_tree(x, residual, options.max_depth, options.min_samples_leaf);
        for (std::size_t i = 0; i < y.size(); ++i) {
            score[i] += options.learning_rate *
                        tree.predict_value(x.row(static_cast<int>(i)));
        }
        model.trees.push_back(std::move(tree));
        record_loss();
    }
    return model;
}

ContributionDecomposition decompose_contributions(const TreeEnsemble& model,
                                                  std::span<const double> x) {
    if (model.trees.empty() && model.kind != EnsembleKind::gradient_boosted) {
        throw EmptyEnsemble("forest has no trees");
    }
    const int n_features = model.trees.empty() ? static_cast<int>(x.size())
                                               : model.trees.front().n_features;
    if (static_cast<int>(x.size()) != n_features) {
        throw DimensionMismatch("input feature length mismatch");
    }

    ContributionDecomposition out;
    out.contributions.assign(static_cast<std::size_t>(n_features), 0.0);
    const bool boosted = model.kind == EnsembleKind::gradient_boosted;
    const double scale = boosted ? model.learning_rate
                                 : 1.0 / static_cast<double>(model.trees.size());
    out.c_full = boosted ? model.base_score : 0.0;

    for (const auto& tree : model.trees) {
        out.c_full += scale * tree_value_scalar(tree.nodes[0], model.kind);
        int idx = 0;
        while (!tree.nodes[static_cast<std::size_t>(idx)].is_leaf()) {
            const auto& node = tree.nodes[static_cast<std::size_t>(idx)];
            int next = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                   : node.right;
            double delta = tree_value_scalar(tree.nodes[static_cast<std::size_t>(next)], model.kind) -
                           tree_value_scalar(node, model.kind);
            out.contributions[static_cast<std::size_t>(node.feature)] += scale * delta;
            idx = next;
        }
    }
    out.prediction = predict_margin(model, x);
    return out;
}

nlohmann::json TreeEnsemble::to_json() const {
    nlohmann::json trees_json = nlohmann::json::array();
    for (const auto& tree : trees) {
        nlohmann::json nodes_json = nlohmann::json::array();
        for (const auto& node : tree.nodes) {
            nodes_json.push_back({{"f", node.feature},
                                  {"t", node.threshold},
                                  {"l", node.left},
                                  {"r", node.right},
                                  {"v", node.value}});
        }
        trees_json.push_back(
            {{"depth", tree.depth}, {"n_features", tree.n_features}, {"nodes", nodes_json}});
    }
    return {{"version", 1},
            {"kind", to_string(kind)},
            {"base_score", base_score},
            {"learning_rate", learning_rate},
            {"trees", trees_json}};
}

TreeEnsemble TreeEnsemble::from_json(const nlohmann::json& j) {
    if (j.value("version", 0) != 1) throw SerializationError("unsupported ensemble version");
    TreeEnsemble model;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "random_forest") {
        model.kind = EnsembleKind::random_forest;
    } else if (kind == "extra_trees") {
        model.kind = EnsembleKind::extra_trees;
    } else if (kind == "gradient_boosted") {
        model.kind = EnsembleKind::gradient_boosted;
    } else {
        throw SerializationError("unknown ensemble kind " + kind);
    }
    model.base_score = j.at("base_score").get<double>();
    model.learning_rate = j.at("learning_rate").get<double>();
    for (const auto& tree_json : j.at("trees")) {
        DecisionTree tree;
        tree.depth = tree_json.at("depth").get<int>();
        tree.n_features = tree_json.at("n_features").get<int>();
        for (const auto& node_json : tree_json.at("nodes")) {
            TreeNode node;
            node.feature = node_json.at("f").get<int>();
            node.threshold = node_json.at("t").get<double>();
            node.left = node_json.at("l").get<int>();
            node.right = node_json.at("r").get<int>();
            node.value = node_json.at("v").get<std::vector<double>>();
            tree.nodes.push_back(std::move(node));
        }
        model.trees.push_back(std::move(tree));
    }
    return model;
}

void save_ensemble(const TreeEnsemble& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FileNotFound("cannot write " + path);
    out << model.to_json().dump(2) << "\n";
}

TreeEnsemble load_ensemble(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFound("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return TreeEnsemble::from_json(j);
}

} // namespace graphlaunder
