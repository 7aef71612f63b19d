#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace graphlaunder {

struct Confusion {
    long tp = 0;
    long fp = 0;
    long fn = 0;
    long tn = 0;

    long total() const { return tp + fp + fn + tn; }
};

// One evaluation run. AUPR/AUC are absent when only one class is present.
// Besides the caller's threshold, F1/MCC are also reported at the
// prevalence-quantile threshold (score rank equal to the positive count).
struct MetricsReport {
    std::optional<double> aupr;
    std::optional<double> auc_roc;
    double f1_micro = 0.0;
    double f1_minority = 0.0;
    double mcc = 0.0;
    Confusion confusion;
    double threshold = 0.5;
    std::vector<std::pair<double, double>> pr_curve;  // (recall, precision)
    std::vector<std::pair<double, double>> roc_curve; // (fpr, tpr)
    double prevalence = 0.0;

    double threshold_prevalence = 0.5;
    Confusion confusion_prevalence;
    double f1_minority_prevalence = 0.0;
    double mcc_prevalence = 0.0;
    double recall_minority_prevalence = 0.0;

    nlohmann::json to_json() const;
};

// AUPR by step integration of the precision-recall staircase (tied scores
// collapse to one step), AUC by rank statistic with tie correction, MCC and
// F1 from the confusion at the threshold (predict positive iff score >=
// threshold). Zero-denominator MCC/F1 are 0 by convention.
MetricsReport compute_metrics(std::span<const double> scores, std::span<const int> labels,
                              double threshold = 0.5);

// Named metric lookup for search objectives: aupr, auc, f1_micro,
// f1_minority, mcc. Undefined values surface as NaN.
double metric_value(const MetricsReport& report, const std::string& name);

struct CvResult {
    std::vector<MetricsReport> folds;

    double mean(const std::string& metric) const;
    double stdev(const std::string& metric) const;
    nlohmann::json to_json() const;
};

struct LabelledDataset {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
};

// Scores for the test rows, given the training subset.
using Trainer = std::function<std::vector<double>(const LabelledDataset& train,
                                                  const std::vector<std::vector<double>>& test_x)>;

// Stratified k-fold cross-validation; fold membership is deterministic per
// seed and preserves class prevalence within one sample per fold.
CvResult kfold_cv(const LabelledDataset& dataset, int k, const Trainer& trainer,
                  std::uint64_t seed, double threshold = 0.5);

struct HyperConfig {
    int dim = 64;
    int layers = 1;
    double learning_rate = 0.1;
    int n_trees = 100;
    int max_depth = 4;

    nlohmann::json to_json() const;
};

struct SearchSpace {
    std::vector<int> dims{32, 64, 128, 256, 300};
    std::vector<int> layers{1, 2, 3, 4, 5};
    std::vector<double> learning_rates{0.01, 0.05, 0.1, 0.2};
    std::vector<int> trees{50, 100, 200};
    std::vector<int> depths{2, 4, 6, 8};
};

struct SearchResult {
    HyperConfig best;
    CvResult best_result;
    std::vector<std::pair<HyperConfig, double>> trials; // (config, objective)
};

using SearchObjective = std::function<CvResult(const HyperConfig&)>;

// Uniform sampling over the grid; argmax of the mean objective metric with
// first-sampled tie-break.
SearchResult random_search(const SearchSpace& space, int budget, const std::string& metric,
                           const SearchObjective& objective, std::uint64_t seed);

} // namespace graphlaunder
