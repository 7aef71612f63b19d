#include "graphlaunder/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "graphlaunder/errors.hpp"
#include "graphlaunder/rng.hpp"

namespace graphlaunder {

namespace {

double f1_of(const Confusion& c) {
    double denom = static_cast<double>(2 * c.tp + c.fp + c.fn);
    return denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(c.tp) / denom;
}

double mcc_of(const Confusion& c) {
    double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
    double fn = static_cast<double>(c.fn), tn = static_cast<double>(c.tn);
    double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (denom == 0.0) return 0.0;
    return (tp * tn - fp * fn) / std::sqrt(denom);
}

Confusion confusion_at(std::span<const double> scores, std::span<const int> labels,
                       double threshold) {
    Confusion c;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        bool predicted = scores[i] >= threshold;
        if (labels[i]) {
            predicted ? ++c.tp : ++c.fn;
        } else {
            predicted ? ++c.fp : ++c.tn;
        }
    }
    return c;
}

nlohmann::json confusion_json(const Confusion& c) {
    return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
}

nlohmann::json curve_json(const std::vector<std::pair<double, double>>& curve) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [x, y] : curve) arr.push_back({x, y});
    return arr;
}

} // namespace

MetricsReport compute_metrics(std::span<const double> scores, std::span<const int> labels,
                              double threshold) {
    if (scores.empty() || scores.size() != labels.size()) {
        throw DimensionMismatch("scores and labels must be non-empty and equal-length");
    }
    const long n = static_cast<long>(scores.size());
    long positives = 0;
    for (int y : labels) positives += y;
    const long negatives = n - positives;

    MetricsReport report;
    report.threshold = threshold;
    report.prevalence = static_cast<double>(positives) / static_cast<double>(n);

    report.confusion = confusion_at(scores, labels, threshold);
    report.f1_micro = static_cast<double>(report.confusion.tp + report.confusion.tn) /
                      static_cast<double>(n);
    report.f1_minority = f1_of(report.confusion);
    report.mcc = mcc_of(report.confusion);

    // Prevalence-quantile threshold: as many predicted positives as there
    // are positives (up to score ties).
    {
        std::vector<double> sorted(scores.begin(), scores.end());
        std::sort(sorted.begin(), sorted.end(), std::greater<>());
        double prevalence_threshold =
            positives > 0 ? sorted[static_cast<std::size_t>(positives) - 1]
                          : std::numeric_limits<double>::infinity();
        report.threshold_prevalence = prevalence_threshold;
        report.confusion_prevalence = confusion_at(scores, labels, prevalence_threshold);
        report.f1_minority_prevalence = f1_of(report.confusion_prevalence);
        report.mcc_prevalence = mcc_of(report.confusion_prevalence);
        report.recall_minority_prevalence =
            positives == 0 ? 0.0
                           : static_cast<double>(report.confusion_prevalence.tp) /
                                 static_cast<double>(positives);
    }

    if (positives == 0 || negatives == 0) {
        // Single-class labels: curve areas undefined, F1/MCC already set.
        return report;
    }

    // Order by score descending; ties collapse into one threshold step.
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    double aupr = 0.0;
    double prev_recall = 0.0;
    long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            if (labels[order[j]]) {
                ++tp;
            } else {
                ++fp;
            }
            ++j;
        }
        double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        double recall = static_cast<double>(tp) / static_cast<double>(positives);
        aupr += (recall - prev_recall) * precision;
        prev_recall = recall;
        report.pr_curve.emplace_back(recall, precision);
        report.roc_curve.emplace_back(static_cast<double>(fp) / static_cast<double>(negatives),
                                      static_cast<double>(tp) / static_cast<double>(positives));
        i = j;
    }
    report.aupr = aupr;

    // Rank-sum AUC with average ranks over ties.
    {
        std::vector<std::size_t> asc(scores.size());
        std::iota(asc.begin(), asc.end(), 0);
        std::sort(asc.begin(), asc.end(),
                  [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
        double rank_sum_pos = 0.0;
        std::size_t k = 0;
        while (k < asc.size()) {
            std::size_t j = k;
            long pos_in_tie = 0;
            while (j < asc.size() && scores[asc[j]] == scores[asc[k]]) {
                pos_in_tie += labels[asc[j]];
                ++j;
            }
            double avg_rank = (static_cast<double>(k + 1) + static_cast<double>(j)) / 2.0;
            rank_sum_pos += avg_rank * static_cast<double>(pos_in_tie);
            k = j;
        }
        double u = rank_sum_pos -
                   static_cast<double>(positives) * (static_cast<double>(positives) + 1.0) / 2.0;
        report.auc_roc = u / (static_cast<double>(positives) * static_cast<double>(negatives));
    }
    return report;
}

double metric_value(const MetricsReport& report, const std::string& name) {
    auto undefined = std::numeric_limits<double>::quiet_NaN();
    if (name == "aupr") return report.aupr.value_or(undefined);
    if (name == "auc" || name == "auc_roc") return report.auc_roc.value_or(undefined);
    if (name == "f1_micro") return report.f1_micro;
    if (name == "f1_minority") return report.f1_minority;
    if (name == "mcc") return report.mcc;
    throw ConfigError("unknown metric " + name);
}

nlohmann::json MetricsReport::to_json() const {
    nlohmann::json j{
        {"aupr", aupr ? nlohmann::json(*aupr) : nlohmann::json()},
        {"auc_roc", auc_roc ? nlohmann::json(*auc_roc) : nlohmann::json()},
        {"f1_micro", f1_micro},
        {"f1_minority", f1_minority},
        {"mcc", mcc},
        {"confusion", confusion_json(confusion)},
        {"threshold", threshold},
        {"prevalence", prevalence},
        {"threshold_prevalence", threshold_prevalence},
        {"confusion_prevalence", confusion_json(confusion_prevalence)},
        {"f1_minority_prevalence", f1_minority_prevalence},
        {"mcc_prevalence", mcc_prevalence},
        {"recall_minority_prevalence", recall_minority_prevalence},
        {"pr_curve", curve_json(pr_curve)},
        {"roc_curve", curve_json(roc_curve)},
    };
    return j;
}

double CvResult::mean(const std::string& metric) const {
    double sum = 0.0;
    int count = 0;
    for (const auto& fold : folds) {
        double v = metric_value(fold, metric);
        if (!std::isnan(v)) {
            sum += v;
            ++count;
        }
    }
    return count == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / count;
}

double CvResult::stdev(const std::string& metric) const {
    double m = mean(metric);
    if (std::isnan(m)) return m;
    double sum = 0.0;
    int count = 0;
    for (const auto& fold : folds) {
        double v = metric_value(fold, metric);
        if (!std::isnan(v)) {
            sum += (v - m) * (v - m);
            ++count;
        }
    }
    return count <= 1 ? 0.0 : std::sqrt(sum / (count - 1));
}

nlohmann::json CvResult::to_json() const {
    nlohmann::json folds_json = nlohmann::json::array();
    for (const auto& fold : folds) folds_json.push_back(fold.to_json());
    nlohmann::json summary;
    for (const char* name : {"aupr", "auc", "f1_micro", "f1_minority", "mcc"}) {
        double m = mean(name);
        double s = stdev(name);
        summary[name] = {{"mean", std::isnan(m) ? nlohmann::json() : nlohmann::json(m)},
                         {"stdev", std::isnan(s) ? nlohmann::json() : nlohmann::json(s)}};
    }
    return {{"folds", folds_json}, {"summary", summary}};
}

CvResult kfold_cv(const LabelledDataset& dataset, int k, const Trainer& trainer,
                  std::uint64_t seed, double threshold) {
    if (k < 2) throw ConfigError("cross-validation needs k >= 2");
    if (dataset.x.size() != dataset.y.size()) {
        throw DimensionMismatch("dataset rows and labels differ");
    }

    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < dataset.y.size(); ++i) {
        by_class[dataset.y[i] ? 1 : 0].push_back(i);
    }
    for (const auto& cls : by_class) {
        if (static_cast<int>(cls.size()) < k) {
            throw TooFewSamples("each class needs at least k samples for stratified folds");
        }
    }

    // Shuffle within class, then deal round-robin: fold sizes and class
    // prevalence stay within one sample.
    std::vector<int> fold_of(dataset.y.size(), 0);
    for (int cls = 0; cls < 2; ++cls) {
        auto rng = make_rng(mix_seed(seed, 0xF01DULL, static_cast<std::uint64_t>(cls)));
        auto indices = by_class[cls];
        std::shuffle(indices.begin(), indices.end(), rng);
        for (std::size_t i = 0; i < indices.size(); ++i) {
            fold_of[indices[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
        }
    }

    CvResult result;
    for (int fold = 0; fold < k; ++fold) {
        LabelledDataset train;
        std::vector<std::vector<double>> test_x;
        std::vector<int> test_y;
        for (std::size_t i = 0; i < dataset.y.size(); ++i) {
            if (fold_of[i] == fold) {
                test_x.push_back(dataset.x[i]);
                test_y.push_back(dataset.y[i]);
            } else {
                train.x.push_back(dataset.x[i]);
                train.y.push_back(dataset.y[i]);
            }
        }
        std::vector<double> scores = trainer(train, test_x);
        if (scores.size() != test_y.size()) {
            throw DimensionMismatch("trainer returned wrong score count");
        }
        result.folds.push_back(compute_metrics(scores, test_y, threshold));
    }
    return result;
}

nlohmann::json HyperConfig::to_json() const {
    return {{"dim", dim},
            {"layers", layers},
            {"learning_rate", learning_rate},
            {"n_trees", n_trees},
            {"max_depth", max_depth}};
}

SearchResult random_search(const SearchSpace& space, int budget, const std::string& metric,
                           const SearchObjective& objective, std::uint64_t seed) {
    if (budget < 1) throw ConfigError("search budget must be >= 1");
    auto rng = make_rng(mix_seed(seed, 0x5EA2C4ULL));
    auto choose = [&rng](const auto& options) {
        std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
        return options[pick(rng)];
    };

    SearchResult result;
    double best_value = -std::numeric_limits<double>::infinity();
    bool have_best = false;
    for (int trial = 0; trial < budget; ++trial) {
        HyperConfig config;
        config.dim = choose(space.dims);
        config.layers = choose(space.layers);
        config.learning_rate = choose(space.learning_rates);
        config.n_trees = choose(space.trees);
        config.max_depth = choose(space.depths);

        CvResult cv = objective(config);
        double value = cv.mean(metric);
        result.trials.emplace_back(config, value);
        // Strictly-greater keeps the first-sampled config on ties.
        if (!have_best || (!std::isnan(value) && value > best_value)) {
            have_best = true;
            best_value = std::isnan(value) ? best_value : value;
            result.best = config;
            result.best_result = cv;
        }
    }
    return result;
}

} // namespace graphlaunder
