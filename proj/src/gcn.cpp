#include "graphlaunder/gcn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "graphlaunder/errors.hpp"
#include "graphlaunder/rng.hpp"

namespace graphlaunder {

SparseMatrix normalize_adjacency(const TransactionGraph& graph) {
    const int n = graph.node_count();
    if (n == 0) throw EmptyDataset("cannot normalize an empty graph");

    // Distinct undirected neighbor sets plus self-loops.
    std::vector<std::set<int>> adjacent(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) adjacent[static_cast<std::size_t>(i)].insert(i);
    for (const auto& e : graph.edges()) {
        int a = graph.index_of(e.src);
        int b = graph.index_of(e.dst);
        adjacent[static_cast<std::size_t>(a)].insert(b);
        adjacent[static_cast<std::size_t>(b)].insert(a);
    }

    std::vector<double> inv_sqrt_degree(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        inv_sqrt_degree[static_cast<std::size_t>(i)] =
            1.0 / std::sqrt(static_cast<double>(adjacent[static_cast<std::size_t>(i)].size()));
    }

    SparseMatrix a_hat;
    a_hat.n = n;
    a_hat.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 0; i < n; ++i) {
        a_hat.row_ptr[static_cast<std::size_t>(i) + 1] =
            a_hat.row_ptr[static_cast<std::size_t>(i)] +
            static_cast<int>(adjacent[static_cast<std::size_t>(i)].size());
    }
    a_hat.col.reserve(static_cast<std::size_t>(a_hat.row_ptr.back()));
    a_hat.val.reserve(static_cast<std::size_t>(a_hat.row_ptr.back()));
    for (int i = 0; i < n; ++i) {
        for (int j : adjacent[static_cast<std::size_t>(i)]) {
            a_hat.col.push_back(j);
            a_hat.val.push_back(inv_sqrt_degree[static_cast<std::size_t>(i)] *
                                inv_sqrt_degree[static_cast<std::size_t>(j)]);
        }
    }
    return a_hat;
}

namespace {

struct ForwardCache {
    Matrix ax;      // A X
    Matrix z1;      // A X W1
    Matrix h1;      // relu(z1)
    Matrix ah1;     // A h1
    std::vector<double> score; // pre-sigmoid
    std::vector<double> prob;
};

ForwardCache forward_cached(const SparseMatrix& a_hat, const Matrix& x, const GcnModel& model) {
    if (x.cols != model.w1.rows) {
        throw DimensionMismatch("features have " + std::to_string(x.cols) +
                                " dims, first layer expects " + std::to_string(model.w1.rows));
    }
    if (model.w_skip && model.w_skip->rows != x.cols) {
        throw DimensionMismatch("skip term expects " + std::to_string(model.w_skip->rows) +
                                " input dims");
    }
    ForwardCache cache;
    cache.ax = a_hat.multiply(x);
    cache.z1 = matmul(cache.ax, model.w1);
    cache.h1 = cache.z1;
    for (auto& v : cache.h1.a) v = v > 0.0 ? v : 0.0;
    cache.ah1 = a_hat.multiply(cache.h1);
    Matrix z2 = matmul(cache.ah1, model.w2);

    cache.score.resize(static_cast<std::size_t>(x.rows));
    for (int i = 0; i < x.rows; ++i) cache.score[static_cast<std::size_t>(i)] = z2(i, 0);
    if (model.w_skip) {
        Matrix skip = matmul(x, *model.w_skip);
        for (int i = 0; i < x.rows; ++i) cache.score[static_cast<std::size_t>(i)] += skip(i, 0);
    }
    cache.prob.resize(cache.score.size());
    for (std::size_t i = 0; i < cache.score.size(); ++i) cache.prob[i] = sigmoid(cache.score[i]);
    return cache;
}

double masked_loss(const std::vector<double>& prob, std::span<const int> labels,
                   double w_licit, double w_illicit, std::span<const int> mask) {
    double loss = 0.0;
    for (int i : mask) {
        double p = std::clamp(prob[static_cast<std::size_t>(i)], 1e-12, 1.0 - 1e-12);
        int y = labels[static_cast<std::size_t>(i)];
        loss += y ? -w_illicit * std::log(p) : -w_licit * std::log(1.0 - p);
    }
    return loss / static_cast<double>(mask.size());
}

void check_mask(std::span<const int> mask, std::span<const int> labels, int n) {
    if (mask.empty()) throw EmptyMask("mask selects no nodes");
    for (int i : mask) {
        if (i < 0 || i >= n) throw DimensionMismatch("mask index out of range");
    }
    (void)labels;
}

} // namespace

std::vector<double> gcn_forward(const SparseMatrix& a_hat, const Matrix& x,
                                const GcnModel& model) {
    return forward_cached(a_hat, x, model).prob;
}

double weighted_ce_loss(std::span<const double> probs, std::span<const int> labels,
                        double w_licit, double w_illicit, std::span<const int> mask) {
    check_mask(mask, labels, static_cast<int>(probs.size()));
    std::vector<double> p(probs.begin(), probs.end());
    return masked_loss(p, labels, w_licit, w_illicit, mask);
}

std::pair<double, GcnGrads> gcn_loss_grad(const SparseMatrix& a_hat, const Matrix& x,
                                          const GcnModel& model, std::span<const int> labels,
                                          std::span<const int> mask, double w_licit,
                                          double w_illicit) {
    check_mask(mask, labels, x.rows);
    ForwardCache cache = forward_cached(a_hat, x, model);
    double loss = masked_loss(cache.prob, labels, w_licit, w_illicit, mask);

    // dL/dscore_i = w_y (p_i - y_i) / |mask| on masked nodes, 0 elsewhere.
    Matrix d_score(x.rows, 1);
    const double inv = 1.0 / static_cast<double>(mask.size());
    for (int i : mask) {
        int y = labels[static_cast<std::size_t>(i)];
        double w = y ? w_illicit : w_licit;
        d_score(i, 0) = w * (cache.prob[static_cast<std::size_t>(i)] - y) * inv;
    }

    GcnGrads grads;
    // A is symmetric, so A^T dS = A dS.
    Matrix a_dscore = a_hat.multiply(d_score);
    grads.w2 = matmul(transpose(cache.ah1), d_score);

    Matrix d_h1 = matmul(a_dscore, transpose(model.w2));
    for (std::size_t i = 0; i < d_h1.a.size(); ++i) {
        if (cache.z1.a[i] <= 0.0) d_h1.a[i] = 0.0;
    }
    grads.w1 = matmul(transpose(cache.ax), d_h1);
    if (model.w_skip) grads.w_skip = matmul(transpose(x), d_score);
    return {loss, std::move(grads)};
}

GcnModel train_gcn(const SparseMatrix& a_hat, const Matrix& x, std::span<const int> labels,
                   std::span<const int> mask, const GcnTrainConfig& config, std::uint64_t seed,
                   std::vector<double>* loss_curve) {
    check_mask(mask, labels, x.rows);
    bool has_pos = false, has_neg = false;
    double positives = 0.0;
    for (int i : mask) {
        if (labels[static_cast<std::size_t>(i)]) {
            has_pos = true;
            positives += 1.0;
        } else {
            has_neg = true;
        }
    }
    if (!has_pos || !has_neg) {
        throw SingleClassMask("training mask needs both classes");
    }

    double w_licit = 1.0, w_illicit = 1.0;
    if (config.class_weights) {
        std::tie(w_licit, w_illicit) = *config.class_weights;
    } else {
        double total = static_cast<double>(mask.size());
        w_licit = std::min(config.weight_cap, total / (2.0 * (total - positives)));
        w_illicit = std::min(config.weight_cap, total / (2.0 * positives));
    }

    GcnModel model;
    model.hidden = config.hidden;
    {
        auto rng = make_rng(mix_seed(seed, 0x6C4ULL));
        model.w1 = Matrix::glorot(x.cols, config.hidden, rng);
        model.w2 = Matrix::glorot(config.hidden, 1, rng);
        if (config.skip) model.w_skip = Matrix::glorot(x.cols, 1, rng);
    }

    // Accumulated squared gradients for the adaptive per-parameter step.
    Matrix acc1(model.w1.rows, model.w1.cols);
    Matrix acc2(model.w2.rows, model.w2.cols);
    Matrix acc_skip;
    if (config.skip) acc_skip = Matrix(model.w_skip->rows, model.w_skip->cols);
    constexpr double kEps = 1e-10;

    auto apply = [&](Matrix& w, Matrix& acc, const Matrix& g) {
        for (std::size_t i = 0; i < w.a.size(); ++i) {
            acc.a[i] += g.a[i] * g.a[i];
            w.a[i] -= config.learning_rate * g.a[i] / (std::sqrt(acc.a[i]) + kEps);
        }
    };

    std::vector<int> full_mask(mask.begin(), mask.end());
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::span<const int> step_mask = full_mask;
        std::vector<int> batch;
        if (config.batch_size > 0 && config.batch_size < static_cast<int>(full_mask.size())) {
            auto rng = make_rng(mix_seed(seed, 0xBA7ULL, static_cast<std::uint64_t>(epoch)));
            batch = full_mask;
            partial_shuffle(batch, static_cast<std::size_t>(config.batch_size), rng);
            batch.resize(static_cast<std::size_t>(config.batch_size));
            step_mask = batch;
        }

        auto [loss, grads] =
            gcn_loss_grad(a_hat, x, model, labels, step_mask, w_licit, w_illicit);
        if (loss_curve) {
            if (config.batch_size > 0) {
                // Curve tracks the full-mask loss even when steps are batched.
                ForwardCache cache = forward_cached(a_hat, x, model);
                loss_curve->push_back(
                    masked_loss(cache.prob, labels, w_licit, w_illicit, full_mask));
            } else {
                loss_curve->push_back(loss);
            }
        }
        apply(model.w1, acc1, grads.w1);
        apply(model.w2, acc2, grads.w2);
        if (config.skip) apply(*model.w_skip, acc_skip, *grads.w_skip);
    }
    return model;
}

nlohmann::json GcnModel::to_json() const {
    nlohmann::json j{{"version", 1},
                     {"hidden", hidden},
                     {"w1", matrix_to_json(w1)},
                     {"w2", matrix_to_json(w2)}};
    if (w_skip) j["w_skip"] = matrix_to_json(*w_skip);
    return j;
}

GcnModel GcnModel::from_json(const nlohmann::json& j) {
    if (j.value("version", 0) != 1) throw SerializationError("unsupported model version");
    GcnModel model;
    model.hidden = j.at("hidden").get<int>();
    model.w1 = matrix_from_json(j.at("w1"));
    model.w2 = matrix_from_json(j.at("w2"));
    if (j.contains("w_skip")) model.w_skip = matrix_from_json(j.at("w_skip"));
    return model;
}

void save_gcn(const GcnModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FileNotFound("cannot write " + path);
    out << model.to_json().dump(2) << "\n";
}

GcnModel load_gcn(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFound("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return GcnModel::from_json(j);
}

} // namespace graphlaunder
