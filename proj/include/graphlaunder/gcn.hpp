#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "graphlaunder/graph.hpp"
#include "graphlaunder/linalg.hpp"

namespace graphlaunder {

// Symmetric normalization D^{-1/2} (A + I) D^{-1/2} over the symmetrized,
// deduplicated, unweighted adjacency; rows are ordered by the graph's node
// order. Edgeless rows reduce to a unit self-loop.
SparseMatrix normalize_adjacency(const TransactionGraph& graph);

struct GcnModel {
    Matrix w1;                  // d_in x hidden
    Matrix w2;                  // hidden x 1
    std::optional<Matrix> w_skip; // d_in x 1 additive input-to-output term
    int hidden = 128;

    nlohmann::json to_json() const;
    static GcnModel from_json(const nlohmann::json& j);
};

// p = sigmoid(A (relu(A X W1)) W2 [+ X W_skip]); one probability per node.
std::vector<double> gcn_forward(const SparseMatrix& a_hat, const Matrix& x,
                                const GcnModel& model);

// Mean over masked nodes of -w_y (y log p + (1-y) log(1-p)).
double weighted_ce_loss(std::span<const double> probs, std::span<const int> labels,
                        double w_licit, double w_illicit, std::span<const int> mask);

struct GcnGrads {
    Matrix w1;
    Matrix w2;
    std::optional<Matrix> w_skip;
};

std::pair<double, GcnGrads> gcn_loss_grad(const SparseMatrix& a_hat, const Matrix& x,
                                          const GcnModel& model, std::span<const int> labels,
                                          std::span<const int> mask, double w_licit,
                                          double w_illicit);

struct GcnTrainConfig {
    int hidden = 128;
    bool skip = false;
    double learning_rate = 0.2;
    int epochs = 200;
    int batch_size = 0; // 0 = full batch; otherwise a random mask subset per step
    // Defaults to inverse prevalence capped at weight_cap.
    std::optional<std::pair<double, double>> class_weights; // (licit, illicit)
    double weight_cap = 50.0;
};

// Adaptive-gradient training (per-parameter accumulated squared gradients).
GcnModel train_gcn(const SparseMatrix& a_hat, const Matrix& x, std::span<const int> labels,
                   std::span<const int> mask, const GcnTrainConfig& config, std::uint64_t seed,
                   std::vector<double>* loss_curve = nullptr);

void save_gcn(const GcnModel& model, const std::string& path);
GcnModel load_gcn(const std::string& path);

} // namespace graphlaunder
