#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "graphlaunder/embedding.hpp"
#include "graphlaunder/features.hpp"
#include "graphlaunder/graph.hpp"
#include "graphlaunder/linalg.hpp"

namespace graphlaunder {

struct SageLayer {
    Matrix w_self;  // in_dim x out_dim
    Matrix w_neigh; // in_dim x out_dim
};

struct SageModel {
    std::vector<SageLayer> layers; // applied input-side first
    std::vector<int> fanouts;      // fanouts[l] = sample size at depth l+1
    Activation activation = Activation::relu;

    int depth() const { return static_cast<int>(layers.size()); }
    int out_dim() const { return layers.empty() ? 0 : layers.back().w_self.cols; }
    int in_dim() const { return layers.empty() ? 0 : layers.front().w_self.rows; }

    // Glorot-initialized model with dims feature_dim -> hidden... -> out.
    static SageModel init(const std::vector<int>& dims, std::vector<int> fanouts,
                          Activation activation, std::uint64_t seed);
};

// Sampled neighborhood tree: children at depth l+1 are at most fanouts[l]
// distinct neighbors (union of edge directions) drawn without replacement.
struct SampledTree {
    NodeId id = 0;
    std::vector<SampledTree> children;
};

SampledTree sample_neighborhood(const TransactionGraph& graph, NodeId node,
                                std::span<const int> fanouts, std::uint64_t seed);

// Per layer: act(h_self . w_self + mean(h_neighbors) . w_neigh); an empty
// child set contributes a zero mean.
std::vector<double> sage_forward(const SampledTree& tree, const FeatureTable& features,
                                 const SageModel& model);

struct SageGrads {
    std::vector<SageLayer> layers; // same shapes as the model

    static SageGrads zeros_like(const SageModel& model);
    void scale(double s);
};

// Binary logistic loss on the pair score sigmoid(z_u . z_v); label 1 for
// co-occurring pairs, 0 for negatives. Trees are sampled from `seed` so the
// loss is a fixed differentiable function of the weights.
std::pair<double, SageGrads> sage_pair_loss_grad(const TransactionGraph& graph,
                                                 const FeatureTable& features, NodeId u, NodeId v,
                                                 int label, const SageModel& model,
                                                 std::uint64_t seed);

struct SageTrainOptions {
    double learning_rate = 0.05;
    int epochs = 1;
};

SageModel train_sage_unsup(const TransactionGraph& graph, const FeatureTable& features,
                           const std::vector<std::pair<NodeId, NodeId>>& positive_pairs,
                           const std::vector<std::pair<NodeId, NodeId>>& negative_pairs,
                           SageModel model, const SageTrainOptions& options, std::uint64_t seed);

// Frozen forward pass for a node of (a possibly larger) graph; no parameter
// mutation.
std::vector<double> infer_unseen(const SageModel& model, const TransactionGraph& graph,
                                 const FeatureTable& features, NodeId node, std::uint64_t seed);

EmbeddingMatrix sage_embed_all(const SageModel& model, const TransactionGraph& graph,
                               const FeatureTable& features, std::uint64_t seed);

void save_sage(const SageModel& model, const std::string& path);
SageModel load_sage(const std::string& path);

} // namespace graphlaunder
