#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "graphlaunder/embedding.hpp"
#include "graphlaunder/features.hpp"
#include "graphlaunder/graph.hpp"
#include "graphlaunder/linalg.hpp"

namespace graphlaunder {

struct WalkCorpus {
    std::vector<std::vector<NodeId>> walks;
    int walk_length = 0;
    int walks_per_node = 0;
    double p = 1.0;
    double q = 1.0;
};

// Second-order biased random walks along edge direction. The transition from
// (prev, cur) to a successor x is weighted by the multiplicity of cur->x
// edges times 1/p if x == prev, 1 if an edge prev->x exists, 1/q otherwise.
// Walks truncate at sinks. Deterministic per seed regardless of workers:
// each (node, walk) owns an RNG stream derived from (seed, node, walk).
WalkCorpus biased_walks(const TransactionGraph& graph, double p, double q, int walk_length,
                        int walks_per_node, std::uint64_t seed, int workers = 1);

// All (center, context) pairs at distance <= window inside each walk.
std::vector<std::pair<NodeId, NodeId>> window_pairs(const WalkCorpus& corpus, int window);

// Noise distribution for negative sampling, with a cumulative table.
struct NoiseDistribution {
    std::vector<NodeId> ids;        // ascending
    std::vector<double> prob;       // sums to 1
    std::vector<double> cumulative;

    NodeId sample(std::mt19937_64& rng) const;

    // Unigram counts over the corpus raised to `power`.
    static NoiseDistribution unigram(const WalkCorpus& corpus, double power = 0.75);
    static NoiseDistribution unigram_pairs(const std::vector<std::pair<NodeId, NodeId>>& pairs,
                                           double power = 0.75);
};

struct SkipgramModel {
    EmbeddingMatrix in_vectors;  // the embeddings returned by training
    EmbeddingMatrix out_vectors; // context-side vectors
    int window = 5;
    int negatives = 5;
    NoiseDistribution noise;
};

// Sparse gradient of one (center, context, negatives) term.
struct SgnsGrads {
    std::vector<std::pair<NodeId, std::vector<double>>> in_grads;
    std::vector<std::pair<NodeId, std::vector<double>>> out_grads;
};

// loss = -log sigmoid(v'_ctx . v_cen) - sum_i log sigmoid(-v'_neg_i . v_cen)
// Gradients are exact analytic partials with duplicate touches summed.
std::pair<double, SgnsGrads> sgns_loss_grad(NodeId center, NodeId context,
                                            const std::vector<NodeId>& negatives,
                                            const SkipgramModel& model);

struct SkipgramOptions {
    int dim = 64;
    int window = 5;
    int negatives = 5;
    double learning_rate = 0.025;
    int epochs = 5;
    int workers = 1;
};

SkipgramModel train_skipgram_model(const WalkCorpus& corpus, const SkipgramOptions& options,
                                   std::uint64_t seed);

// Returns the trained in_vectors.
EmbeddingMatrix train_skipgram(const WalkCorpus& corpus, const SkipgramOptions& options,
                               std::uint64_t seed);

// ---- attribute-mapped variant ----

// activation(features . w_in); the inductive embedding map.
std::vector<double> attri_embed_forward(std::span<const double> features, const Matrix& w_in,
                                        Activation activation);

struct Attri2VecModel {
    Matrix w_in; // feature_dim x dim
    Activation activation = Activation::sigmoid;
    EmbeddingMatrix out_vectors;
};

struct AttriGrads {
    Matrix w_in_grad;
    std::vector<std::pair<NodeId, std::vector<double>>> out_grads;
};

std::pair<double, AttriGrads> attri_pair_loss_grad(std::span<const double> center_features,
                                                   NodeId context,
                                                   const std::vector<NodeId>& negatives,
                                                   const Attri2VecModel& model);

struct Attri2VecOptions {
    int dim = 64;
    int negatives = 5;
    double learning_rate = 0.05;
    int epochs = 5;
    Activation activation = Activation::sigmoid;
};

// Trains the feature-to-embedding map on (target, context) walk pairs with
// the same negative-sampling objective, then embeds every node from its
// features alone.
std::pair<Attri2VecModel, EmbeddingMatrix> train_attri2vec(
    const FeatureTable& features, const std::vector<std::pair<NodeId, NodeId>>& pairs,
    const Attri2VecOptions& options, std::uint64_t seed);

std::pair<Attri2VecModel, EmbeddingMatrix> train_attri2vec(
    const TransactionGraph& graph, const std::vector<std::pair<NodeId, NodeId>>& pairs,
    const Attri2VecOptions& options, std::uint64_t seed);

} // namespace graphlaunder
