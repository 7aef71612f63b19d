#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "graphlaunder/embedding.hpp"
#include "graphlaunder/graph.hpp"
#include "graphlaunder/linalg.hpp"

namespace graphlaunder {

struct AttentionLayer {
    Matrix w_q; // d x d
    Matrix w_k;
    Matrix w_v;

    static AttentionLayer init(int d, std::mt19937_64& rng);
};

// softmax((H Wq)(H Wk)^T / sqrt(d)) (H Wv); numerically stable row softmax.
Matrix attention_forward(const Matrix& h_prev, const AttentionLayer& layer);

Matrix attention_stack_forward(Matrix h, std::span<const AttentionLayer> layers);

struct AttentionGrads {
    std::vector<AttentionLayer> layers;
};

// Gradients of sum(dz .* Z) w.r.t. every weight matrix of the stack.
AttentionGrads attention_stack_grad(const Matrix& h0, std::span<const AttentionLayer> layers,
                                    const Matrix& dz);

struct DgtConfig {
    int layers = 1;     // attention layers L
    int d_enc = 32;     // encoding dimension
    int tau = 3;        // time windows
    int context_k = 5;  // context nodes per window

    int row_count() const { return tau * (context_k + 2); }
};

struct DgtEmbedding {
    Matrix z;                      // row_count x d_enc
    std::vector<NodeId> row_nodes; // substructure node per row
};

// Encodes the spatial-temporal substructure of `target_edge` as
// tau*(context_k+2) rows (per window: the two endpoints plus sampled context
// nodes active in that window) and runs the attention stack over it.
// Throws InsufficientHistory when the graph has fewer than tau time bins.
DgtEmbedding dgt_embed(const TransactionGraph& graph, const TransferEdge& target_edge,
                       const DgtConfig& config, std::span<const AttentionLayer> params,
                       std::uint64_t seed);

std::vector<AttentionLayer> dgt_init_params(const DgtConfig& config, std::uint64_t seed);

// Node embeddings as the mean of attention-output rows over every incident
// edge treated as the target. Isolated nodes embed to zero.
EmbeddingMatrix dgt_embed_nodes(const TransactionGraph& graph, const DgtConfig& config,
                                std::span<const AttentionLayer> params, std::uint64_t seed);

void save_attention_params(const DgtConfig& config, std::span<const AttentionLayer> params,
                           const std::string& path);
std::pair<DgtConfig, std::vector<AttentionLayer>> load_attention_params(const std::string& path);

} // namespace graphlaunder
