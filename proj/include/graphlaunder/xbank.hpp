#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "graphlaunder/graph.hpp"

namespace graphlaunder {

// Per-account embedding pair computed from first neighbors only; each part
// is either a unit vector or exactly zero (no neighbors in that direction).
struct XbankEmbedding {
    NodeId node = 0;
    std::vector<double> e_in;
    std::vector<double> e_out;
};

struct SimilarityScore {
    NodeId node_a = 0;
    NodeId node_b = 0;
    double sigma = 0.0;
};

// Deterministic +-1 vector from a keyed cryptographic hash of
// (public_seed, external key); identical across independent parties sharing
// the seed, and never the zero vector.
std::vector<double> hash_init_embedding(std::string_view external_key, std::uint64_t public_seed,
                                        int dim);

enum class FlowDirection { incoming, outgoing };

// incoming: sum over in-neighbors m of base[m] * w(m->node);
// outgoing: sum over out-neighbors m of base[m] * w(node->m).
std::vector<double> aggregate_neighbors(const WeightedDigraph& flows, NodeId node,
                                        FlowDirection direction,
                                        const std::map<NodeId, std::vector<double>>& base);

// Unit L2 norm; the zero vector maps to itself.
std::vector<double> normalize_embedding(std::vector<double> v);

// sigma = <e_in_a, e_in_b> * <e_out_a, e_out_b>, symmetric in (a, b).
SimilarityScore similarity(const XbankEmbedding& a, const XbankEmbedding& b);

// Every cross pair scored, descending sigma, ties by (node_a, node_b).
std::vector<SimilarityScore> rank_suspect_pairs(const std::vector<XbankEmbedding>& bank_a,
                                                const std::vector<XbankEmbedding>& bank_b,
                                                int top_k);

// Full per-bank pipeline over aggregated flows in an optional window.
std::vector<XbankEmbedding> bank_embeddings(const TransactionGraph& graph,
                                            std::uint64_t public_seed, int dim,
                                            const std::optional<TimeWindow>& window = std::nullopt);

void write_bank_embeddings(const std::vector<XbankEmbedding>& embeddings, int dim,
                           const std::string& path);
void write_similarity_report(const std::vector<SimilarityScore>& scores, const std::string& path);

} // namespace graphlaunder
