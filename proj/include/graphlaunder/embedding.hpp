#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "graphlaunder/graph.hpp"

namespace graphlaunder {

// Per-node dense vectors of one dimension, keyed by node id. Rows are kept
// in ascending id order so exports are byte-stable.
struct EmbeddingMatrix {
    int dim = 0;
    std::vector<NodeId> ids;      // ascending
    std::vector<double> values;   // row-major, ids.size() x dim
    std::unordered_map<NodeId, int> row_index;

    static EmbeddingMatrix zeros(std::vector<NodeId> node_ids, int dim);

    bool has(NodeId id) const { return row_index.count(id) > 0; }
    std::span<double> row(NodeId id);
    std::span<const double> row(NodeId id) const;
    int row_count() const { return static_cast<int>(ids.size()); }

    bool all_finite() const;
};

// Text format: header "node_id,dim_0..dim_{d-1}", one row per node.
void write_embeddings(const EmbeddingMatrix& m, const std::string& path);
EmbeddingMatrix read_embeddings(const std::string& path);

} // namespace graphlaunder
