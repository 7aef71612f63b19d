#pragma once

#include <span>
#include <unordered_map>
#include <vector>

#include "graphlaunder/graph.hpp"
#include "graphlaunder/linalg.hpp"

namespace graphlaunder {

// Node features indexed by id; the lookup every feature-driven model shares.
struct FeatureTable {
    std::vector<NodeId> ids; // ascending
    Matrix x;                // ids.size() x dim
    std::unordered_map<NodeId, int> row_of;

    static FeatureTable from_graph(const TransactionGraph& graph);
    static FeatureTable zeros(std::vector<NodeId> node_ids, int dim);

    int dim() const { return x.cols; }
    bool has(NodeId id) const { return row_of.count(id) > 0; }
    std::span<const double> row(NodeId id) const;
    std::span<double> row_mut(NodeId id);
};

} // namespace graphlaunder
