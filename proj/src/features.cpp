#include "graphlaunder/features.hpp"

#include <algorithm>

#include "graphlaunder/errors.hpp"

namespace graphlaunder {

FeatureTable FeatureTable::from_graph(const TransactionGraph& graph) {
    FeatureTable t;
    auto dim = graph.feature_dim();
    if (!dim) throw MissingFeatures("graph carries no node features");
    for (const auto& n : graph.nodes()) t.ids.push_back(n.id);
    std::sort(t.ids.begin(), t.ids.end());
    t.x = Matrix(static_cast<int>(t.ids.size()), *dim);
    t.row_of.reserve(t.ids.size());
    for (std::size_t i = 0; i < t.ids.size(); ++i) {
        t.row_of.emplace(t.ids[i], static_cast<int>(i));
        const auto& n = graph.node(t.ids[i]);
        if (!n.features) {
            throw MissingFeatures("node " + std::to_string(n.id) + " has no features");
        }
        std::copy(n.features->begin(), n.features->end(), t.x.row(static_cast<int>(i)).begin());
    }
    return t;
}

FeatureTable FeatureTable::zeros(std::vector<NodeId> node_ids, int dim) {
    FeatureTable t;
    std::sort(node_ids.begin(), node_ids.end());
    node_ids.erase(std::unique(node_ids.begin(), node_ids.end()), node_ids.end());
    t.ids = std::move(node_ids);
    t.x = Matrix(static_cast<int>(t.ids.size()), dim);
    t.row_of.reserve(t.ids.size());
    for (std::size_t i = 0; i < t.ids.size(); ++i) t.row_of.emplace(t.ids[i], static_cast<int>(i));
    return t;
}

std::span<const double> FeatureTable::row(NodeId id) const {
    auto it = row_of.find(id);
    if (it == row_of.end()) {
        throw MissingFeatures("no feature row for node " + std::to_string(id));
    }
    return x.row(it->second);
}

std::span<double> FeatureTable::row_mut(NodeId id) {
    auto it = row_of.find(id);
    if (it == row_of.end()) {
        throw MissingFeatures("no feature row for node " + std::to_string(id));
    }
    return x.row(it->second);
}

} // namespace graphlaunder
