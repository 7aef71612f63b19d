#include "graphlaunder/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "graphlaunder/errors.hpp"
#include "graphlaunder/rng.hpp"

namespace graphlaunder {

const char* to_string(AccountKind kind) {
    switch (kind) {
        case AccountKind::individual: return "individual";
        case AccountKind::organization: return "organization";
        case AccountKind::unknown: return "unknown";
    }
    return "unknown";
}

const char* to_string(LabelValue value) {
    switch (value) {
        case LabelValue::licit: return "licit";
        case LabelValue::illicit: return "illicit";
        case LabelValue::unknown: return "unknown";
    }
    return "unknown";
}

const char* to_string(AlertType type) {
    switch (type) {
        case AlertType::fan_in: return "fan_in";
        case AlertType::fan_out: return "fan_out";
        case AlertType::gather_scatter: return "gather_scatter";
        case AlertType::scatter_gather: return "scatter_gather";
        case AlertType::cycle: return "cycle";
        case AlertType::column_chain: return "column_chain";
        case AlertType::row_chain: return "row_chain";
        case AlertType::other: return "other";
    }
    return "other";
}

const char* to_string(NodeRole role) {
    switch (role) {
        case NodeRole::outer_source: return "outer_source";
        case NodeRole::inner: return "inner";
        case NodeRole::outer_sink: return "outer_sink";
        case NodeRole::unassigned: return "unassigned";
    }
    return "unassigned";
}

AccountKind account_kind_from(std::string_view text) {
    if (text == "individual" || text == "INDIVIDUAL" || text == "I") return AccountKind::individual;
    if (text == "organization" || text == "ORGANIZATION" || text == "O")
        return AccountKind::organization;
    return AccountKind::unknown;
}

LabelValue label_value_from(std::string_view text) {
    if (text == "licit") return LabelValue::licit;
    if (text == "illicit") return LabelValue::illicit;
    return LabelValue::unknown;
}

AlertType alert_type_from(std::string_view text) {
    if (text == "fan_in") return AlertType::fan_in;
    if (text == "fan_out") return AlertType::fan_out;
    if (text == "gather_scatter") return AlertType::gather_scatter;
    if (text == "scatter_gather") return AlertType::scatter_gather;
    if (text == "cycle") return AlertType::cycle;
    if (text == "column_chain") return AlertType::column_chain;
    if (text == "row_chain") return AlertType::row_chain;
    return AlertType::other;
}

std::optional<NodeRole> node_role_from(std::string_view text) {
    if (text == "outer_source") return NodeRole::outer_source;
    if (text == "inner") return NodeRole::inner;
    if (text == "outer_sink") return NodeRole::outer_sink;
    if (text == "unassigned") return NodeRole::unassigned;
    return std::nullopt;
}

int TransactionGraph::index_of(NodeId id) const noexcept {
    auto it = index_of_.find(id);
    return it == index_of_.end() ? -1 : it->second;
}

const AccountNode& TransactionGraph::node(NodeId id) const {
    int idx = index_of(id);
    if (idx < 0) throw UnknownNode("node id " + std::to_string(id) + " not in graph");
    return nodes_[static_cast<std::size_t>(idx)];
}

std::span<const int> TransactionGraph::out_edge_indices(NodeId id) const {
    int idx = index_of(id);
    if (idx < 0) throw UnknownNode("node id " + std::to_string(id) + " not in graph");
    return out_edges_[static_cast<std::size_t>(idx)];
}

std::span<const int> TransactionGraph::in_edge_indices(NodeId id) const {
    int idx = index_of(id);
    if (idx < 0) throw UnknownNode("node id " + std::to_string(id) + " not in graph");
    return in_edges_[static_cast<std::size_t>(idx)];
}

namespace {

std::vector<NodeId> distinct_sorted(std::vector<NodeId> ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

} // namespace

std::vector<NodeId> TransactionGraph::out_neighbors(NodeId id) const {
    std::vector<NodeId> out;
    for (int e : out_edge_indices(id)) out.push_back(edges_[static_cast<std::size_t>(e)].dst);
    return distinct_sorted(std::move(out));
}

std::vector<NodeId> TransactionGraph::in_neighbors(NodeId id) const {
    std::vector<NodeId> in;
    for (int e : in_edge_indices(id)) in.push_back(edges_[static_cast<std::size_t>(e)].src);
    return distinct_sorted(std::move(in));
}

std::vector<NodeId> TransactionGraph::neighbors(NodeId id) const {
    std::vector<NodeId> all;
    for (int e : out_edge_indices(id)) all.push_back(edges_[static_cast<std::size_t>(e)].dst);
    for (int e : in_edge_indices(id)) all.push_back(edges_[static_cast<std::size_t>(e)].src);
    return distinct_sorted(std::move(all));
}

std::optional<int> TransactionGraph::feature_dim() const {
    for (const auto& n : nodes_) {
        if (n.features) return static_cast<int>(n.features->size());
    }
    return std::nullopt;
}

bool TransactionGraph::has_features() const {
    return !nodes_.empty() &&
           std::all_of(nodes_.begin(), nodes_.end(),
                       [](const AccountNode& n) { return n.features.has_value(); });
}

std::pair<std::int64_t, std::int64_t> TransactionGraph::time_range() const {
    std::int64_t lo = std::numeric_limits<std::int64_t>::max();
    std::int64_t hi = std::numeric_limits<std::int64_t>::min();
    for (const auto& e : edges_) {
        lo = std::min(lo, e.timestamp);
        hi = std::max(hi, e.timestamp);
    }
    if (edges_.empty()) return {0, 0};
    return {lo, hi};
}

void TransactionGraph::rebuild_indices() {
    index_of_.clear();
    index_of_.reserve(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        index_of_.emplace(nodes_[i].id, static_cast<int>(i));
    }
    out_edges_.assign(nodes_.size(), {});
    in_edges_.assign(nodes_.size(), {});
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const auto& edge = edges_[e];
        out_edges_[static_cast<std::size_t>(index_of_.at(edge.src))].push_back(static_cast<int>(e));
        in_edges_[static_cast<std::size_t>(index_of_.at(edge.dst))].push_back(static_cast<int>(e));
    }
}

TransactionGraph build_graph(std::vector<AccountNode> accounts,
                             std::vector<TransferEdge> transactions,
                             const std::vector<AlertRecord>& alerts) {
    TransactionGraph g;
    g.nodes_ = std::move(accounts);
    g.edges_ = std::move(transactions);

    g.index_of_.clear();
    g.index_of_.reserve(g.nodes_.size());
    std::optional<std::size_t> feature_len;
    for (std::size_t i = 0; i < g.nodes_.size(); ++i) {
        const auto& n = g.nodes_[i];
        if (!g.index_of_.emplace(n.id, static_cast<int>(i)).second) {
            throw DuplicateNode("duplicate node id " + std::to_string(n.id));
        }
        if (n.features) {
            if (!feature_len) {
                feature_len = n.features->size();
            } else if (*feature_len != n.features->size()) {
                throw FeatureLengthMismatch(
                    "node " + std::to_string(n.id) + " has " +
                    std::to_string(n.features->size()) + " features, expected " +
                    std::to_string(*feature_len));
            }
        }
    }

    std::unordered_map<std::int64_t, std::size_t> edge_by_tx;
    edge_by_tx.reserve(g.edges_.size());
    for (std::size_t e = 0; e < g.edges_.size(); ++e) {
        const auto& edge = g.edges_[e];
        if (!g.index_of_.count(edge.src) || !g.index_of_.count(edge.dst)) {
            throw DanglingEdge("transaction " + std::to_string(edge.tx_id) +
                               " references an unknown account");
        }
        if (!(edge.amount > 0.0)) {
            throw InvalidAmount("transaction " + std::to_string(edge.tx_id) +
                                " has non-positive amount");
        }
        edge_by_tx.emplace(edge.tx_id, e);
    }

    auto mark_illicit = [&](NodeId id, AlertType type) {
        auto& node = g.nodes_[static_cast<std::size_t>(g.index_of_.at(id))];
        node.label.value = LabelValue::illicit;
        node.label.alert_type = type;
    };

    for (const auto& alert : alerts) {
        if (alert.target == AlertRecord::Target::node) {
            NodeId id = static_cast<NodeId>(alert.ref);
            if (!g.index_of_.count(id)) {
                throw UnresolvedAlert("alert references unknown node " + std::to_string(alert.ref));
            }
            mark_illicit(id, alert.type);
        } else {
            auto it = edge_by_tx.find(alert.ref);
            if (it == edge_by_tx.end()) {
                throw UnresolvedAlert("alert references unknown transaction " +
                                      std::to_string(alert.ref));
            }
            const auto& edge = g.edges_[it->second];
            mark_illicit(edge.src, alert.type);
            mark_illicit(edge.dst, alert.type);
        }
    }

    // Labels must stay internally consistent after alert application.
    for (auto& n : g.nodes_) {
        if (n.label.value != LabelValue::illicit) n.label.alert_type.reset();
    }

    g.rebuild_indices();
    return g;
}

std::pair<TransactionGraph, std::set<NodeId>> holdout_split(const TransactionGraph& graph,
                                                            double fraction,
                                                            std::uint64_t seed) {
    const int n = graph.node_count();
    const long total_target = std::lround(fraction * n);

    // Strata indexed by LabelValue; largest-remainder apportionment keeps
    // every stratum within one node of its exact quota.
    std::vector<std::vector<NodeId>> members(3);
    for (const auto& node : graph.nodes()) {
        members[static_cast<std::size_t>(node.label.value)].push_back(node.id);
    }
    for (auto& m : members) std::sort(m.begin(), m.end());

    long take[3];
    double remainder[3];
    long assigned = 0;
    for (int s = 0; s < 3; ++s) {
        double quota = fraction * static_cast<double>(members[s].size());
        take[s] = static_cast<long>(std::floor(quota));
        remainder[s] = quota - static_cast<double>(take[s]);
        assigned += take[s];
    }
    long leftover = total_target - assigned;
    while (leftover > 0) {
        int best = -1;
        for (int s = 0; s < 3; ++s) {
            if (take[s] >= static_cast<long>(members[s].size())) continue;
            if (best < 0 || remainder[s] > remainder[best]) best = s;
        }
        if (best < 0) break;
        ++take[best];
        remainder[best] = -1.0;
        --leftover;
    }

    std::set<NodeId> held_out;
    for (int s = 0; s < 3; ++s) {
        auto rng = make_rng(mix_seed(seed, 0x484f4c44ULL, static_cast<std::uint64_t>(s)));
        auto pool = members[s];
        partial_shuffle(pool, static_cast<std::size_t>(take[s]), rng);
        for (long i = 0; i < take[s]; ++i) held_out.insert(pool[static_cast<std::size_t>(i)]);
    }

    std::vector<AccountNode> kept_nodes;
    kept_nodes.reserve(graph.nodes().size());
    for (const auto& node : graph.nodes()) {
        if (!held_out.count(node.id)) kept_nodes.push_back(node);
    }
    std::vector<TransferEdge> kept_edges;
    kept_edges.reserve(graph.edges().size());
    for (const auto& edge : graph.edges()) {
        if (!held_out.count(edge.src) && !held_out.count(edge.dst)) kept_edges.push_back(edge);
    }

    TransactionGraph reduced = build_graph(std::move(kept_nodes), std::move(kept_edges));
    if (graph.timestep_bins()) reduced.set_timestep_bins(*graph.timestep_bins());
    return {std::move(reduced), std::move(held_out)};
}

void WeightedDigraph::add(NodeId from, NodeId to, double amount) {
    weights[{from, to}] += amount;
}

double WeightedDigraph::weight(NodeId from, NodeId to) const {
    auto it = weights.find({from, to});
    return it == weights.end() ? 0.0 : it->second;
}

double WeightedDigraph::total_weight() const {
    double total = 0.0;
    for (const auto& [pair, w] : weights) total += w;
    return total;
}

WeightedDigraph aggregate_edges(const TransactionGraph& graph,
                                const std::optional<TimeWindow>& window) {
    WeightedDigraph agg;
    for (const auto& edge : graph.edges()) {
        if (window && !window->contains(edge.timestamp)) continue;
        agg.add(edge.src, edge.dst, edge.amount);
    }
    for (const auto& [pair, w] : agg.weights) {
        agg.out_of[pair.first].emplace_back(pair.second, w);
        agg.into[pair.second].emplace_back(pair.first, w);
    }
    return agg;
}

TransactionGraph assign_roles(TransactionGraph graph) {
    bool has_inner = std::any_of(graph.nodes().begin(), graph.nodes().end(),
                                 [](const AccountNode& n) { return n.role == NodeRole::inner; });

    auto& nodes = const_cast<std::vector<AccountNode>&>(graph.nodes());
    if (!has_inner) {
        for (auto& n : nodes) n.role = NodeRole::inner;
        return graph;
    }

    // Net flow of each outer node into the inner set over the whole graph
    // lifetime; sign decides source vs sink.
    std::unordered_map<NodeId, double> net_into_inner;
    for (const auto& edge : graph.edges()) {
        bool src_inner = graph.node(edge.src).role == NodeRole::inner;
        bool dst_inner = graph.node(edge.dst).role == NodeRole::inner;
        if (!src_inner && dst_inner) net_into_inner[edge.src] += edge.amount;
        if (src_inner && !dst_inner) net_into_inner[edge.dst] -= edge.amount;
    }

    for (auto& n : nodes) {
        if (n.role == NodeRole::inner) continue;
        auto it = net_into_inner.find(n.id);
        double net = it == net_into_inner.end() ? 0.0 : it->second;
        if (net > 0.0) {
            n.role = NodeRole::outer_source;
        } else if (net < 0.0) {
            n.role = NodeRole::outer_sink;
        } else {
            n.role = NodeRole::unassigned;
        }
    }
    return graph;
}

} // namespace graphlaunder
