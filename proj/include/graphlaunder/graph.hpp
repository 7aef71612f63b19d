#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace graphlaunder {

using NodeId = std::int32_t;

enum class AccountKind { individual, organization, unknown };
enum class LabelValue { licit, illicit, unknown };
enum class AlertType {
    fan_in,
    fan_out,
    gather_scatter,
    scatter_gather,
    cycle,
    column_chain,
    row_chain,
    other
};
enum class NodeRole { outer_source, inner, outer_sink, unassigned };

const char* to_string(AccountKind kind);
const char* to_string(LabelValue value);
const char* to_string(AlertType type);
const char* to_string(NodeRole role);

AccountKind account_kind_from(std::string_view text);
LabelValue label_value_from(std::string_view text);
// Unrecognised alert strings map to AlertType::other.
AlertType alert_type_from(std::string_view text);
std::optional<NodeRole> node_role_from(std::string_view text);

// alert_type is meaningful only when value == illicit.
struct NodeLabel {
    LabelValue value = LabelValue::unknown;
    std::optional<AlertType> alert_type;

    bool operator==(const NodeLabel&) const = default;
};

struct AccountNode {
    NodeId id = 0;
    std::string external_key;
    AccountKind kind = AccountKind::unknown;
    std::int64_t created_at = 0;
    std::optional<std::vector<double>> features;
    NodeLabel label;
    NodeRole role = NodeRole::unassigned;
};

struct TransferEdge {
    std::int64_t tx_id = 0;
    NodeId src = 0;
    NodeId dst = 0;
    double amount = 0.0;
    std::int64_t timestamp = 0;
    std::optional<std::int64_t> alert_id;
};

// An alert either flags a single account or a single transaction; flagged
// transactions mark both endpoints.
struct AlertRecord {
    enum class Target { node, transaction };
    Target target = Target::node;
    std::int64_t ref = 0;
    AlertType type = AlertType::other;
};

// Closed interval [begin, end] on edge timestamps.
struct TimeWindow {
    std::int64_t begin = 0;
    std::int64_t end = 0;

    bool contains(std::int64_t t) const noexcept { return begin <= t && t <= end; }
};

// Directed, timestamped, amount-weighted multigraph of accounts.
// Immutable after construction; all mutation happens through build_graph.
class TransactionGraph {
public:
    TransactionGraph() = default;

    int node_count() const noexcept { return static_cast<int>(nodes_.size()); }
    int edge_count() const noexcept { return static_cast<int>(edges_.size()); }

    const std::vector<AccountNode>& nodes() const noexcept { return nodes_; }
    const std::vector<TransferEdge>& edges() const noexcept { return edges_; }

    bool has_node(NodeId id) const noexcept { return index_of_.count(id) > 0; }
    // -1 when the id is not in the graph.
    int index_of(NodeId id) const noexcept;
    NodeId id_at(int index) const { return nodes_[static_cast<std::size_t>(index)].id; }

    const AccountNode& node(NodeId id) const;
    const AccountNode& node_at(int index) const { return nodes_[static_cast<std::size_t>(index)]; }

    // Edge indices into edges(), in insertion order.
    std::span<const int> out_edge_indices(NodeId id) const;
    std::span<const int> in_edge_indices(NodeId id) const;

    // Distinct neighbor ids, ascending.
    std::vector<NodeId> out_neighbors(NodeId id) const;
    std::vector<NodeId> in_neighbors(NodeId id) const;
    std::vector<NodeId> neighbors(NodeId id) const; // union of both directions

    const std::optional<std::vector<std::int64_t>>& timestep_bins() const noexcept {
        return timestep_bins_;
    }
    void set_timestep_bins(std::vector<std::int64_t> bins) { timestep_bins_ = std::move(bins); }

    std::optional<int> feature_dim() const;
    bool has_features() const;

    std::pair<std::int64_t, std::int64_t> time_range() const; // min/max edge timestamp

    friend TransactionGraph build_graph(std::vector<AccountNode> accounts,
                                        std::vector<TransferEdge> transactions,
                                        const std::vector<AlertRecord>& alerts);

private:
    void rebuild_indices();

    std::vector<AccountNode> nodes_;
    std::vector<TransferEdge> edges_;
    std::unordered_map<NodeId, int> index_of_;
    std::vector<std::vector<int>> out_edges_;
    std::vector<std::vector<int>> in_edges_;
    std::optional<std::vector<std::int64_t>> timestep_bins_;
};

// Assembles and validates a graph. Node alerts mark the referenced account
// illicit; transaction alerts mark both endpoints illicit.
TransactionGraph build_graph(std::vector<AccountNode> accounts,
                             std::vector<TransferEdge> transactions,
                             const std::vector<AlertRecord>& alerts = {});

// Removes round(fraction * |V|) nodes together with every incident edge.
// Stratified by label value so illicit prevalence in the held-out set
// matches the graph within one node; deterministic per seed.
std::pair<TransactionGraph, std::set<NodeId>> holdout_split(const TransactionGraph& graph,
                                                            double fraction,
                                                            std::uint64_t seed);

// Simple weighted digraph: one weight per ordered node pair. Absent pair
// means weight zero.
struct WeightedDigraph {
    std::map<std::pair<NodeId, NodeId>, double> weights;
    std::map<NodeId, std::vector<std::pair<NodeId, double>>> out_of;
    std::map<NodeId, std::vector<std::pair<NodeId, double>>> into;

    void add(NodeId from, NodeId to, double amount);
    double weight(NodeId from, NodeId to) const;
    double total_weight() const;
    bool empty() const noexcept { return weights.empty(); }
};

// Collapses multi-edges into per-pair summed amounts, optionally restricted
// to a time window. An empty result for a non-empty graph with a window is
// the documented empty-window case, not an error.
WeightedDigraph aggregate_edges(const TransactionGraph& graph,
                                const std::optional<TimeWindow>& window = std::nullopt);

// Partitions accounts around the inner set: nodes pre-marked inner stay
// inner; other nodes become outer_source / outer_sink by the sign of their
// net flow into the inner set, or unassigned at exactly zero. A graph with
// no inner marker becomes all-inner.
TransactionGraph assign_roles(TransactionGraph graph);

} // namespace graphlaunder
