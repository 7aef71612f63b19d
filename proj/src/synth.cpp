#include "graphlaunder/synth.hpp"

#include <algorithm>
#include <cmath>

#include "graphlaunder/errors.hpp"
#include "graphlaunder/rng.hpp"

namespace graphlaunder {

namespace {

double round_cents(double amount) {
    return std::max(0.01, std::round(amount * 100.0) / 100.0);
}

struct PatternEdge {
    NodeId src;
    NodeId dst;
    double amount;
};

// Edges in stage order (upstream hops first) so evenly spaced timestamps
// respect causality.
std::vector<PatternEdge> pattern_edges(const PatternSpec& spec,
                                       const std::vector<NodeId>& m) {
    const int n = static_cast<int>(m.size());
    const double total = spec.total_amount;
    const double keep = 1.0 - spec.commission_rate;
    std::vector<PatternEdge> edges;

    switch (spec.kind) {
        case AlertType::column_chain:
        case AlertType::scatter_gather: {
            // one sender splits across the middle column, which forwards to
            // one receiver
            const int mids = n - 2;
            const double share = total / mids;
            for (int i = 0; i < mids; ++i) edges.push_back({m[0], m[1 + i], share});
            for (int i = 0; i < mids; ++i)
                edges.push_back({m[1 + i], m[static_cast<std::size_t>(n) - 1], share});
            break;
        }
        case AlertType::row_chain: {
            double amount = total;
            for (int i = 0; i + 1 < n; ++i) {
                edges.push_back({m[static_cast<std::size_t>(i)],
                                 m[static_cast<std::size_t>(i) + 1], amount});
                amount *= keep;
            }
            break;
        }
        case AlertType::cycle: {
            double amount = total;
            for (int i = 0; i < n; ++i) {
                edges.push_back({m[static_cast<std::size_t>(i)],
                                 m[static_cast<std::size_t>((i + 1) % n)], amount});
                amount *= keep;
            }
            break;
        }
        case AlertType::gather_scatter: {
            const int sources = n / 2;
            const int sinks = n - 1 - sources;
            const NodeId middle = m[static_cast<std::size_t>(sources)];
            for (int i = 0; i < sources; ++i)
                edges.push_back({m[static_cast<std::size_t>(i)], middle, total / sources});
            for (int i = 0; i < sinks; ++i)
                edges.push_back({middle, m[static_cast<std::size_t>(sources) + 1 + i],
                                 total / sinks});
            break;
        }
        case AlertType::fan_in: {
            for (int i = 1; i < n; ++i)
                edges.push_back({m[static_cast<std::size_t>(i)], m[0], total / (n - 1)});
            break;
        }
        case AlertType::fan_out: {
            for (int i = 1; i < n; ++i)
                edges.push_back({m[0], m[static_cast<std::size_t>(i)], total / (n - 1)});
            break;
        }
        case AlertType::other:
            throw ConfigError("pattern kind must be a concrete topology");
    }
    return edges;
}

} // namespace

nlohmann::json DatasetManifest::to_json() const {
    nlohmann::json patterns_json = nlohmann::json::array();
    for (const auto& p : patterns) {
        patterns_json.push_back({{"kind", to_string(p.kind)},
                                 {"alert_id", p.alert_id},
                                 {"members", p.members},
                                 {"total_amount", p.total_amount}});
    }
    return {{"version", 1},
            {"seed", seed},
            {"nodes", nodes},
            {"edges", edges},
            {"illicit", illicit},
            {"prevalence", prevalence},
            {"patterns", patterns_json}};
}

DatasetManifest DatasetManifest::from_json(const nlohmann::json& j) {
    DatasetManifest m;
    m.seed = j.at("seed").get<std::uint64_t>();
    m.nodes = j.at("nodes").get<std::int64_t>();
    m.edges = j.at("edges").get<std::int64_t>();
    m.illicit = j.at("illicit").get<std::int64_t>();
    m.prevalence = j.at("prevalence").get<double>();
    for (const auto& p : j.at("patterns")) {
        PlantedPattern pp;
        pp.kind = alert_type_from(p.at("kind").get<std::string>());
        pp.alert_id = p.at("alert_id").get<std::int64_t>();
        pp.members = p.at("members").get<std::vector<NodeId>>();
        pp.total_amount = p.at("total_amount").get<double>();
        m.patterns.push_back(std::move(pp));
    }
    return m;
}

TransactionGraph gen_background(const BackgroundParams& params, std::uint64_t seed) {
    if (params.n_nodes < 1) throw ConfigError("background needs at least one node");
    if (params.t_end <= params.t_begin) throw ConfigError("time horizon is empty");

    auto rng = make_rng(mix_seed(seed, 0xBAC6ULL));
    std::uniform_int_distribution<std::int64_t> ts_dist(params.t_begin, params.t_end);
    std::poisson_distribution<int> degree_dist(params.avg_out_degree);
    std::lognormal_distribution<double> amount_dist(params.amount_log_mean,
                                                    params.amount_log_stdev);
    std::uniform_int_distribution<int> kind_dist(0, 9);

    std::vector<AccountNode> nodes;
    nodes.reserve(static_cast<std::size_t>(params.n_nodes));
    for (int i = 0; i < params.n_nodes; ++i) {
        AccountNode n;
        n.id = i;
        n.external_key = std::to_string(i);
        n.kind = kind_dist(rng) == 0 ? AccountKind::organization : AccountKind::individual;
        n.created_at = ts_dist(rng);
        n.label.value = LabelValue::licit;
        nodes.push_back(std::move(n));
    }

    std::vector<TransferEdge> edges;
    if (params.n_nodes > 1) {
        std::uniform_int_distribution<int> target_dist(0, params.n_nodes - 1);
        std::int64_t tx = 0;
        for (int u = 0; u < params.n_nodes; ++u) {
            int degree = degree_dist(rng);
            for (int k = 0; k < degree; ++k) {
                int v = target_dist(rng);
                while (v == u) v = target_dist(rng);
                TransferEdge e;
                e.tx_id = tx++;
                e.src = u;
                e.dst = v;
                e.amount = round_cents(amount_dist(rng));
                e.timestamp = ts_dist(rng);
                edges.push_back(e);
            }
        }
    }

    return build_graph(std::move(nodes), std::move(edges));
}

std::pair<TransactionGraph, std::set<NodeId>> inject_pattern(const TransactionGraph& graph,
                                                             const PatternSpec& spec,
                                                             std::uint64_t seed) {
    if (spec.member_count < 3) throw ConfigError("patterns need at least 3 members");
    if (spec.end_time <= spec.start_time) throw ConfigError("pattern time window is empty");

    std::vector<NodeId> pool;
    for (const auto& n : graph.nodes()) {
        if (n.label.value != LabelValue::illicit) pool.push_back(n.id);
    }
    std::sort(pool.begin(), pool.end());
    if (static_cast<int>(pool.size()) < spec.member_count) {
        throw InsufficientNodes("pattern needs " + std::to_string(spec.member_count) +
                                " members, only " + std::to_string(pool.size()) +
                                " unlabelled-or-licit nodes available");
    }

    auto rng = make_rng(mix_seed(seed, 0x9A77ULL));
    partial_shuffle(pool, static_cast<std::size_t>(spec.member_count), rng);
    std::vector<NodeId> members(pool.begin(), pool.begin() + spec.member_count);

    std::int64_t next_tx = 0;
    std::int64_t alert_id = 1;
    for (const auto& e : graph.edges()) {
        next_tx = std::max(next_tx, e.tx_id + 1);
        if (e.alert_id) alert_id = std::max(alert_id, *e.alert_id + 1);
    }

    auto nodes = graph.nodes();
    auto edges = graph.edges();
    auto planted = pattern_edges(spec, members);
    const auto span = spec.end_time - spec.start_time;
    for (std::size_t i = 0; i < planted.size(); ++i) {
        TransferEdge e;
        e.tx_id = next_tx++;
        e.src = planted[i].src;
        e.dst = planted[i].dst;
        e.amount = planted[i].amount;
        e.timestamp = spec.start_time +
                      span * static_cast<std::int64_t>(i + 1) /
                          static_cast<std::int64_t>(planted.size() + 1);
        e.alert_id = alert_id;
        edges.push_back(e);
    }

    std::set<NodeId> member_set(members.begin(), members.end());
    for (auto& n : nodes) {
        if (member_set.count(n.id)) {
            n.label.value = LabelValue::illicit;
            n.label.alert_type = spec.kind;
        }
    }

    TransactionGraph out = build_graph(std::move(nodes), std::move(edges));
    if (graph.timestep_bins()) out.set_timestep_bins(*graph.timestep_bins());
    return {std::move(out), std::move(member_set)};
}

std::pair<TransactionGraph, DatasetManifest> gen_dataset(const DatasetConfig& config,
                                                         std::uint64_t seed) {
    TransactionGraph graph = gen_background(config.background, mix_seed(seed, 0));

    DatasetManifest manifest;
    manifest.seed = seed;

    int instance = 0;
    for (const auto& [spec, count] : config.patterns) {
        for (int c = 0; c < count; ++c) {
            ++instance;
            auto [next, members] =
                inject_pattern(graph, spec, mix_seed(seed, 1, static_cast<std::uint64_t>(instance)));
            graph = std::move(next);

            PlantedPattern planted;
            planted.kind = spec.kind;
            planted.members.assign(members.begin(), members.end());
            planted.total_amount = spec.total_amount;
            // Members of the newest pattern share one alert id; read it back
            // off any of their planted edges.
            for (const auto& e : graph.edges()) {
                if (e.alert_id) planted.alert_id = std::max(planted.alert_id, *e.alert_id);
            }
            manifest.patterns.push_back(std::move(planted));
        }
    }

    manifest.nodes = graph.node_count();
    manifest.edges = graph.edge_count();
    manifest.illicit = static_cast<std::int64_t>(
        std::count_if(graph.nodes().begin(), graph.nodes().end(), [](const AccountNode& n) {
            return n.label.value == LabelValue::illicit;
        }));
    manifest.prevalence = graph.node_count() == 0
                              ? 0.0
                              : static_cast<double>(manifest.illicit) / graph.node_count();
    return {std::move(graph), std::move(manifest)};
}

} // namespace graphlaunder
