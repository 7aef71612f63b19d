#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "graphlaunder/graph.hpp"

namespace graphlaunder {

// One laundering topology to plant. kind must be one of the seven pattern
// kinds (never AlertType::other).
struct PatternSpec {
    AlertType kind = AlertType::cycle;
    int member_count = 3;
    double total_amount = 10000.0;
    std::int64_t start_time = 0;
    std::int64_t end_time = 0;
    double commission_rate = 0.0; // applies per hop in row_chain and cycle only
};

struct BackgroundParams {
    int n_nodes = 1000;
    double avg_out_degree = 4.0;
    double amount_log_mean = 5.0;  // log-currency
    double amount_log_stdev = 1.0;
    std::int64_t t_begin = 1'609'459'200; // epoch seconds
    std::int64_t t_end = 1'617'235'200;
};

struct DatasetConfig {
    BackgroundParams background;
    // (spec, how many instances to plant)
    std::vector<std::pair<PatternSpec, int>> patterns;
};

struct PlantedPattern {
    AlertType kind = AlertType::cycle;
    std::int64_t alert_id = 0;
    std::vector<NodeId> members;
    double total_amount = 0.0;
};

struct DatasetManifest {
    std::uint64_t seed = 0;
    std::int64_t nodes = 0;
    std::int64_t edges = 0;
    std::int64_t illicit = 0;
    double prevalence = 0.0;
    std::vector<PlantedPattern> patterns;

    nlohmann::json to_json() const;
    static DatasetManifest from_json(const nlohmann::json& j);
};

// All-licit background graph: out-degrees Poisson(avg_out_degree), targets
// uniform excluding self, amounts log-normal, timestamps uniform over the
// horizon. Deterministic per seed.
TransactionGraph gen_background(const BackgroundParams& params, std::uint64_t seed);

// Adds the edges realizing the topology over member_count fresh members
// drawn from licit-or-unlabelled nodes, and relabels every member illicit
// with alert_type = kind.
std::pair<TransactionGraph, std::set<NodeId>> inject_pattern(const TransactionGraph& graph,
                                                             const PatternSpec& spec,
                                                             std::uint64_t seed);

std::pair<TransactionGraph, DatasetManifest> gen_dataset(const DatasetConfig& config,
                                                         std::uint64_t seed);

} // namespace graphlaunder
