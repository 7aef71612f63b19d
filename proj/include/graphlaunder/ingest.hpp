#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "graphlaunder/graph.hpp"

namespace graphlaunder {

struct RejectedRow {
    std::string file;
    int line = 0;
    std::string reason;
};

struct IngestReport {
    std::int64_t rows_read = 0; // data rows across all input files
    std::vector<RejectedRow> rejected;
    std::int64_t nodes = 0;
    std::int64_t edges = 0;
    std::map<std::string, std::int64_t> label_histogram;
    std::int64_t timestep_count = 0;
    std::int64_t self_loops = 0;
    std::string timestamp_mode; // "epoch" or "step"

    std::int64_t rows_accepted() const {
        return rows_read - static_cast<std::int64_t>(rejected.size());
    }
    nlohmann::json to_json() const;
};

// AMLSim-style inputs. Fixed columns:
//   accounts:     ACCOUNT_ID, CUSTOMER_ID, ACCT_TYPE, IS_SAR, CREATED
//   transactions: TX_ID, SENDER_ID, RECEIVER_ID, TX_TYPE, AMOUNT, TIMESTAMP,
//                 IS_SAR, ALERT_ID
//   alerts:       ALERT_ID, ALERT_TYPE, IS_SAR, MEMBER_ACCOUNT_ID
// IS_SAR on an account: "true" -> illicit, "false" -> licit, empty -> unknown.
// Timestamps are epoch seconds or step indices, auto-detected by a 10^6
// magnitude threshold and recorded in the report. Rejected rows never abort
// the parse unless more than 10% of all rows reject. An empty alerts_path
// means no alerts file.
std::pair<TransactionGraph, IngestReport> parse_amlsim(const std::string& accounts_path,
                                                       const std::string& transactions_path,
                                                       const std::string& alerts_path);

// Elliptic-style inputs: features (id, timestep, remaining feature columns;
// the timestep is kept as the first feature), edgelist (src id, dst id) and
// classes (id, {"1" illicit, "2" licit, "unknown"}). The features file may
// or may not carry a header row (auto-detected).
std::pair<TransactionGraph, IngestReport> parse_elliptic(const std::string& features_path,
                                                         const std::string& edgelist_path,
                                                         const std::string& classes_path);

// Graph exchange format: three CSV files in a directory.
//   nodes.csv:  node_id,external_key,account_kind,created_at,role[,f0..f{d-1}]
//   edges.csv:  tx_id,src,dst,amount,timestamp,alert_id
//   labels.csv: node_id,label,alert_type
void export_graph(const TransactionGraph& graph, const std::string& dir);
TransactionGraph import_graph(const std::string& dir);

// Writes the graph in the AMLSim column format above (accounts.csv,
// transactions.csv, alerts.csv) so it feeds parse_amlsim back unchanged.
void export_amlsim(const TransactionGraph& graph, const std::string& dir);

} // namespace graphlaunder
