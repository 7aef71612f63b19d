#include "graphlaunder/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <unordered_map>

#include "graphlaunder/csv.hpp"
#include "graphlaunder/errors.hpp"

namespace graphlaunder {

namespace {

constexpr std::int64_t kEpochThreshold = 1'000'000;
constexpr double kMaxRejectFraction = 0.10;

nlohmann::json rejected_to_json(const std::vector<RejectedRow>& rejected) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rejected) {
        arr.push_back({{"file", r.file}, {"line", r.line}, {"reason", r.reason}});
    }
    return arr;
}

// Column lookup by header name; throws MissingColumn.
struct HeaderIndex {
    std::vector<std::string> names;

    int require(const std::string& name, const std::string& file) const {
        auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) {
            throw MissingColumn(file + ": missing column " + name);
        }
        return static_cast<int>(it - names.begin());
    }
};

HeaderIndex read_header(CsvReader& reader) {
    std::vector<std::string> fields;
    if (!reader.next(fields)) {
        throw MalformedRow(reader.path() + ": empty file, header row required");
    }
    return HeaderIndex{fields};
}

// IS_SAR tri-state: true / false / absent.
std::optional<bool> parse_flag(std::string_view text) {
    if (text.empty()) return std::nullopt;
    if (text == "true" || text == "True" || text == "TRUE" || text == "1" || text == "t" ||
        text == "yes") {
        return true;
    }
    if (text == "false" || text == "False" || text == "FALSE" || text == "0" || text == "f" ||
        text == "no") {
        return false;
    }
    return std::nullopt; // caller rejects unrecognised tokens where it matters
}

bool flag_token_valid(std::string_view text) {
    return text.empty() || parse_flag(text).has_value();
}

void check_rejection_rate(const IngestReport& report) {
    if (report.rows_read == 0) return;
    double rate = static_cast<double>(report.rejected.size()) /
                  static_cast<double>(report.rows_read);
    if (rate > kMaxRejectFraction) {
        throw RejectionRateExceeded(
            std::to_string(report.rejected.size()) + " of " + std::to_string(report.rows_read) +
            " rows rejected (limit 10%)");
    }
}

void finalize_report(const TransactionGraph& graph, IngestReport& report) {
    report.nodes = graph.node_count();
    report.edges = graph.edge_count();
    report.label_histogram.clear();
    for (const auto& n : graph.nodes()) {
        ++report.label_histogram[to_string(n.label.value)];
    }
}

// Distinct edge timestamps; doubles as the step-mode bin list.
std::vector<std::int64_t> distinct_timestamps(const std::vector<TransferEdge>& edges) {
    std::set<std::int64_t> distinct;
    for (const auto& e : edges) distinct.insert(e.timestamp);
    return {distinct.begin(), distinct.end()};
}

} // namespace

nlohmann::json IngestReport::to_json() const {
    return {
        {"rows_read", rows_read},
        {"rows_accepted", rows_accepted()},
        {"rows_rejected", static_cast<std::int64_t>(rejected.size())},
        {"rejected", rejected_to_json(rejected)},
        {"nodes", nodes},
        {"edges", edges},
        {"label_histogram", label_histogram},
        {"timestep_count", timestep_count},
        {"self_loops", self_loops},
        {"timestamp_mode", timestamp_mode},
    };
}

std::pair<TransactionGraph, IngestReport> parse_amlsim(const std::string& accounts_path,
                                                       const std::string& transactions_path,
                                                       const std::string& alerts_path) {
    IngestReport report;
    std::vector<std::string> fields;

    // --- accounts ---
    CsvReader accounts(accounts_path);
    HeaderIndex ah = read_header(accounts);
    const int a_id = ah.require("ACCOUNT_ID", accounts_path);
    const int a_type = ah.require("ACCT_TYPE", accounts_path);
    const int a_sar = ah.require("IS_SAR", accounts_path);
    const int a_created = ah.require("CREATED", accounts_path);
    ah.require("CUSTOMER_ID", accounts_path);

    std::vector<AccountNode> nodes;
    std::unordered_map<std::string, NodeId> id_of_key;
    while (accounts.next(fields)) {
        ++report.rows_read;
        if (fields.size() != ah.names.size()) {
            report.rejected.push_back({accounts_path, accounts.record_line(), "wrong field count"});
            continue;
        }
        const std::string& key = fields[static_cast<std::size_t>(a_id)];
        if (key.empty()) {
            report.rejected.push_back({accounts_path, accounts.record_line(), "empty ACCOUNT_ID"});
            continue;
        }
        if (id_of_key.count(key)) {
            report.rejected.push_back(
                {accounts_path, accounts.record_line(), "duplicate ACCOUNT_ID " + key});
            continue;
        }
        auto created = parse_int(fields[static_cast<std::size_t>(a_created)]);
        if (!created) {
            report.rejected.push_back({accounts_path, accounts.record_line(), "bad CREATED"});
            continue;
        }
        const std::string& sar_text = fields[static_cast<std::size_t>(a_sar)];
        if (!flag_token_valid(sar_text)) {
            report.rejected.push_back({accounts_path, accounts.record_line(), "bad IS_SAR"});
            continue;
        }

        AccountNode node;
        node.id = static_cast<NodeId>(nodes.size());
        node.external_key = key;
        node.kind = account_kind_from(fields[static_cast<std::size_t>(a_type)]);
        node.created_at = *created;
        auto sar = parse_flag(sar_text);
        if (sar.has_value()) {
            node.label.value = *sar ? LabelValue::illicit : LabelValue::licit;
        }
        id_of_key.emplace(key, node.id);
        nodes.push_back(std::move(node));
    }

    // --- alerts (optional file) ---
    std::vector<AlertRecord> alert_records;
    std::unordered_map<std::int64_t, AlertType> alert_type_of;
    if (!alerts_path.empty()) {
        CsvReader alerts(alerts_path);
        HeaderIndex lh = read_header(alerts);
        const int l_id = lh.require("ALERT_ID", alerts_path);
        const int l_type = lh.require("ALERT_TYPE", alerts_path);
        const int l_sar = lh.require("IS_SAR", alerts_path);
        const int l_member = lh.require("MEMBER_ACCOUNT_ID", alerts_path);
        while (alerts.next(fields)) {
            ++report.rows_read;
            if (fields.size() != lh.names.size()) {
                report.rejected.push_back({alerts_path, alerts.record_line(), "wrong field count"});
                continue;
            }
            auto alert_id = parse_int(fields[static_cast<std::size_t>(l_id)]);
            if (!alert_id) {
                report.rejected.push_back({alerts_path, alerts.record_line(), "bad ALERT_ID"});
                continue;
            }
            auto member = id_of_key.find(fields[static_cast<std::size_t>(l_member)]);
            if (member == id_of_key.end()) {
                report.rejected.push_back({alerts_path, alerts.record_line(),
                                           "unknown MEMBER_ACCOUNT_ID " +
                                               fields[static_cast<std::size_t>(l_member)]});
                continue;
            }
            AlertType type = alert_type_from(fields[static_cast<std::size_t>(l_type)]);
            alert_type_of.emplace(*alert_id, type);
            // Alerts explicitly marked false are investigation noise: read,
            // counted, but not labelled.
            auto sar = parse_flag(fields[static_cast<std::size_t>(l_sar)]);
            if (!sar.has_value() || *sar) {
                alert_records.push_back(
                    {AlertRecord::Target::node, static_cast<std::int64_t>(member->second), type});
            }
        }
    }

    // --- transactions ---
    CsvReader txs(transactions_path);
    HeaderIndex th = read_header(txs);
    const int t_id = th.require("TX_ID", transactions_path);
    const int t_src = th.require("SENDER_ID", transactions_path);
    const int t_dst = th.require("RECEIVER_ID", transactions_path);
    const int t_amount = th.require("AMOUNT", transactions_path);
    const int t_ts = th.require("TIMESTAMP", transactions_path);
    const int t_sar = th.require("IS_SAR", transactions_path);
    const int t_alert = th.require("ALERT_ID", transactions_path);
    th.require("TX_TYPE", transactions_path);

    std::vector<TransferEdge> edges;
    std::set<std::int64_t> seen_tx;
    while (txs.next(fields)) {
        ++report.rows_read;
        if (fields.size() != th.names.size()) {
            report.rejected.push_back({transactions_path, txs.record_line(), "wrong field count"});
            continue;
        }
        auto tx_id = parse_int(fields[static_cast<std::size_t>(t_id)]);
        if (!tx_id || !seen_tx.insert(*tx_id).second) {
            report.rejected.push_back(
                {transactions_path, txs.record_line(), "bad or duplicate TX_ID"});
            continue;
        }
        auto src = id_of_key.find(fields[static_cast<std::size_t>(t_src)]);
        if (src == id_of_key.end()) {
            report.rejected.push_back({transactions_path, txs.record_line(),
                                       "unknown SENDER_ID " +
                                           fields[static_cast<std::size_t>(t_src)]});
            continue;
        }
        auto dst = id_of_key.find(fields[static_cast<std::size_t>(t_dst)]);
        if (dst == id_of_key.end()) {
            report.rejected.push_back({transactions_path, txs.record_line(),
                                       "unknown RECEIVER_ID " +
                                           fields[static_cast<std::size_t>(t_dst)]});
            continue;
        }
        auto amount = parse_double(fields[static_cast<std::size_t>(t_amount)]);
        if (!amount || !(*amount > 0.0)) {
            report.rejected.push_back({transactions_path, txs.record_line(), "bad AMOUNT"});
            continue;
        }
        auto ts = parse_int(fields[static_cast<std::size_t>(t_ts)]);
        if (!ts) {
            report.rejected.push_back({transactions_path, txs.record_line(), "bad TIMESTAMP"});
            continue;
        }

        TransferEdge edge;
        edge.tx_id = *tx_id;
        edge.src = src->second;
        edge.dst = dst->second;
        edge.amount = *amount;
        edge.timestamp = *ts;
        if (auto alert_id = parse_int(fields[static_cast<std::size_t>(t_alert)])) {
            edge.alert_id = *alert_id;
        }
        if (edge.src == edge.dst) ++report.self_loops;

        auto sar = parse_flag(fields[static_cast<std::size_t>(t_sar)]);
        if (sar.value_or(false) && edge.alert_id) {
            auto it = alert_type_of.find(*edge.alert_id);
            AlertType type = it == alert_type_of.end() ? AlertType::other : it->second;
            alert_records.push_back({AlertRecord::Target::transaction, edge.tx_id, type});
        }
        edges.push_back(std::move(edge));
    }

    check_rejection_rate(report);

    auto ts_list = distinct_timestamps(edges);
    report.timestep_count = static_cast<std::int64_t>(ts_list.size());
    bool step_mode = !ts_list.empty() && ts_list.back() < kEpochThreshold &&
                     ts_list.front() > -kEpochThreshold;
    report.timestamp_mode = step_mode ? "step" : "epoch";

    TransactionGraph graph = build_graph(std::move(nodes), std::move(edges), alert_records);
    if (step_mode) graph.set_timestep_bins(std::move(ts_list));
    finalize_report(graph, report);
    return {std::move(graph), std::move(report)};
}

std::pair<TransactionGraph, IngestReport> parse_elliptic(const std::string& features_path,
                                                         const std::string& edgelist_path,
                                                         const std::string& classes_path) {
    IngestReport report;
    std::vector<std::string> fields;

    // --- classes ---
    std::unordered_map<std::int64_t, LabelValue> class_of;
    {
        CsvReader classes(classes_path);
        HeaderIndex ch = read_header(classes);
        if (ch.names.size() < 2) throw MissingColumn(classes_path + ": expected id,class columns");
        while (classes.next(fields)) {
            ++report.rows_read;
            if (fields.size() < 2) {
                report.rejected.push_back({classes_path, classes.record_line(), "wrong field count"});
                continue;
            }
            auto id = parse_int(fields[0]);
            if (!id) {
                report.rejected.push_back({classes_path, classes.record_line(), "bad id"});
                continue;
            }
            const std::string& token = fields[1];
            LabelValue value;
            if (token == "1") {
                value = LabelValue::illicit;
            } else if (token == "2") {
                value = LabelValue::licit;
            } else if (token == "unknown" || token == "Unknown" || token.empty()) {
                value = LabelValue::unknown;
            } else {
                throw UnknownClassToken(classes_path + ":" +
                                        std::to_string(classes.record_line()) +
                                        ": unrecognised class token \"" + token + "\"");
            }
            class_of[*id] = value;
        }
    }

    // --- features ---
    std::vector<AccountNode> nodes;
    std::unordered_map<std::int64_t, NodeId> id_of_ext;
    std::unordered_map<NodeId, std::int64_t> timestep_of;
    std::size_t feature_len = 0;
    {
        CsvReader feats(features_path);
        bool first_record = true;
        while (feats.next(fields)) {
            if (first_record) {
                first_record = false;
                // Header auto-detection: a header's first cell is not numeric.
                if (!parse_double(fields[0]).has_value()) continue;
            }
            ++report.rows_read;
            if (fields.size() < 2) {
                report.rejected.push_back({features_path, feats.record_line(), "wrong field count"});
                continue;
            }
            auto ext = parse_int(fields[0]);
            auto ts = parse_int(fields[1]);
            if (!ext || !ts) {
                report.rejected.push_back({features_path, feats.record_line(), "bad id or timestep"});
                continue;
            }
            if (id_of_ext.count(*ext)) {
                report.rejected.push_back({features_path, feats.record_line(), "duplicate id"});
                continue;
            }
            // The timestep column doubles as the first feature.
            std::vector<double> feat;
            feat.reserve(fields.size() - 1);
            bool ok = true;
            for (std::size_t i = 1; i < fields.size(); ++i) {
                auto v = parse_double(fields[i]);
                if (!v) {
                    ok = false;
                    break;
                }
                feat.push_back(*v);
            }
            if (!ok) {
                report.rejected.push_back({features_path, feats.record_line(), "bad feature value"});
                continue;
            }
            if (feature_len == 0) {
                feature_len = feat.size();
            } else if (feat.size() != feature_len) {
                throw FeatureLengthMismatch(features_path + ":" +
                                            std::to_string(feats.record_line()) + ": row has " +
                                            std::to_string(feat.size()) + " features, expected " +
                                            std::to_string(feature_len));
            }

            AccountNode node;
            node.id = static_cast<NodeId>(nodes.size());
            node.external_key = std::to_string(*ext);
            node.kind = AccountKind::unknown;
            node.created_at = *ts;
            node.features = std::move(feat);
            auto cls = class_of.find(*ext);
            if (cls != class_of.end()) node.label.value = cls->second;
            id_of_ext.emplace(*ext, node.id);
            timestep_of.emplace(node.id, *ts);
            nodes.push_back(std::move(node));
        }
    }

    // --- edges ---
    std::vector<TransferEdge> edges;
    {
        CsvReader edgelist(edgelist_path);
        bool first_record = true;
        std::int64_t next_tx = 0;
        while (edgelist.next(fields)) {
            if (first_record) {
                first_record = false;
                if (!parse_double(fields[0]).has_value()) continue;
            }
            ++report.rows_read;
            if (fields.size() < 2) {
                report.rejected.push_back({edgelist_path, edgelist.record_line(), "wrong field count"});
                continue;
            }
            auto a = parse_int(fields[0]);
            auto b = parse_int(fields[1]);
            if (!a || !b) {
                report.rejected.push_back({edgelist_path, edgelist.record_line(), "bad id"});
                continue;
            }
            auto sa = id_of_ext.find(*a);
            auto sb = id_of_ext.find(*b);
            if (sa == id_of_ext.end() || sb == id_of_ext.end()) {
                report.rejected.push_back(
                    {edgelist_path, edgelist.record_line(), "edge references unknown id"});
                continue;
            }
            TransferEdge edge;
            edge.tx_id = next_tx++;
            edge.src = sa->second;
            edge.dst = sb->second;
            edge.amount = 1.0; // payment flows carry no amounts; unit weight
            edge.timestamp = timestep_of.at(edge.src);
            if (edge.src == edge.dst) ++report.self_loops;
            edges.push_back(edge);
        }
    }

    check_rejection_rate(report);

    std::set<std::int64_t> steps;
    for (const auto& [id, ts] : timestep_of) steps.insert(ts);
    report.timestep_count = static_cast<std::int64_t>(steps.size());
    report.timestamp_mode = "step";

    TransactionGraph graph = build_graph(std::move(nodes), std::move(edges));
    graph.set_timestep_bins({steps.begin(), steps.end()});
    finalize_report(graph, report);
    return {std::move(graph), std::move(report)};
}

void export_graph(const TransactionGraph& graph, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const int fdim = graph.feature_dim().value_or(0);

    {
        std::ofstream out(dir + "/nodes.csv");
        if (!out) throw FileNotFound("cannot write " + dir + "/nodes.csv");
        out << "node_id,external_key,account_kind,created_at,role";
        for (int d = 0; d < fdim; ++d) out << ",f" << d;
        out << "\n";
        for (const auto& n : graph.nodes()) {
            std::vector<std::string> row{
                std::to_string(n.id),        n.external_key, to_string(n.kind),
                std::to_string(n.created_at), to_string(n.role)};
            if (n.features) {
                for (double v : *n.features) row.push_back(format_double(v));
            } else {
                for (int d = 0; d < fdim; ++d) row.emplace_back();
            }
            write_csv_row(out, row);
        }
    }
    {
        std::ofstream out(dir + "/edges.csv");
        if (!out) throw FileNotFound("cannot write " + dir + "/edges.csv");
        out << "tx_id,src,dst,amount,timestamp,alert_id\n";
        for (const auto& e : graph.edges()) {
            std::vector<std::string> row{
                std::to_string(e.tx_id),      std::to_string(e.src),
                std::to_string(e.dst),        format_double(e.amount),
                std::to_string(e.timestamp),  e.alert_id ? std::to_string(*e.alert_id) : ""};
            write_csv_row(out, row);
        }
    }
    {
        std::ofstream out(dir + "/labels.csv");
        if (!out) throw FileNotFound("cannot write " + dir + "/labels.csv");
        out << "node_id,label,alert_type\n";
        for (const auto& n : graph.nodes()) {
            std::vector<std::string> row{
                std::to_string(n.id), to_string(n.label.value),
                n.label.alert_type ? to_string(*n.label.alert_type) : ""};
            write_csv_row(out, row);
        }
    }
}

TransactionGraph import_graph(const std::string& dir) {
    std::vector<std::string> fields;

    std::vector<AccountNode> nodes;
    {
        CsvReader reader(dir + "/nodes.csv");
        HeaderIndex h = read_header(reader);
        const int c_id = h.require("node_id", dir + "/nodes.csv");
        const int c_key = h.require("external_key", dir + "/nodes.csv");
        const int c_kind = h.require("account_kind", dir + "/nodes.csv");
        const int c_created = h.require("created_at", dir + "/nodes.csv");
        const int c_role = h.require("role", dir + "/nodes.csv");
        const int fdim = static_cast<int>(h.names.size()) - 5;
        while (reader.next(fields)) {
            if (fields.size() != h.names.size()) {
                throw MalformedRow(dir + "/nodes.csv:" + std::to_string(reader.record_line()) +
                                   ": wrong field count");
            }
            AccountNode n;
            auto id = parse_int(fields[static_cast<std::size_t>(c_id)]);
            auto created = parse_int(fields[static_cast<std::size_t>(c_created)]);
            if (!id || !created) {
                throw MalformedRow(dir + "/nodes.csv:" + std::to_string(reader.record_line()) +
                                   ": bad numeric field");
            }
            n.id = static_cast<NodeId>(*id);
            n.external_key = fields[static_cast<std::size_t>(c_key)];
            n.kind = account_kind_from(fields[static_cast<std::size_t>(c_kind)]);
            n.created_at = *created;
            if (auto role = node_role_from(fields[static_cast<std::size_t>(c_role)])) {
                n.role = *role;
            }
            if (fdim > 0 && !fields[5].empty()) {
                std::vector<double> feat;
                feat.reserve(static_cast<std::size_t>(fdim));
                for (int d = 0; d < fdim; ++d) {
                    auto v = parse_double(fields[static_cast<std::size_t>(5 + d)]);
                    if (!v) {
                        throw MalformedRow(dir + "/nodes.csv:" +
                                           std::to_string(reader.record_line()) +
                                           ": bad feature value");
                    }
                    feat.push_back(*v);
                }
                n.features = std::move(feat);
            }
            nodes.push_back(std::move(n));
        }
    }

    std::vector<TransferEdge> edges;
    {
        CsvReader reader(dir + "/edges.csv");
        HeaderIndex h = read_header(reader);
        h.require("tx_id", dir + "/edges.csv");
        while (reader.next(fields)) {
            if (fields.size() != h.names.size()) {
                throw MalformedRow(dir + "/edges.csv:" + std::to_string(reader.record_line()) +
                                   ": wrong field count");
            }
            auto tx = parse_int(fields[0]);
            auto src = parse_int(fields[1]);
            auto dst = parse_int(fields[2]);
            auto amount = parse_double(fields[3]);
            auto ts = parse_int(fields[4]);
            if (!tx || !src || !dst || !amount || !ts) {
                throw MalformedRow(dir + "/edges.csv:" + std::to_string(reader.record_line()) +
                                   ": bad numeric field");
            }
            TransferEdge e;
            e.tx_id = *tx;
            e.src = static_cast<NodeId>(*src);
            e.dst = static_cast<NodeId>(*dst);
            e.amount = *amount;
            e.timestamp = *ts;
            if (auto alert = parse_int(fields[5])) e.alert_id = *alert;
            edges.push_back(e);
        }
    }

    {
        CsvReader reader(dir + "/labels.csv");
        HeaderIndex h = read_header(reader);
        h.require("label", dir + "/labels.csv");
        std::unordered_map<NodeId, std::size_t> pos;
        for (std::size_t i = 0; i < nodes.size(); ++i) pos.emplace(nodes[i].id, i);
        while (reader.next(fields)) {
            if (fields.size() != h.names.size()) {
                throw MalformedRow(dir + "/labels.csv:" + std::to_string(reader.record_line()) +
                                   ": wrong field count");
            }
            auto id = parse_int(fields[0]);
            if (!id) {
                throw MalformedRow(dir + "/labels.csv:" + std::to_string(reader.record_line()) +
                                   ": bad node id");
            }
            auto it = pos.find(static_cast<NodeId>(*id));
            if (it == pos.end()) {
                throw MalformedRow(dir + "/labels.csv:" + std::to_string(reader.record_line()) +
                                   ": label for unknown node");
            }
            auto& n = nodes[it->second];
            n.label.value = label_value_from(fields[1]);
            if (n.label.value == LabelValue::illicit && !fields[2].empty()) {
                n.label.alert_type = alert_type_from(fields[2]);
            }
        }
    }

    auto ts_list = distinct_timestamps(edges);
    bool step_mode = !ts_list.empty() && ts_list.back() < kEpochThreshold &&
                     ts_list.front() > -kEpochThreshold;
    TransactionGraph graph = build_graph(std::move(nodes), std::move(edges));
    if (step_mode) graph.set_timestep_bins(std::move(ts_list));
    return graph;
}

void export_amlsim(const TransactionGraph& graph, const std::string& dir) {
    std::filesystem::create_directories(dir);

    {
        std::ofstream out(dir + "/accounts.csv");
        if (!out) throw FileNotFound("cannot write " + dir + "/accounts.csv");
        out << "ACCOUNT_ID,CUSTOMER_ID,ACCT_TYPE,IS_SAR,CREATED\n";
        for (const auto& n : graph.nodes()) {
            std::string sar;
            if (n.label.value == LabelValue::illicit) sar = "true";
            if (n.label.value == LabelValue::licit) sar = "false";
            std::vector<std::string> row{n.external_key, "C" + n.external_key,
                                         n.kind == AccountKind::organization ? "ORGANIZATION"
                                                                             : "INDIVIDUAL",
                                         sar, std::to_string(n.created_at)};
            write_csv_row(out, row);
        }
    }
    {
        std::ofstream out(dir + "/transactions.csv");
        if (!out) throw FileNotFound("cannot write " + dir + "/transactions.csv");
        out << "TX_ID,SENDER_ID,RECEIVER_ID,TX_TYPE,AMOUNT,TIMESTAMP,IS_SAR,ALERT_ID\n";
        for (const auto& e : graph.edges()) {
            std::vector<std::string> row{std::to_string(e.tx_id),
                                         graph.node(e.src).external_key,
                                         graph.node(e.dst).external_key,
                                         "TRANSFER",
                                         format_double(e.amount),
                                         std::to_string(e.timestamp),
                                         e.alert_id ? "true" : "false",
                                         e.alert_id ? std::to_string(*e.alert_id) : ""};
            write_csv_row(out, row);
        }
    }
    {
        std::ofstream out(dir + "/alerts.csv");
        if (!out) throw FileNotFound("cannot write " + dir + "/alerts.csv");
        out << "ALERT_ID,ALERT_TYPE,IS_SAR,MEMBER_ACCOUNT_ID\n";
        // Alert group id: smallest alert id on an incident flagged edge, else a
        // synthetic id above every real one.
        std::int64_t next_synthetic = 0;
        for (const auto& e : graph.edges()) {
            if (e.alert_id) next_synthetic = std::max(next_synthetic, *e.alert_id + 1);
        }
        for (const auto& n : graph.nodes()) {
            if (n.label.value != LabelValue::illicit) continue;
            std::optional<std::int64_t> group;
            for (int ei : graph.out_edge_indices(n.id)) {
                const auto& e = graph.edges()[static_cast<std::size_t>(ei)];
                if (e.alert_id && (!group || *e.alert_id < *group)) group = *e.alert_id;
            }
            for (int ei : graph.in_edge_indices(n.id)) {
                const auto& e = graph.edges()[static_cast<std::size_t>(ei)];
                if (e.alert_id && (!group || *e.alert_id < *group)) group = *e.alert_id;
            }
            std::int64_t gid = group ? *group : next_synthetic++;
            std::vector<std::string> row{
                std::to_string(gid),
                n.label.alert_type ? to_string(*n.label.alert_type) : "other", "true",
                n.external_key};
            write_csv_row(out, row);
        }
    }
}

} // namespace graphlaunder
