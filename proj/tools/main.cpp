// graphlaunder: synthesize, ingest, embed, train, evaluate, and cross-match
// transaction graphs for laundering-account detection.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "graphlaunder/attention.hpp"
#include "graphlaunder/csv.hpp"
#include "graphlaunder/embedding.hpp"
#include "graphlaunder/errors.hpp"
#include "graphlaunder/eval.hpp"
#include "graphlaunder/gcn.hpp"
#include "graphlaunder/graph.hpp"
#include "graphlaunder/ingest.hpp"
#include "graphlaunder/metrics.hpp"
#include "graphlaunder/rng.hpp"
#include "graphlaunder/sage.hpp"
#include "graphlaunder/synth.hpp"
#include "graphlaunder/trees.hpp"
#include "graphlaunder/walk_embed.hpp"
#include "graphlaunder/xbank.hpp"

namespace {

using namespace graphlaunder;
namespace fs = std::filesystem;

struct CommonArgs {
    std::uint64_t seed = 42;
    int workers = 1;
    std::string out = ".";
    std::string data_root;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--seed", args.seed, "RNG seed")->capture_default_str();
    cmd->add_option("--workers", args.workers, "worker threads (1 = deterministic)")
        ->capture_default_str();
    cmd->add_option("--out", args.out, "output directory")->capture_default_str();
    cmd->add_option("--data-root", args.data_root,
                    "base directory for relative input paths")
        ->envname("GRAPHLAUNDER_DATA");
}

std::string resolve(const CommonArgs& args, const std::string& path) {
    if (path.empty() || args.data_root.empty() || fs::path(path).is_absolute()) return path;
    return (fs::path(args.data_root) / path).string();
}

void write_manifest(const CommonArgs& args, const std::string& command,
                    const std::vector<std::string>& argv,
                    nlohmann::json extra = nlohmann::json::object()) {
    nlohmann::json manifest{{"version", 1},
                            {"command", command},
                            {"argv", argv},
                            {"seed", args.seed},
                            {"workers", args.workers},
                            {"out", args.out}};
    for (auto& [key, value] : extra.items()) manifest[key] = value;
    std::ofstream out(args.out + "/manifest.json");
    if (!out) throw FileNotFound("cannot write " + args.out + "/manifest.json");
    out << manifest.dump(2) << "\n";
}

void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw FileNotFound("cannot write " + path);
    out << j.dump(2) << "\n";
}

void write_curves(const MetricsReport& report, const std::string& dir) {
    {
        std::ofstream out(dir + "/pr_curve.csv");
        out << "recall,precision\n";
        for (const auto& [recall, precision] : report.pr_curve) {
            out << format_double(recall) << ',' << format_double(precision) << "\n";
        }
    }
    {
        std::ofstream out(dir + "/roc_curve.csv");
        out << "fpr,tpr\n";
        for (const auto& [fpr, tpr] : report.roc_curve) {
            out << format_double(fpr) << ',' << format_double(tpr) << "\n";
        }
    }
}

// "kind:count:members:amount[:commission]"
std::pair<PatternSpec, int> parse_pattern_arg(const std::string& text,
                                              const BackgroundParams& background) {
    std::vector<std::string> parts;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        std::size_t end = text.find(':', begin);
        if (end == std::string::npos) end = text.size();
        parts.push_back(text.substr(begin, end - begin));
        begin = end + 1;
    }
    if (parts.size() < 4 || parts.size() > 5) {
        throw ConfigError("pattern must be kind:count:members:amount[:commission], got " + text);
    }
    PatternSpec spec;
    spec.kind = alert_type_from(parts[0]);
    if (spec.kind == AlertType::other && parts[0] != "other") {
        throw ConfigError("unknown pattern kind " + parts[0]);
    }
    auto count = parse_int(parts[1]);
    auto members = parse_int(parts[2]);
    auto amount = parse_double(parts[3]);
    if (!count || !members || !amount) {
        throw ConfigError("bad pattern numbers in " + text);
    }
    spec.member_count = static_cast<int>(*members);
    spec.total_amount = *amount;
    spec.start_time = background.t_begin;
    spec.end_time = background.t_end;
    if (parts.size() == 5) {
        auto commission = parse_double(parts[4]);
        if (!commission) throw ConfigError("bad commission in " + text);
        spec.commission_rate = *commission;
    }
    return {spec, static_cast<int>(*count)};
}

// ---- synth ----

struct SynthArgs {
    CommonArgs common;
    int nodes = 1000;
    double avg_out_degree = 4.0;
    double amount_log_mean = 5.0;
    double amount_log_stdev = 1.0;
    std::int64_t t_begin = 1'609'459'200;
    std::int64_t t_end = 1'617'235'200;
    std::vector<std::string> patterns;
};

int cmd_synth(const SynthArgs& args) {
    DatasetConfig config;
    config.background.n_nodes = args.nodes;
    config.background.avg_out_degree = args.avg_out_degree;
    config.background.amount_log_mean = args.amount_log_mean;
    config.background.amount_log_stdev = args.amount_log_stdev;
    config.background.t_begin = args.t_begin;
    config.background.t_end = args.t_end;
    for (const auto& text : args.patterns) {
        config.patterns.push_back(parse_pattern_arg(text, config.background));
    }

    auto [graph, manifest] = gen_dataset(config, args.common.seed);
    fs::create_directories(args.common.out);
    export_amlsim(graph, args.common.out);

    std::vector<std::string> argv{"synth",
                                  "--nodes", std::to_string(args.nodes),
                                  "--avg-out-degree", format_double(args.avg_out_degree),
                                  "--amount-log-mean", format_double(args.amount_log_mean),
                                  "--amount-log-stdev", format_double(args.amount_log_stdev),
                                  "--t-begin", std::to_string(args.t_begin),
                                  "--t-end", std::to_string(args.t_end)};
    for (const auto& p : args.patterns) {
        argv.push_back("--pattern");
        argv.push_back(p);
    }
    argv.insert(argv.end(), {"--seed", std::to_string(args.common.seed), "--workers",
                             std::to_string(args.common.workers), "--out", args.common.out});
    write_manifest(args.common, "synth", argv, {{"dataset", manifest.to_json()}});

    std::cout << "wrote " << manifest.nodes << " accounts, " << manifest.edges
              << " transactions, " << manifest.illicit << " illicit ("
              << format_double(manifest.prevalence) << " prevalence) to " << args.common.out
              << "\n";
    return 0;
}

// ---- ingest ----

struct IngestArgs {
    CommonArgs common;
    std::string format = "amlsim";
    std::string accounts, transactions, alerts;
    std::string features, edgelist, classes;
};

int cmd_ingest(const IngestArgs& args) {
    TransactionGraph graph;
    IngestReport report;
    if (args.format == "amlsim") {
        if (args.accounts.empty() || args.transactions.empty()) {
            throw ConfigError("amlsim ingest needs --accounts and --transactions");
        }
        std::tie(graph, report) = parse_amlsim(resolve(args.common, args.accounts),
                                               resolve(args.common, args.transactions),
                                               args.alerts.empty()
                                                   ? std::string()
                                                   : resolve(args.common, args.alerts));
    } else if (args.format == "elliptic") {
        if (args.features.empty() || args.edgelist.empty() || args.classes.empty()) {
            throw ConfigError("elliptic ingest needs --features, --edgelist and --classes");
        }
        std::tie(graph, report) = parse_elliptic(resolve(args.common, args.features),
                                                 resolve(args.common, args.edgelist),
                                                 resolve(args.common, args.classes));
    } else {
        throw ConfigError("unknown format " + args.format);
    }

    fs::create_directories(args.common.out);
    export_graph(graph, args.common.out);
    write_json(args.common.out + "/report.json", report.to_json());

    std::vector<std::string> argv{"ingest", "--format", args.format};
    auto push_path = [&](const char* flag, const std::string& value) {
        if (value.empty()) return;
        argv.push_back(flag);
        argv.push_back(value);
    };
    push_path("--accounts", args.accounts);
    push_path("--transactions", args.transactions);
    push_path("--alerts", args.alerts);
    push_path("--features", args.features);
    push_path("--edgelist", args.edgelist);
    push_path("--classes", args.classes);
    argv.insert(argv.end(), {"--seed", std::to_string(args.common.seed), "--workers",
                             std::to_string(args.common.workers), "--out", args.common.out});
    write_manifest(args.common, "ingest", argv, {{"report", report.to_json()}});

    std::cout << "ingested " << report.nodes << " nodes, " << report.edges << " edges ("
              << report.rejected.size() << " rows rejected) to " << args.common.out << "\n";
    return 0;
}

// ---- embed ----

struct EmbedArgs {
    CommonArgs common;
    std::string graph_dir;
    std::string method = "sage";
    int dim = 64;
    double p = 1.0, q = 1.0;
    int walk_length = 80, walks_per_node = 10, window = 5, negatives = 5;
    int epochs = 3;
    double lr = 0.025;
    std::vector<int> fanouts{10, 5};
    int dgt_layers = 1, tau = 3, context_k = 5;
};

ExperimentConfig experiment_config_from(const EmbedArgs& args) {
    ExperimentConfig config;
    config.dim = args.dim;
    config.p = args.p;
    config.q = args.q;
    config.walk_length = args.walk_length;
    config.walks_per_node = args.walks_per_node;
    config.window = args.window;
    config.negatives = args.negatives;
    config.sgns_epochs = args.epochs;
    config.sgns_lr = args.lr;
    config.attri_epochs = args.epochs;
    config.fanouts = args.fanouts;
    config.sage_epochs = std::max(1, args.epochs / 3);
    config.dgt.layers = args.dgt_layers;
    config.dgt.tau = args.tau;
    config.dgt.context_k = args.context_k;
    config.workers = args.common.workers;
    return config;
}

int cmd_embed(const EmbedArgs& args) {
    auto method = embed_method_from(args.method);
    if (!method) throw ConfigError("unknown embedding method " + args.method);
    TransactionGraph graph = import_graph(resolve(args.common, args.graph_dir));

    ExperimentConfig config = experiment_config_from(args);
    auto [embeddings, state] = train_embedder(graph, *method, config, args.common.seed);

    fs::create_directories(args.common.out);
    write_embeddings(embeddings, args.common.out + "/embeddings.csv");
    if (*method == EmbedMethod::sage) {
        save_sage(state.sage, args.common.out + "/sage_model.json");
    } else if (*method == EmbedMethod::dgt) {
        save_attention_params(state.dgt_config, state.dgt_params,
                              args.common.out + "/dgt_params.json");
    }

    std::vector<std::string> argv{
        "embed",          "--graph",     args.graph_dir,
        "--method",       args.method,   "--dim",
        std::to_string(args.dim),        "--p",
        format_double(args.p),           "--q",
        format_double(args.q),           "--walk-length",
        std::to_string(args.walk_length), "--walks-per-node",
        std::to_string(args.walks_per_node), "--window",
        std::to_string(args.window),     "--negatives",
        std::to_string(args.negatives),  "--epochs",
        std::to_string(args.epochs),     "--lr",
        format_double(args.lr),          "--dgt-layers",
        std::to_string(args.dgt_layers), "--tau",
        std::to_string(args.tau),        "--context-k",
        std::to_string(args.context_k)};
    for (int f : args.fanouts) {
        argv.push_back("--fanout");
        argv.push_back(std::to_string(f));
    }
    argv.insert(argv.end(), {"--seed", std::to_string(args.common.seed), "--workers",
                             std::to_string(args.common.workers), "--out", args.common.out});
    write_manifest(args.common, "embed", argv);

    std::cout << "embedded " << embeddings.row_count() << " nodes at dim " << embeddings.dim
              << " with " << args.method << "\n";
    return 0;
}

// ---- train ----

struct TrainArgs {
    CommonArgs common;
    std::string graph_dir;
    std::string model = "gbt";
    std::string embeddings;
    std::string features = "raw";
    int n_trees = 100, max_depth = 6;
    double lr = 0.2;
    int hidden = 128, epochs = 200;
    int folds = 5;
};

LabelledDataset labelled_dataset(const TransactionGraph& graph, const EmbeddingMatrix& emb) {
    LabelledDataset data;
    for (const auto& n : graph.nodes()) {
        if (n.label.value == LabelValue::unknown) continue;
        if (!emb.has(n.id)) continue;
        auto row = emb.row(n.id);
        data.x.emplace_back(row.begin(), row.end());
        data.y.push_back(n.label.value == LabelValue::illicit ? 1 : 0);
    }
    return data;
}

int cmd_train(const TrainArgs& args) {
    TransactionGraph graph = import_graph(resolve(args.common, args.graph_dir));
    fs::create_directories(args.common.out);

    nlohmann::json metrics_json;
    if (auto kind = classifier_from(args.model)) {
        if (args.embeddings.empty()) {
            throw ConfigError("tree classifiers need --embeddings");
        }
        EmbeddingMatrix emb = read_embeddings(resolve(args.common, args.embeddings));
        LabelledDataset data = labelled_dataset(graph, emb);
        if (data.y.empty()) throw EmptyDataset("graph has no labelled nodes with embeddings");

        ExperimentConfig config;
        config.n_trees = args.n_trees;
        config.max_depth = args.max_depth;
        config.gbt_lr = args.lr;
        config.workers = args.common.workers;

        Trainer trainer = [&](const LabelledDataset& train,
                              const std::vector<std::vector<double>>& test_x) {
            Matrix x(static_cast<int>(train.x.size()),
                     static_cast<int>(train.x.front().size()));
            for (std::size_t i = 0; i < train.x.size(); ++i) {
                std::copy(train.x[i].begin(), train.x[i].end(),
                          x.row(static_cast<int>(i)).begin());
            }
            TreeEnsemble fold_model =
                train_classifier(*kind, x, train.y, config, args.common.seed);
            std::vector<double> scores;
            scores.reserve(test_x.size());
            for (const auto& row : test_x) {
                scores.push_back(predict_ensemble(fold_model, row));
            }
            return scores;
        };
        CvResult cv = kfold_cv(data, args.folds, trainer, args.common.seed);
        metrics_json = cv.to_json();

        Matrix x(static_cast<int>(data.x.size()), static_cast<int>(data.x.front().size()));
        for (std::size_t i = 0; i < data.x.size(); ++i) {
            std::copy(data.x[i].begin(), data.x[i].end(), x.row(static_cast<int>(i)).begin());
        }
        TreeEnsemble model = train_classifier(*kind, x, data.y, config, args.common.seed);
        save_ensemble(model, args.common.out + "/model.json");
    } else if (args.model == "gcn" || args.model == "skip_gcn") {
        FeatureTable table;
        if (args.features == "raw") {
            table = raw_features(graph);
        } else if (args.features == "embedding" || args.features == "concat") {
            if (args.embeddings.empty()) {
                throw ConfigError("feature source " + args.features + " needs --embeddings");
            }
            EmbeddingMatrix emb = read_embeddings(resolve(args.common, args.embeddings));
            table = args.features == "embedding"
                        ? concat_features(FeatureTable::zeros(emb.ids, 0), emb)
                        : concat_features(raw_features(graph), emb);
        } else {
            throw ConfigError("unknown feature source " + args.features);
        }

        SparseMatrix a_hat = normalize_adjacency(graph);
        Matrix x(graph.node_count(), table.dim());
        std::vector<int> labels(static_cast<std::size_t>(graph.node_count()), 0);
        std::vector<int> mask;
        for (int i = 0; i < graph.node_count(); ++i) {
            const auto& n = graph.node_at(i);
            auto src = table.row(n.id);
            std::copy(src.begin(), src.end(), x.row(i).begin());
            if (n.label.value != LabelValue::unknown) {
                mask.push_back(i);
                labels[static_cast<std::size_t>(i)] =
                    n.label.value == LabelValue::illicit ? 1 : 0;
            }
        }

        GcnTrainConfig config;
        config.hidden = args.hidden;
        config.skip = args.model == "skip_gcn";
        config.learning_rate = args.lr;
        config.epochs = args.epochs;
        std::vector<double> curve;
        GcnModel model = train_gcn(a_hat, x, labels, mask, config, args.common.seed, &curve);
        save_gcn(model, args.common.out + "/model.json");
        {
            std::ofstream out(args.common.out + "/training_curve.csv");
            out << "step,loss\n";
            for (std::size_t s = 0; s < curve.size(); ++s) {
                out << s << ',' << format_double(curve[s]) << "\n";
            }
        }

        // In-sample report over the training mask.
        std::vector<double> probs = gcn_forward(a_hat, x, model);
        std::vector<double> scores;
        std::vector<int> mask_labels;
        for (int i : mask) {
            scores.push_back(probs[static_cast<std::size_t>(i)]);
            mask_labels.push_back(labels[static_cast<std::size_t>(i)]);
        }
        metrics_json = compute_metrics(scores, mask_labels, 0.5).to_json();
    } else {
        throw ConfigError("unknown model " + args.model);
    }

    write_json(args.common.out + "/metrics.json", metrics_json);
    std::vector<std::string> argv{"train",
                                  "--graph", args.graph_dir,
                                  "--model", args.model,
                                  "--features", args.features,
                                  "--n-trees", std::to_string(args.n_trees),
                                  "--max-depth", std::to_string(args.max_depth),
                                  "--lr", format_double(args.lr),
                                  "--hidden", std::to_string(args.hidden),
                                  "--epochs", std::to_string(args.epochs),
                                  "--folds", std::to_string(args.folds)};
    if (!args.embeddings.empty()) {
        argv.push_back("--embeddings");
        argv.push_back(args.embeddings);
    }
    argv.insert(argv.end(), {"--seed", std::to_string(args.common.seed), "--workers",
                             std::to_string(args.common.workers), "--out", args.common.out});
    write_manifest(args.common, "train", argv);

    std::cout << "trained " << args.model << "; model and metrics written to "
              << args.common.out << "\n";
    return 0;
}

// ---- evaluate ----

struct EvaluateArgs {
    CommonArgs common;
    std::string graph_dir;
    std::string embedder;
    std::string classifier;
    std::string model;
    std::string features = "raw";
    std::string classifier_model;
    std::string embeddings;
    double holdout = 0.15;
    int dim = 64;
    int n_trees = 100, max_depth = 6;
    int hidden = 128, epochs = 200;
};

int cmd_evaluate(const EvaluateArgs& args) {
    TransactionGraph graph = import_graph(resolve(args.common, args.graph_dir));
    fs::create_directories(args.common.out);

    MetricsReport report;
    if (!args.classifier_model.empty()) {
        // Frozen mode: score held-out labelled nodes with a fitted
        // classifier over precomputed embeddings.
        if (args.embeddings.empty()) {
            throw ConfigError("frozen evaluation needs --embeddings");
        }
        TreeEnsemble model = load_ensemble(resolve(args.common, args.classifier_model));
        EmbeddingMatrix emb = read_embeddings(resolve(args.common, args.embeddings));
        auto [reduced, held_out] = holdout_split(graph, args.holdout, args.common.seed);
        std::vector<double> scores;
        std::vector<int> labels;
        for (NodeId id : held_out) {
            const auto& n = graph.node(id);
            if (n.label.value == LabelValue::unknown || !emb.has(id)) continue;
            scores.push_back(predict_ensemble(model, emb.row(id)));
            labels.push_back(n.label.value == LabelValue::illicit ? 1 : 0);
        }
        if (scores.empty()) throw EmptyEvaluation("no labelled held-out nodes with embeddings");
        report = compute_metrics(scores, labels, 0.5);
    } else if (!args.embedder.empty()) {
        auto method = embed_method_from(args.embedder);
        auto kind = classifier_from(args.classifier);
        if (!method || !kind) {
            throw ConfigError("pipeline evaluation needs valid --embedder and --classifier");
        }
        ExperimentConfig config;
        config.dim = args.dim;
        config.n_trees = args.n_trees;
        config.max_depth = args.max_depth;
        config.workers = args.common.workers;
        report = run_pipeline_experiment(graph, *method, *kind, args.holdout, config,
                                         args.common.seed);
    } else if (!args.model.empty()) {
        E2eModel model;
        if (args.model == "gcn") {
            model = E2eModel::gcn;
        } else if (args.model == "skip_gcn") {
            model = E2eModel::skip_gcn;
        } else {
            throw ConfigError("unknown end-to-end model " + args.model);
        }
        FeatureSource source;
        if (args.features == "raw") {
            source = FeatureSource::raw;
        } else if (args.features == "embedding") {
            source = FeatureSource::embedding;
        } else if (args.features == "concat") {
            source = FeatureSource::concat;
        } else {
            throw ConfigError("unknown feature source " + args.features);
        }
        ExperimentConfig config;
        config.dim = args.dim;
        config.gcn.hidden = args.hidden;
        config.gcn.epochs = args.epochs;
        config.workers = args.common.workers;
        report = run_e2e_experiment(graph, model, source, args.holdout, config,
                                    args.common.seed);
    } else {
        throw ConfigError(
            "evaluate needs --classifier-model (frozen), --embedder+--classifier (pipeline) "
            "or --model (end-to-end)");
    }

    write_json(args.common.out + "/metrics.json", report.to_json());
    write_curves(report, args.common.out);

    std::vector<std::string> argv{"evaluate", "--graph", args.graph_dir,
                                  "--holdout", format_double(args.holdout),
                                  "--features", args.features,
                                  "--dim", std::to_string(args.dim),
                                  "--n-trees", std::to_string(args.n_trees),
                                  "--max-depth", std::to_string(args.max_depth),
                                  "--hidden", std::to_string(args.hidden),
                                  "--epochs", std::to_string(args.epochs)};
    auto push_opt = [&](const char* flag, const std::string& value) {
        if (value.empty()) return;
        argv.push_back(flag);
        argv.push_back(value);
    };
    push_opt("--embedder", args.embedder);
    push_opt("--classifier", args.classifier);
    push_opt("--model", args.model);
    push_opt("--classifier-model", args.classifier_model);
    push_opt("--embeddings", args.embeddings);
    argv.insert(argv.end(), {"--seed", std::to_string(args.common.seed), "--workers",
                             std::to_string(args.common.workers), "--out", args.common.out});
    write_manifest(args.common, "evaluate", argv);

    std::cout << "evaluation metrics written to " << args.common.out << "/metrics.json";
    if (report.aupr) std::cout << " (aupr " << format_double(*report.aupr) << ")";
    std::cout << "\n";
    return 0;
}

// ---- xbank ----

struct XbankArgs {
    CommonArgs common;
    std::string bank_a, bank_b;
    std::uint64_t public_seed = 7;
    int dim = 64;
    int top_k = 100;
    std::optional<std::int64_t> window_begin, window_end;
};

int cmd_xbank(const XbankArgs& args) {
    TransactionGraph graph_a = import_graph(resolve(args.common, args.bank_a));
    TransactionGraph graph_b = import_graph(resolve(args.common, args.bank_b));

    std::optional<TimeWindow> window;
    if (args.window_begin && args.window_end) {
        window = TimeWindow{*args.window_begin, *args.window_end};
    }

    auto emb_a = bank_embeddings(graph_a, args.public_seed, args.dim, window);
    auto emb_b = bank_embeddings(graph_b, args.public_seed, args.dim, window);
    auto ranked = rank_suspect_pairs(emb_a, emb_b, args.top_k);

    fs::create_directories(args.common.out);
    write_bank_embeddings(emb_a, args.dim, args.common.out + "/bank_a_embeddings.csv");
    write_bank_embeddings(emb_b, args.dim, args.common.out + "/bank_b_embeddings.csv");
    write_similarity_report(ranked, args.common.out + "/similarity.csv");

    std::vector<std::string> argv{"xbank",
                                  "--bank-a", args.bank_a,
                                  "--bank-b", args.bank_b,
                                  "--public-seed", std::to_string(args.public_seed),
                                  "--dim", std::to_string(args.dim),
                                  "--top-k", std::to_string(args.top_k)};
    if (window) {
        argv.insert(argv.end(), {"--window-begin", std::to_string(window->begin),
                                 "--window-end", std::to_string(window->end)});
    }
    argv.insert(argv.end(), {"--seed", std::to_string(args.common.seed), "--workers",
                             std::to_string(args.common.workers), "--out", args.common.out});
    write_manifest(args.common, "xbank", argv);

    std::cout << "wrote " << ranked.size() << " ranked pairs to " << args.common.out
              << "/similarity.csv\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"transaction-graph laundering detection toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "INI config file with one section per subcommand");

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "generate a synthetic transaction dataset");
    add_common(synth, synth_args.common);
    synth->add_option("--nodes", synth_args.nodes, "background account count")
        ->capture_default_str();
    synth->add_option("--avg-out-degree", synth_args.avg_out_degree,
                      "mean outgoing transactions per account")
        ->capture_default_str();
    synth->add_option("--amount-log-mean", synth_args.amount_log_mean,
                      "log-normal amount mean (log scale)")
        ->capture_default_str();
    synth->add_option("--amount-log-stdev", synth_args.amount_log_stdev,
                      "log-normal amount stdev (log scale)")
        ->capture_default_str();
    synth->add_option("--t-begin", synth_args.t_begin, "horizon start (epoch seconds)")
        ->capture_default_str();
    synth->add_option("--t-end", synth_args.t_end, "horizon end (epoch seconds)")
        ->capture_default_str();
    synth->add_option("--pattern", synth_args.patterns,
                      "planted pattern kind:count:members:amount[:commission]; repeatable");

    IngestArgs ingest_args;
    auto* ingest = app.add_subcommand("ingest", "parse a dataset into the graph exchange format");
    add_common(ingest, ingest_args.common);
    ingest->add_option("--format", ingest_args.format, "amlsim or elliptic")
        ->capture_default_str();
    ingest->add_option("--accounts", ingest_args.accounts, "accounts CSV (amlsim)");
    ingest->add_option("--transactions", ingest_args.transactions, "transactions CSV (amlsim)");
    ingest->add_option("--alerts", ingest_args.alerts, "alerts CSV (amlsim, optional)");
    ingest->add_option("--features", ingest_args.features, "node features CSV (elliptic)");
    ingest->add_option("--edgelist", ingest_args.edgelist, "edge list CSV (elliptic)");
    ingest->add_option("--classes", ingest_args.classes, "node classes CSV (elliptic)");

    EmbedArgs embed_args;
    auto* embed = app.add_subcommand("embed", "train node embeddings over an ingested graph");
    add_common(embed, embed_args.common);
    embed->add_option("--graph", embed_args.graph_dir, "graph export directory")->required();
    embed->add_option("--method", embed_args.method, "node2vec, attri2vec, sage or dgt")
        ->capture_default_str();
    embed->add_option("--dim", embed_args.dim, "embedding dimension")->capture_default_str();
    embed->add_option("--p", embed_args.p, "walk return bias")->capture_default_str();
    embed->add_option("--q", embed_args.q, "walk in-out bias")->capture_default_str();
    embed->add_option("--walk-length", embed_args.walk_length, "nodes per walk")
        ->capture_default_str();
    embed->add_option("--walks-per-node", embed_args.walks_per_node, "walks per start node")
        ->capture_default_str();
    embed->add_option("--window", embed_args.window, "context window")->capture_default_str();
    embed->add_option("--negatives", embed_args.negatives, "negative samples per pair")
        ->capture_default_str();
    embed->add_option("--epochs", embed_args.epochs, "training epochs")->capture_default_str();
    embed->add_option("--lr", embed_args.lr, "learning rate")->capture_default_str();
    embed->add_option("--fanout", embed_args.fanouts, "neighbor sample sizes per layer");
    embed->add_option("--dgt-layers", embed_args.dgt_layers, "attention layers")
        ->capture_default_str();
    embed->add_option("--tau", embed_args.tau, "time windows")->capture_default_str();
    embed->add_option("--context-k", embed_args.context_k, "context nodes per window")
        ->capture_default_str();

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "train a classifier on an ingested graph");
    add_common(train, train_args.common);
    train->add_option("--graph", train_args.graph_dir, "graph export directory")->required();
    train->add_option("--model", train_args.model, "rf, ert, gbt, gcn or skip_gcn")
        ->capture_default_str();
    train->add_option("--embeddings", train_args.embeddings, "embeddings CSV");
    train->add_option("--features", train_args.features,
                      "gcn feature source: raw, embedding or concat")
        ->capture_default_str();
    train->add_option("--n-trees", train_args.n_trees, "trees per ensemble")
        ->capture_default_str();
    train->add_option("--max-depth", train_args.max_depth, "tree depth limit")
        ->capture_default_str();
    train->add_option("--lr", train_args.lr, "learning rate (gbt shrinkage / gcn step)")
        ->capture_default_str();
    train->add_option("--hidden", train_args.hidden, "gcn hidden units")->capture_default_str();
    train->add_option("--epochs", train_args.epochs, "gcn training epochs")
        ->capture_default_str();
    train->add_option("--folds", train_args.folds, "cross-validation folds")
        ->capture_default_str();

    EvaluateArgs evaluate_args;
    auto* evaluate =
        app.add_subcommand("evaluate", "run the node-holdout evaluation protocol");
    add_common(evaluate, evaluate_args.common);
    evaluate->add_option("--graph", evaluate_args.graph_dir, "graph export directory")
        ->required();
    evaluate->add_option("--embedder", evaluate_args.embedder,
                         "pipeline mode: node2vec, attri2vec, sage or dgt");
    evaluate->add_option("--classifier", evaluate_args.classifier,
                         "pipeline mode: rf, ert or gbt");
    evaluate->add_option("--model", evaluate_args.model, "end-to-end mode: gcn or skip_gcn");
    evaluate->add_option("--features", evaluate_args.features,
                         "end-to-end feature source: raw, embedding or concat")
        ->capture_default_str();
    evaluate->add_option("--classifier-model", evaluate_args.classifier_model,
                         "frozen mode: fitted ensemble JSON");
    evaluate->add_option("--embeddings", evaluate_args.embeddings,
                         "frozen mode: precomputed embeddings CSV");
    evaluate->add_option("--holdout", evaluate_args.holdout, "held-out node fraction")
        ->capture_default_str();
    evaluate->add_option("--dim", evaluate_args.dim, "embedding dimension")
        ->capture_default_str();
    evaluate->add_option("--n-trees", evaluate_args.n_trees, "trees per ensemble")
        ->capture_default_str();
    evaluate->add_option("--max-depth", evaluate_args.max_depth, "tree depth limit")
        ->capture_default_str();
    evaluate->add_option("--hidden", evaluate_args.hidden, "gcn hidden units")
        ->capture_default_str();
    evaluate->add_option("--epochs", evaluate_args.epochs, "gcn training epochs")
        ->capture_default_str();

    XbankArgs xbank_args;
    auto* xbank = app.add_subcommand(
        "xbank", "cross-bank similarity from hash-seeded first-neighbor embeddings");
    add_common(xbank, xbank_args.common);
    xbank->add_option("--bank-a", xbank_args.bank_a, "graph export directory for bank A")
        ->required();
    xbank->add_option("--bank-b", xbank_args.bank_b, "graph export directory for bank B")
        ->required();
    xbank->add_option("--public-seed", xbank_args.public_seed, "shared public hash seed")
        ->capture_default_str();
    xbank->add_option("--dim", xbank_args.dim, "embedding dimension")->capture_default_str();
    xbank->add_option("--top-k", xbank_args.top_k, "ranked pairs to keep")
        ->capture_default_str();
    std::int64_t wb = 0, we = 0;
    auto* wb_opt = xbank->add_option("--window-begin", wb, "aggregate window start");
    auto* we_opt = xbank->add_option("--window-end", we, "aggregate window end");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*synth) return cmd_synth(synth_args);
        if (*ingest) return cmd_ingest(ingest_args);
        if (*embed) return cmd_embed(embed_args);
        if (*train) return cmd_train(train_args);
        if (*evaluate) return cmd_evaluate(evaluate_args);
        if (*xbank) {
            if (wb_opt->count()) xbank_args.window_begin = wb;
            if (we_opt->count()) xbank_args.window_end = we;
            return cmd_xbank(xbank_args);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: Internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
