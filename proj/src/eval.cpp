#include "graphlaunder/eval.hpp"

#include <algorithm>
#include <cmath>

#include "graphlaunder/errors.hpp"
#include "graphlaunder/rng.hpp"

namespace graphlaunder {

std::optional<EmbedMethod> embed_method_from(std::string_view text) {
    if (text == "node2vec") return EmbedMethod::node2vec;
    if (text == "attri2vec") return EmbedMethod::attri2vec;
    if (text == "sage") return EmbedMethod::sage;
    if (text == "dgt") return EmbedMethod::dgt;
    return std::nullopt;
}

std::optional<ClassifierKind> classifier_from(std::string_view text) {
    if (text == "rf") return ClassifierKind::rf;
    if (text == "ert") return ClassifierKind::ert;
    if (text == "gbt") return ClassifierKind::gbt;
    return std::nullopt;
}

const char* to_string(EmbedMethod m) {
    switch (m) {
        case EmbedMethod::node2vec: return "node2vec";
        case EmbedMethod::attri2vec: return "attri2vec";
        case EmbedMethod::sage: return "sage";
        case EmbedMethod::dgt: return "dgt";
    }
    return "sage";
}

const char* to_string(ClassifierKind c) {
    switch (c) {
        case ClassifierKind::rf: return "rf";
        case ClassifierKind::ert: return "ert";
        case ClassifierKind::gbt: return "gbt";
    }
    return "gbt";
}

FeatureTable structural_features(const TransactionGraph& graph) {
    std::vector<NodeId> ids;
    for (const auto& n : graph.nodes()) ids.push_back(n.id);
    // 12 flow/timing statistics plus the account-kind one-hot.
    FeatureTable t = FeatureTable::zeros(ids, 15);

    auto [t_min, t_max] = graph.time_range();
    const double range = static_cast<double>(t_max - t_min);

    for (const auto& n : graph.nodes()) {
        double out_count = 0, in_count = 0;
        double out_total = 0, in_total = 0;
        double out_max = 0, in_max = 0;
        std::int64_t first_seen = 0, last_seen = 0;
        bool any = false;
        auto touch = [&](std::int64_t ts) {
            if (!any) {
                first_seen = last_seen = ts;
                any = true;
            } else {
                first_seen = std::min(first_seen, ts);
                last_seen = std::max(last_seen, ts);
            }
        };
        for (int ei : graph.out_edge_indices(n.id)) {
            const auto& e = graph.edges()[static_cast<std::size_t>(ei)];
            out_count += 1;
            out_total += e.amount;
            out_max = std::max(out_max, e.amount);
            touch(e.timestamp);
        }
        for (int ei : graph.in_edge_indices(n.id)) {
            const auto& e = graph.edges()[static_cast<std::size_t>(ei)];
            in_count += 1;
            in_total += e.amount;
            in_max = std::max(in_max, e.amount);
            touch(e.timestamp);
        }
        double net = in_total - out_total;

        auto row = t.row_mut(n.id);
        row[0] = std::log1p(out_count);
        row[1] = std::log1p(in_count);
        row[2] = std::log1p(out_total);
        row[3] = std::log1p(in_total);
        row[4] = std::log1p(static_cast<double>(graph.out_neighbors(n.id).size()));
        row[5] = std::log1p(static_cast<double>(graph.in_neighbors(n.id).size()));
        row[6] = out_count > 0 ? std::log1p(out_total / out_count) : 0.0;
        row[7] = in_count > 0 ? std::log1p(in_total / in_count) : 0.0;
        row[8] = std::log1p(out_max);
        row[9] = std::log1p(in_max);
        row[10] = (net >= 0 ? 1.0 : -1.0) * std::log1p(std::abs(net));
        row[11] = (any && range > 0) ? static_cast<double>(last_seen - first_seen) / range : 0.0;
        row[12] = n.kind == AccountKind::individual ? 1.0 : 0.0;
        row[13] = n.kind == AccountKind::organization ? 1.0 : 0.0;
        row[14] = n.kind == AccountKind::unknown ? 1.0 : 0.0;
    }
    return t;
}

FeatureTable raw_features(const TransactionGraph& graph) {
    return graph.has_features() ? FeatureTable::from_graph(graph) : structural_features(graph);
}

FeatureTable concat_features(const FeatureTable& base, const EmbeddingMatrix& embeddings) {
    FeatureTable t = FeatureTable::zeros(base.ids, base.dim() + embeddings.dim);
    for (NodeId id : t.ids) {
        auto dst = t.row_mut(id);
        auto src = base.row(id);
        std::copy(src.begin(), src.end(), dst.begin());
        if (embeddings.has(id)) {
            auto emb = embeddings.row(id);
            std::copy(emb.begin(), emb.end(), dst.begin() + base.dim());
        }
    }
    return t;
}

namespace {

// Positive pairs from walk windows, thinned to a per-node budget; negatives
// are uniform random pairs of equal count.
std::pair<std::vector<std::pair<NodeId, NodeId>>, std::vector<std::pair<NodeId, NodeId>>>
make_pair_sets(const TransactionGraph& graph, const WalkCorpus& corpus,
               const ExperimentConfig& config, std::uint64_t seed) {
    auto positives = window_pairs(corpus, config.window);
    std::size_t budget = static_cast<std::size_t>(graph.node_count()) *
                         static_cast<std::size_t>(config.sage_pairs_per_node);
    if (positives.size() > budget) {
        auto rng = make_rng(mix_seed(seed, 0x9A12ULL));
        partial_shuffle(positives, budget, rng);
        positives.resize(budget);
    }

    std::vector<std::pair<NodeId, NodeId>> negatives;
    negatives.reserve(positives.size());
    auto rng = make_rng(mix_seed(seed, 0x9A13ULL));
    std::uniform_int_distribution<int> pick(0, graph.node_count() - 1);
    for (std::size_t i = 0; i < positives.size(); ++i) {
        negatives.emplace_back(graph.id_at(pick(rng)), graph.id_at(pick(rng)));
    }
    return {std::move(positives), std::move(negatives)};
}

std::vector<NodeId> labelled_nodes(const TransactionGraph& graph) {
    std::vector<NodeId> out;
    for (const auto& n : graph.nodes()) {
        if (n.label.value != LabelValue::unknown) out.push_back(n.id);
    }
    return out;
}

} // namespace

std::pair<EmbeddingMatrix, EmbedderState> train_embedder(const TransactionGraph& graph,
                                                         EmbedMethod method,
                                                         const ExperimentConfig& config,
                                                         std::uint64_t seed) {
    EmbedderState state;
    state.method = method;
    state.dim = config.dim;

    switch (method) {
        case EmbedMethod::node2vec: {
            WalkCorpus corpus = biased_walks(graph, config.p, config.q, config.walk_length,
                                             config.walks_per_node, mix_seed(seed, 1),
                                             config.workers);
            SkipgramOptions options;
            options.dim = config.dim;
            options.window = config.window;
            options.negatives = config.negatives;
            options.learning_rate = config.sgns_lr;
            options.epochs = config.sgns_epochs;
            options.workers = config.workers;
            state.skipgram = train_skipgram_model(corpus, options, mix_seed(seed, 2));
            return {state.skipgram.in_vectors, std::move(state)};
        }
        case EmbedMethod::attri2vec: {
            WalkCorpus corpus = biased_walks(graph, config.p, config.q, config.walk_length,
                                             config.walks_per_node, mix_seed(seed, 1),
                                             config.workers);
            auto pairs = window_pairs(corpus, config.window);
            Attri2VecOptions options;
            options.dim = config.dim;
            options.negatives = config.negatives;
            options.learning_rate = config.attri_lr;
            options.epochs = config.attri_epochs;
            options.activation = config.attri_activation;
            auto [model, embeddings] =
                train_attri2vec(raw_features(graph), pairs, options, mix_seed(seed, 2));
            state.attri = std::move(model);
            return {std::move(embeddings), std::move(state)};
        }
        case EmbedMethod::sage: {
            FeatureTable features = raw_features(graph);
            WalkCorpus corpus = biased_walks(graph, config.p, config.q,
                                             std::min(config.walk_length, 20), 5,
                                             mix_seed(seed, 1), config.workers);
            auto [positives, negatives] = make_pair_sets(graph, corpus, config, seed);

            std::vector<int> dims{features.dim(), config.sage_hidden, config.dim};
            std::vector<int> fanouts = config.fanouts;
            fanouts.resize(dims.size() - 1, fanouts.empty() ? 10 : fanouts.back());
            SageModel model =
                SageModel::init(dims, fanouts, Activation::relu, mix_seed(seed, 2));
            SageTrainOptions options;
            options.learning_rate = config.sage_lr;
            options.epochs = config.sage_epochs;
            state.sage = train_sage_unsup(graph, features, positives, negatives,
                                          std::move(model), options, mix_seed(seed, 3));
            EmbeddingMatrix embeddings =
                sage_embed_all(state.sage, graph, features, mix_seed(seed, 4));
            return {std::move(embeddings), std::move(state)};
        }
        case EmbedMethod::dgt: {
            state.dgt_config = config.dgt;
            state.dgt_config.d_enc = config.dim;
            state.dgt_params = dgt_init_params(state.dgt_config, mix_seed(seed, 2));
            EmbeddingMatrix embeddings =
                dgt_embed_nodes(graph, state.dgt_config, state.dgt_params, mix_seed(seed, 3));
            return {std::move(embeddings), std::move(state)};
        }
    }
    throw ConfigError("unknown embedding method");
}

EmbeddingMatrix embed_with_state(const EmbedderState& state, const TransactionGraph& graph,
                                 const std::vector<NodeId>& nodes, std::uint64_t seed) {
    EmbeddingMatrix out = EmbeddingMatrix::zeros(nodes, state.dim);
    switch (state.method) {
        case EmbedMethod::node2vec: {
            // Transductive model: unseen nodes average the trained vectors of
            // their first neighbors.
            const EmbeddingMatrix& trained = state.skipgram.in_vectors;
            for (NodeId id : out.ids) {
                auto row = out.row(id);
                if (trained.has(id)) {
                    auto src = trained.row(id);
                    std::copy(src.begin(), src.end(), row.begin());
                    continue;
                }
                int count = 0;
                for (NodeId nbr : graph.neighbors(id)) {
                    if (!trained.has(nbr)) continue;
                    auto src = trained.row(nbr);
                    for (int k = 0; k < state.dim; ++k) row[static_cast<std::size_t>(k)] += src[static_cast<std::size_t>(k)];
                    ++count;
                }
                if (count > 0) {
                    for (auto& v : row) v /= static_cast<double>(count);
                }
            }
            return out;
        }
        case EmbedMethod::attri2vec: {
            FeatureTable features = raw_features(graph);
            for (NodeId id : out.ids) {
                auto z = attri_embed_forward(features.row(id), state.attri.w_in,
                                             state.attri.activation);
                auto row = out.row(id);
                std::copy(z.begin(), z.end(), row.begin());
            }
            return out;
        }
        case EmbedMethod::sage: {
            FeatureTable features = raw_features(graph);
            for (NodeId id : out.ids) {
                auto z = infer_unseen(state.sage, graph, features, id,
                                      mix_seed(seed, static_cast<std::uint64_t>(id)));
                auto row = out.row(id);
                std::copy(z.begin(), z.end(), row.begin());
            }
            return out;
        }
        case EmbedMethod::dgt: {
            EmbeddingMatrix all = dgt_embed_nodes(graph, state.dgt_config, state.dgt_params, seed);
            for (NodeId id : out.ids) {
                if (!all.has(id)) continue;
                auto src = all.row(id);
                auto row = out.row(id);
                std::copy(src.begin(), src.end(), row.begin());
            }
            return out;
        }
    }
    throw ConfigError("unknown embedding method");
}

TreeEnsemble train_classifier(ClassifierKind kind, const Matrix& x, std::span<const int> y,
                              const ExperimentConfig& config, std::uint64_t seed) {
    switch (kind) {
        case ClassifierKind::rf: {
            ForestOptions options{config.n_trees, config.max_depth, config.min_samples_leaf,
                                  config.workers};
            return fit_rf(x, y, options, seed);
        }
        case ClassifierKind::ert: {
            ForestOptions options{config.n_trees, config.max_depth, config.min_samples_leaf,
                                  config.workers};
            return fit_ert(x, y, options, seed);
        }
        case ClassifierKind::gbt: {
            GbtOptions options{config.n_trees, config.max_depth, config.min_samples_leaf,
                               config.gbt_lr};
            return fit_gbt(x, y, options, seed);
        }
    }
    throw ConfigError("unknown classifier kind");
}

MetricsReport run_pipeline_experiment(const TransactionGraph& graph, EmbedMethod embedder,
                                      ClassifierKind classifier, double holdout_fraction,
                                      const ExperimentConfig& config, std::uint64_t seed) {
    auto [reduced, held_out] = holdout_split(graph, holdout_fraction, seed);

    std::vector<NodeId> eval_nodes;
    for (NodeId id : held_out) {
        if (graph.node(id).label.value != LabelValue::unknown) eval_nodes.push_back(id);
    }
    if (eval_nodes.empty()) {
        throw EmptyEvaluation("no labelled nodes in the held-out set");
    }

    auto [train_embeddings, state] =
        train_embedder(reduced, embedder, config, mix_seed(seed, 0x11ULL));

    std::vector<NodeId> train_nodes = labelled_nodes(reduced);
    if (train_nodes.empty()) throw EmptyDataset("no labelled nodes in the reduced graph");
    Matrix x(static_cast<int>(train_nodes.size()), state.dim);
    std::vector<int> y(train_nodes.size());
    for (std::size_t i = 0; i < train_nodes.size(); ++i) {
        auto row = train_embeddings.row(train_nodes[i]);
        std::copy(row.begin(), row.end(), x.row(static_cast<int>(i)).begin());
        y[i] = reduced.node(train_nodes[i]).label.value == LabelValue::illicit ? 1 : 0;
    }
    TreeEnsemble model = train_classifier(classifier, x, y, config, mix_seed(seed, 0x12ULL));

    EmbeddingMatrix eval_embeddings =
        embed_with_state(state, graph, eval_nodes, mix_seed(seed, 0x13ULL));
    std::vector<double> scores(eval_nodes.size());
    std::vector<int> labels(eval_nodes.size());
    for (std::size_t i = 0; i < eval_nodes.size(); ++i) {
        scores[i] = predict_ensemble(model, eval_embeddings.row(eval_nodes[i]));
        labels[i] = graph.node(eval_nodes[i]).label.value == LabelValue::illicit ? 1 : 0;
    }
    return compute_metrics(scores, labels, 0.5);
}

MetricsReport run_e2e_experiment(const TransactionGraph& graph, E2eModel model,
                                 FeatureSource features, double holdout_fraction,
                                 const ExperimentConfig& config, std::uint64_t seed) {
    auto [reduced, held_out] = holdout_split(graph, holdout_fraction, seed);

    std::vector<NodeId> eval_nodes;
    for (NodeId id : held_out) {
        if (graph.node(id).label.value != LabelValue::unknown) eval_nodes.push_back(id);
    }
    if (eval_nodes.empty()) {
        throw EmptyEvaluation("no labelled nodes in the held-out set");
    }

    FeatureTable train_table;
    FeatureTable full_table;
    switch (features) {
        case FeatureSource::raw: {
            train_table = raw_features(reduced);
            full_table = raw_features(graph);
            break;
        }
        case FeatureSource::embedding:
        case FeatureSource::concat: {
            auto [train_emb, state] =
                train_embedder(reduced, config.e2e_embedder, config, mix_seed(seed, 0x21ULL));
            std::vector<NodeId> all_nodes;
            for (const auto& n : graph.nodes()) all_nodes.push_back(n.id);
            EmbeddingMatrix full_emb =
                embed_with_state(state, graph, all_nodes, mix_seed(seed, 0x22ULL));
            if (features == FeatureSource::embedding) {
                train_table = concat_features(
                    FeatureTable::zeros(train_emb.ids, 0), train_emb);
                full_table = concat_features(FeatureTable::zeros(full_emb.ids, 0), full_emb);
            } else {
                train_table = concat_features(raw_features(reduced), train_emb);
                full_table = concat_features(raw_features(graph), full_emb);
            }
            break;
        }
    }

    // Reduced-graph design matrix, mask and labels in node order.
    SparseMatrix a_reduced = normalize_adjacency(reduced);
    Matrix x_reduced(reduced.node_count(), train_table.dim());
    std::vector<int> labels_reduced(static_cast<std::size_t>(reduced.node_count()), 0);
    std::vector<int> mask;
    for (int i = 0; i < reduced.node_count(); ++i) {
        const auto& n = reduced.node_at(i);
        auto src = train_table.row(n.id);
        std::copy(src.begin(), src.end(), x_reduced.row(i).begin());
        if (n.label.value != LabelValue::unknown) {
            mask.push_back(i);
            labels_reduced[static_cast<std::size_t>(i)] =
                n.label.value == LabelValue::illicit ? 1 : 0;
        }
    }

    GcnTrainConfig gcn_config = config.gcn;
    gcn_config.skip = model == E2eModel::skip_gcn;
    GcnModel trained =
        train_gcn(a_reduced, x_reduced, labels_reduced, mask, gcn_config, mix_seed(seed, 0x23ULL));

    // Frozen forward pass over the full graph after re-insertion.
    SparseMatrix a_full = normalize_adjacency(graph);
    Matrix x_full(graph.node_count(), full_table.dim());
    for (int i = 0; i < graph.node_count(); ++i) {
        auto src = full_table.row(graph.node_at(i).id);
        std::copy(src.begin(), src.end(), x_full.row(i).begin());
    }
    std::vector<double> probs = gcn_forward(a_full, x_full, trained);

    std::vector<double> scores(eval_nodes.size());
    std::vector<int> labels(eval_nodes.size());
    for (std::size_t i = 0; i < eval_nodes.size(); ++i) {
        scores[i] = probs[static_cast<std::size_t>(graph.index_of(eval_nodes[i]))];
        labels[i] = graph.node(eval_nodes[i]).label.value == LabelValue::illicit ? 1 : 0;
    }
    return compute_metrics(scores, labels, 0.5);
}

} // namespace graphlaunder
