#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "graphlaunder/attention.hpp"
#include "graphlaunder/embedding.hpp"
#include "graphlaunder/gcn.hpp"
#include "graphlaunder/graph.hpp"
#include "graphlaunder/metrics.hpp"
#include "graphlaunder/sage.hpp"
#include "graphlaunder/trees.hpp"
#include "graphlaunder/walk_embed.hpp"

namespace graphlaunder {

enum class EmbedMethod { node2vec, attri2vec, sage, dgt };
enum class ClassifierKind { rf, ert, gbt };
enum class E2eModel { gcn, skip_gcn };
enum class FeatureSource { raw, embedding, concat };

std::optional<EmbedMethod> embed_method_from(std::string_view text);
std::optional<ClassifierKind> classifier_from(std::string_view text);
const char* to_string(EmbedMethod m);
const char* to_string(ClassifierKind c);

// Degree / volume / timing statistics per node; the fallback feature source
// for graphs without node attributes.
FeatureTable structural_features(const TransactionGraph& graph);

// Node features when every node carries them, structural features otherwise.
FeatureTable raw_features(const TransactionGraph& graph);

FeatureTable concat_features(const FeatureTable& base, const EmbeddingMatrix& embeddings);

struct ExperimentConfig {
    int dim = 64;
    // walks
    double p = 1.0;
    double q = 1.0;
    int walk_length = 80;
    int walks_per_node = 10;
    int window = 5;
    int negatives = 5;
    int sgns_epochs = 3;
    double sgns_lr = 0.025;
    // attri2vec
    Activation attri_activation = Activation::sigmoid;
    double attri_lr = 0.05;
    int attri_epochs = 2;
    // sage
    std::vector<int> fanouts{10, 5};
    int sage_hidden = 64;
    double sage_lr = 0.05;
    int sage_epochs = 1;
    int sage_pairs_per_node = 10; // positives drawn from walk windows
    // dgt
    DgtConfig dgt;
    // classifier
    int n_trees = 100;
    int max_depth = 6;
    int min_samples_leaf = 1;
    double gbt_lr = 0.2;
    // end-to-end
    GcnTrainConfig gcn;
    EmbedMethod e2e_embedder = EmbedMethod::sage; // feature source for embedding/concat
    int workers = 1;
};

// Frozen embedder state, enough to embed nodes of a (possibly larger) graph
// without retraining.
struct EmbedderState {
    EmbedMethod method = EmbedMethod::sage;
    int dim = 0;
    // node2vec
    SkipgramModel skipgram;
    // attri2vec
    Attri2VecModel attri;
    // sage
    SageModel sage;
    // dgt
    DgtConfig dgt_config;
    std::vector<AttentionLayer> dgt_params;
};

// Trains the chosen embedder on `graph` and returns embeddings for all of
// its nodes plus the frozen state.
std::pair<EmbeddingMatrix, EmbedderState> train_embedder(const TransactionGraph& graph,
                                                         EmbedMethod method,
                                                         const ExperimentConfig& config,
                                                         std::uint64_t seed);

// Embeds nodes of `graph` with a frozen state. Inductive methods run their
// forward pass; the transductive method averages the trained vectors of a
// node's first neighbors (zero vector when none are known).
EmbeddingMatrix embed_with_state(const EmbedderState& state, const TransactionGraph& graph,
                                 const std::vector<NodeId>& nodes, std::uint64_t seed);

TreeEnsemble train_classifier(ClassifierKind kind, const Matrix& x, std::span<const int> y,
                              const ExperimentConfig& config, std::uint64_t seed);

// Node-holdout protocol, pipeline arm: split, train embedder and classifier
// on the reduced graph, re-insert, embed and score the held-out labelled
// nodes. Throws EmptyEvaluation when no labelled node is held out.
MetricsReport run_pipeline_experiment(const TransactionGraph& graph, EmbedMethod embedder,
                                      ClassifierKind classifier, double holdout_fraction,
                                      const ExperimentConfig& config, std::uint64_t seed);

// Node-holdout protocol, end-to-end arm: graph convolution trained with
// weighted cross-entropy on the reduced graph's labelled mask, scored on the
// held-out labelled nodes over the full graph with frozen weights.
MetricsReport run_e2e_experiment(const TransactionGraph& graph, E2eModel model,
                                 FeatureSource features, double holdout_fraction,
                                 const ExperimentConfig& config, std::uint64_t seed);

} // namespace graphlaunder
