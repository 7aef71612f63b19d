#include "graphlaunder/sage.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "graphlaunder/errors.hpp"
#include "graphlaunder/rng.hpp"

namespace graphlaunder {

SageModel SageModel::init(const std::vector<int>& dims, std::vector<int> fanouts,
                          Activation activation, std::uint64_t seed) {
    if (dims.size() < 2) throw ConfigError("model needs at least input and output dims");
    if (dims.size() - 1 != fanouts.size()) {
        throw ConfigError("layer count must equal fanout count");
    }
    SageModel model;
    model.fanouts = std::move(fanouts);
    model.activation = activation;
    auto rng = make_rng(mix_seed(seed, 0x5A6EULL));
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        SageLayer layer;
        layer.w_self = Matrix::glorot(dims[l], dims[l + 1], rng);
        layer.w_neigh = Matrix::glorot(dims[l], dims[l + 1], rng);
        model.layers.push_back(std::move(layer));
    }
    return model;
}

namespace {

SampledTree sample_recursive(const TransactionGraph& graph, NodeId node,
                             std::span<const int> fanouts, std::size_t depth,
                             std::uint64_t stream) {
    SampledTree tree;
    tree.id = node;
    if (depth >= fanouts.size()) return tree;
    if (fanouts[depth] <= 0) throw ConfigError("fanouts must be positive");

    auto candidates = graph.neighbors(node);
    auto rng = make_rng(stream);
    std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(fanouts[depth]),
                                             candidates.size());
    partial_shuffle(candidates, take, rng);
    tree.children.reserve(take);
    for (std::size_t k = 0; k < take; ++k) {
        tree.children.push_back(sample_recursive(graph, candidates[k], fanouts, depth + 1,
                                                 mix_seed(stream, k + 1)));
    }
    return tree;
}

// Forward values cached for backprop: h[l] for l = 0..levels, pre[l] for
// l = 1..levels, where levels = model depth minus tree depth.
struct EvalNode {
    NodeId id = 0;
    std::vector<std::vector<double>> h;
    std::vector<std::vector<double>> pre;
    std::vector<EvalNode> children;
};

EvalNode forward_recursive(const SampledTree& tree, const FeatureTable& features,
                           const SageModel& model, int depth) {
    EvalNode node;
    node.id = tree.id;
    const int levels = model.depth() - depth;
    node.children.reserve(tree.children.size());
    for (const auto& child : tree.children) {
        node.children.push_back(forward_recursive(child, features, model, depth + 1));
    }

    auto feat = features.row(tree.id);
    node.h.resize(static_cast<std::size_t>(levels) + 1);
    node.pre.resize(static_cast<std::size_t>(levels) + 1);
    node.h[0].assign(feat.begin(), feat.end());

    for (int l = 1; l <= levels; ++l) {
        const SageLayer& layer = model.layers[static_cast<std::size_t>(l) - 1];
        const int in_dim = layer.w_self.rows;
        const int out_dim = layer.w_self.cols;
        if (static_cast<int>(node.h[static_cast<std::size_t>(l) - 1].size()) != in_dim) {
            throw DimensionMismatch("layer " + std::to_string(l - 1) + " expects input dim " +
                                    std::to_string(in_dim));
        }

        std::vector<double> neigh_mean(static_cast<std::size_t>(in_dim), 0.0);
        if (!node.children.empty()) {
            for (const auto& child : node.children) {
                const auto& ch = child.h[static_cast<std::size_t>(l) - 1];
                for (int k = 0; k < in_dim; ++k) neigh_mean[static_cast<std::size_t>(k)] += ch[static_cast<std::size_t>(k)];
            }
            for (auto& v : neigh_mean) v /= static_cast<double>(node.children.size());
        }

        std::vector<double> pre(static_cast<std::size_t>(out_dim), 0.0);
        const auto& self_prev = node.h[static_cast<std::size_t>(l) - 1];
        for (int a = 0; a < in_dim; ++a) {
            double s = self_prev[static_cast<std::size_t>(a)];
            double nm = neigh_mean[static_cast<std::size_t>(a)];
            if (s == 0.0 && nm == 0.0) continue;
            for (int b = 0; b < out_dim; ++b) {
                pre[static_cast<std::size_t>(b)] += s * layer.w_self(a, b) + nm * layer.w_neigh(a, b);
            }
        }
        node.pre[static_cast<std::size_t>(l)] = pre;
        auto& out = node.h[static_cast<std::size_t>(l)];
        out.resize(static_cast<std::size_t>(out_dim));
        for (int b = 0; b < out_dim; ++b) {
            out[static_cast<std::size_t>(b)] =
                apply_activation(model.activation, pre[static_cast<std::size_t>(b)]);
        }
    }
    return node;
}

// g_layers[l] = dL/d h[l]; consumed top-down, children recursed after their
// level-(l-1) contributions accumulate.
void backward_recursive(const EvalNode& node, const SageModel& model,
                        std::vector<std::vector<double>> g_layers, SageGrads& grads) {
    const int levels = static_cast<int>(node.h.size()) - 1;
    std::vector<std::vector<std::vector<double>>> child_g(node.children.size());
    for (std::size_t c = 0; c < node.children.size(); ++c) {
        child_g[c].assign(node.children[c].h.size(), {});
    }

    for (int l = levels; l >= 1; --l) {
        auto& g = g_layers[static_cast<std::size_t>(l)];
        if (g.empty()) continue;
        const SageLayer& layer = model.layers[static_cast<std::size_t>(l) - 1];
        SageLayer& grad = grads.layers[static_cast<std::size_t>(l) - 1];
        const int in_dim = layer.w_self.rows;
        const int out_dim = layer.w_self.cols;

        std::vector<double> d_pre(static_cast<std::size_t>(out_dim));
        for (int b = 0; b < out_dim; ++b) {
            d_pre[static_cast<std::size_t>(b)] =
                g[static_cast<std::size_t>(b)] *
                activation_grad(model.activation, node.pre[static_cast<std::size_t>(l)][static_cast<std::size_t>(b)]);
        }

        std::vector<double> neigh_mean(static_cast<std::size_t>(in_dim), 0.0);
        if (!node.children.empty()) {
            for (const auto& child : node.children) {
                const auto& ch = child.h[static_cast<std::size_t>(l) - 1];
                for (int k = 0; k < in_dim; ++k) neigh_mean[static_cast<std::size_t>(k)] += ch[static_cast<std::size_t>(k)];
            }
            for (auto& v : neigh_mean) v /= static_cast<double>(node.children.size());
        }

        const auto& self_prev = node.h[static_cast<std::size_t>(l) - 1];
        if (g_layers[static_cast<std::size_t>(l) - 1].empty()) {
            g_layers[static_cast<std::size_t>(l) - 1].assign(static_cast<std::size_t>(in_dim), 0.0);
        }
        auto& g_below = g_layers[static_cast<std::size_t>(l) - 1];

        for (int a = 0; a < in_dim; ++a) {
            double self_a = self_prev[static_cast<std::size_t>(a)];
            double neigh_a = neigh_mean[static_cast<std::size_t>(a)];
            double acc_self = 0.0;
            double acc_neigh = 0.0;
            for (int b = 0; b < out_dim; ++b) {
                double dp = d_pre[static_cast<std::size_t>(b)];
                grad.w_self(a, b) += self_a * dp;
                grad.w_neigh(a, b) += neigh_a * dp;
                acc_self += dp * layer.w_self(a, b);
                acc_neigh += dp * layer.w_neigh(a, b);
            }
            g_below[static_cast<std::size_t>(a)] += acc_self;
            if (!node.children.empty()) {
                double share = acc_neigh / static_cast<double>(node.children.size());
                for (std::size_t c = 0; c < node.children.size(); ++c) {
                    auto& cg = child_g[c][static_cast<std::size_t>(l) - 1];
                    if (cg.empty()) cg.assign(static_cast<std::size_t>(in_dim), 0.0);
                    cg[static_cast<std::size_t>(a)] += share;
                }
            }
        }
    }

    for (std::size_t c = 0; c < node.children.size(); ++c) {
        backward_recursive(node.children[c], model, std::move(child_g[c]), grads);
    }
}

} // namespace

SampledTree sample_neighborhood(const TransactionGraph& graph, NodeId node,
                                std::span<const int> fanouts, std::uint64_t seed) {
    if (!graph.has_node(node)) throw UnknownNode("node " + std::to_string(node) + " not in graph");
    return sample_recursive(graph, node, fanouts, 0, mix_seed(seed, 0x5A3DULL));
}

std::vector<double> sage_forward(const SampledTree& tree, const FeatureTable& features,
                                 const SageModel& model) {
    EvalNode eval = forward_recursive(tree, features, model, 0);
    return eval.h.back();
}

SageGrads SageGrads::zeros_like(const SageModel& model) {
    SageGrads g;
    for (const auto& layer : model.layers) {
        g.layers.push_back({Matrix(layer.w_self.rows, layer.w_self.cols),
                            Matrix(layer.w_neigh.rows, layer.w_neigh.cols)});
    }
    return g;
}

void SageGrads::scale(double s) {
    for (auto& layer : layers) {
        for (auto& v : layer.w_self.a) v *= s;
        for (auto& v : layer.w_neigh.a) v *= s;
    }
}

std::pair<double, SageGrads> sage_pair_loss_grad(const TransactionGraph& graph,
                                                 const FeatureTable& features, NodeId u, NodeId v,
                                                 int label, const SageModel& model,
                                                 std::uint64_t seed) {
    SampledTree tree_u = sample_neighborhood(graph, u, model.fanouts, mix_seed(seed, 0, u));
    SampledTree tree_v = sample_neighborhood(graph, v, model.fanouts, mix_seed(seed, 1, v));

    EvalNode eval_u = forward_recursive(tree_u, features, model, 0);
    EvalNode eval_v = forward_recursive(tree_v, features, model, 0);
    const auto& z_u = eval_u.h.back();
    const auto& z_v = eval_v.h.back();

    double score = dot(std::span<const double>(z_u), std::span<const double>(z_v));
    double loss = label ? -log_sigmoid(score) : -log_sigmoid(-score);
    double d_score = sigmoid(score) - static_cast<double>(label);

    SageGrads grads = SageGrads::zeros_like(model);
    const int out_dim = model.out_dim();

    std::vector<std::vector<double>> g_u(eval_u.h.size());
    std::vector<std::vector<double>> g_v(eval_v.h.size());
    g_u.back().resize(static_cast<std::size_t>(out_dim));
    g_v.back().resize(static_cast<std::size_t>(out_dim));
    for (int k = 0; k < out_dim; ++k) {
        g_u.back()[static_cast<std::size_t>(k)] = d_score * z_v[static_cast<std::size_t>(k)];
        g_v.back()[static_cast<std::size_t>(k)] = d_score * z_u[static_cast<std::size_t>(k)];
    }
    backward_recursive(eval_u, model, std::move(g_u), grads);
    backward_recursive(eval_v, model, std::move(g_v), grads);
    return {loss, std::move(grads)};
}

SageModel train_sage_unsup(const TransactionGraph& graph, const FeatureTable& features,
                           const std::vector<std::pair<NodeId, NodeId>>& positive_pairs,
                           const std::vector<std::pair<NodeId, NodeId>>& negative_pairs,
                           SageModel model, const SageTrainOptions& options, std::uint64_t seed) {
    struct Item {
        NodeId u;
        NodeId v;
        int label;
    };
    std::vector<Item> items;
    items.reserve(positive_pairs.size() + negative_pairs.size());
    for (const auto& [u, v] : positive_pairs) items.push_back({u, v, 1});
    for (const auto& [u, v] : negative_pairs) items.push_back({u, v, 0});
    if (items.empty()) throw EmptyCorpus("pair training needs at least one pair");

    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        auto order_rng = make_rng(mix_seed(seed, 0x0DDE2ULL, static_cast<std::uint64_t>(epoch)));
        std::vector<std::size_t> order(items.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), order_rng);

        for (std::size_t step = 0; step < order.size(); ++step) {
            const Item& item = items[order[step]];
            auto [loss, grads] = sage_pair_loss_grad(
                graph, features, item.u, item.v, item.label, model,
                mix_seed(seed, static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(step)));
            (void)loss;
            for (std::size_t l = 0; l < model.layers.size(); ++l) {
                add_scaled(model.layers[l].w_self, grads.layers[l].w_self, -options.learning_rate);
                add_scaled(model.layers[l].w_neigh, grads.layers[l].w_neigh,
                           -options.learning_rate);
            }
        }
    }
    return model;
}

std::vector<double> infer_unseen(const SageModel& model, const TransactionGraph& graph,
                                 const FeatureTable& features, NodeId node, std::uint64_t seed) {
    if (!features.has(node)) {
        throw MissingFeatures("node " + std::to_string(node) + " has no feature row");
    }
    SampledTree tree = sample_neighborhood(graph, node, model.fanouts, seed);
    return sage_forward(tree, features, model);
}

EmbeddingMatrix sage_embed_all(const SageModel& model, const TransactionGraph& graph,
                               const FeatureTable& features, std::uint64_t seed) {
    std::vector<NodeId> ids;
    for (const auto& n : graph.nodes()) ids.push_back(n.id);
    EmbeddingMatrix out = EmbeddingMatrix::zeros(ids, model.out_dim());
    for (NodeId id : out.ids) {
        auto z = infer_unseen(model, graph, features, id, mix_seed(seed, static_cast<std::uint64_t>(id)));
        auto row = out.row(id);
        std::copy(z.begin(), z.end(), row.begin());
    }
    return out;
}

void save_sage(const SageModel& model, const std::string& path) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& layer : model.layers) {
        layers.push_back({{"w_self", matrix_to_json(layer.w_self)},
                          {"w_neigh", matrix_to_json(layer.w_neigh)}});
    }
    nlohmann::json j{{"version", 1},
                     {"activation", to_string(model.activation)},
                     {"fanouts", model.fanouts},
                     {"layers", layers}};
    std::ofstream out(path);
    if (!out) throw FileNotFound("cannot write " + path);
    out << j.dump(2) << "\n";
}

SageModel load_sage(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFound("cannot open " + path);
    nlohmann::json j;
    in >> j;
    if (j.value("version", 0) != 1) throw SerializationError("unsupported model version");

    SageModel model;
    std::string act = j.at("activation").get<std::string>();
    if (act == "linear") {
        model.activation = Activation::linear;
    } else if (act == "sigmoid") {
        model.activation = Activation::sigmoid;
    } else {
        model.activation = Activation::relu;
    }
    model.fanouts = j.at("fanouts").get<std::vector<int>>();
    for (const auto& layer_json : j.at("layers")) {
        model.layers.push_back({matrix_from_json(layer_json.at("w_self")),
                                matrix_from_json(layer_json.at("w_neigh"))});
    }
    return model;
}

} // namespace graphlaunder
