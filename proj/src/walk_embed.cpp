#include "graphlaunder/walk_embed.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <thread>

#include "graphlaunder/errors.hpp"
#include "graphlaunder/rng.hpp"

namespace graphlaunder {

namespace {

// Distinct out-neighbors with edge multiplicities, per node index.
struct OutAdjacency {
    std::vector<std::vector<NodeId>> neighbor;
    std::vector<std::vector<double>> multiplicity;

    explicit OutAdjacency(const TransactionGraph& graph) {
        const int n = graph.node_count();
        neighbor.resize(static_cast<std::size_t>(n));
        multiplicity.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            std::map<NodeId, double> counts;
            for (int e : graph.out_edge_indices(graph.id_at(i))) {
                counts[graph.edges()[static_cast<std::size_t>(e)].dst] += 1.0;
            }
            for (const auto& [v, c] : counts) {
                neighbor[static_cast<std::size_t>(i)].push_back(v);
                multiplicity[static_cast<std::size_t>(i)].push_back(c);
            }
        }
    }

    bool has_edge(int from_index, NodeId to) const {
        const auto& nbr = neighbor[static_cast<std::size_t>(from_index)];
        return std::binary_search(nbr.begin(), nbr.end(), to);
    }
};

int sample_weighted(const std::vector<double>& weights, double total, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(0.0, total);
    double r = dist(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (r < acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
}

std::vector<NodeId> one_walk(const TransactionGraph& graph, const OutAdjacency& adj, int start,
                             double p, double q, int walk_length, std::mt19937_64& rng) {
    std::vector<NodeId> walk;
    walk.reserve(static_cast<std::size_t>(walk_length));
    walk.push_back(graph.id_at(start));

    int cur = start;
    const auto& first = adj.neighbor[static_cast<std::size_t>(cur)];
    if (first.empty() || walk_length < 2) return walk;

    double total = 0.0;
    for (double m : adj.multiplicity[static_cast<std::size_t>(cur)]) total += m;
    int pick = sample_weighted(adj.multiplicity[static_cast<std::size_t>(cur)], total, rng);
    int prev = cur;
    cur = graph.index_of(first[static_cast<std::size_t>(pick)]);
    walk.push_back(graph.id_at(cur));

    std::vector<double> weights;
    while (static_cast<int>(walk.size()) < walk_length) {
        const auto& nbr = adj.neighbor[static_cast<std::size_t>(cur)];
        if (nbr.empty()) break;
        const auto& mult = adj.multiplicity[static_cast<std::size_t>(cur)];
        weights.resize(nbr.size());
        double sum = 0.0;
        const NodeId prev_id = graph.id_at(prev);
        for (std::size_t i = 0; i < nbr.size(); ++i) {
            double bias;
            if (nbr[i] == prev_id) {
                bias = 1.0 / p;
            } else if (adj.has_edge(prev, nbr[i])) {
                bias = 1.0;
            } else {
                bias = 1.0 / q;
            }
            weights[i] = mult[i] * bias;
            sum += weights[i];
        }
        int next = sample_weighted(weights, sum, rng);
        prev = cur;
        cur = graph.index_of(nbr[static_cast<std::size_t>(next)]);
        walk.push_back(graph.id_at(cur));
    }
    return walk;
}

} // namespace

WalkCorpus biased_walks(const TransactionGraph& graph, double p, double q, int walk_length,
                        int walks_per_node, std::uint64_t seed, int workers) {
    if (graph.node_count() == 0) throw EmptyCorpus("cannot walk an empty graph");
    if (!(p > 0.0) || !(q > 0.0)) throw ConfigError("walk biases p and q must be positive");

    OutAdjacency adj(graph);
    const int n = graph.node_count();

    WalkCorpus corpus;
    corpus.walk_length = walk_length;
    corpus.walks_per_node = walks_per_node;
    corpus.p = p;
    corpus.q = q;
    corpus.walks.assign(static_cast<std::size_t>(n) * walks_per_node, {});

    auto run_range = [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
            for (int w = 0; w < walks_per_node; ++w) {
                auto rng = make_rng(mix_seed(seed, static_cast<std::uint64_t>(i),
                                             static_cast<std::uint64_t>(w)));
                corpus.walks[static_cast<std::size_t>(i) * walks_per_node + w] =
                    one_walk(graph, adj, i, p, q, walk_length, rng);
            }
        }
    };

    workers = std::max(1, workers);
    if (workers == 1 || n < 2 * workers) {
        run_range(0, n);
    } else {
        std::vector<std::thread> threads;
        int chunk = (n + workers - 1) / workers;
        for (int t = 0; t < workers; ++t) {
            int begin = t * chunk;
            int end = std::min(n, begin + chunk);
            if (begin >= end) break;
            threads.emplace_back(run_range, begin, end);
        }
        for (auto& t : threads) t.join();
    }
    return corpus;
}

std::vector<std::pair<NodeId, NodeId>> window_pairs(const WalkCorpus& corpus, int window) {
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (const auto& walk : corpus.walks) {
        const int len = static_cast<int>(walk.size());
        for (int i = 0; i < len; ++i) {
            int lo = std::max(0, i - window);
            int hi = std::min(len - 1, i + window);
            for (int j = lo; j <= hi; ++j) {
                if (j == i) continue;
                pairs.emplace_back(walk[static_cast<std::size_t>(i)],
                                   walk[static_cast<std::size_t>(j)]);
            }
        }
    }
    return pairs;
}

NodeId NoiseDistribution::sample(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    double r = dist(rng);
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    std::size_t idx = std::min(static_cast<std::size_t>(it - cumulative.begin()),
                               ids.size() - 1);
    return ids[idx];
}

namespace {

NoiseDistribution from_counts(const std::map<NodeId, double>& counts, double power) {
    NoiseDistribution noise;
    double total = 0.0;
    for (const auto& [id, c] : counts) {
        noise.ids.push_back(id);
        double weighted = std::pow(c, power);
        noise.prob.push_back(weighted);
        total += weighted;
    }
    double acc = 0.0;
    noise.cumulative.resize(noise.prob.size());
    for (std::size_t i = 0; i < noise.prob.size(); ++i) {
        noise.prob[i] /= total;
        acc += noise.prob[i];
        noise.cumulative[i] = acc;
    }
    if (!noise.cumulative.empty()) noise.cumulative.back() = 1.0;
    return noise;
}

} // namespace

NoiseDistribution NoiseDistribution::unigram(const WalkCorpus& corpus, double power) {
    std::map<NodeId, double> counts;
    for (const auto& walk : corpus.walks) {
        for (NodeId id : walk) counts[id] += 1.0;
    }
    if (counts.empty()) throw EmptyCorpus("noise distribution over an empty corpus");
    return from_counts(counts, power);
}

NoiseDistribution NoiseDistribution::unigram_pairs(
    const std::vector<std::pair<NodeId, NodeId>>& pairs, double power) {
    std::map<NodeId, double> counts;
    for (const auto& [center, context] : pairs) {
        counts[center] += 1.0;
        counts[context] += 1.0;
    }
    if (counts.empty()) throw EmptyCorpus("noise distribution over an empty pair list");
    return from_counts(counts, power);
}

std::pair<double, SgnsGrads> sgns_loss_grad(NodeId center, NodeId context,
                                            const std::vector<NodeId>& negatives,
                                            const SkipgramModel& model) {
    auto v_center = model.in_vectors.row(center);
    const int d = model.in_vectors.dim;

    std::map<NodeId, std::vector<double>> out_acc;
    std::vector<double> center_grad(static_cast<std::size_t>(d), 0.0);

    auto accumulate = [&](NodeId id, bool positive) {
        auto v_out = model.out_vectors.row(id);
        double score = dot(v_center, v_out);
        double g = positive ? sigmoid(score) - 1.0 : sigmoid(score); // dL/dscore
        auto& acc = out_acc[id];
        if (acc.empty()) acc.assign(static_cast<std::size_t>(d), 0.0);
        for (int k = 0; k < d; ++k) {
            center_grad[static_cast<std::size_t>(k)] += g * v_out[static_cast<std::size_t>(k)];
            acc[static_cast<std::size_t>(k)] += g * v_center[static_cast<std::size_t>(k)];
        }
        return score;
    };

    double loss = -log_sigmoid(accumulate(context, true));
    for (NodeId neg : negatives) {
        loss -= log_sigmoid(-accumulate(neg, false));
    }

    SgnsGrads grads;
    grads.in_grads.emplace_back(center, std::move(center_grad));
    for (auto& [id, g] : out_acc) grads.out_grads.emplace_back(id, std::move(g));
    return {loss, std::move(grads)};
}

namespace {

// One SGD step for a (center, context, negatives) term, updating the model
// in place; out-side rows update immediately, the center row at the end.
void sgns_apply(std::span<double> v_center, SkipgramModel& model, NodeId context,
                std::span<const NodeId> negatives, double lr,
                std::vector<double>& center_acc) {
    const int d = model.in_vectors.dim;
    std::fill(center_acc.begin(), center_acc.end(), 0.0);

    auto update_out = [&](NodeId id, bool positive) {
        auto v_out = model.out_vectors.row(id);
        double score = dot(v_center, v_out);
        double g = positive ? sigmoid(score) - 1.0 : sigmoid(score);
        for (int k = 0; k < d; ++k) {
            center_acc[static_cast<std::size_t>(k)] += g * v_out[static_cast<std::size_t>(k)];
            v_out[static_cast<std::size_t>(k)] -= lr * g * v_center[static_cast<std::size_t>(k)];
        }
    };

    update_out(context, true);
    for (NodeId neg : negatives) update_out(neg, false);
    for (int k = 0; k < d; ++k) {
        v_center[static_cast<std::size_t>(k)] -= lr * center_acc[static_cast<std::size_t>(k)];
    }
}

std::size_t count_pairs(const WalkCorpus& corpus, int window) {
    std::size_t total = 0;
    for (const auto& walk : corpus.walks) {
        const int len = static_cast<int>(walk.size());
        for (int i = 0; i < len; ++i) {
            total += static_cast<std::size_t>(std::min(len - 1, i + window) -
                                              std::max(0, i - window));
        }
    }
    return total;
}

} // namespace

SkipgramModel train_skipgram_model(const WalkCorpus& corpus, const SkipgramOptions& options,
                                   std::uint64_t seed) {
    if (corpus.walks.empty()) throw EmptyCorpus("skip-gram training needs a non-empty corpus");
    if (options.dim < 1) throw ConfigError("embedding dimension must be >= 1");

    std::vector<NodeId> vocab;
    for (const auto& walk : corpus.walks) vocab.insert(vocab.end(), walk.begin(), walk.end());
    if (vocab.empty()) throw EmptyCorpus("corpus contains no tokens");

    SkipgramModel model;
    model.window = options.window;
    model.negatives = options.negatives;
    model.in_vectors = EmbeddingMatrix::zeros(vocab, options.dim);
    model.out_vectors = EmbeddingMatrix::zeros(std::move(vocab), options.dim);
    model.noise = NoiseDistribution::unigram(corpus);

    {
        auto rng = make_rng(mix_seed(seed, 0x1A17ULL));
        std::uniform_real_distribution<double> init(-0.5 / options.dim, 0.5 / options.dim);
        for (auto& v : model.in_vectors.values) v = init(rng);
    }

    const std::size_t total_steps =
        std::max<std::size_t>(1, count_pairs(corpus, options.window) *
                                     static_cast<std::size_t>(options.epochs));
    const double lr_max = options.learning_rate;
    const double lr_min = options.learning_rate / 100.0;
    std::atomic<std::size_t> step{0};

    const int workers = std::max(1, options.workers);
    auto train_walks = [&](std::size_t begin, std::size_t end, std::uint64_t stream) {
        auto rng = make_rng(stream);
        std::vector<NodeId> negatives;
        std::vector<double> center_acc(static_cast<std::size_t>(options.dim), 0.0);
        for (std::size_t w = begin; w < end; ++w) {
            const auto& walk = corpus.walks[w];
            const int len = static_cast<int>(walk.size());
            for (int i = 0; i < len; ++i) {
                auto v_center = model.in_vectors.row(walk[static_cast<std::size_t>(i)]);
                int lo = std::max(0, i - options.window);
                int hi = std::min(len - 1, i + options.window);
                for (int j = lo; j <= hi; ++j) {
                    if (j == i) continue;
                    NodeId context = walk[static_cast<std::size_t>(j)];
                    negatives.clear();
                    for (int k = 0; k < options.negatives; ++k) {
                        NodeId neg = model.noise.sample(rng);
                        if (neg != context) negatives.push_back(neg);
                    }
                    std::size_t s = step.fetch_add(1, std::memory_order_relaxed);
                    double progress = static_cast<double>(s) / static_cast<double>(total_steps);
                    double lr = lr_max - (lr_max - lr_min) * progress;
                    sgns_apply(v_center, model, context, negatives, lr, center_acc);
                }
            }
        }
    };

    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        if (workers == 1 || corpus.walks.size() < 2 * static_cast<std::size_t>(workers)) {
            train_walks(0, corpus.walks.size(),
                        mix_seed(seed, 0x77ULL, static_cast<std::uint64_t>(epoch)));
        } else {
            // Lock-free concurrent updates; deterministic only with one worker.
            std::vector<std::thread> threads;
            std::size_t chunk = (corpus.walks.size() + workers - 1) / workers;
            for (int t = 0; t < workers; ++t) {
                std::size_t begin = static_cast<std::size_t>(t) * chunk;
                std::size_t end = std::min(corpus.walks.size(), begin + chunk);
                if (begin >= end) break;
                threads.emplace_back(train_walks, begin, end,
                                     mix_seed(seed, 0x77ULL, static_cast<std::uint64_t>(epoch),
                                              static_cast<std::uint64_t>(t)));
            }
            for (auto& t : threads) t.join();
        }
    }
    return model;
}

EmbeddingMatrix train_skipgram(const WalkCorpus& corpus, const SkipgramOptions& options,
                               std::uint64_t seed) {
    return train_skipgram_model(corpus, options, seed).in_vectors;
}

std::vector<double> attri_embed_forward(std::span<const double> features, const Matrix& w_in,
                                        Activation activation) {
    if (static_cast<int>(features.size()) != w_in.rows) {
        throw DimensionMismatch("feature length " + std::to_string(features.size()) +
                                " does not match mapping rows " + std::to_string(w_in.rows));
    }
    std::vector<double> out(static_cast<std::size_t>(w_in.cols), 0.0);
    for (int a = 0; a < w_in.rows; ++a) {
        double x = features[static_cast<std::size_t>(a)];
        if (x == 0.0) continue;
        for (int b = 0; b < w_in.cols; ++b) {
            out[static_cast<std::size_t>(b)] += x * w_in(a, b);
        }
    }
    for (auto& v : out) v = apply_activation(activation, v);
    return out;
}

std::pair<double, AttriGrads> attri_pair_loss_grad(std::span<const double> center_features,
                                                   NodeId context,
                                                   const std::vector<NodeId>& negatives,
                                                   const Attri2VecModel& model) {
    const int d = model.w_in.cols;
    if (static_cast<int>(center_features.size()) != model.w_in.rows) {
        throw DimensionMismatch("feature length does not match mapping rows");
    }

    // Forward with pre-activations retained for the chain rule.
    std::vector<double> pre(static_cast<std::size_t>(d), 0.0);
    for (int a = 0; a < model.w_in.rows; ++a) {
        double x = center_features[static_cast<std::size_t>(a)];
        if (x == 0.0) continue;
        for (int b = 0; b < d; ++b) pre[static_cast<std::size_t>(b)] += x * model.w_in(a, b);
    }
    std::vector<double> z(static_cast<std::size_t>(d));
    for (int b = 0; b < d; ++b) {
        z[static_cast<std::size_t>(b)] = apply_activation(model.activation, pre[static_cast<std::size_t>(b)]);
    }

    std::map<NodeId, std::vector<double>> out_acc;
    std::vector<double> z_grad(static_cast<std::size_t>(d), 0.0);
    double loss = 0.0;

    auto accumulate = [&](NodeId id, bool positive) {
        auto v_out = model.out_vectors.row(id);
        double score = dot(std::span<const double>(z), v_out);
        double g = positive ? sigmoid(score) - 1.0 : sigmoid(score);
        auto& acc = out_acc[id];
        if (acc.empty()) acc.assign(static_cast<std::size_t>(d), 0.0);
        for (int k = 0; k < d; ++k) {
            z_grad[static_cast<std::size_t>(k)] += g * v_out[static_cast<std::size_t>(k)];
            acc[static_cast<std::size_t>(k)] += g * z[static_cast<std::size_t>(k)];
        }
        loss -= positive ? log_sigmoid(score) : log_sigmoid(-score);
    };

    accumulate(context, true);
    for (NodeId neg : negatives) accumulate(neg, false);

    AttriGrads grads;
    grads.w_in_grad = Matrix(model.w_in.rows, model.w_in.cols);
    for (int b = 0; b < d; ++b) {
        double chain = z_grad[static_cast<std::size_t>(b)] *
                       activation_grad(model.activation, pre[static_cast<std::size_t>(b)]);
        if (chain == 0.0) continue;
        for (int a = 0; a < model.w_in.rows; ++a) {
            grads.w_in_grad(a, b) = center_features[static_cast<std::size_t>(a)] * chain;
        }
    }
    for (auto& [id, g] : out_acc) grads.out_grads.emplace_back(id, std::move(g));
    return {loss, std::move(grads)};
}

std::pair<Attri2VecModel, EmbeddingMatrix> train_attri2vec(
    const FeatureTable& features, const std::vector<std::pair<NodeId, NodeId>>& pairs,
    const Attri2VecOptions& options, std::uint64_t seed) {
    if (pairs.empty()) throw EmptyCorpus("attribute embedding training needs walk pairs");

    Attri2VecModel model;
    model.activation = options.activation;
    {
        auto rng = make_rng(mix_seed(seed, 0xA771ULL));
        model.w_in = Matrix::glorot(features.dim(), options.dim, rng);
    }
    const std::vector<NodeId>& ids = features.ids;
    model.out_vectors = EmbeddingMatrix::zeros(ids, options.dim);
    NoiseDistribution noise = NoiseDistribution::unigram_pairs(pairs);

    const std::size_t total_steps =
        std::max<std::size_t>(1, pairs.size() * static_cast<std::size_t>(options.epochs));
    const double lr_max = options.learning_rate;
    const double lr_min = options.learning_rate / 100.0;

    std::size_t step = 0;
    std::vector<NodeId> negatives;
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        auto rng = make_rng(mix_seed(seed, 0xA772ULL, static_cast<std::uint64_t>(epoch)));
        for (const auto& [center, context] : pairs) {
            negatives.clear();
            for (int k = 0; k < options.negatives; ++k) {
                NodeId neg = noise.sample(rng);
                if (neg != context) negatives.push_back(neg);
            }
            double progress = static_cast<double>(step++) / static_cast<double>(total_steps);
            double lr = lr_max - (lr_max - lr_min) * progress;

            auto [loss, grads] =
                attri_pair_loss_grad(features.row(center), context, negatives, model);
            (void)loss;
            add_scaled(model.w_in, grads.w_in_grad, -lr);
            for (const auto& [id, g] : grads.out_grads) {
                auto row = model.out_vectors.row(id);
                for (std::size_t k = 0; k < g.size(); ++k) row[k] -= lr * g[k];
            }
        }
    }

    EmbeddingMatrix embeddings = EmbeddingMatrix::zeros(ids, options.dim);
    for (NodeId id : ids) {
        auto z = attri_embed_forward(features.row(id), model.w_in, model.activation);
        auto row = embeddings.row(id);
        std::copy(z.begin(), z.end(), row.begin());
    }
    return {std::move(model), std::move(embeddings)};
}

std::pair<Attri2VecModel, EmbeddingMatrix> train_attri2vec(
    const TransactionGraph& graph, const std::vector<std::pair<NodeId, NodeId>>& pairs,
    const Attri2VecOptions& options, std::uint64_t seed) {
    return train_attri2vec(FeatureTable::from_graph(graph), pairs, options, seed);
}

} // namespace graphlaunder
