#include "graphlaunder/attention.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "graphlaunder/errors.hpp"
#include "graphlaunder/rng.hpp"

namespace graphlaunder {

AttentionLayer AttentionLayer::init(int d, std::mt19937_64& rng) {
    return {Matrix::glorot(d, d, rng), Matrix::glorot(d, d, rng), Matrix::glorot(d, d, rng)};
}

namespace {

void check_layer(const Matrix& h, const AttentionLayer& layer) {
    const int d = layer.w_q.rows;
    if (layer.w_q.cols != d || layer.w_k.rows != d || layer.w_k.cols != d ||
        layer.w_v.rows != d || layer.w_v.cols != d) {
        throw DimensionMismatch("attention weight matrices must be square and equal-sized");
    }
    if (h.cols != d) {
        throw DimensionMismatch("input has " + std::to_string(h.cols) +
                                " columns, weights expect " + std::to_string(d));
    }
}

// Row-stable softmax of scores/sqrt(d).
Matrix softmax_scaled(const Matrix& scores, double scale) {
    Matrix out(scores.rows, scores.cols);
    for (int i = 0; i < scores.rows; ++i) {
        double row_max = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < scores.cols; ++j) row_max = std::max(row_max, scores(i, j) * scale);
        double sum = 0.0;
        for (int j = 0; j < scores.cols; ++j) {
            double e = std::exp(scores(i, j) * scale - row_max);
            out(i, j) = e;
            sum += e;
        }
        for (int j = 0; j < scores.cols; ++j) out(i, j) /= sum;
    }
    return out;
}

struct AttentionCache {
    Matrix h_in;
    Matrix q, k, v;
    Matrix attn; // softmax weights
};

Matrix forward_cached(const Matrix& h, const AttentionLayer& layer, AttentionCache& cache) {
    check_layer(h, layer);
    cache.h_in = h;
    cache.q = matmul(h, layer.w_q);
    cache.k = matmul(h, layer.w_k);
    cache.v = matmul(h, layer.w_v);
    Matrix scores = matmul(cache.q, transpose(cache.k));
    cache.attn = softmax_scaled(scores, 1.0 / std::sqrt(static_cast<double>(h.cols)));
    return matmul(cache.attn, cache.v);
}

} // namespace

Matrix attention_forward(const Matrix& h_prev, const AttentionLayer& layer) {
    AttentionCache cache;
    return forward_cached(h_prev, layer, cache);
}

Matrix attention_stack_forward(Matrix h, std::span<const AttentionLayer> layers) {
    for (const auto& layer : layers) h = attention_forward(h, layer);
    return h;
}

AttentionGrads attention_stack_grad(const Matrix& h0, std::span<const AttentionLayer> layers,
                                    const Matrix& dz) {
    std::vector<AttentionCache> caches(layers.size());
    Matrix h = h0;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        h = forward_cached(h, layers[l], caches[l]);
    }

    AttentionGrads grads;
    grads.layers.resize(layers.size());
    Matrix d_out = dz;
    const double scale = 1.0 / std::sqrt(static_cast<double>(h0.cols));

    for (std::size_t li = layers.size(); li-- > 0;) {
        const AttentionCache& cache = caches[li];
        const AttentionLayer& layer = layers[li];

        Matrix d_attn = matmul(d_out, transpose(cache.v));
        Matrix d_v = matmul(transpose(cache.attn), d_out);

        // Softmax backward per row: ds = (da - <da, a>) .* a, then rescale.
        Matrix d_scores(cache.attn.rows, cache.attn.cols);
        for (int i = 0; i < cache.attn.rows; ++i) {
            double inner = 0.0;
            for (int j = 0; j < cache.attn.cols; ++j) inner += d_attn(i, j) * cache.attn(i, j);
            for (int j = 0; j < cache.attn.cols; ++j) {
                d_scores(i, j) = (d_attn(i, j) - inner) * cache.attn(i, j) * scale;
            }
        }

        Matrix d_q = matmul(d_scores, cache.k);
        Matrix d_k = matmul(transpose(d_scores), cache.q);

        Matrix h_in_t = transpose(cache.h_in);
        grads.layers[li].w_q = matmul(h_in_t, d_q);
        grads.layers[li].w_k = matmul(h_in_t, d_k);
        grads.layers[li].w_v = matmul(h_in_t, d_v);

        Matrix d_h = matmul(d_q, transpose(layer.w_q));
        add_scaled(d_h, matmul(d_k, transpose(layer.w_k)), 1.0);
        add_scaled(d_h, matmul(d_v, transpose(layer.w_v)), 1.0);
        d_out = std::move(d_h);
    }
    return grads;
}

namespace {

// Deterministic +-1 base vector per node id.
std::vector<double> base_vector(NodeId id, std::uint64_t seed, int dim) {
    std::vector<double> v(static_cast<std::size_t>(dim));
    std::uint64_t state = mix_seed(seed, 0xBA5EULL, static_cast<std::uint64_t>(id));
    std::uint64_t bits = 0;
    int remaining = 0;
    for (int i = 0; i < dim; ++i) {
        if (remaining == 0) {
            state = splitmix64(state);
            bits = state;
            remaining = 64;
        }
        v[static_cast<std::size_t>(i)] = (bits & 1) ? 1.0 : -1.0;
        bits >>= 1;
        --remaining;
    }
    return v;
}

struct TimeBins {
    std::vector<std::int64_t> boundaries; // step mode: the distinct stamps
    std::int64_t t_min = 0;
    std::int64_t t_max = 0;
    int count = 0;
    bool step_mode = false;

    int bin_of(std::int64_t t) const {
        if (step_mode) {
            auto it = std::upper_bound(boundaries.begin(), boundaries.end(), t);
            return static_cast<int>(std::max<std::ptrdiff_t>(0, it - boundaries.begin() - 1));
        }
        if (t_max == t_min) return 0;
        auto idx = (t - t_min) * count / (t_max - t_min + 1);
        return static_cast<int>(std::clamp<std::int64_t>(idx, 0, count - 1));
    }
};

TimeBins make_bins(const TransactionGraph& graph, int tau) {
    TimeBins bins;
    if (graph.timestep_bins()) {
        bins.step_mode = true;
        bins.boundaries = *graph.timestep_bins();
        bins.count = static_cast<int>(bins.boundaries.size());
    } else {
        auto [lo, hi] = graph.time_range();
        bins.t_min = lo;
        bins.t_max = hi;
        // Equal-width fallback; enough bins that mid-horizon edges carry a
        // full history window.
        bins.count = std::max(tau, 8);
        if (graph.edge_count() == 0) bins.count = 0;
    }
    return bins;
}

} // namespace

std::vector<AttentionLayer> dgt_init_params(const DgtConfig& config, std::uint64_t seed) {
    auto rng = make_rng(mix_seed(seed, 0xD6D7ULL));
    std::vector<AttentionLayer> params;
    params.reserve(static_cast<std::size_t>(config.layers));
    for (int l = 0; l < config.layers; ++l) params.push_back(AttentionLayer::init(config.d_enc, rng));
    return params;
}

DgtEmbedding dgt_embed(const TransactionGraph& graph, const TransferEdge& target_edge,
                       const DgtConfig& config, std::span<const AttentionLayer> params,
                       std::uint64_t seed) {
    if (static_cast<int>(params.size()) != config.layers) {
        throw DimensionMismatch("expected " + std::to_string(config.layers) +
                                " attention layers, got " + std::to_string(params.size()));
    }
    TimeBins bins = make_bins(graph, config.tau);
    if (bins.count < config.tau) {
        throw InsufficientHistory("graph has " + std::to_string(bins.count) +
                                  " time bins, need " + std::to_string(config.tau));
    }

    const NodeId u = target_edge.src;
    const NodeId v = target_edge.dst;
    const int k = config.context_k;
    const int edge_bin = bins.bin_of(target_edge.timestamp);

    // Raw per-row encoding: [base | hop one-hot (k+1) | window one-hot (tau)].
    const int raw_dim = config.d_enc + (k + 1) + config.tau;
    Matrix raw(config.row_count(), raw_dim);
    std::vector<NodeId> row_nodes;
    row_nodes.reserve(static_cast<std::size_t>(config.row_count()));

    int row = 0;
    auto emit = [&](NodeId id, int hop, int window) {
        auto base = base_vector(id, seed, config.d_enc);
        for (int c = 0; c < config.d_enc; ++c) raw(row, c) = base[static_cast<std::size_t>(c)];
        raw(row, config.d_enc + std::min(hop, k)) = 1.0;
        raw(row, config.d_enc + (k + 1) + window) = 1.0;
        row_nodes.push_back(id);
        ++row;
    };

    for (int w = 0; w < config.tau; ++w) {
        int bin = std::max(0, edge_bin - (config.tau - 1) + w);

        // Context: counterparties of either endpoint active in this bin.
        std::set<NodeId> context;
        auto scan = [&](NodeId endpoint) {
            for (int ei : graph.out_edge_indices(endpoint)) {
                const auto& e = graph.edges()[static_cast<std::size_t>(ei)];
                if (bins.bin_of(e.timestamp) == bin && e.dst != u && e.dst != v) context.insert(e.dst);
            }
            for (int ei : graph.in_edge_indices(endpoint)) {
                const auto& e = graph.edges()[static_cast<std::size_t>(ei)];
                if (bins.bin_of(e.timestamp) == bin && e.src != u && e.src != v) context.insert(e.src);
            }
        };
        scan(u);
        if (v != u) scan(v);

        std::vector<NodeId> pool(context.begin(), context.end());
        auto rng = make_rng(mix_seed(seed, static_cast<std::uint64_t>(target_edge.tx_id),
                                     static_cast<std::uint64_t>(w)));
        std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), pool.size());
        partial_shuffle(pool, take, rng);

        emit(u, 0, w);
        emit(v, 0, w);
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
            if (c < take) {
                emit(pool[c], 1, w);
            } else {
                // Under-filled context slots fall back to the endpoints.
                emit(c % 2 == 0 ? u : v, 0, w);
            }
        }
    }

    // Fixed random projection to the encoding dimension; shared across edges.
    auto proj_rng = make_rng(mix_seed(seed, 0x1203ULL));
    Matrix projection = Matrix::glorot(raw_dim, config.d_enc, proj_rng);
    Matrix h0 = matmul(raw, projection);

    DgtEmbedding out;
    out.z = attention_stack_forward(std::move(h0), params);
    out.row_nodes = std::move(row_nodes);
    return out;
}

EmbeddingMatrix dgt_embed_nodes(const TransactionGraph& graph, const DgtConfig& config,
                                std::span<const AttentionLayer> params, std::uint64_t seed) {
    std::vector<NodeId> ids;
    for (const auto& n : graph.nodes()) ids.push_back(n.id);
    EmbeddingMatrix out = EmbeddingMatrix::zeros(ids, config.d_enc);
    std::vector<int> counts(out.ids.size(), 0);

    TimeBins bins = make_bins(graph, config.tau);
    DgtConfig effective = config;
    effective.tau = std::max(1, std::min(config.tau, bins.count));
    std::vector<AttentionLayer> local_params(params.begin(), params.end());

    for (const auto& edge : graph.edges()) {
        DgtEmbedding emb = dgt_embed(graph, edge, effective, local_params, seed);
        for (std::size_t r = 0; r < emb.row_nodes.size(); ++r) {
            NodeId id = emb.row_nodes[r];
            // Only endpoint rows feed the node average.
            if (id != edge.src && id != edge.dst) continue;
            auto dst = out.row(id);
            for (int c = 0; c < config.d_enc; ++c) {
                dst[static_cast<std::size_t>(c)] += emb.z(static_cast<int>(r), c);
            }
            ++counts[static_cast<std::size_t>(out.row_index.at(id))];
        }
    }
    for (std::size_t i = 0; i < out.ids.size(); ++i) {
        if (counts[i] == 0) continue;
        double inv = 1.0 / static_cast<double>(counts[i]);
        for (int c = 0; c < config.d_enc; ++c) {
            out.values[i * static_cast<std::size_t>(config.d_enc) + static_cast<std::size_t>(c)] *= inv;
        }
    }
    return out;
}

void save_attention_params(const DgtConfig& config, std::span<const AttentionLayer> params,
                           const std::string& path) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& layer : params) {
        layers.push_back({{"w_q", matrix_to_json(layer.w_q)},
                          {"w_k", matrix_to_json(layer.w_k)},
                          {"w_v", matrix_to_json(layer.w_v)}});
    }
    nlohmann::json j{{"version", 1},
                     {"layers", config.layers},
                     {"d_enc", config.d_enc},
                     {"tau", config.tau},
                     {"context_k", config.context_k},
                     {"params", layers}};
    std::ofstream out(path);
    if (!out) throw FileNotFound("cannot write " + path);
    out << j.dump(2) << "\n";
}

std::pair<DgtConfig, std::vector<AttentionLayer>> load_attention_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFound("cannot open " + path);
    nlohmann::json j;
    in >> j;
    if (j.value("version", 0) != 1) throw SerializationError("unsupported params version");
    DgtConfig config;
    config.layers = j.at("layers").get<int>();
    config.d_enc = j.at("d_enc").get<int>();
    config.tau = j.at("tau").get<int>();
    config.context_k = j.at("context_k").get<int>();
    std::vector<AttentionLayer> params;
    for (const auto& layer_json : j.at("params")) {
        params.push_back({matrix_from_json(layer_json.at("w_q")),
                          matrix_from_json(layer_json.at("w_k")),
                          matrix_from_json(layer_json.at("w_v"))});
    }
    return {config, std::move(params)};
}

} // namespace graphlaunder
