#include "graphlaunder/xbank.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include <openssl/sha.h>

#include "graphlaunder/csv.hpp"
#include "graphlaunder/errors.hpp"
#include "graphlaunder/linalg.hpp"

namespace graphlaunder {

std::vector<double> hash_init_embedding(std::string_view external_key, std::uint64_t public_seed,
                                        int dim) {
    if (dim < 1) throw ConfigError("embedding dimension must be >= 1");
    std::vector<double> v(static_cast<std::size_t>(dim));

    // One SHA-256 digest per 256-bit block: SHA256(seed_le || key || block_le).
    std::vector<unsigned char> message(8 + external_key.size() + 4);
    for (int b = 0; b < 8; ++b) {
        message[static_cast<std::size_t>(b)] =
            static_cast<unsigned char>((public_seed >> (8 * b)) & 0xFF);
    }
    std::memcpy(message.data() + 8, external_key.data(), external_key.size());

    unsigned char digest[SHA256_DIGEST_LENGTH];
    int produced = 0;
    std::uint32_t block = 0;
    while (produced < dim) {
        for (int b = 0; b < 4; ++b) {
            message[8 + external_key.size() + static_cast<std::size_t>(b)] =
                static_cast<unsigned char>((block >> (8 * b)) & 0xFF);
        }
        SHA256(message.data(), message.size(), digest);
        for (int bit = 0; bit < 8 * SHA256_DIGEST_LENGTH && produced < dim; ++bit, ++produced) {
            bool one = (digest[bit / 8] >> (bit % 8)) & 1;
            v[static_cast<std::size_t>(produced)] = one ? 1.0 : -1.0;
        }
        ++block;
    }
    return v;
}

std::vector<double> aggregate_neighbors(const WeightedDigraph& flows, NodeId node,
                                        FlowDirection direction,
                                        const std::map<NodeId, std::vector<double>>& base) {
    const auto& index = direction == FlowDirection::incoming ? flows.into : flows.out_of;
    auto it = index.find(node);

    // No neighbors in this direction aggregates to the zero vector.
    std::vector<double> sum;
    if (it == index.end()) {
        if (!base.empty()) sum.assign(base.begin()->second.size(), 0.0);
        return sum;
    }
    for (const auto& [neighbor, weight] : it->second) {
        auto bv = base.find(neighbor);
        if (bv == base.end()) {
            throw MissingBaseVector("no base vector for neighbor " + std::to_string(neighbor));
        }
        if (sum.empty()) sum.assign(bv->second.size(), 0.0);
        if (bv->second.size() != sum.size()) {
            throw DimensionMismatch("base vectors differ in length");
        }
        for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += bv->second[k] * weight;
    }
    return sum;
}

std::vector<double> normalize_embedding(std::vector<double> v) {
    double norm = l2_norm(v);
    if (norm == 0.0) return v;
    for (auto& x : v) x /= norm;
    return v;
}

SimilarityScore similarity(const XbankEmbedding& a, const XbankEmbedding& b) {
    if (a.e_in.size() != b.e_in.size() || a.e_out.size() != b.e_out.size()) {
        throw DimensionMismatch("embedding dimensions differ");
    }
    SimilarityScore s;
    s.node_a = a.node;
    s.node_b = b.node;
    s.sigma = dot(a.e_in, b.e_in) * dot(a.e_out, b.e_out);
    return s;
}

std::vector<SimilarityScore> rank_suspect_pairs(const std::vector<XbankEmbedding>& bank_a,
                                                const std::vector<XbankEmbedding>& bank_b,
                                                int top_k) {
    std::vector<SimilarityScore> scores;
    scores.reserve(bank_a.size() * bank_b.size());
    for (const auto& a : bank_a) {
        for (const auto& b : bank_b) scores.push_back(similarity(a, b));
    }
    std::sort(scores.begin(), scores.end(), [](const SimilarityScore& l, const SimilarityScore& r) {
        if (l.sigma != r.sigma) return l.sigma > r.sigma;
        if (l.node_a != r.node_a) return l.node_a < r.node_a;
        return l.node_b < r.node_b;
    });
    if (top_k >= 0 && static_cast<std::size_t>(top_k) < scores.size()) {
        scores.resize(static_cast<std::size_t>(top_k));
    }
    return scores;
}

std::vector<XbankEmbedding> bank_embeddings(const TransactionGraph& graph,
                                            std::uint64_t public_seed, int dim,
                                            const std::optional<TimeWindow>& window) {
    WeightedDigraph flows = aggregate_edges(graph, window);

    std::map<NodeId, std::vector<double>> base;
    for (const auto& n : graph.nodes()) {
        base.emplace(n.id, hash_init_embedding(n.external_key, public_seed, dim));
    }

    std::vector<XbankEmbedding> out;
    out.reserve(graph.nodes().size());
    for (const auto& n : graph.nodes()) {
        XbankEmbedding e;
        e.node = n.id;
        e.e_in = aggregate_neighbors(flows, n.id, FlowDirection::incoming, base);
        e.e_out = aggregate_neighbors(flows, n.id, FlowDirection::outgoing, base);
        e.e_in = normalize_embedding(std::move(e.e_in));
        e.e_out = normalize_embedding(std::move(e.e_out));
        out.push_back(std::move(e));
    }
    std::sort(out.begin(), out.end(),
              [](const XbankEmbedding& a, const XbankEmbedding& b) { return a.node < b.node; });
    return out;
}

void write_bank_embeddings(const std::vector<XbankEmbedding>& embeddings, int dim,
                           const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FileNotFound("cannot write " + path);
    out << "node_id";
    for (int d = 0; d < dim; ++d) out << ",in_" << d;
    for (int d = 0; d < dim; ++d) out << ",out_" << d;
    out << "\n";
    for (const auto& e : embeddings) {
        out << e.node;
        for (double v : e.e_in) out << ',' << format_double(v);
        for (double v : e.e_out) out << ',' << format_double(v);
        out << "\n";
    }
}

void write_similarity_report(const std::vector<SimilarityScore>& scores,
                             const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FileNotFound("cannot write " + path);
    out << "node_a,node_b,sigma\n";
    for (const auto& s : scores) {
        out << s.node_a << ',' << s.node_b << ',' << format_double(s.sigma) << "\n";
    }
}

} // namespace graphlaunder
