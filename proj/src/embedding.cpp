#include "graphlaunder/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "graphlaunder/csv.hpp"
#include "graphlaunder/errors.hpp"

namespace graphlaunder {

EmbeddingMatrix EmbeddingMatrix::zeros(std::vector<NodeId> node_ids, int dim) {
    EmbeddingMatrix m;
    m.dim = dim;
    std::sort(node_ids.begin(), node_ids.end());
    node_ids.erase(std::unique(node_ids.begin(), node_ids.end()), node_ids.end());
    m.ids = std::move(node_ids);
    m.values.assign(m.ids.size() * static_cast<std::size_t>(dim), 0.0);
    m.row_index.reserve(m.ids.size());
    for (std::size_t i = 0; i < m.ids.size(); ++i) {
        m.row_index.emplace(m.ids[i], static_cast<int>(i));
    }
    return m;
}

std::span<double> EmbeddingMatrix::row(NodeId id) {
    auto it = row_index.find(id);
    if (it == row_index.end()) {
        throw UnknownNode("no embedding row for node " + std::to_string(id));
    }
    return {values.data() + static_cast<std::size_t>(it->second) * dim,
            static_cast<std::size_t>(dim)};
}

std::span<const double> EmbeddingMatrix::row(NodeId id) const {
    auto it = row_index.find(id);
    if (it == row_index.end()) {
        throw UnknownNode("no embedding row for node " + std::to_string(id));
    }
    return {values.data() + static_cast<std::size_t>(it->second) * dim,
            static_cast<std::size_t>(dim)};
}

bool EmbeddingMatrix::all_finite() const {
    return std::all_of(values.begin(), values.end(),
                       [](double v) { return std::isfinite(v); });
}

void write_embeddings(const EmbeddingMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FileNotFound("cannot write " + path);
    out << "node_id";
    for (int d = 0; d < m.dim; ++d) out << ",dim_" << d;
    out << "\n";
    for (std::size_t i = 0; i < m.ids.size(); ++i) {
        out << m.ids[i];
        const double* row = m.values.data() + i * static_cast<std::size_t>(m.dim);
        for (int d = 0; d < m.dim; ++d) out << ',' << format_double(row[d]);
        out << "\n";
    }
}

EmbeddingMatrix read_embeddings(const std::string& path) {
    CsvReader reader(path);
    std::vector<std::string> fields;
    if (!reader.next(fields) || fields.empty() || fields[0] != "node_id") {
        throw MissingColumn("embedding file " + path + " lacks a node_id header");
    }
    int dim = static_cast<int>(fields.size()) - 1;

    std::vector<NodeId> ids;
    std::vector<double> rows;
    while (reader.next(fields)) {
        if (static_cast<int>(fields.size()) != dim + 1) {
            throw MalformedRow(path + ":" + std::to_string(reader.record_line()) +
                               ": wrong field count");
        }
        auto id = parse_int(fields[0]);
        if (!id) {
            throw MalformedRow(path + ":" + std::to_string(reader.record_line()) +
                               ": bad node id");
        }
        ids.push_back(static_cast<NodeId>(*id));
        for (int d = 0; d < dim; ++d) {
            auto v = parse_double(fields[static_cast<std::size_t>(d) + 1]);
            if (!v) {
                throw MalformedRow(path + ":" + std::to_string(reader.record_line()) +
                                   ": bad value");
            }
            rows.push_back(*v);
        }
    }

    EmbeddingMatrix m = EmbeddingMatrix::zeros(ids, dim);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        auto dst = m.row(ids[i]);
        std::copy_n(rows.begin() + static_cast<std::ptrdiff_t>(i) * dim,
                    dim, dst.begin());
    }
    return m;
}

} // namespace graphlaunder
