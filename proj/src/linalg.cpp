#include "graphlaunder/linalg.hpp"

#include "graphlaunder/errors.hpp"

namespace graphlaunder {

const char* to_string(Activation a) {
    switch (a) {
        case Activation::linear: return "linear";
        case Activation::sigmoid: return "sigmoid";
        case Activation::relu: return "relu";
    }
    return "linear";
}

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::glorot(int r, int c, std::mt19937_64& rng) {
    Matrix m(r, c);
    double limit = std::sqrt(6.0 / static_cast<double>(r + c));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (auto& v : m.a) v = dist(rng);
    return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) {
        throw DimensionMismatch("matmul: " + std::to_string(a.rows) + "x" +
                                std::to_string(a.cols) + " * " + std::to_string(b.rows) + "x" +
                                std::to_string(b.cols));
    }
    Matrix out(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) {
        for (int k = 0; k < a.cols; ++k) {
            double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* brow = b.a.data() + static_cast<std::size_t>(k) * b.cols;
            double* orow = out.a.data() + static_cast<std::size_t>(i) * out.cols;
            for (int j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols, m.rows);
    for (int i = 0; i < m.rows; ++i) {
        for (int j = 0; j < m.cols; ++j) out(j, i) = m(i, j);
    }
    return out;
}

void add_scaled(Matrix& m, const Matrix& g, double scale) {
    if (m.rows != g.rows || m.cols != g.cols) {
        throw DimensionMismatch("add_scaled: shape mismatch");
    }
    for (std::size_t i = 0; i < m.a.size(); ++i) m.a[i] += scale * g.a[i];
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionMismatch("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double l2_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

nlohmann::json matrix_to_json(const Matrix& m) {
    return {{"rows", m.rows}, {"cols", m.cols}, {"data", m.a}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
    Matrix m(j.at("rows").get<int>(), j.at("cols").get<int>());
    m.a = j.at("data").get<std::vector<double>>();
    if (m.a.size() != static_cast<std::size_t>(m.rows) * static_cast<std::size_t>(m.cols)) {
        throw DimensionMismatch("matrix payload size mismatch");
    }
    return m;
}

Matrix SparseMatrix::multiply(const Matrix& x) const {
    if (x.rows != n) throw DimensionMismatch("sparse multiply: row count mismatch");
    Matrix out(n, x.cols);
    for (int i = 0; i < n; ++i) {
        double* orow = out.a.data() + static_cast<std::size_t>(i) * out.cols;
        for (int p = row_ptr[static_cast<std::size_t>(i)];
             p < row_ptr[static_cast<std::size_t>(i) + 1]; ++p) {
            double w = val[static_cast<std::size_t>(p)];
            const double* xrow =
                x.a.data() + static_cast<std::size_t>(col[static_cast<std::size_t>(p)]) * x.cols;
            for (int j = 0; j < x.cols; ++j) orow[j] += w * xrow[j];
        }
    }
    return out;
}

} // namespace graphlaunder
