#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <json.hpp>

namespace graphlaunder {

// Dense row-major matrix. Small and deliberately minimal: only the
// operations the models need.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    double& operator()(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }

    std::span<double> row(int r) { return {a.data() + static_cast<std::size_t>(r) * cols,
                                           static_cast<std::size_t>(cols)}; }
    std::span<const double> row(int r) const {
        return {a.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
    }

    static Matrix identity(int n);
    static Matrix glorot(int r, int c, std::mt19937_64& rng);
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);
// m += scale * g
void add_scaled(Matrix& m, const Matrix& g, double scale);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);

inline double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

// log(sigmoid(x)) without overflow for large |x|.
inline double log_sigmoid(double x) {
    if (x >= 0.0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

enum class Activation { linear, sigmoid, relu };

const char* to_string(Activation a);

inline double apply_activation(Activation act, double x) {
    switch (act) {
        case Activation::linear: return x;
        case Activation::sigmoid: return sigmoid(x);
        case Activation::relu: return x > 0.0 ? x : 0.0;
    }
    return x;
}

// Derivative expressed through the pre-activation input.
inline double activation_grad(Activation act, double pre) {
    switch (act) {
        case Activation::linear: return 1.0;
        case Activation::sigmoid: {
            double s = sigmoid(pre);
            return s * (1.0 - s);
        }
        case Activation::relu: return pre > 0.0 ? 1.0 : 0.0;
    }
    return 1.0;
}

// CSR sparse matrix, used for normalized adjacency.
struct SparseMatrix {
    int n = 0;
    std::vector<int> row_ptr;
    std::vector<int> col;
    std::vector<double> val;

    // Dense product: (n x n) * (n x d) -> (n x d).
    Matrix multiply(const Matrix& x) const;
};

} // namespace graphlaunder
