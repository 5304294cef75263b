#include "debie/matrix.hpp"

namespace debie {

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: shape mismatch");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* out = c.data() + i * c.cols();
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* brow = b.data() + k * b.cols();
            for (std::size_t j = 0; j < b.cols(); ++j) out[j] += aik * brow[j];
        }
    }
    return c;
}

Matrix transpose(const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
    return t;
}

std::vector<double> row_times_matrix(std::span<const double> x, const Matrix& m) {
    if (x.size() != m.rows()) throw std::invalid_argument("row_times_matrix: shape mismatch");
    std::vector<double> out(m.cols(), 0.0);
    for (std::size_t k = 0; k < m.rows(); ++k) {
        const double xk = x[k];
        if (xk == 0.0) continue;
        const double* mrow = m.data() + k * m.cols();
        for (std::size_t j = 0; j < m.cols(); ++j) out[j] += xk * mrow[j];
    }
    return out;
}

double frobenius_norm(const Matrix& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * m(i, j);
    return std::sqrt(s);
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("max_abs_diff: shape mismatch");
    double mx = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            mx = std::max(mx, std::abs(a(i, j) - b(i, j)));
    return mx;
}

} // namespace debie
