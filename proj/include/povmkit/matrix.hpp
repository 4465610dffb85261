#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "povmkit/errors.hpp"

namespace povm {

using Complex = std::complex<double>;

/// Dense complex matrix, row-major. Used for operators on H (square) and
/// for dilation isometries (rectangular).
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols) {}

    /// Square matrix from a row-major entry list.
    static Matrix square(std::size_t dim, std::initializer_list<Complex> entries) {
        Matrix m(dim, dim);
        if (entries.size() != dim * dim)
            throw DimensionMismatch("square: expected " + std::to_string(dim * dim) +
                                    " entries, got " + std::to_string(entries.size()));
        std::copy(entries.begin(), entries.end(), m.data_.begin());
        return m;
    }

    static Matrix identity(std::size_t dim) {
        Matrix m(dim, dim);
        for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix zero(std::size_t dim) { return Matrix(dim, dim); }

    static Matrix diag(const std::vector<double>& d) {
        Matrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    /// Scalar 1x1 matrix; scalar measures live in dimension one.
    static Matrix scalar(double v) {
        Matrix m(1, 1);
        m(0, 0) = v;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool is_square() const { return rows_ == cols_; }

    /// Dimension of a square matrix.
    std::size_t dim() const {
        if (!is_square())
            throw DimensionMismatch("dim() on a " + shape_string() + " matrix");
        return rows_;
    }

    Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<Complex>& data() const { return data_; }
    std::vector<Complex>& data() { return data_; }

    Matrix& operator+=(const Matrix& o) {
        require_same_shape(o, "+");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }

    Matrix& operator-=(const Matrix& o) {
        require_same_shape(o, "-");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
        return *this;
    }

    Matrix& operator*=(Complex s) {
        for (auto& v : data_) v *= s;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Complex s, Matrix a) { return a *= s; }
    friend Matrix operator*(Matrix a, Complex s) { return a *= s; }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_)
            throw DimensionMismatch("product of " + a.shape_string() + " and " + b.shape_string());
        Matrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const Complex aik = a(i, k);
                if (aik == Complex{}) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        }
        return c;
    }

    /// Conjugate transpose.
    Matrix adjoint() const {
        Matrix m(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
        return m;
    }

    Complex trace() const {
        Complex t{};
        for (std::size_t i = 0; i < dim(); ++i) t += (*this)(i, i);
        return t;
    }

    double frob_norm() const {
        double s = 0.0;
        for (const auto& v : data_) s += std::norm(v);
        return std::sqrt(s);
    }

    /// max_ij |A_ij - conj(A_ji)|; zero for exactly Hermitian matrices.
    double hermiticity_defect() const {
        if (!is_square()) return std::numeric_limits<double>::infinity();
        double d = 0.0;
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = i; j < cols_; ++j)
                d = std::max(d, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
        return d;
    }

    bool is_hermitian(double tol) const { return is_square() && hermiticity_defect() <= tol; }

    /// (A + A*)/2; cleans up roundoff on matrices that are Hermitian by intent.
    Matrix hermitized() const {
        Matrix m(dim(), dim());
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                m(i, j) = 0.5 * ((*this)(i, j) + std::conj((*this)(j, i)));
        return m;
    }

    std::string shape_string() const {
        return std::to_string(rows_) + "x" + std::to_string(cols_);
    }

    std::string to_string(int precision = 6) const {
        std::ostringstream os;
        os.precision(precision);
        for (std::size_t i = 0; i < rows_; ++i) {
            os << (i == 0 ? "[" : " ");
            for (std::size_t j = 0; j < cols_; ++j) {
                const Complex& v = (*this)(i, j);
                os << "(" << v.real() << (v.imag() < 0 ? "" : "+") << v.imag() << "i)";
                if (j + 1 < cols_) os << " ";
            }
            os << (i + 1 < rows_ ? "\n" : "]");
        }
        return os.str();
    }

private:
    void require_same_shape(const Matrix& o, const char* op) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw DimensionMismatch(std::string("operator") + op + " on " + shape_string() +
                                    " and " + o.shape_string());
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Complex> data_;
};

/// Frobenius distance ||A - B||_F.
inline double frob_dist(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionMismatch("frob_dist of " + a.shape_string() + " and " + b.shape_string());
    double s = 0.0;
    for (std::size_t k = 0; k < a.data().size(); ++k) s += std::norm(a.data()[k] - b.data()[k]);
    return std::sqrt(s);
}

} // namespace povm
