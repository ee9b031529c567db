#pragma once

#include <cassert>
#include <cstddef>

#include "sail/common.hpp"

namespace sail {

// Dense row-major matrix of doubles. Rows are samples in batched NN code.
struct Matrix {
    int rows = 0;
    int cols = 0;
    Vec data;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }
    double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }

    Vec row_vec(int r) const {
        return Vec(row(r), row(r) + cols);
    }

    void set_row(int r, const Vec& v) {
        assert(static_cast<int>(v.size()) == cols);
        for (int c = 0; c < cols; ++c) at(r, c) = v[c];
    }

    static Matrix from_row(const Vec& v) {
        Matrix m(1, static_cast<int>(v.size()));
        m.data = v;
        return m;
    }
};

// Y = X * W^T + b, with W stored [out x in]. X is [n x in], Y is [n x out].
inline void linear_forward(const Matrix& x, const Matrix& w, const Vec& b, Matrix& y) {
    assert(x.cols == w.cols);
    y.rows = x.rows;
    y.cols = w.rows;
    y.data.assign(static_cast<std::size_t>(y.rows) * y.cols, 0.0);
    for (int n = 0; n < x.rows; ++n) {
        const double* xr = x.row(n);
        double* yr = y.row(n);
        for (int o = 0; o < w.rows; ++o) {
            const double* wr = w.row(o);
            double s = b[o];
            for (int i = 0; i < x.cols; ++i) s += wr[i] * xr[i];
            yr[o] = s;
        }
    }
}

// dX = dY * W. dY is [n x out], W is [out x in], dX is [n x in].
inline void linear_backward_input(const Matrix& dy, const Matrix& w, Matrix& dx) {
    dx.rows = dy.rows;
    dx.cols = w.cols;
    dx.data.assign(static_cast<std::size_t>(dx.rows) * dx.cols, 0.0);
    for (int n = 0; n < dy.rows; ++n) {
        const double* dyr = dy.row(n);
        double* dxr = dx.row(n);
        for (int o = 0; o < w.rows; ++o) {
            const double g = dyr[o];
            if (g == 0.0) continue;
            const double* wr = w.row(o);
            for (int i = 0; i < w.cols; ++i) dxr[i] += g * wr[i];
        }
    }
}

// dW += dY^T * X (summed over the batch), db += column sums of dY.
inline void linear_backward_params(const Matrix& dy, const Matrix& x, Matrix& dw, Vec& db) {
    assert(dw.rows == dy.cols && dw.cols == x.cols);
    for (int n = 0; n < dy.rows; ++n) {
        const double* dyr = dy.row(n);
        const double* xr = x.row(n);
        for (int o = 0; o < dy.cols; ++o) {
            const double g = dyr[o];
            if (g == 0.0) continue;
            db[o] += g;
            double* dwr = dw.row(o);
            for (int i = 0; i < x.cols; ++i) dwr[i] += g * xr[i];
        }
    }
}

}  // namespace sail
