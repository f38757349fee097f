// Copyright (c) 2026 the tspgnn authors. Licensed under the Apache License 2.0.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tspgnn/common.hpp"

namespace tspgnn {

/// Dense row-major tensor of doubles. All differentiable computation runs on
/// these; in practice everything is a matrix, a row vector or a scalar.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape)
        : shape_(std::move(shape)), data_(checked_numel(shape_), 0.0) {}

    Tensor(std::vector<std::size_t> shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (data_.size() != checked_numel(shape_)) {
            throw ShapeError("Tensor: data length " + std::to_string(data_.size()) +
                             " does not match shape " + shape_str());
        }
    }

    static Tensor matrix(std::size_t rows, std::size_t cols) { return Tensor({rows, cols}); }

    static Tensor scalar(double v) {
        Tensor t({1, 1});
        t.data_[0] = v;
        return t;
    }

    static Tensor row(std::vector<double> values) {
        const std::size_t n = values.size();
        return Tensor({1, n}, std::move(values));
    }

    static Tensor full(std::size_t rows, std::size_t cols, double v) {
        Tensor t({rows, cols});
        std::fill(t.data_.begin(), t.data_.end(), v);
        return t;
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t numel() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
    std::size_t cols() const { return shape_.size() < 2 ? (shape_.empty() ? 0 : 1) : shape_[1]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

    double* row_ptr(std::size_t r) { return data_.data() + r * cols(); }
    const double* row_ptr(std::size_t r) const { return data_.data() + r * cols(); }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    bool all_finite() const {
        for (double v : data_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    std::string shape_str() const {
        std::ostringstream os;
        os << '(';
        for (std::size_t i = 0; i < shape_.size(); ++i) {
            if (i) os << 'x';
            os << shape_[i];
        }
        os << ')';
        return os.str();
    }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool operator==(const Tensor& other) const {
        return shape_ == other.shape_ && data_ == other.data_;
    }

private:
    static std::size_t checked_numel(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (std::size_t d : shape) {
            if (d == 0) throw ShapeError("Tensor: zero dimension");
            n *= d;
        }
        return shape.empty() ? 0 : n;
    }

    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Forward kernels. The tape ops and the no-grad inference path both call
// these, so the two paths compute bitwise-identical values. All accumulation
// runs in a fixed order (row-major, left to right).
// ---------------------------------------------------------------------------

inline void require(bool cond, const char* what) {
    if (!cond) throw ShapeError(what);
}

namespace kernels {

/// crow += sum over four stacked rows of B scaled by a0..a3. The four-way
/// grouping is a fixed summation order, so results stay reproducible.
inline void accum_rows(double* __restrict crow, const double* arow, const double* b,
                       std::size_t k, std::size_t n) {
    std::size_t p = 0;
    for (; p + 4 <= k; p += 4) {
        const double a0 = arow[p], a1 = arow[p + 1], a2 = arow[p + 2], a3 = arow[p + 3];
        const double* b0 = b + p * n;
        const double* b1 = b0 + n;
        const double* b2 = b1 + n;
        const double* b3 = b2 + n;
        for (std::size_t j = 0; j < n; ++j)
            crow[j] += a0 * b0[j] + a1 * b1[j] + a2 * b2[j] + a3 * b3[j];
    }
    for (; p < k; ++p) {
        const double av = arow[p];
        const double* brow = b + p * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
}

}  // namespace kernels

/// C = A x B. Row-major axpy form: contiguous inner loops, fixed summation
/// grouping, no reassociation left to the compiler.
inline Tensor matmul(const Tensor& a, const Tensor& b) {
    require(a.cols() == b.rows(), "matmul: inner dimensions differ");
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    Tensor c = Tensor::matrix(m, n);
    for (std::size_t i = 0; i < m; ++i)
        kernels::accum_rows(c.row_ptr(i), a.row_ptr(i), b.data(), k, n);
    return c;
}

/// acc += dC x B^T: dA[i,p] = sum_j dC[i,j] * B[p,j]. B is transposed into
/// scratch once so the accumulation runs over contiguous rows; the dot-form
/// alternative is latency-bound and several times slower.
inline void matmul_bt_accum(const Tensor& dc, const Tensor& b, Tensor& da) {
    const std::size_t m = dc.rows(), n = dc.cols(), k = b.rows();
    require(da.rows() == m && da.cols() == k && b.cols() == n, "matmul_bt_accum: shape mismatch");
    std::vector<double> bt(n * k);
    for (std::size_t p = 0; p < k; ++p)
        for (std::size_t j = 0; j < n; ++j) bt[j * k + p] = b(p, j);
    for (std::size_t i = 0; i < m; ++i)
        kernels::accum_rows(da.row_ptr(i), dc.row_ptr(i), bt.data(), n, k);
}

/// acc += A^T x dC: dB[p,j] = sum_i A[i,p] * dC[i,j]. Rows of dC stream in
/// blocks of four, mirroring accum_rows with the roles of A and C swapped.
inline void matmul_at_accum(const Tensor& a, const Tensor& dc, Tensor& db) {
    const std::size_t m = a.rows(), k = a.cols(), n = dc.cols();
    require(dc.rows() == m && db.rows() == k && db.cols() == n, "matmul_at_accum: shape mismatch");
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        const double* a0 = a.row_ptr(i);
        const double* a1 = a.row_ptr(i + 1);
        const double* a2 = a.row_ptr(i + 2);
        const double* a3 = a.row_ptr(i + 3);
        const double* d0 = dc.row_ptr(i);
        const double* d1 = dc.row_ptr(i + 1);
        const double* d2 = dc.row_ptr(i + 2);
        const double* d3 = dc.row_ptr(i + 3);
        for (std::size_t p = 0; p < k; ++p) {
            double* dbrow = db.row_ptr(p);
            const double w0 = a0[p], w1 = a1[p], w2 = a2[p], w3 = a3[p];
            for (std::size_t j = 0; j < n; ++j)
                dbrow[j] += w0 * d0[j] + w1 * d1[j] + w2 * d2[j] + w3 * d3[j];
        }
    }
    for (; i < m; ++i) {
        const double* arow = a.row_ptr(i);
        const double* dcrow = dc.row_ptr(i);
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            double* dbrow = db.row_ptr(p);
            for (std::size_t j = 0; j < n; ++j) dbrow[j] += av * dcrow[j];
        }
    }
}

inline Tensor add(const Tensor& a, const Tensor& b) {
    require(a.same_shape(b), "add: shape mismatch");
    Tensor c = a;
    const double* bp = b.data();
    double* cp = c.data();
    for (std::size_t i = 0; i < c.numel(); ++i) cp[i] += bp[i];
    return c;
}

/// rows of `a` plus the single-row `bias`.
inline Tensor add_row_broadcast(const Tensor& a, const Tensor& bias) {
    require(bias.rows() == 1 && bias.cols() == a.cols(), "add_row_broadcast: bias shape");
    Tensor c = a;
    const double* bp = bias.data();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* crow = c.row_ptr(i);
        for (std::size_t j = 0; j < a.cols(); ++j) crow[j] += bp[j];
    }
    return c;
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
    require(a.same_shape(b), "mul: shape mismatch");
    Tensor c = a;
    const double* bp = b.data();
    double* cp = c.data();
    for (std::size_t i = 0; i < c.numel(); ++i) cp[i] *= bp[i];
    return c;
}

inline Tensor relu(const Tensor& a) {
    Tensor c = a;
    double* cp = c.data();
    for (std::size_t i = 0; i < c.numel(); ++i) cp[i] = cp[i] > 0.0 ? cp[i] : 0.0;
    return c;
}

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline Tensor sigmoid(const Tensor& a) {
    Tensor c = a;
    double* cp = c.data();
    for (std::size_t i = 0; i < c.numel(); ++i) cp[i] = sigmoid(cp[i]);
    return c;
}

/// [a | b] side by side; both must have the same row count.
inline Tensor concat_cols(const Tensor& a, const Tensor& b) {
    require(a.rows() == b.rows(), "concat_cols: row mismatch");
    Tensor c = Tensor::matrix(a.rows(), a.cols() + b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* crow = c.row_ptr(i);
        std::copy(a.row_ptr(i), a.row_ptr(i) + a.cols(), crow);
        std::copy(b.row_ptr(i), b.row_ptr(i) + b.cols(), crow + a.cols());
    }
    return c;
}

/// Per-row standardization followed by gain/bias. Mean/variance are computed
/// left to right; variance is the population variance guarded by eps.
inline Tensor layer_norm_rows(const Tensor& x, const Tensor& gain, const Tensor& bias,
                              double eps) {
    require(gain.rows() == 1 && gain.cols() == x.cols(), "layer_norm: gain shape");
    require(bias.rows() == 1 && bias.cols() == x.cols(), "layer_norm: bias shape");
    require(eps > 0.0, "layer_norm: eps must be positive");
    const std::size_t d = x.cols();
    Tensor y = Tensor::matrix(x.rows(), d);
    const double* gp = gain.data();
    const double* bp = bias.data();
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double* xr = x.row_ptr(i);
        double* yr = y.row_ptr(i);
        double mean = 0.0;
        for (std::size_t j = 0; j < d; ++j) mean += xr[j];
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double c = xr[j] - mean;
            var += c * c;
        }
        var /= static_cast<double>(d);
        const double inv_std = 1.0 / std::sqrt(var + eps);
        for (std::size_t j = 0; j < d; ++j) yr[j] = gp[j] * (xr[j] - mean) * inv_std + bp[j];
    }
    return y;
}

inline double sum_all(const Tensor& a) {
    double s = 0.0;
    const double* p = a.data();
    for (std::size_t i = 0; i < a.numel(); ++i) s += p[i];
    return s;
}

inline double mean_all(const Tensor& a) { return sum_all(a) / static_cast<double>(a.numel()); }

inline Tensor scale(const Tensor& a, double s) {
    Tensor c = a;
    double* cp = c.data();
    for (std::size_t i = 0; i < c.numel(); ++i) cp[i] *= s;
    return c;
}

using EdgePairs = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

/// EV^T x E without materializing EV: vertex row v accumulates the rows of
/// all incident edges, visiting edges left to right.
inline Tensor aggregate_edges_to_vertices(const Tensor& edge_feats, const EdgePairs& edges,
                                          std::size_t n_vertices) {
    require(edge_feats.rows() == edges.size(), "aggregate_edges_to_vertices: edge count mismatch");
    const std::size_t d = edge_feats.cols();
    Tensor out = Tensor::matrix(n_vertices, d);
    for (std::size_t idx = 0; idx < edges.size(); ++idx) {
        const double* er = edge_feats.row_ptr(idx);
        double* s = out.row_ptr(edges[idx].first);
        double* t = out.row_ptr(edges[idx].second);
        for (std::size_t j = 0; j < d; ++j) {
            s[j] += er[j];
            t[j] += er[j];
        }
    }
    return out;
}

/// EV x V: edge row e is the sum of its two endpoint rows.
inline Tensor aggregate_vertices_to_edges(const Tensor& vertex_feats, const EdgePairs& edges) {
    const std::size_t d = vertex_feats.cols();
    Tensor out = Tensor::matrix(edges.size(), d);
    for (std::size_t idx = 0; idx < edges.size(); ++idx) {
        const double* s = vertex_feats.row_ptr(edges[idx].first);
        const double* t = vertex_feats.row_ptr(edges[idx].second);
        double* er = out.row_ptr(idx);
        for (std::size_t j = 0; j < d; ++j) er[j] = s[j] + t[j];
    }
    return out;
}

using RowSegments = std::vector<std::pair<std::size_t, std::size_t>>;  // [begin, end)

/// Column vector of per-segment means over the rows of a single-column
/// tensor: sum left to right, then one divide. A segment covering all rows
/// reproduces mean_all bit for bit.
inline Tensor segment_mean_rows(const Tensor& x, const RowSegments& segments) {
    require(x.cols() == 1, "segment_mean_rows: expected a column");
    Tensor out = Tensor::matrix(segments.size(), 1);
    for (std::size_t s = 0; s < segments.size(); ++s) {
        const auto [begin, end] = segments[s];
        require(begin < end && end <= x.rows(), "segment_mean_rows: bad segment");
        double sum = 0.0;
        for (std::size_t i = begin; i < end; ++i) sum += x[i];
        out[s] = sum / static_cast<double>(end - begin);
    }
    return out;
}

/// Mean binary cross entropy from logits, in the overflow-safe form
/// max(x,0) - x*y + log(1 + exp(-|x|)).
inline double bce_with_logits_value(const Tensor& logits, const Tensor& labels) {
    require(logits.numel() == labels.numel(), "bce_with_logits: label count mismatch");
    double loss = 0.0;
    for (std::size_t i = 0; i < logits.numel(); ++i) {
        const double x = logits[i];
        loss += std::max(x, 0.0) - x * labels[i] + std::log1p(std::exp(-std::abs(x)));
    }
    return loss / static_cast<double>(logits.numel());
}

}  // namespace tspgnn
