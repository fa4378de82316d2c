// SPDX-License-Identifier: Apache-2.0
//
// risbeam: cooperative beamforming for multi-RIS-assisted downlink systems
// Copyright (C) 2026 The risbeam authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef RISBEAM_NUMERICS_HPP
#define RISBEAM_NUMERICS_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace risbeam {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Raised when a factorization meets a (numerically) singular matrix.
class SingularMatrixError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Dense complex vector. Row/column role is implied by usage.
class CVector {
  public:
    CVector() = default;
    explicit CVector(std::size_t n, cplx fill = {}) : data_(n, fill) {}
    CVector(std::initializer_list<cplx> values) : data_(values) {}
    explicit CVector(std::vector<cplx> values) : data_(std::move(values)) {}

    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    cplx& operator[](std::size_t i) noexcept { return data_[i]; }
    const cplx& operator[](std::size_t i) const noexcept { return data_[i]; }
    cplx& at(std::size_t i) { return data_.at(i); }
    const cplx& at(std::size_t i) const { return data_.at(i); }

    std::span<cplx> span() noexcept { return data_; }
    std::span<const cplx> span() const noexcept { return data_; }
    auto begin() noexcept { return data_.begin(); }
    auto end() noexcept { return data_.end(); }
    auto begin() const noexcept { return data_.begin(); }
    auto end() const noexcept { return data_.end(); }

    bool operator==(const CVector&) const = default;

  private:
    std::vector<cplx> data_;
};

/// Dense row-major complex matrix with fixed dimensions.
class CMatrix {
  public:
    CMatrix() = default;
    CMatrix(std::size_t rows, std::size_t cols, cplx fill = {})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    CMatrix(std::size_t rows, std::size_t cols, std::initializer_list<cplx> values)
        : rows_(rows), cols_(cols), data_(values) {
        if (data_.size() != rows * cols)
            throw std::invalid_argument("CMatrix: initializer size does not match dimensions");
    }

    static CMatrix identity(std::size_t n) {
        CMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    cplx& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<cplx> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const cplx> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    CVector col(std::size_t c) const {
        CVector v(rows_);
        for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
        return v;
    }
    void set_col(std::size_t c, const CVector& v) {
        if (v.size() != rows_) throw std::invalid_argument("CMatrix::set_col: length mismatch");
        for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
    }

    std::span<cplx> data() noexcept { return data_; }
    std::span<const cplx> data() const noexcept { return data_; }

    bool operator==(const CMatrix&) const = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> data_;
};

namespace detail {
inline void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}
}  // namespace detail

// ---- elementary vector algebra -------------------------------------------------

/// Bilinear product sum_i a_i b_i (no conjugation).
inline cplx dotu(std::span<const cplx> a, std::span<const cplx> b) {
    detail::require(a.size() == b.size(), "dotu: length mismatch");
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Inner product sum_i conj(a_i) b_i.
inline cplx dotc(std::span<const cplx> a, std::span<const cplx> b) {
    detail::require(a.size() == b.size(), "dotc: length mismatch");
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

inline double norm_sq(std::span<const cplx> a) {
    double s = 0.0;
    for (const auto& x : a) s += std::norm(x);
    return s;
}

inline double norm(std::span<const cplx> a) { return std::sqrt(norm_sq(a)); }

inline CVector conj(const CVector& a) {
    CVector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = std::conj(a[i]);
    return r;
}

inline CVector operator+(const CVector& a, const CVector& b) {
    detail::require(a.size() == b.size(), "vector +: length mismatch");
    CVector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline CVector operator-(const CVector& a, const CVector& b) {
    detail::require(a.size() == b.size(), "vector -: length mismatch");
    CVector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline CVector operator*(cplx s, const CVector& a) {
    CVector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
    return r;
}

/// Elementwise (Hadamard) product.
inline CVector hadamard(const CVector& a, const CVector& b) {
    detail::require(a.size() == b.size(), "hadamard: length mismatch");
    CVector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * b[i];
    return r;
}

/// Kronecker product of two column vectors.
inline CVector kron(const CVector& a, const CVector& b) {
    CVector r(a.size() * b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i * b.size() + j] = a[i] * b[j];
    return r;
}

inline double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b) {
    detail::require(a.size() == b.size(), "max_abs_diff: length mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline bool all_finite(std::span<const cplx> a) {
    for (const auto& x : a)
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
    return true;
}

// ---- matrix algebra ------------------------------------------------------------

inline CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    detail::require(a.cols() == b.rows(), "matrix *: non-conformable");
    CMatrix r(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const cplx aik = a(i, k);
            if (aik == cplx{}) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) r(i, j) += aik * b(k, j);
        }
    return r;
}

/// A x for column vector x.
inline CVector operator*(const CMatrix& a, const CVector& x) {
    detail::require(a.cols() == x.size(), "matrix-vector *: non-conformable");
    CVector r(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) r[i] = dotu(a.row(i), x.span());
    return r;
}

/// x A for row vector x.
inline CVector operator*(const CVector& x, const CMatrix& a) {
    detail::require(a.rows() == x.size(), "vector-matrix *: non-conformable");
    CVector r(a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const cplx xi = x[i];
        if (xi == cplx{}) continue;
        const auto ri = a.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) r[j] += xi * ri[j];
    }
    return r;
}

inline CMatrix operator+(const CMatrix& a, const CMatrix& b) {
    detail::require(a.rows() == b.rows() && a.cols() == b.cols(), "matrix +: non-conformable");
    CMatrix r = a;
    for (std::size_t i = 0; i < r.data().size(); ++i) r.data()[i] += b.data()[i];
    return r;
}

inline CMatrix operator*(cplx s, const CMatrix& a) {
    CMatrix r = a;
    for (auto& x : r.data()) x *= s;
    return r;
}

inline CMatrix adjoint(const CMatrix& a) {
    CMatrix r(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) r(j, i) = std::conj(a(i, j));
    return r;
}

/// diag(d) A, i.e. row i of A scaled by d_i.
inline CMatrix scale_rows(const CVector& d, const CMatrix& a) {
    detail::require(d.size() == a.rows(), "scale_rows: length mismatch");
    CMatrix r = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (auto& x : r.row(i)) x *= d[i];
    return r;
}

/// Column vector a times row vector b^H.
inline CMatrix outer_adj(const CVector& a, const CVector& b) {
    CMatrix r(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r(i, j) = a[i] * std::conj(b[j]);
    return r;
}

/// Lower-triangular Cholesky factor of a Hermitian positive-definite matrix.
class Cholesky {
  public:
    explicit Cholesky(const CMatrix& a) : l_(a.rows(), a.cols()) {
        detail::require(a.rows() == a.cols(), "Cholesky: matrix must be square");
        const std::size_t n = a.rows();
        double max_diag = 0.0;
        for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a(i, i).real()));
        const double floor = 1e-13 * std::max(max_diag, 1e-300);
        for (std::size_t j = 0; j < n; ++j) {
            double d = a(j, j).real();
            for (std::size_t k = 0; k < j; ++k) d -= std::norm(l_(j, k));
            if (!(d > floor)) throw SingularMatrixError("Cholesky: matrix is not numerically positive definite");
            const double ljj = std::sqrt(d);
            l_(j, j) = ljj;
            for (std::size_t i = j + 1; i < n; ++i) {
                cplx s = a(i, j);
                for (std::size_t k = 0; k < j; ++k) s -= l_(i, k) * std::conj(l_(j, k));
                l_(i, j) = s / ljj;
            }
        }
    }

    CVector solve(const CVector& b) const {
        const std::size_t n = l_.rows();
        detail::require(b.size() == n, "Cholesky::solve: length mismatch");
        CVector y(n);
        for (std::size_t i = 0; i < n; ++i) {
            cplx s = b[i];
            for (std::size_t k = 0; k < i; ++k) s -= l_(i, k) * y[k];
            y[i] = s / l_(i, i);
        }
        CVector x(n);
        for (std::size_t ii = n; ii-- > 0;) {
            cplx s = y[ii];
            for (std::size_t k = ii + 1; k < n; ++k) s -= std::conj(l_(k, ii)) * x[k];
            x[ii] = s / l_(ii, ii);
        }
        return x;
    }

  private:
    CMatrix l_;
};

/// Solves A x = b for Hermitian positive-definite A by Cholesky factorization.
inline CVector solve_hpd(const CMatrix& a, const CVector& b) {
    detail::require(a.rows() == a.cols() && a.rows() == b.size(), "solve_hpd: non-conformable");
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i; j < a.cols(); ++j)
            if (std::abs(a(i, j) - std::conj(a(j, i))) > 1e-12 * std::max(1.0, std::abs(a(i, j))))
                throw std::invalid_argument("solve_hpd: matrix is not Hermitian");
    return Cholesky(a).solve(b);
}

// ---- random sampling -----------------------------------------------------------

/// Seedable deterministic pseudo-random stream. One instance per thread.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

    /// One draw from CN(0, variance).
    cplx cscg(double variance) {
        const double s = std::sqrt(variance / 2.0);
        const double re = normal();
        const double im = normal();
        return {s * re, s * im};
    }

    std::mt19937_64& engine() noexcept { return engine_; }

  private:
    std::mt19937_64 engine_;
};

/// n i.i.d. CN(0, variance) samples.
inline CVector sample_cscg(Rng& rng, std::size_t n, double variance) {
    if (!(variance > 0.0)) throw std::invalid_argument("sample_cscg: variance must be positive");
    CVector v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = rng.cscg(variance);
    return v;
}

}  // namespace risbeam

#endif
