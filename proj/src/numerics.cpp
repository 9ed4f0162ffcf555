// SPDX-License-Identifier: Apache-2.0
//
// fbmimo: multiuser MIMO downlink simulator with finite-rate channel feedback
// Copyright (C) 2026 The fbmimo authors
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

#include "fbmimo/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/digamma.hpp>

namespace fbmimo {

ComplexVector::ComplexVector(std::size_t dim) : entries_(dim) {
    if (dim == 0)
        throw DomainError("ComplexVector: dimension must be at least 1");
}

ComplexVector::ComplexVector(std::vector<cdouble> entries) : entries_(std::move(entries)) {
    if (entries_.empty())
        throw DomainError("ComplexVector: dimension must be at least 1");
}

ComplexVector::ComplexVector(std::initializer_list<cdouble> entries) : entries_(entries) {
    if (entries_.empty())
        throw DomainError("ComplexVector: dimension must be at least 1");
}

double ComplexVector::norm2() const { return fbmimo::norm2(entries_); }

double ComplexVector::norm() const { return std::sqrt(norm2()); }

ComplexVector ComplexVector::normalized() const {
    const double n = norm();
    if (n == 0.0)
        throw DomainError("normalized: zero vector");
    ComplexVector out(*this);
    for (auto &e : out.entries_)
        e /= n;
    return out;
}

cdouble dot(std::span<const cdouble> a, std::span<const cdouble> b) {
    // Real arithmetic: std::complex multiplication carries NaN recovery we never need.
    double re = 0.0;
    double im = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        re += a[k].real() * b[k].real() + a[k].imag() * b[k].imag();
        im += a[k].real() * b[k].imag() - a[k].imag() * b[k].real();
    }
    return {re, im};
}

double norm2(std::span<const cdouble> v) {
    double acc = 0.0;
    for (const auto &e : v)
        acc += std::norm(e);
    return acc;
}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), entries_(rows * cols) {
    if (rows == 0 || cols == 0)
        throw DomainError("ComplexMatrix: dimensions must be positive");
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        m(i, i) = 1.0;
    return m;
}

ComplexVector ComplexMatrix::column(std::size_t c) const {
    ComplexVector out(rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        out[r] = (*this)(r, c);
    return out;
}

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c)
            out(c, r) = std::conj((*this)(r, c));
    return out;
}

double ComplexMatrix::norm_inf() const {
    double best = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) {
        double s = 0.0;
        for (const auto &e : row(r))
            s += std::abs(e);
        best = std::max(best, s);
    }
    return best;
}

ComplexMatrix operator*(const ComplexMatrix &a, const ComplexMatrix &b) {
    if (a.cols_ != b.rows_)
        throw DomainError("matrix product: inner dimensions differ");
    ComplexMatrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
        for (std::size_t k = 0; k < a.cols_; ++k) {
            const cdouble aik = a(i, k);
            for (std::size_t j = 0; j < b.cols_; ++j)
                out(i, j) += aik * b(k, j);
        }
    return out;
}

ComplexMatrix stack_adjoint_rows(std::span<const ComplexVector> vectors) {
    if (vectors.empty())
        throw DomainError("stack_adjoint_rows: no vectors");
    const std::size_t dim = vectors.front().dim();
    ComplexMatrix out(vectors.size(), dim);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (vectors[i].dim() != dim)
            throw DomainError("stack_adjoint_rows: dimension mismatch");
        for (std::size_t k = 0; k < dim; ++k)
            out(i, k) = std::conj(vectors[i][k]);
    }
    return out;
}

ComplexMatrix invert(const ComplexMatrix &a) {
    if (!a.square())
        throw DomainError("invert: matrix is not square");
    const std::size_t n = a.rows();
    const double tol = 1e-12 * a.norm_inf();

    ComplexMatrix lu = a;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pivot = k;
        double best = std::abs(lu(k, k));
        for (std::size_t r = k + 1; r < n; ++r) {
            const double m = std::abs(lu(r, k));
            if (m > best) {
                best = m;
                pivot = r;
            }
        }
        if (!(best >= tol) || best == 0.0)
            throw SingularMatrix("invert: pivot " + std::to_string(best) + " below threshold " + std::to_string(tol));
        if (pivot != k) {
            std::swap_ranges(lu.row(k).begin(), lu.row(k).end(), lu.row(pivot).begin());
            std::swap(perm[k], perm[pivot]);
        }
        const cdouble inv_pivot = 1.0 / lu(k, k);
        for (std::size_t r = k + 1; r < n; ++r) {
            const cdouble f = lu(r, k) * inv_pivot;
            lu(r, k) = f;
            for (std::size_t c = k + 1; c < n; ++c)
                lu(r, c) -= f * lu(k, c);
        }
    }

    // Solve L U x = P e_j for every column j.
    ComplexMatrix inv(n, n);
    std::vector<cdouble> x(n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            cdouble s = (perm[i] == j) ? cdouble{1.0, 0.0} : cdouble{0.0, 0.0};
            for (std::size_t k = 0; k < i; ++k)
                s -= lu(i, k) * x[k];
            x[i] = s;
        }
        for (std::size_t i = n; i-- > 0;) {
            cdouble s = x[i];
            for (std::size_t k = i + 1; k < n; ++k)
                s -= lu(i, k) * x[k];
            x[i] = s / lu(i, i);
        }
        for (std::size_t i = 0; i < n; ++i)
            inv(i, j) = x[i];
    }
    return inv;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x9e3779b9u};
    engine_.seed(seq);
}

double RngStream::uniform() {
    constexpr double kScale = 0x1.0p-53;
    return (static_cast<double>(engine_() >> 11) + 0.5) * kScale;
}

double RngStream::normal() { return normal_(engine_); }

cdouble RngStream::complex_normal() {
    constexpr double kHalfSqrt = 0.70710678118654752440;
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {re * kHalfSqrt, im * kHalfSqrt};
}

double RngStream::gamma(double shape) {
    std::gamma_distribution<double> dist(shape, 1.0);
    return dist(engine_);
}

void fill_complex_gaussian(std::span<cdouble> out, RngStream &rng) {
    for (auto &e : out)
        e = rng.complex_normal();
}

void fill_isotropic_unit(std::span<cdouble> out, RngStream &rng) {
    double n2 = 0.0;
    do {
        fill_complex_gaussian(out, rng);
        n2 = norm2(out);
    } while (n2 == 0.0);
    const double inv = 1.0 / std::sqrt(n2);
    for (auto &e : out)
        e *= inv;
}

ComplexVector sample_complex_gaussian(std::size_t dim, RngStream &rng) {
    ComplexVector v(dim);
    fill_complex_gaussian(v.span(), rng);
    return v;
}

ComplexVector sample_isotropic_unit(std::size_t dim, RngStream &rng) {
    ComplexVector v(dim);
    fill_isotropic_unit(v.span(), rng);
    return v;
}

ComplexVector sample_orthogonal_unit(const ComplexVector &axis, RngStream &rng) {
    const std::size_t dim = axis.dim();
    if (dim < 2)
        throw DomainError("sample_orthogonal_unit: dimension must be at least 2");
    ComplexVector g(dim);
    for (;;) {
        fill_complex_gaussian(g.span(), rng);
        const cdouble proj = dot(axis, g);
        for (std::size_t k = 0; k < dim; ++k)
            g[k] -= axis[k] * proj;
        const double n2 = g.norm2();
        if (n2 > 0.0) {
            const double inv = 1.0 / std::sqrt(n2);
            for (auto &e : g)
                e *= inv;
            return g;
        }
    }
}

ComplexMatrix sample_haar_unitary(std::size_t n, RngStream &rng) {
    for (;;) {
        ComplexMatrix q(n, n);
        for (std::size_t r = 0; r < n; ++r)
            fill_complex_gaussian(q.row(r), rng);
        // Modified Gram-Schmidt over columns; R gets a positive real diagonal,
        // which is what makes Q Haar distributed.
        bool degenerate = false;
        for (std::size_t c = 0; c < n && !degenerate; ++c) {
            for (std::size_t p = 0; p < c; ++p) {
                cdouble proj{0.0, 0.0};
                for (std::size_t r = 0; r < n; ++r)
                    proj += std::conj(q(r, p)) * q(r, c);
                for (std::size_t r = 0; r < n; ++r)
                    q(r, c) -= proj * q(r, p);
            }
            double n2 = 0.0;
            for (std::size_t r = 0; r < n; ++r)
                n2 += std::norm(q(r, c));
            if (n2 < 1e-24) {
                degenerate = true;
                break;
            }
            const double inv = 1.0 / std::sqrt(n2);
            for (std::size_t r = 0; r < n; ++r)
                q(r, c) *= inv;
        }
        if (!degenerate)
            return q;
    }
}

double angle_sin2(std::span<const cdouble> a, std::span<const cdouble> b) {
    if (a.size() != b.size())
        throw DomainError("angle_sin2: dimension mismatch");
    const double na = norm2(a);
    const double nb = norm2(b);
    if (na == 0.0 || nb == 0.0)
        throw DomainError("angle_sin2: zero vector");
    const double c2 = std::norm(dot(a, b)) / (na * nb);
    return std::clamp(1.0 - c2, 0.0, 1.0);
}

double ln_gamma(double x) {
    if (!(x > 0.0))
        throw DomainError("ln_gamma: argument must be positive, got " + std::to_string(x));
    return std::lgamma(x);
}

double ln_beta(double x, double y) {
    if (!(x > 0.0) || !(y > 0.0))
        throw DomainError("beta_fn: arguments must be positive");
    return ln_gamma(x) + ln_gamma(y) - ln_gamma(x + y);
}

double beta_fn(double x, double y) { return std::exp(ln_beta(x, y)); }

double harmonic_number(double n) {
    if (!(n >= 0.0))
        throw DomainError("harmonic_number: argument must be non-negative");
    if (n == std::floor(n) && n <= 64.0) {
        double s = 0.0;
        for (int k = static_cast<int>(n); k >= 1; --k)
            s += 1.0 / k;
        return s;
    }
    return boost::math::digamma(n + 1.0) + boost::math::constants::euler<double>();
}

} // namespace fbmimo
