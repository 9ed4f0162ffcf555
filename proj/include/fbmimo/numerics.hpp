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

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/random/normal_distribution.hpp>

namespace fbmimo {

using cdouble = std::complex<double>;

// Argument outside the mathematical domain of an operation (zero vector, z > 1, ...).
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

// Raised by invert() when a pivot falls below 1e-12 * ||A||.
class SingularMatrix : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Raised when a request would exceed a configured size budget.
class CapacityError : public std::length_error {
  public:
    using std::length_error::length_error;
};

class ComplexVector {
  public:
    explicit ComplexVector(std::size_t dim);
    explicit ComplexVector(std::vector<cdouble> entries);
    ComplexVector(std::initializer_list<cdouble> entries);

    std::size_t dim() const { return entries_.size(); }

    cdouble &operator[](std::size_t i) { return entries_[i]; }
    const cdouble &operator[](std::size_t i) const { return entries_[i]; }

    std::span<cdouble> span() { return entries_; }
    std::span<const cdouble> span() const { return entries_; }

    auto begin() { return entries_.begin(); }
    auto end() { return entries_.end(); }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

    double norm2() const;
    double norm() const;
    ComplexVector normalized() const;

  private:
    std::vector<cdouble> entries_;
};

// a^H b
cdouble dot(std::span<const cdouble> a, std::span<const cdouble> b);
inline cdouble dot(const ComplexVector &a, const ComplexVector &b) { return dot(a.span(), b.span()); }

double norm2(std::span<const cdouble> v);

// Row-major dense complex matrix.
class ComplexMatrix {
  public:
    ComplexMatrix(std::size_t rows, std::size_t cols);

    static ComplexMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    cdouble &operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
    const cdouble &operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

    std::span<cdouble> row(std::size_t r) { return {entries_.data() + r * cols_, cols_}; }
    std::span<const cdouble> row(std::size_t r) const { return {entries_.data() + r * cols_, cols_}; }

    ComplexVector column(std::size_t c) const;
    ComplexMatrix adjoint() const;

    // Largest absolute row sum.
    double norm_inf() const;

    friend ComplexMatrix operator*(const ComplexMatrix &a, const ComplexMatrix &b);

  private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<cdouble> entries_;
};

// Matrix whose i-th row is v_i^H, i.e. the usual stacking of user channels.
ComplexMatrix stack_adjoint_rows(std::span<const ComplexVector> vectors);

// Inverse by LU with partial pivoting. Throws SingularMatrix when a pivot
// magnitude drops below 1e-12 * ||A||_inf.
ComplexMatrix invert(const ComplexMatrix &a);

// Deterministic random source keyed by (seed, stream). Each Monte Carlo trial
// owns the stream whose id is its trial index, so results do not depend on
// how trials are scheduled across threads.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream);

    RngStream(const RngStream &) = delete;
    RngStream &operator=(const RngStream &) = delete;
    RngStream(RngStream &&) = default;
    RngStream &operator=(RngStream &&) = default;

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    // Uniform on the open interval (0, 1).
    double uniform();
    double normal();
    // CN(0, 1): independent N(0, 1/2) real and imaginary parts.
    cdouble complex_normal();
    // Gamma(shape, 1).
    double gamma(double shape);

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
    boost::random::normal_distribution<double> normal_;
};

ComplexVector sample_complex_gaussian(std::size_t dim, RngStream &rng);
ComplexVector sample_isotropic_unit(std::size_t dim, RngStream &rng);

// In-place variants used by the hot loops.
void fill_complex_gaussian(std::span<cdouble> out, RngStream &rng);
void fill_isotropic_unit(std::span<cdouble> out, RngStream &rng);

// Isotropic unit vector in the orthogonal complement of the unit vector `axis`.
ComplexVector sample_orthogonal_unit(const ComplexVector &axis, RngStream &rng);

// Haar-distributed unitary: Gram-Schmidt on an iid CN(0,1) matrix.
ComplexMatrix sample_haar_unitary(std::size_t n, RngStream &rng);

// sin^2 of the angle between a and b: 1 - |a^H b|^2 / (|a|^2 |b|^2), clamped to [0, 1].
double angle_sin2(std::span<const cdouble> a, std::span<const cdouble> b);
inline double angle_sin2(const ComplexVector &a, const ComplexVector &b) { return angle_sin2(a.span(), b.span()); }

double ln_gamma(double x);
double ln_beta(double x, double y);
double beta_fn(double x, double y);

// Generalised harmonic number H(n) = psi(n + 1) + gamma_E; equals sum_{k=1}^n 1/k for integer n.
double harmonic_number(double n);

inline constexpr double kLog2E = 1.4426950408889634074;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

} // namespace fbmimo
