// Copyright 2026 The psmaqb Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PSMAQB_CORE_HPP
#define PSMAQB_CORE_HPP

#include <cmath>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace psmaqb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class OutOfRange : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class InvariantViolation : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

inline void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what)
{
    if (a != b)
        throw DimensionMismatch(std::string(what) + ": dimension " + std::to_string(a) + " vs " + std::to_string(b));
}

/// A real vector of unit Euclidean norm: a Bloch vector, an action, or a
/// normalized estimate. The norm invariant holds to 1e-12 after construction.
class UnitVector {
public:
    static constexpr double kNormTolerance = 1e-12;

    /// Normalizes `v`. Throws OutOfRange for a zero or non-finite vector.
    static UnitVector normalize(const Vector& v)
    {
        const double n = v.norm();
        if (!(n > 0.0) || !std::isfinite(n))
            throw OutOfRange("cannot normalize a zero or non-finite vector");
        return UnitVector(v / n);
    }

    /// Normalizes `v`, or returns nullopt when its norm is zero.
    static std::optional<UnitVector> try_normalize(const Vector& v)
    {
        const double n = v.norm();
        if (!(n > 0.0) || !std::isfinite(n))
            return std::nullopt;
        return UnitVector(v / n);
    }

    static UnitVector of(std::initializer_list<double> coords)
    {
        Vector v(static_cast<Eigen::Index>(coords.size()));
        Eigen::Index i = 0;
        for (double c : coords)
            v[i++] = c;
        return normalize(v);
    }

    /// Canonical basis vector e_i (0-based).
    static UnitVector basis(Eigen::Index dim, Eigen::Index i)
    {
        return UnitVector(Vector::Unit(dim, i));
    }

    const Vector& coords() const { return coords_; }
    Eigen::Index dim() const { return coords_.size(); }
    double operator[](Eigen::Index i) const { return coords_[i]; }
    double dot(const UnitVector& o) const
    {
        require_same_dim(dim(), o.dim(), "UnitVector::dot");
        return coords_.dot(o.coords_);
    }
    UnitVector operator-() const { return UnitVector(-coords_); }

    bool operator==(const UnitVector& o) const { return coords_ == o.coords_; }

private:
    explicit UnitVector(Vector v) : coords_(std::move(v)) {}

    Vector coords_;
};

/// Quantum Hilbert dimension d and the matching classical dimension d^2 - 1.
struct QuantumDims {
    int d = 2;

    int n_dim() const { return d * d - 1; }

    static QuantumDims qubit() { return {2}; }

    /// The quantum dimension whose Bloch space has `n_dim` coordinates, if any.
    static std::optional<QuantumDims> from_n_dim(int n_dim)
    {
        for (int d = 2; d * d - 1 <= n_dim; ++d) {
            if (d * d - 1 == n_dim)
                return QuantumDims{d};
        }
        return std::nullopt;
    }
};

} // namespace psmaqb

#endif
