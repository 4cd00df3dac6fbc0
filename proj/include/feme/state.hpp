// Copyright 2026 The feme authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FEME_STATE_HPP
#define FEME_STATE_HPP

#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Core>

#include "feme/model.hpp"

namespace feme {

template <typename Scalar>
using Matrix2c = Eigen::Matrix<std::complex<Scalar>, 2, 2>;

/// Whether a block vector represents a physical (trace-1) state or a
/// difference of two states (trace-0). The dynamics is linear, so both
/// propagate through the same equations; only the conserved trace differs.
enum class StateMode { State, Difference };

/// One conditional 2x2 qubit block sigma(n). Hermitian by construction:
/// only the upper coherence is stored, sigma_10 = conj(sigma_01).
template <typename Scalar = double>
struct QubitBlock {
    Scalar s00 = Scalar(0);
    Scalar s11 = Scalar(0);
    std::complex<Scalar> s01{Scalar(0), Scalar(0)};

    Matrix2c<Scalar> matrix() const {
        Matrix2c<Scalar> m;
        m << std::complex<Scalar>(s00, Scalar(0)), s01,
             std::conj(s01), std::complex<Scalar>(s11, Scalar(0));
        return m;
    }
};

/// The full qubit + calorimeter state as N+1 conditional qubit blocks, four
/// reals per block, packed as [s00(0..N) | s11(0..N) | Re s01 | Im s01].
/// The flat layout keeps the integrator a handful of fused array expressions.
template <typename Scalar = double>
class FemeState {
public:
    using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

    FemeState() = default;
    FemeState(int n_units, StateMode mode)
        : mode_(mode), blocks_(n_units + 1), data_(Array::Zero(4 * (n_units + 1))) {
        if (n_units < 1) throw std::invalid_argument("FemeState: n_units must be >= 1");
    }

    StateMode mode() const { return mode_; }
    Scalar time() const { return time_; }
    void set_time(Scalar t) { time_ = t; }
    int n_units() const { return blocks_ - 1; }
    int num_blocks() const { return blocks_; }

    Array& data() { return data_; }
    const Array& data() const { return data_; }

    auto s00() { return data_.segment(0, blocks_); }
    auto s11() { return data_.segment(blocks_, blocks_); }
    auto re01() { return data_.segment(2 * blocks_, blocks_); }
    auto im01() { return data_.segment(3 * blocks_, blocks_); }
    auto s00() const { return data_.segment(0, blocks_); }
    auto s11() const { return data_.segment(blocks_, blocks_); }
    auto re01() const { return data_.segment(2 * blocks_, blocks_); }
    auto im01() const { return data_.segment(3 * blocks_, blocks_); }

    QubitBlock<Scalar> block(int n) const {
        check_index(n);
        return {data_[n], data_[blocks_ + n],
                {data_[2 * blocks_ + n], data_[3 * blocks_ + n]}};
    }

    void set_block(int n, const QubitBlock<Scalar>& b) {
        check_index(n);
        data_[n] = b.s00;
        data_[blocks_ + n] = b.s11;
        data_[2 * blocks_ + n] = b.s01.real();
        data_[3 * blocks_ + n] = b.s01.imag();
    }

    /// Trace of the summed blocks; 1 for state mode, 0 for difference mode.
    Scalar total_trace() const { return data_.segment(0, 2 * blocks_).sum(); }

private:
    void check_index(int n) const {
        if (n < 0 || n >= blocks_)
            throw std::out_of_range("FemeState: block index " + std::to_string(n));
    }

    StateMode mode_ = StateMode::State;
    Scalar time_ = Scalar(0);
    int blocks_ = 0;
    Array data_;
};

/// Sum of all conditional blocks: the reduced qubit matrix (or the reduced
/// difference when the state is in difference mode).
template <typename Scalar>
Matrix2c<Scalar> reduce_state(const FemeState<Scalar>& s) {
    Matrix2c<Scalar> m;
    const std::complex<Scalar> c01(s.re01().sum(), s.im01().sum());
    m << std::complex<Scalar>(s.s00().sum(), Scalar(0)), c01,
         std::conj(c01), std::complex<Scalar>(s.s11().sum(), Scalar(0));
    return m;
}

/// Difference of two antipodal pure qubit states, thermally distributed over
/// the calorimeter ladder: block n = p_n * [[cos t, e^{i f} sin t],
/// [e^{-i f} sin t, -cos t]]. Total trace 0; the reduced trace distance at
/// t = 0 is exactly 1.
template <typename Scalar>
FemeState<Scalar> build_difference_state(const BlochPair<Scalar>& pair,
                                         const ModelParams<Scalar>& params) {
    validate(params);
    validate(pair);
    const auto weights = thermal_weights(params);
    FemeState<Scalar> s(params.n_units, StateMode::Difference);
    const Scalar ct = std::cos(pair.theta);
    const Scalar st = std::sin(pair.theta);
    const Scalar cp = std::cos(pair.phi);
    const Scalar sp = std::sin(pair.phi);
    s.s00() = weights * ct;
    s.s11() = weights * (-ct);
    s.re01() = weights * (st * cp);
    s.im01() = weights * (st * sp);
    return s;
}

/// Product state: a fixed qubit block distributed over the thermal ladder,
/// block n = p_n * qubit. The qubit block must be a physical state
/// (unit trace, nonnegative populations).
template <typename Scalar>
FemeState<Scalar> build_product_state(const QubitBlock<Scalar>& qubit,
                                      const ModelParams<Scalar>& params) {
    validate(params);
    if (std::abs(qubit.s00 + qubit.s11 - Scalar(1)) > Scalar(kAlgebraTol))
        throw std::invalid_argument("build_product_state: qubit block trace must be 1");
    if (qubit.s00 < Scalar(0) || qubit.s11 < Scalar(0))
        throw std::invalid_argument("build_product_state: negative qubit population");
    if (qubit.s00 * qubit.s11 - std::norm(qubit.s01) < -Scalar(kAlgebraTol))
        throw std::invalid_argument("build_product_state: qubit block is not positive semidefinite");
    const auto weights = thermal_weights(params);
    FemeState<Scalar> s(params.n_units, StateMode::State);
    s.s00() = weights * qubit.s00;
    s.s11() = weights * qubit.s11;
    s.re01() = weights * qubit.s01.real();
    s.im01() = weights * qubit.s01.imag();
    return s;
}

} // namespace feme

#endif // FEME_STATE_HPP
