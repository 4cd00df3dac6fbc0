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

#ifndef FEME_MODEL_HPP
#define FEME_MODEL_HPP

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "feme/errors.hpp"

namespace feme {

/// Tolerance for conservation-type invariants (trace over long integrations).
inline constexpr double kConservationTol = 1e-9;
/// Tolerance for algebraic identities that hold exactly in real arithmetic.
inline constexpr double kAlgebraTol = 1e-12;

/// Physical and control parameters of the driven qubit + calorimeter model.
///
/// Natural units: hbar = 1 and energies/rates are measured against the qubit
/// gap, i.e. lambda0 and g are the dimensionless ratios lambda0/(hbar*omega0)
/// and g/omega0, beta is beta*hbar*omega0 and times are omega0*t. omega0 is
/// kept as an explicit factor so the equations read like the physics; it is
/// 1 for every supported workflow.
template <typename Scalar = double>
struct ModelParams {
    Scalar omega0 = Scalar(1);  ///< qubit angular frequency (sets the clock)
    Scalar lambda0 = Scalar(0); ///< sinusoidal drive amplitude
    Scalar g = Scalar(0);       ///< qubit-calorimeter coupling rate
    Scalar beta = Scalar(1);    ///< inverse temperature of the initial calorimeter state
    int n_units = 1;            ///< number N of two-level units in the calorimeter
};

template <typename Scalar>
void validate(const ModelParams<Scalar>& p) {
    std::ostringstream bad;
    if (!(p.omega0 > Scalar(0))) bad << " omega0";
    if (!(p.lambda0 >= Scalar(0))) bad << " lambda0";
    if (!(p.g >= Scalar(0))) bad << " g";
    if (!(p.beta > Scalar(0))) bad << " beta";
    if (p.n_units < 1) bad << " n_units";
    if (!bad.str().empty())
        throw std::invalid_argument("invalid model parameters:" + bad.str());
}

namespace detail {
template <typename Scalar>
void check_level(const ModelParams<Scalar>& p, int n) {
    if (n < 0 || n > p.n_units)
        throw std::domain_error("calorimeter level n=" + std::to_string(n) +
                                " outside [0, " + std::to_string(p.n_units) + "]");
}
} // namespace detail

/// Excitation rate of the qubit when the calorimeter holds n quanta:
/// gamma_up(n) = g * n / N. Zero at n = 0 (an empty calorimeter has nothing
/// to give). The double subtraction g - (g - x) rounds the product to the
/// nearest value whose complement against g is exactly representable, which
/// keeps rate_up(n) + rate_down(n) == g exact in floating point.
template <typename Scalar>
Scalar rate_up(const ModelParams<Scalar>& p, int n) {
    detail::check_level(p, n);
    const Scalar x = p.g * (Scalar(n) / Scalar(p.n_units));
    return p.g - (p.g - x);
}

/// Emission rate into the calorimeter at occupation n:
/// gamma_down(n) = g * (1 - n / N) = g - rate_up(n); rate_down(N) == 0
/// exactly.
template <typename Scalar>
Scalar rate_down(const ModelParams<Scalar>& p, int n) {
    detail::check_level(p, n);
    return p.g - rate_up(p, n);
}

/// Canonical occupation probabilities p_n of the calorimeter energy ladder,
/// p_n = binom(N, n) exp(-beta n) / (1 + exp(-beta))^N, n = 0..N.
///
/// Evaluated in log space (lgamma for the binomial, closed-form partition
/// function) so N of order 10^3 does not overflow; the exponentiated weights
/// are normalised by their sum afterwards to pin sum(p) = 1 to rounding.
template <typename Scalar = double>
Eigen::Array<Scalar, Eigen::Dynamic, 1> thermal_weights(const ModelParams<Scalar>& p) {
    validate(p);
    const int count = p.n_units + 1;
    const double beta = static_cast<double>(p.beta);
    const double log_z = p.n_units * std::log1p(std::exp(-beta));
    const double lg_total = std::lgamma(double(p.n_units) + 1.0);
    Eigen::Array<Scalar, Eigen::Dynamic, 1> w(count);
    for (int n = 0; n < count; ++n) {
        const double log_binom =
            lg_total - std::lgamma(double(n) + 1.0) - std::lgamma(double(p.n_units - n) + 1.0);
        w[n] = static_cast<Scalar>(std::exp(log_binom - beta * n - log_z));
        if (!std::isfinite(static_cast<double>(w[n])))
            throw NumericError("thermal_weights: non-finite weight at n=" + std::to_string(n));
    }
    w /= w.sum();
    return w;
}

/// Bloch-sphere angles selecting a pair of orthogonal pure qubit states;
/// the pair is (theta, phi) and its antipode. Half ranges suffice because
/// swapping the pair leaves every distance unchanged.
template <typename Scalar = double>
struct BlochPair {
    Scalar theta = Scalar(0); ///< polar angle in [0, pi)
    Scalar phi = Scalar(0);   ///< azimuth in [0, pi)
};

template <typename Scalar>
void validate(const BlochPair<Scalar>& pair) {
    constexpr double pi = 3.14159265358979323846;
    if (!(pair.theta >= Scalar(0)) || !(pair.theta < Scalar(pi)))
        throw std::invalid_argument("BlochPair: theta outside [0, pi)");
    if (!(pair.phi >= Scalar(0)) || !(pair.phi < Scalar(pi)))
        throw std::invalid_argument("BlochPair: phi outside [0, pi)");
}

} // namespace feme

#endif // FEME_MODEL_HPP
