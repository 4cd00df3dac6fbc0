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

#ifndef FEME_MEASURES_HPP
#define FEME_MEASURES_HPP

#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "feme/dynamics.hpp"
#include "feme/model.hpp"
#include "feme/state.hpp"

namespace feme {

/// Rates whose magnitude stays below this dead band are treated as zero when
/// detecting sign changes; ascending runs of the distance smaller than this
/// are treated as round-off. Keeps plateau noise (~1 ulp per sample) from
/// registering as information backflow.
inline constexpr double kRateFloor = 1e-12;

/// Trace distance held in the qubit alone: for a traceless Hermitian 2x2
/// difference [[d, c], [conj c, -d]] this is sqrt(d^2 + |c|^2), half its
/// trace norm.
template <typename Scalar>
Scalar internal_distance(const Matrix2c<Scalar>& diff) {
    const Scalar tol = Scalar(kConservationTol);
    if (std::abs(diff(0, 0).imag()) > tol || std::abs(diff(1, 1).imag()) > tol ||
        std::abs(diff(0, 1) - std::conj(diff(1, 0))) > tol)
        throw std::invalid_argument("internal_distance: input is not Hermitian");
    if (std::abs(diff(0, 0).real() + diff(1, 1).real()) > tol)
        throw std::invalid_argument("internal_distance: input is not traceless");
    const Scalar d = diff(0, 0).real();
    return std::sqrt(d * d + std::norm(diff(0, 1)));
}

/// Half trace norm of one Hermitian block [[u, c], [conj c, w]]:
/// eigenvalues are m +- r with m = (u+w)/2, r = sqrt(q^2 + |c|^2), q = (u-w)/2.
template <typename Scalar>
Scalar block_half_trace_norm(Scalar u, Scalar w, Scalar re, Scalar im) {
    const Scalar m = (u + w) / Scalar(2);
    const Scalar q = (u - w) / Scalar(2);
    const Scalar r = std::sqrt(q * q + re * re + im * im);
    return (std::abs(m + r) + std::abs(m - r)) / Scalar(2);
}

template <typename Scalar = double>
struct ExternalDistance {
    Scalar d_total; ///< trace distance of the full qubit + calorimeter states
    Scalar i_ext;   ///< d_total minus the qubit's internal distance
};

/// Distinguishability of the total states. The microcanonical calorimeter
/// factors are block-diagonal with orthogonal supports, so the full trace
/// norm splits into a sum of 2x2 block norms and the microstate
/// multiplicities cancel: d_total = (1/2) sum_n ||delta sigma(n)||_1.
template <typename Scalar>
ExternalDistance<Scalar> external_distance(const FemeState<Scalar>& diff) {
    if (diff.mode() != StateMode::Difference)
        throw std::invalid_argument("external_distance: state must be in difference mode");
    const int m = diff.num_blocks();
    Scalar total = Scalar(0);
    const auto& y = diff.data();
    for (int n = 0; n < m; ++n)
        total += block_half_trace_norm(y[n], y[m + n], y[2 * m + n], y[3 * m + n]);
    return {total, total - internal_distance(reduce_state(diff))};
}

template <typename Scalar = double>
struct Crossing {
    Scalar time;
    int direction; ///< +1 for a negative-to-positive change of rate_int, -1 otherwise
};

/// Time series of distances along one evolved pair, with numerically
/// differentiated rates and the sign changes of the qubit rate.
template <typename Scalar = double>
struct DistanceTrace {
    std::vector<Scalar> times;
    std::vector<Scalar> i_int;    ///< qubit trace distance, in [0, 1]
    std::vector<Scalar> i_ext;    ///< calorimeter share, d_total - i_int
    std::vector<Scalar> d_total;  ///< total-state trace distance
    std::vector<Scalar> rate_int; ///< centered-difference d(i_int)/dt
    std::vector<Scalar> rate_ext; ///< centered-difference d(i_ext)/dt
    std::vector<Crossing<Scalar>> crossings; ///< sign changes of rate_int
};

/// Centered finite differences, one-sided at the ends. The external rate is
/// reported as-is: it genuinely jumps where block eigenvalues cross zero.
template <typename Scalar>
std::vector<Scalar> finite_difference_rate(const std::vector<Scalar>& times,
                                           const std::vector<Scalar>& values) {
    const std::size_t n = values.size();
    std::vector<Scalar> rate(n, Scalar(0));
    if (n < 2) return rate;
    rate[0] = (values[1] - values[0]) / (times[1] - times[0]);
    rate[n - 1] = (values[n - 1] - values[n - 2]) / (times[n - 1] - times[n - 2]);
    for (std::size_t k = 1; k + 1 < n; ++k)
        rate[k] = (values[k + 1] - values[k - 1]) / (times[k + 1] - times[k - 1]);
    return rate;
}

/// Sign changes of a sampled rate, with linear interpolation of the zero
/// between the last sample outside the dead band on one side and the first
/// sample outside it on the other.
template <typename Scalar>
std::vector<Crossing<Scalar>> detect_crossings(const std::vector<Scalar>& times,
                                               const std::vector<Scalar>& rate,
                                               Scalar floor = Scalar(kRateFloor)) {
    std::vector<Crossing<Scalar>> out;
    int sign = 0;
    std::size_t last = 0;
    for (std::size_t k = 0; k < rate.size(); ++k) {
        int s = 0;
        if (rate[k] > floor) s = 1;
        else if (rate[k] < -floor) s = -1;
        if (s == 0) continue;
        if (sign != 0 && s != sign) {
            const Scalar t0 = times[last], t1 = times[k];
            const Scalar v0 = rate[last], v1 = rate[k];
            const Scalar tz = t0 + (t1 - t0) * (-v0) / (v1 - v0);
            out.push_back({tz, s});
        }
        sign = s;
        last = k;
    }
    return out;
}

/// Total information backflow of a sampled distance trace: the sum of rises
/// over maximal ascending runs, which telescopes the positive-rate integral
/// exactly for piecewise-monotone sampling. Runs below the round-off floor
/// are dropped.
template <typename Scalar>
Scalar blp_from_trace_values(const std::vector<Scalar>& i_int,
                             Scalar floor = Scalar(kRateFloor)) {
    Scalar total = Scalar(0);
    Scalar run = Scalar(0);
    for (std::size_t k = 1; k < i_int.size(); ++k) {
        const Scalar d = i_int[k] - i_int[k - 1];
        if (d > Scalar(0)) {
            run += d;
        } else if (run > Scalar(0)) {
            if (run > floor) total += run;
            run = Scalar(0);
        }
    }
    if (run > floor) total += run;
    return total;
}

template <typename Scalar>
Scalar blp_from_trace(const DistanceTrace<Scalar>& trace) {
    return blp_from_trace_values(trace.i_int);
}

/// First time the qubit rate turns from negative to positive; absent when
/// the distance decreases monotonically.
template <typename Scalar>
std::optional<Scalar> backflow_onset(const DistanceTrace<Scalar>& trace) {
    for (const auto& c : detect_crossings(trace.times, trace.rate_int))
        if (c.direction > 0) return c.time;
    return std::nullopt;
}

/// Exact rate of the qubit trace distance given the reduced difference and
/// its time derivative. Divides by I(t); only meaningful away from state
/// coalescence, kept as a cross-check for the finite-difference rates.
template <typename Scalar>
Scalar trace_distance_rate(const Matrix2c<Scalar>& diff, const Matrix2c<Scalar>& ddiff) {
    const Scalar d = diff(0, 0).real();
    const Scalar dd = ddiff(0, 0).real();
    const Scalar i = std::sqrt(d * d + std::norm(diff(0, 1)));
    return (d * dd + (std::conj(diff(0, 1)) * ddiff(0, 1)).real()) / i;
}

/// Evolves the difference state of `pair` and records the distance series,
/// the finite-difference rates and the qubit-rate sign changes.
template <typename Scalar>
DistanceTrace<Scalar> distance_trace(const BlochPair<Scalar>& pair,
                                     const ModelParams<Scalar>& params,
                                     const IntegratorConfig<Scalar>& cfg) {
    const FemeState<Scalar> initial = build_difference_state(pair, params);
    DistanceTrace<Scalar> trace;
    const int m = params.n_units + 1;
    detail::integrate_raw<Scalar>(initial.data(), params, cfg, [&](long, Scalar t, const auto& y) {
        const Scalar d00 = y.segment(0, m).sum();
        const Scalar re = y.segment(2 * m, m).sum();
        const Scalar im = y.segment(3 * m, m).sum();
        const Scalar internal = std::sqrt(d00 * d00 + re * re + im * im);
        Scalar total = Scalar(0);
        for (int n = 0; n < m; ++n)
            total += block_half_trace_norm(y[n], y[m + n], y[2 * m + n], y[3 * m + n]);
        trace.times.push_back(t);
        trace.i_int.push_back(internal);
        trace.d_total.push_back(total);
        trace.i_ext.push_back(total - internal);
    });
    trace.rate_int = finite_difference_rate(trace.times, trace.i_int);
    trace.rate_ext = finite_difference_rate(trace.times, trace.i_ext);
    trace.crossings = detect_crossings(trace.times, trace.rate_int);
    return trace;
}

} // namespace feme

#endif // FEME_MEASURES_HPP
