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

#ifndef FEME_DYNAMICS_HPP
#define FEME_DYNAMICS_HPP

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "feme/errors.hpp"
#include "feme/model.hpp"
#include "feme/state.hpp"

namespace feme {

/// Frame the equations are solved in. The interaction picture removes the
/// fast qubit phase from the solved variables and is the default; the
/// Schroedinger picture keeps the bare rotation and serves as a cross-check
/// (the reduced trace distance is identical in both frames).
enum class Picture { Interaction, Schroedinger };

template <typename Scalar = double>
struct IntegratorConfig {
    Scalar dt = Scalar(2) * std::numbers::pi_v<Scalar> / Scalar(200); ///< fixed step, resolves the drive period with 200 points
    Scalar t_end = Scalar(1000) * std::numbers::pi_v<Scalar>;         ///< truncation time of the evolution
    long sample_every = 1;                                            ///< output cadence in steps
    Picture picture = Picture::Interaction;
};

template <typename Scalar>
void validate(const IntegratorConfig<Scalar>& cfg) {
    if (!(cfg.dt > Scalar(0))) throw std::invalid_argument("IntegratorConfig: dt must be > 0");
    if (!(cfg.t_end > Scalar(0))) throw std::invalid_argument("IntegratorConfig: t_end must be > 0");
    if (cfg.sample_every < 1) throw std::invalid_argument("IntegratorConfig: sample_every must be >= 1");
}

/// Complex drive factor entering the off-diagonal equations. In the
/// interaction picture v(t) = lambda0 sin(w t) e^{-i w t}; in the
/// Schroedinger picture the bare drive lambda0 sin(w t) is real and the
/// qubit rotation is applied separately.
template <typename Scalar>
struct DriveFactor {
    Scalar re = Scalar(0);
    Scalar im = Scalar(0);
};

template <typename Scalar>
DriveFactor<Scalar> drive_value(const ModelParams<Scalar>& p, Scalar t, Picture picture) {
    const Scalar s = std::sin(p.omega0 * t);
    if (picture == Picture::Interaction)
        return {p.lambda0 * std::cos(p.omega0 * t) * s, -p.lambda0 * s * s};
    return {p.lambda0 * s, Scalar(0)};
}

namespace detail {

/// Precomputed per-run constants for the right-hand side.
template <typename Scalar>
struct RhsWorkspace {
    using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
    Array gamma_up;   // rate_up(n), n = 0..N
    Array gamma_down; // rate_down(n)
    Scalar half_g = Scalar(0);
    Scalar omega0 = Scalar(1);
    Scalar lambda0 = Scalar(0);
    Picture picture = Picture::Interaction;

    RhsWorkspace(const ModelParams<Scalar>& p, Picture pic)
        : gamma_up(p.n_units + 1), gamma_down(p.n_units + 1),
          half_g(p.g / Scalar(2)), omega0(p.omega0), lambda0(p.lambda0), picture(pic) {
        for (int n = 0; n <= p.n_units; ++n) {
            gamma_up[n] = rate_up(p, n);
            gamma_down[n] = rate_down(p, n);
        }
    }

    /// dy = F(t, y) over the packed layout [s00 | s11 | Re s01 | Im s01].
    /// Boundary blocks n = -1 and n = N+1 are implicit zeros; together with
    /// gamma_up(0) = gamma_down(N) = 0 every gain term has a matching loss,
    /// so the total trace of dy vanishes identically.
    void operator()(const Array& y, Scalar t, Array& dy) const {
        const long m = gamma_up.size();
        const Scalar s = std::sin(omega0 * t);
        Scalar vr, vi;
        if (picture == Picture::Interaction) {
            vr = lambda0 * std::cos(omega0 * t) * s;
            vi = -lambda0 * s * s;
        } else {
            vr = lambda0 * s;
            vi = Scalar(0);
        }
        const auto u = y.segment(0, m);
        const auto w = y.segment(m, m);
        const auto a = y.segment(2 * m, m);
        const auto b = y.segment(3 * m, m);
        auto du = dy.segment(0, m);
        auto dw = dy.segment(m, m);
        auto da = dy.segment(2 * m, m);
        auto db = dy.segment(3 * m, m);

        // populations: coherent exchange with the drive plus the ladder moves
        du = Scalar(2) * (vi * a - vr * b) - gamma_up * u;
        du.tail(m - 1) += gamma_down.head(m - 1) * w.head(m - 1);
        dw = Scalar(-2) * (vi * a - vr * b) - gamma_down * w;
        dw.head(m - 1) += gamma_up.tail(m - 1) * u.tail(m - 1);

        // coherences: i v (s00 - s11) - (g/2) s01, plus the bare rotation
        // when solving in the Schroedinger picture
        da = -vi * (u - w) - half_g * a;
        db = vr * (u - w) - half_g * b;
        if (picture == Picture::Schroedinger) {
            da -= omega0 * b;
            db += omega0 * a;
        }
    }
};

template <typename Scalar>
long step_count(const IntegratorConfig<Scalar>& cfg) {
    const double steps = static_cast<double>(cfg.t_end / cfg.dt);
    long n = static_cast<long>(std::ceil(steps - 1e-9));
    return n < 1 ? 1 : n;
}

template <typename Scalar>
void check_finite(const Eigen::Array<Scalar, Eigen::Dynamic, 1>& y, Scalar t) {
    if (y.allFinite()) return;
    const long m = y.size() / 4;
    static constexpr const char* names[4] = {"s00", "s11", "Re s01", "Im s01"};
    for (long i = 0; i < y.size(); ++i) {
        if (!std::isfinite(static_cast<double>(y[i]))) {
            throw NumericError("integration produced a non-finite value at t=" +
                               std::to_string(static_cast<double>(t)) + ", block n=" +
                               std::to_string(i % m) + ", component " + names[i / m]);
        }
    }
}

/// Classical fixed-step 4th-order integration of the block equations,
/// invoking `sample(sample_index, t, y)` at t = 0, every `sample_every`
/// steps, and at the final step. The state vector passed to the callback is
/// the packed layout of FemeState.
template <typename Scalar, typename Sample>
void integrate_raw(const Eigen::Array<Scalar, Eigen::Dynamic, 1>& y0,
                   const ModelParams<Scalar>& params, const IntegratorConfig<Scalar>& cfg,
                   Sample&& sample) {
    using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
    validate(params);
    validate(cfg);
    if (y0.size() != 4 * (params.n_units + 1))
        throw std::invalid_argument("integrate: state has " + std::to_string(y0.size() / 4) +
                                    " blocks, params expect " + std::to_string(params.n_units + 1));

    const RhsWorkspace<Scalar> rhs(params, cfg.picture);
    const long n_steps = step_count(cfg);
    const Scalar dt = cfg.dt;
    const Scalar half = dt / Scalar(2);

    Array y = y0;
    Array k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()), scratch(y.size());

    check_finite(y, Scalar(0));
    long sample_index = 0;
    sample(sample_index++, Scalar(0), static_cast<const Array&>(y));

    for (long step = 0; step < n_steps; ++step) {
        const Scalar t = Scalar(step) * dt;
        rhs(y, t, k1);
        scratch = y + half * k1;
        rhs(scratch, t + half, k2);
        scratch = y + half * k2;
        rhs(scratch, t + half, k3);
        scratch = y + dt * k3;
        rhs(scratch, t + dt, k4);
        y += (dt / Scalar(6)) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);

        if ((step + 1) % cfg.sample_every == 0 || step + 1 == n_steps) {
            const Scalar ts = Scalar(step + 1) * dt;
            check_finite(y, ts);
            sample(sample_index++, ts, static_cast<const Array&>(y));
        }
    }
}

} // namespace detail

/// Right-hand side of the block master equation at time t. Rates enter
/// through the calorimeter occupation of each block; neighbour blocks feed
/// the ladder terms and out-of-range neighbours are zero.
template <typename Scalar>
FemeState<Scalar> feme_rhs(const FemeState<Scalar>& state, Scalar t,
                           const ModelParams<Scalar>& params,
                           Picture picture = Picture::Interaction) {
    validate(params);
    if (state.num_blocks() != params.n_units + 1)
        throw std::invalid_argument("feme_rhs: state has " + std::to_string(state.num_blocks()) +
                                    " blocks, params expect " + std::to_string(params.n_units + 1));
    const detail::RhsWorkspace<Scalar> rhs(params, picture);
    FemeState<Scalar> deriv(params.n_units, state.mode());
    deriv.set_time(t);
    rhs(state.data(), t, deriv.data());
    return deriv;
}

/// Time series of integrated states.
template <typename Scalar = double>
struct TrajectoryRecord {
    std::vector<Scalar> times;
    std::vector<FemeState<Scalar>> states;
};

/// Integrates the block equations from `initial`, returning snapshots every
/// cfg.sample_every steps (plus t=0 and the final time). Non-finite values
/// abort with a diagnostic naming the time and block.
template <typename Scalar>
TrajectoryRecord<Scalar> integrate(const FemeState<Scalar>& initial,
                                   const ModelParams<Scalar>& params,
                                   const IntegratorConfig<Scalar>& cfg) {
    TrajectoryRecord<Scalar> record;
    FemeState<Scalar> snapshot(params.n_units, initial.mode());
    detail::integrate_raw<Scalar>(initial.data(), params, cfg,
                                  [&](long, Scalar t, const auto& y) {
                                      snapshot.data() = y;
                                      snapshot.set_time(t);
                                      record.times.push_back(t);
                                      record.states.push_back(snapshot);
                                  });
    return record;
}

/// Closed-form trace distance of the undriven evolution from the thermal
/// orthogonal-pair initial condition:
///   I(t) = sqrt(f(t)^2 cos^2 theta + h(t)^2 sin^2 theta),
///   f(t) = (N e^{-g (1 + 1/N) t} + 1) / (N + 1),  h(t) = e^{-g t / 2}.
/// Both envelopes decrease monotonically, so the undriven dynamics never
/// shows information backflow.
template <typename Scalar>
Scalar analytic_undriven_distance(Scalar theta, const ModelParams<Scalar>& params, Scalar t) {
    validate(params);
    const Scalar n = Scalar(params.n_units);
    const Scalar f = (n * std::exp(-params.g * (Scalar(1) + Scalar(1) / n) * t) + Scalar(1)) /
                     (n + Scalar(1));
    const Scalar h = std::exp(-params.g * t / Scalar(2));
    const Scalar ct = std::cos(theta);
    const Scalar st = std::sin(theta);
    return std::sqrt(f * f * ct * ct + h * h * st * st);
}

} // namespace feme

#endif // FEME_DYNAMICS_HPP
