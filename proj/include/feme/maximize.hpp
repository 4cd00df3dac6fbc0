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

#ifndef FEME_MAXIMIZE_HPP
#define FEME_MAXIMIZE_HPP

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "feme/measures.hpp"
#include "feme/parallel.hpp"

namespace feme {

/// Controls for the Bloch-sphere maximization of the backflow measure.
struct BlpOptions {
    double angle_step = 0.08;  ///< grid step in rad for theta (and phi if searched)
    bool restrict_phi = true;  ///< fix phi = 0; the maximum lies in the xz plane
    bool refine = true;        ///< golden-section pass on theta around the grid argmax
    bool want_trace = true;    ///< also integrate the full distance trace of the argmax pair
    int workers = 1;           ///< threads for the basis integrations
};

template <typename Scalar = double>
struct BlpResult {
    Scalar value = Scalar(0);             ///< maximized backflow measure, >= 0
    BlochPair<Scalar> argmax_pair;        ///< maximizing initial pair
    std::optional<Scalar> t_r;            ///< first backflow time of the argmax pair
    Scalar tail_i_int = Scalar(0);        ///< i_int at t_end: truncation diagnostic
    DistanceTrace<Scalar> trace;          ///< trace of the argmax pair (if requested)
};

namespace detail {

/// Reduced difference matrices of up to three basis evolutions, compressed to
/// the per-sample Gram matrix. The master equation is linear, so the evolved
/// reduced difference of any initial pair (theta, phi) is the same linear
/// combination of evolved basis differences as at t = 0, and
/// I(t; theta, phi)^2 = u^T G(t) u with constant coefficients u. Two (or
/// three) integrations per parameter point then price the whole angle grid.
class PairFamily {
public:
    /// Coefficients of sigma0(theta, phi) over the stored basis blocks
    /// (p_n sigma_z, p_n sigma_x, p_n B2) with B2_01 = i, so that the
    /// reconstructed coherence is sin(theta) e^{i phi}.
    static std::array<double, 3> coefficients(double theta, double phi) {
        return {std::cos(theta), std::sin(theta) * std::cos(phi),
                std::sin(theta) * std::sin(phi)};
    }

    PairFamily(const ModelParams<double>& params, const IntegratorConfig<double>& cfg,
               bool restrict_phi, int workers)
        : basis_count_(restrict_phi ? 2 : 3) {
        const auto weights = thermal_weights(params);
        const int m = params.n_units + 1;
        // basis blocks: p_n * sigma_z, p_n * sigma_x, p_n * sigma_y
        std::array<FemeState<double>, 3> basis;
        for (int b = 0; b < basis_count_; ++b)
            basis[b] = FemeState<double>(params.n_units, StateMode::Difference);
        basis[0].s00() = weights;
        basis[0].s11() = -weights;
        basis[1].re01() = weights;
        if (basis_count_ > 2) basis[2].im01() = weights;

        std::array<std::vector<std::array<double, 3>>, 3> reduced;
        parallel_for(basis_count_, workers, [&](std::size_t b) {
            auto& out = reduced[b];
            detail::integrate_raw<double>(basis[b].data(), params, cfg,
                                          [&](long, double t, const auto& y) {
                                              out.push_back({y.segment(0, m).sum(),
                                                             y.segment(2 * m, m).sum(),
                                                             y.segment(3 * m, m).sum()});
                                              if (b == 0) times_.push_back(t);
                                          });
        });

        const std::size_t n = reduced[0].size();
        for (int a = 0; a < basis_count_; ++a)
            for (int b = a; b < basis_count_; ++b)
                gram_[a][b].resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            for (int a = 0; a < basis_count_; ++a)
                for (int b = a; b < basis_count_; ++b)
                    gram_[a][b][k] = reduced[a][k][0] * reduced[b][k][0] +
                                     reduced[a][k][1] * reduced[b][k][1] +
                                     reduced[a][k][2] * reduced[b][k][2];
        }
        scratch_.resize(n);
    }

    const std::vector<double>& times() const { return times_; }

    /// I(t_k; theta, phi) for all samples, into an internal buffer.
    const std::vector<double>& distance_series(double theta, double phi) const {
        const auto u = coefficients(theta, phi);
        const std::size_t n = scratch_.size();
        for (std::size_t k = 0; k < n; ++k) {
            double q = u[0] * u[0] * gram_[0][0][k] + u[1] * u[1] * gram_[1][1][k] +
                       2.0 * u[0] * u[1] * gram_[0][1][k];
            if (basis_count_ > 2)
                q += u[2] * u[2] * gram_[2][2][k] +
                     2.0 * (u[0] * u[2] * gram_[0][2][k] + u[1] * u[2] * gram_[1][2][k]);
            scratch_[k] = std::sqrt(q > 0.0 ? q : 0.0);
        }
        return scratch_;
    }

    double backflow(double theta, double phi) const {
        return blp_from_trace_values(distance_series(theta, phi));
    }

private:
    int basis_count_;
    std::vector<double> times_;
    std::array<std::array<std::vector<double>, 3>, 3> gram_;
    mutable std::vector<double> scratch_;
};

/// Golden-section maximization of a smooth scalar function on [lo, hi].
template <typename F>
double golden_max(F&& f, double lo, double hi, double& best_arg, double& best_val) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 40; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    const double arg = f1 > f2 ? x1 : x2;
    const double val = f1 > f2 ? f1 : f2;
    if (val > best_val) {
        best_val = val;
        best_arg = arg;
    }
    return best_val;
}

} // namespace detail

/// Backflow measure maximized over initial orthogonal pure pairs: grid search
/// over theta in [0, pi) (and phi in [0, pi) unless restricted to the xz
/// plane), followed by a golden-section refinement of theta around the grid
/// argmax. Ties resolve to the smallest theta, then the smallest phi.
inline BlpResult<double> blp_measure(const ModelParams<double>& params,
                                     const IntegratorConfig<double>& cfg,
                                     const BlpOptions& opt = {}) {
    if (!(opt.angle_step > 0)) throw std::invalid_argument("blp_measure: angle step must be > 0");
    constexpr double pi = std::numbers::pi;
    const detail::PairFamily family(params, cfg, opt.restrict_phi, opt.workers);

    std::vector<double> phis{0.0};
    if (!opt.restrict_phi) {
        phis.clear();
        for (double p = 0.0; p < pi; p += opt.angle_step) phis.push_back(p);
    }

    double best_theta = 0.0, best_phi = 0.0, best_value = -1.0;
    for (double theta = 0.0; theta < pi; theta += opt.angle_step) {
        for (const double phi : phis) {
            const double v = family.backflow(theta, phi);
            if (v > best_value) {
                best_value = v;
                best_theta = theta;
                best_phi = phi;
            }
        }
    }

    if (opt.refine && best_value > kRateFloor) {
        const double lo = std::max(0.0, best_theta - opt.angle_step);
        const double hi = std::min(pi * (1.0 - 1e-12), best_theta + opt.angle_step);
        detail::golden_max([&](double th) { return family.backflow(th, best_phi); },
                           lo, hi, best_theta, best_value);
    }

    BlpResult<double> result;
    result.argmax_pair = {best_theta, best_phi};

    const auto& series = family.distance_series(best_theta, best_phi);
    result.value = blp_from_trace_values(series);
    result.tail_i_int = series.back();
    if (result.value > kRateFloor) {
        const auto rate = finite_difference_rate(family.times(), series);
        for (const auto& c : detect_crossings(family.times(), rate))
            if (c.direction > 0) {
                result.t_r = c.time;
                break;
            }
    }
    if (opt.want_trace)
        result.trace = distance_trace(result.argmax_pair, params, cfg);
    return result;
}

} // namespace feme

#endif // FEME_MAXIMIZE_HPP
