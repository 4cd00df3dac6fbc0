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

#ifndef FEME_SWEEP_HPP
#define FEME_SWEEP_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "feme/maximize.hpp"
#include "feme/parallel.hpp"

namespace feme {

/// Axes of a (lambda0, g) sweep; both sequences strictly increasing.
struct SweepSpec {
    std::vector<double> lambda0_values;
    std::vector<double> g_values;
};

inline void validate(const SweepSpec& spec) {
    auto check = [](const std::vector<double>& v, const char* name) {
        if (v.empty()) throw std::invalid_argument(std::string("SweepSpec: empty axis ") + name);
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!(v[i] >= 0)) throw std::invalid_argument(std::string("SweepSpec: negative ") + name);
            if (i > 0 && !(v[i] > v[i - 1]))
                throw std::invalid_argument(std::string("SweepSpec: axis not strictly increasing: ") + name);
        }
    };
    check(spec.lambda0_values, "lambda0");
    check(spec.g_values, "g");
}

/// Per-cell summary of the maximized backflow measure.
struct SweepCell {
    double value = 0.0;               ///< maximized measure; NaN when errored
    double theta_max = 0.0;           ///< argmax polar angle
    std::optional<double> t_r;        ///< first backflow time, absent if none
    std::optional<std::string> error; ///< failure marker; the sweep continues
};

struct SweepGrid {
    std::vector<double> lambda0_values;
    std::vector<double> g_values;
    int n_units = 0;
    std::vector<SweepCell> cells; ///< row-major: index = i_lambda * |g| + j_g

    const SweepCell& cell(std::size_t i_lambda, std::size_t j_g) const {
        return cells[i_lambda * g_values.size() + j_g];
    }
};

/// Evaluates the maximized backflow measure on every (lambda0, g) cell.
/// Cells are independent work items; each writes only its own slot, so the
/// result is identical for any worker count. Per-cell failures are recorded
/// in the cell instead of aborting the grid.
inline SweepGrid run_sweep(const SweepSpec& spec, const ModelParams<double>& base,
                           const IntegratorConfig<double>& cfg, const BlpOptions& cell_options,
                           int workers = 1) {
    validate(spec);
    validate(base);
    SweepGrid grid;
    grid.lambda0_values = spec.lambda0_values;
    grid.g_values = spec.g_values;
    grid.n_units = base.n_units;
    const std::size_t n_l = spec.lambda0_values.size();
    const std::size_t n_g = spec.g_values.size();
    grid.cells.resize(n_l * n_g);

    BlpOptions opt = cell_options;
    opt.want_trace = false; // cells keep summaries only
    opt.workers = 1;        // concurrency lives at the cell level

    parallel_for(n_l * n_g, workers, [&](std::size_t idx) {
        ModelParams<double> p = base;
        p.lambda0 = spec.lambda0_values[idx / n_g];
        p.g = spec.g_values[idx % n_g];
        SweepCell& cell = grid.cells[idx];
        try {
            const auto r = blp_measure(p, cfg, opt);
            cell.value = r.value;
            cell.theta_max = r.argmax_pair.theta;
            cell.t_r = r.t_r;
        } catch (const std::exception& e) {
            cell.value = std::numeric_limits<double>::quiet_NaN();
            cell.error = e.what();
        }
    });
    return grid;
}

/// Peak of a sweep and the ray lambda0 = a_N * g it sits on.
struct RidgeFit {
    double a_n = 0.0;        ///< fitted ratio lambda0 / g of the ridge
    double n_max = 0.0;      ///< peak measure over the grid
    double peak_lambda0 = 0.0;
    double peak_g = 0.0;
    double residual = 0.0;   ///< relative rms of lambda0 - a_n * g over the fit band
    std::vector<std::pair<std::size_t, std::size_t>> fit_cells; ///< (i_lambda, j_g) used
};

/// Fits the constant-ratio ray through the sweep peak: cells within the top
/// decile of the peak value (value >= 0.9 * max) enter a least-squares line
/// through the origin. Columns whose band is clipped by the lambda0 axis
/// boundary are excluded; a clipped band is asymmetric and biases the slope.
/// Returns nothing when every cell is Markovian.
inline std::optional<RidgeFit> extract_ridge(const SweepGrid& grid) {
    const std::size_t n_l = grid.lambda0_values.size();
    const std::size_t n_g = grid.g_values.size();

    double n_max = 0.0;
    std::size_t pi = 0, pj = 0;
    for (std::size_t i = 0; i < n_l; ++i)
        for (std::size_t j = 0; j < n_g; ++j) {
            const auto& c = grid.cell(i, j);
            if (!c.error && c.value > n_max) {
                n_max = c.value;
                pi = i;
                pj = j;
            }
        }
    if (n_max <= kRateFloor) return std::nullopt;

    std::vector<std::pair<std::size_t, std::size_t>> band;
    std::vector<bool> clipped(n_g, false);
    for (std::size_t i = 0; i < n_l; ++i)
        for (std::size_t j = 0; j < n_g; ++j) {
            const auto& c = grid.cell(i, j);
            if (c.error || !(c.value >= 0.9 * n_max)) continue;
            band.emplace_back(i, j);
            if (i == 0 || i == n_l - 1) clipped[j] = true;
        }
    std::vector<std::pair<std::size_t, std::size_t>> fit;
    for (const auto& cell : band)
        if (!clipped[cell.second]) fit.push_back(cell);
    if (fit.size() < 3) fit = band; // too aggressive a cut; keep the raw band

    double s_lg = 0.0, s_gg = 0.0;
    for (const auto& [i, j] : fit) {
        s_lg += grid.lambda0_values[i] * grid.g_values[j];
        s_gg += grid.g_values[j] * grid.g_values[j];
    }
    RidgeFit out;
    out.a_n = s_lg / s_gg;
    out.n_max = n_max;
    out.peak_lambda0 = grid.lambda0_values[pi];
    out.peak_g = grid.g_values[pj];
    double ss = 0.0, mean_l = 0.0;
    for (const auto& [i, j] : fit) {
        const double r = grid.lambda0_values[i] - out.a_n * grid.g_values[j];
        ss += r * r;
        mean_l += grid.lambda0_values[i];
    }
    mean_l /= double(fit.size());
    out.residual = std::sqrt(ss / double(fit.size())) / mean_l;
    out.fit_cells = std::move(fit);
    return out;
}

/// Synthetic sweep with a planted ridge N(lambda0, g) = exp(-(lambda0/g - ratio)^2);
/// exercises the ridge extraction without any dynamics.
inline SweepGrid synthetic_ridge_grid(const SweepSpec& spec, double ratio, int n_units = 0) {
    validate(spec);
    SweepGrid grid;
    grid.lambda0_values = spec.lambda0_values;
    grid.g_values = spec.g_values;
    grid.n_units = n_units;
    grid.cells.reserve(spec.lambda0_values.size() * spec.g_values.size());
    for (const double l : spec.lambda0_values)
        for (const double g : spec.g_values) {
            SweepCell cell;
            const double r = l / g - ratio;
            cell.value = std::exp(-r * r);
            grid.cells.push_back(cell);
        }
    return grid;
}

struct TrScanPoint {
    double lambda0 = 0.0;
    double g = 0.0;
    std::optional<double> t_r;
};

struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;
};

struct TrScanResult {
    int n_units = 0;
    double a_n = 0.0;
    std::vector<TrScanPoint> points;
    std::optional<LogLogFit> fit;  ///< absent when fewer than two backflow points
    std::vector<double> skipped;   ///< lambda0 of points without backflow
};

/// Backflow onset times along the constant-ratio ray lambda0 = a_n * g: for
/// each drive amplitude the coupling is g = lambda0 / a_n, the measure is
/// maximized over pairs, and the onset time of its argmax pair is recorded.
/// A log-log line through the valid points captures the t_R ~ 1/lambda0 law.
inline TrScanResult tr_scan(int n_units, double a_n, const std::vector<double>& lambda0_values,
                            const ModelParams<double>& base, const IntegratorConfig<double>& cfg,
                            const BlpOptions& options, int workers = 1) {
    if (!(a_n > 0)) throw std::invalid_argument("tr_scan: a_n must be > 0");
    if (lambda0_values.empty()) throw std::invalid_argument("tr_scan: no lambda0 values");
    TrScanResult result;
    result.n_units = n_units;
    result.a_n = a_n;
    result.points.resize(lambda0_values.size());

    BlpOptions opt = options;
    opt.want_trace = false;
    opt.workers = 1;

    parallel_for(lambda0_values.size(), workers, [&](std::size_t i) {
        ModelParams<double> p = base;
        p.n_units = n_units;
        p.lambda0 = lambda0_values[i];
        p.g = lambda0_values[i] / a_n;
        const auto r = blp_measure(p, cfg, opt);
        result.points[i] = {p.lambda0, p.g, r.t_r};
    });

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (const auto& pt : result.points) {
        if (!pt.t_r) {
            result.skipped.push_back(pt.lambda0);
            continue;
        }
        const double x = std::log(pt.lambda0);
        const double y = std::log(*pt.t_r);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n >= 2) {
        const double denom = double(n) * sxx - sx * sx;
        result.fit = LogLogFit{(double(n) * sxy - sx * sy) / denom, (sy * sxx - sx * sxy) / denom};
    }
    return result;
}

} // namespace feme

#endif // FEME_SWEEP_HPP
