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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "feme/maximize.hpp"
#include "feme/measures.hpp"
#include "oracles.hpp"

using namespace feme;
constexpr double pi = std::numbers::pi;

namespace {
ModelParams<double> reference_params() {
    ModelParams<double> p;
    p.lambda0 = 0.08;
    p.g = 0.066;
    p.beta = 2.0;
    p.n_units = 20;
    return p;
}

Matrix2c<double> traceless(double d, std::complex<double> c) {
    Matrix2c<double> m;
    m << std::complex<double>(d, 0), c, std::conj(c), std::complex<double>(-d, 0);
    return m;
}
} // namespace

TEST_CASE("internal distance on canonical differences") {
    CHECK(internal_distance(traceless(0.6, {0.0, 0.0})) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(internal_distance(traceless(0.0, {0.8, 0.0})) == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(internal_distance(traceless(0.3, {0.0, 0.4})) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("internal distance rejects non-traceless and non-Hermitian input") {
    Matrix2c<double> m;
    m << std::complex<double>(0.4, 0), std::complex<double>(0.1, 0),
        std::complex<double>(0.1, 0), std::complex<double>(-0.2, 0);
    CHECK_THROWS_WITH_AS(internal_distance(m), doctest::Contains("traceless"),
                         std::invalid_argument);
    m << std::complex<double>(0.4, 0), std::complex<double>(0.1, 0.2),
        std::complex<double>(0.1, 0.2), std::complex<double>(-0.4, 0);
    CHECK_THROWS_WITH_AS(internal_distance(m), doctest::Contains("Hermitian"),
                         std::invalid_argument);
}

TEST_CASE("internal distance is symmetric and positively homogeneous") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double d = dist(rng);
        const std::complex<double> c{dist(rng), dist(rng)};
        const double scale = std::abs(dist(rng)) * 2.0;
        const double base = internal_distance(traceless(d, c));
        CHECK(internal_distance(traceless(-d, -c)) == doctest::Approx(base).epsilon(1e-13));
        CHECK(internal_distance(traceless(scale * d, scale * c)) ==
              doctest::Approx(scale * base).epsilon(1e-12));
    }
}

TEST_CASE("external distance at t=0: everything is in the qubit") {
    const auto p = reference_params();
    const auto s = build_difference_state<double>({1.69, 0.0}, p);
    const auto ext = external_distance(s);
    CHECK(ext.d_total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(ext.i_ext) < 1e-12);
}

TEST_CASE("external distance of a single nonzero block") {
    FemeState<double> s(4, StateMode::Difference);
    s.set_block(2, {0.3, -0.3, {0.1, 0.2}});
    const auto ext = external_distance(s);
    CHECK(ext.d_total ==
          doctest::Approx(block_half_trace_norm(0.3, -0.3, 0.1, 0.2)).epsilon(1e-14));
}

TEST_CASE("external distance requires difference mode") {
    FemeState<double> s(2, StateMode::State);
    CHECK_THROWS_WITH_AS(external_distance(s), doctest::Contains("difference"),
                         std::invalid_argument);
}

TEST_CASE("blockwise total distance equals the full-Hilbert-space eigenvalues") {
    std::mt19937_64 rng(12345);
    for (const int n_units : {2, 3}) {
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const auto s = test::random_difference_state(n_units, rng);
            const auto ext = external_distance(s);
            worst = std::max(worst, std::abs(ext.d_total - test::brute_force_total_distance(s)));
        }
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("undriven trace: monotone decay, no crossings, zero measure") {
    ModelParams<double> p;
    p.g = 0.066;
    p.beta = 2.0;
    p.n_units = 5;
    IntegratorConfig<double> cfg;
    const auto trace = distance_trace<double>({0.7, 0.0}, p, cfg);
    CHECK(trace.i_int.front() == doctest::Approx(1.0).epsilon(1e-12));
    for (const double r : trace.rate_int) CHECK(r <= kRateFloor);
    for (std::size_t k = 1; k < trace.i_int.size(); ++k)
        CHECK(trace.i_int[k] <= trace.i_int[k - 1] + 1e-12);
    CHECK(trace.crossings.empty());
    CHECK(blp_from_trace(trace) == 0.0);
    CHECK(!backflow_onset(trace).has_value());
}

TEST_CASE("driven reference trace: backflow interval, lossy total") {
    const auto p = reference_params();
    IntegratorConfig<double> cfg;
    cfg.t_end = 150.0; // includes the first backflow onset
    const auto trace = distance_trace<double>({1.69, 0.0}, p, cfg);
    CHECK(trace.rate_int.front() < 0.0);
    bool positive_interval = false;
    for (const double r : trace.rate_int) positive_interval |= (r > 1e-6);
    CHECK(positive_interval);
    const auto onset = backflow_onset(trace);
    REQUIRE(onset.has_value());
    CHECK(*onset > 0.0);
    // total information only leaks: i_int + i_ext sampled rates stay <= 0
    for (std::size_t k = 0; k < trace.rate_int.size(); ++k)
        CHECK(trace.rate_int[k] + trace.rate_ext[k] <= 1e-12);
    // distances stay ordered
    for (std::size_t k = 0; k < trace.i_int.size(); ++k) {
        CHECK(trace.i_int[k] <= trace.d_total[k] + 1e-12);
        CHECK(trace.i_ext[k] >= -1e-12);
    }
}

TEST_CASE("backflow measure telescopes ascending runs") {
    DistanceTrace<double> t;
    t.times = {0, 1, 2, 3, 4};
    t.i_int = {1.0, 0.4, 0.6, 0.3, 0.35};
    CHECK(blp_from_trace(t) == doctest::Approx(0.25).epsilon(1e-15));
    t.i_int = {1.0, 0.8, 0.6, 0.5, 0.45};
    CHECK(blp_from_trace(t) == 0.0);
}

TEST_CASE("backflow onset interpolates the rate zero") {
    DistanceTrace<double> t;
    t.times = {0.0, 1.0, 2.0};
    t.i_int = {1.0, 1.0, 1.0}; // unused
    t.rate_int = {-1.0, -0.5, 0.5};
    const auto onset = backflow_onset(t);
    REQUIRE(onset.has_value());
    CHECK(*onset == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("closed-form rate agrees with finite differences away from coalescence") {
    const auto p = reference_params();
    IntegratorConfig<double> cfg;
    cfg.t_end = 80.0;
    const BlochPair<double> pair{1.69, 0.0};
    const auto trace = distance_trace(pair, p, cfg);

    // rebuild states to evaluate the closed form at matching times
    const auto initial = build_difference_state(pair, p);
    std::vector<double> closed;
    detail::integrate_raw<double>(initial.data(), p, cfg, [&](long, double t, const auto& y) {
        FemeState<double> s(p.n_units, StateMode::Difference);
        s.data() = y;
        const auto d = feme_rhs(s, t, p);
        closed.push_back(trace_distance_rate(reduce_state(s), reduce_state(d)));
    });
    REQUIRE(closed.size() == trace.rate_int.size());
    for (std::size_t k = 1; k + 1 < closed.size(); ++k) {
        if (trace.i_int[k] < 0.01) continue;
        CHECK(trace.rate_int[k] == doctest::Approx(closed[k]).epsilon(5e-4).scale(1.0));
    }
}

TEST_CASE("undriven maximization is Markovian") {
    ModelParams<double> p;
    p.g = 0.066;
    p.beta = 2.0;
    p.n_units = 5;
    IntegratorConfig<double> cfg;
    BlpOptions opt;
    opt.want_trace = false;
    const auto r = blp_measure(p, cfg, opt);
    CHECK(r.value < 1e-10);
    CHECK(!r.t_r.has_value());
}

TEST_CASE("reference-point maximization lands near the known argmax") {
    const auto p = reference_params();
    IntegratorConfig<double> cfg;
    BlpOptions opt;
    opt.want_trace = true;
    const auto r = blp_measure(p, cfg, opt);
    CHECK(r.value > 0.0);
    CHECK(r.argmax_pair.theta == doctest::Approx(1.69).epsilon(0.05));
    CHECK(r.argmax_pair.phi == 0.0);
    REQUIRE(r.t_r.has_value());
    CHECK(*r.t_r > 0.0);
    // the returned full trace reproduces the maximizer's value
    CHECK(blp_from_trace(r.trace) == doctest::Approx(r.value).epsilon(1e-9));
    const auto onset = backflow_onset(r.trace);
    REQUIRE(onset.has_value());
    CHECK(*onset == doctest::Approx(*r.t_r).epsilon(1e-9));
    CHECK(r.tail_i_int < 1e-4); // truncation left essentially nothing
}

TEST_CASE("grid ties resolve to the smallest angles") {
    ModelParams<double> p;
    p.g = 0.05;
    p.beta = 2.0;
    p.n_units = 3;
    IntegratorConfig<double> cfg;
    cfg.t_end = 5.0;
    BlpOptions opt;
    opt.want_trace = false;
    opt.restrict_phi = false;
    const auto r = blp_measure(p, cfg, opt); // undriven: all angles tie at zero
    CHECK(r.argmax_pair.theta == 0.0);
    CHECK(r.argmax_pair.phi == 0.0);
}
