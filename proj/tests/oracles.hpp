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

// Test-only reference computations. Each oracle follows an independent route
// from the code under test: dense matrix exponentials for the undriven
// populations, an explicit full-Hilbert-space eigendecomposition for the
// total trace distance. Nothing here touches the integrator or the
// blockwise norm formulas.

#ifndef FEME_TESTS_ORACLES_HPP
#define FEME_TESTS_ORACLES_HPP

#include <bit>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "feme/model.hpp"
#include "feme/state.hpp"

namespace feme::test {

/// Undriven populations form a classical birth-death chain over the 2(N+1)
/// joint occupations (qubit level, calorimeter level). Returns the chain's
/// generator; columns index the source occupation, ordering
/// [u_0..u_N, w_0..w_N] with u = ground, w = excited.
inline Eigen::MatrixXd undriven_population_generator(const ModelParams<double>& p) {
    const int m = p.n_units + 1;
    Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    for (int n = 0; n < m; ++n) {
        const double up = rate_up(p, n);
        const double down = rate_down(p, n);
        // absorption: (ground, n) -> (excited, n-1)
        gen(n, n) -= up;
        if (n > 0) gen(m + n - 1, n) += up;
        // emission: (excited, n) -> (ground, n+1)
        gen(m + n, m + n) -= down;
        if (n < m - 1) gen(n + 1, m + n) += down;
    }
    return gen;
}

/// Population part of the undriven solution at time t via a dense matrix
/// exponential of the generator.
inline Eigen::VectorXd undriven_populations(const ModelParams<double>& p,
                                            const Eigen::VectorXd& initial, double t) {
    const Eigen::MatrixXd gen = undriven_population_generator(p);
    return (gen * t).exp() * initial;
}

/// Builds the explicit qubit (x) calorimeter difference matrix of dimension
/// 2 * 2^N: each block is weighted by the uniform microcanonical factor over
/// the binom(N, n) spin configurations with n excitations.
inline Eigen::MatrixXcd full_hilbert_difference(const FemeState<double>& diff) {
    const int n_units = diff.n_units();
    const long dim_c = 1L << n_units;
    Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(2 * dim_c, 2 * dim_c);
    std::vector<double> multiplicity(n_units + 1, 0.0);
    for (long k = 0; k < dim_c; ++k) multiplicity[std::popcount(static_cast<unsigned long>(k))] += 1.0;
    for (long k = 0; k < dim_c; ++k) {
        const int n = std::popcount(static_cast<unsigned long>(k));
        const auto block = diff.block(n).matrix();
        const double scale = 1.0 / multiplicity[n];
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                full(i * dim_c + k, j * dim_c + k) = block(i, j) * scale;
    }
    return full;
}

/// Total trace distance by brute force: half the sum of absolute eigenvalues
/// of the explicit difference matrix.
inline double brute_force_total_distance(const FemeState<double>& diff) {
    const Eigen::MatrixXcd full = full_hilbert_difference(diff);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(full, Eigen::EigenvaluesOnly);
    return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

/// Random Hermitian difference state: independent uniform block entries with
/// the total trace projected out.
inline FemeState<double> random_difference_state(int n_units, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    FemeState<double> s(n_units, StateMode::Difference);
    for (auto& v : s.data().reshaped()) v = dist(rng);
    const double shift = s.total_trace() / double(2 * (n_units + 1));
    s.s00() -= shift;
    s.s11() -= shift;
    return s;
}

} // namespace feme::test

#endif // FEME_TESTS_ORACLES_HPP
