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

// Batch front end: one subcommand per reproduction target plus a selftest
// that exercises the analytic and brute-force verification oracles.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 I/O error.

#include <bit>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include <CLI11.hpp>

#include "feme/io.hpp"

namespace fs = std::filesystem;
using namespace feme;

namespace {

struct CliOverrides {
    CLI::App* app = nullptr;
    std::string config_path;
    std::string out_dir;
    int workers = -1;
    std::string format;
    int precision = -1;
    double lambda0 = -1, g = -1, beta = -1, omega0 = -1;
    int n_units = -1;
    double theta = -1, phi = -1;
    double dt = -1, t_end = -1;
    long sample_every = -1;
    std::string picture;
    double angle_step = -1;
    bool full_sphere = false;
    std::vector<int> n_list;
    double a_n = -1;
    double synthetic_ratio = -1;
};

void add_common_options(CLI::App* cmd, CliOverrides& o) {
    o.app = cmd;
    cmd->add_option("--config", o.config_path, "JSON configuration file");
    cmd->add_option("--out", o.out_dir, "output directory (default from config)");
    cmd->add_option("--workers", o.workers, "worker threads (0 = all cores)");
    cmd->add_option("--format", o.format, "table format: csv or json");
    cmd->add_option("--precision", o.precision, "significant digits in outputs");
    cmd->add_option("--lambda0", o.lambda0, "drive amplitude override");
    cmd->add_option("--g", o.g, "coupling rate override");
    cmd->add_option("--beta", o.beta, "inverse temperature override");
    cmd->add_option("--omega0", o.omega0, "qubit frequency override");
    cmd->add_option("--n-units", o.n_units, "calorimeter size override");
    cmd->add_option("--dt", o.dt, "integrator step override");
    cmd->add_option("--t-end", o.t_end, "truncation time override");
    cmd->add_option("--sample-every", o.sample_every, "output cadence override");
    cmd->add_option("--picture", o.picture, "interaction or schroedinger");
}

/// Folds the file config (if any) and the flags the user actually passed
/// into one resolved configuration.
RunConfig resolve_config(const CliOverrides& o) {
    json root = json::object();
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        if (!in) throw ConfigError("cannot open config file: " + o.config_path);
        try {
            in >> root;
        } catch (const json::exception& e) {
            throw ConfigError("config file is not valid JSON: " + o.config_path + ": " + e.what());
        }
    }
    auto passed = [&](const char* flag) { return o.app->count(flag) > 0; };
    if (passed("--out")) root["output"]["dir"] = o.out_dir;
    if (passed("--workers")) root["workers"] = o.workers;
    if (passed("--format")) root["output"]["format"] = o.format;
    if (passed("--precision")) root["output"]["precision"] = o.precision;
    if (passed("--lambda0")) root["model"]["lambda0"] = o.lambda0;
    if (passed("--g")) root["model"]["g"] = o.g;
    if (passed("--beta")) root["model"]["beta"] = o.beta;
    if (passed("--omega0")) root["model"]["omega0"] = o.omega0;
    if (passed("--n-units")) root["model"]["n_units"] = o.n_units;
    if (passed("--dt")) root["integrator"]["dt"] = o.dt;
    if (passed("--t-end")) root["integrator"]["t_end"] = o.t_end;
    if (passed("--sample-every")) root["integrator"]["sample_every"] = o.sample_every;
    if (passed("--picture")) root["integrator"]["picture"] = o.picture;
    if (o.app->get_option_no_throw("--theta") && passed("--theta")) root["pair"]["theta"] = o.theta;
    if (o.app->get_option_no_throw("--phi") && passed("--phi")) root["pair"]["phi"] = o.phi;
    if (o.app->get_option_no_throw("--angle-step") && passed("--angle-step"))
        root["measure"]["angle_step"] = o.angle_step;
    if (o.app->get_option_no_throw("--full-sphere") && passed("--full-sphere"))
        root["measure"]["restrict_phi"] = false;
    if (o.app->get_option_no_throw("--n-list") && passed("--n-list")) {
        root["sweep"]["n_list"] = o.n_list;
        root["trscan"]["n_list"] = o.n_list;
    }
    if (o.app->get_option_no_throw("--a-n") && passed("--a-n")) root["trscan"]["a_n"] = o.a_n;
    if (o.app->get_option_no_throw("--synthetic-ridge") && passed("--synthetic-ridge"))
        root["sweep"]["synthetic_ratio"] = o.synthetic_ratio;
    return parse_config(root);
}

fs::path prepare_output_dir(const RunConfig& cfg) {
    const fs::path dir(cfg.output.dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + dir.string());
    write_json_file(dir / "config_echo.json", config_to_json(cfg));
    return dir;
}

int cmd_trace(const RunConfig& cfg) {
    const fs::path dir = prepare_output_dir(cfg);
    const auto trace =
        distance_trace<double>({cfg.pair.theta, cfg.pair.phi}, cfg.model, cfg.integrator);
    emit_trace(dir, trace, cfg.output.format, cfg.output.precision);
    std::printf("trace: %zu samples, %zu rate sign changes -> %s\n", trace.times.size(),
                trace.crossings.size(), dir.string().c_str());
    return 0;
}

int cmd_blp(const RunConfig& cfg) {
    const fs::path dir = prepare_output_dir(cfg);
    BlpOptions opt;
    opt.angle_step = cfg.measure.angle_step;
    opt.restrict_phi = cfg.measure.restrict_phi;
    opt.workers = cfg.workers;
    opt.want_trace = false;
    const auto result = blp_measure(cfg.model, cfg.integrator, opt);
    emit_blp(dir, result, cfg.output.precision);
    std::printf("blp: value=%s theta=%s t_r=%s\n",
                format_number(result.value, 6).c_str(),
                format_number(result.argmax_pair.theta, 6).c_str(),
                result.t_r ? format_number(*result.t_r, 6).c_str() : "none");
    return 0;
}

int cmd_sweep(const RunConfig& cfg) {
    const fs::path dir = prepare_output_dir(cfg);
    const SweepSpec spec{cfg.sweep.lambda0_values, cfg.sweep.g_values};

    if (cfg.sweep.synthetic_ratio) {
        const double planted = *cfg.sweep.synthetic_ratio;
        const auto grid = synthetic_ridge_grid(spec, planted);
        const auto ridge = extract_ridge(grid);
        emit_sweep(dir, grid, ridge, cfg.output.format, cfg.output.precision);
        if (!ridge) throw NumericError("synthetic ridge: no ridge extracted");
        const double rel = std::abs(ridge->a_n - planted) / planted;
        std::printf("synthetic ridge: planted %s fitted %s (%.2f%% off)\n",
                    format_number(planted, 6).c_str(), format_number(ridge->a_n, 6).c_str(),
                    rel * 100);
        if (rel > 0.05)
            throw NumericError("synthetic ridge self-test failed: fitted ratio off by > 5%");
        return 0;
    }

    BlpOptions opt;
    opt.angle_step = cfg.sweep.angle_step;
    opt.restrict_phi = cfg.measure.restrict_phi;
    for (const int n : cfg.sweep.n_list) {
        ModelParams<double> base = cfg.model;
        base.n_units = n;
        const auto grid = run_sweep(spec, base, cfg.integrator, opt, cfg.workers);
        for (std::size_t i = 0; i < grid.lambda0_values.size(); ++i)
            for (std::size_t j = 0; j < grid.g_values.size(); ++j)
                if (grid.cell(i, j).error)
                    std::fprintf(stderr, "warning: cell (%g, %g) failed: %s\n",
                                 grid.lambda0_values[i], grid.g_values[j],
                                 grid.cell(i, j).error->c_str());
        const auto ridge = extract_ridge(grid);
        emit_sweep(dir, grid, ridge, cfg.output.format, cfg.output.precision);
        if (ridge)
            std::printf("sweep N=%d: n_max=%s a_n=%s\n", n,
                        format_number(ridge->n_max, 6).c_str(),
                        format_number(ridge->a_n, 6).c_str());
        else
            std::printf("sweep N=%d: Markovian everywhere\n", n);
    }
    return 0;
}

int cmd_trscan(const RunConfig& cfg) {
    for (const int n : cfg.trscan.n_list)
        if (!cfg.trscan.a_n.count(n))
            throw ConfigError("trscan.a_n missing for N=" + std::to_string(n) +
                              " (run sweep first and copy a_n from ridge_N" + std::to_string(n) +
                              ".json, or pass --a-n)");
    const fs::path dir = prepare_output_dir(cfg);
    BlpOptions opt;
    opt.angle_step = cfg.measure.angle_step;
    opt.restrict_phi = cfg.measure.restrict_phi;
    std::vector<TrScanResult> scans;
    for (const int n : cfg.trscan.n_list) {
        scans.push_back(tr_scan(n, cfg.trscan.a_n.at(n), cfg.trscan.lambda0_values, cfg.model,
                                cfg.integrator, opt, cfg.workers));
        const auto& s = scans.back();
        if (s.fit)
            std::printf("trscan N=%d: slope=%s intercept=%s (skipped %zu)\n", n,
                        format_number(s.fit->slope, 6).c_str(),
                        format_number(s.fit->intercept, 6).c_str(), s.skipped.size());
        else
            std::printf("trscan N=%d: underdetermined (%zu points skipped)\n", n,
                        s.skipped.size());
    }
    emit_trscan(dir, scans, cfg.output.format, cfg.output.precision);
    return 0;
}

int cmd_selftest(const RunConfig& cfg) {
    int failures = 0;
    auto report = [&](const char* name, bool ok, const std::string& detail) {
        std::printf("[%s] %s%s%s\n", ok ? "PASS" : "FAIL", name, detail.empty() ? "" : ": ",
                    detail.c_str());
        if (!ok) ++failures;
    };
    constexpr double pi = std::numbers::pi;

    { // undriven closed form vs integration
        double worst = 0.0;
        for (const int n_units : {1, 5, 20})
            for (const double g : {0.01, 0.066, 0.2})
                for (const double theta : {0.0, 0.7, pi / 2}) {
                    ModelParams<double> p;
                    p.g = g;
                    p.beta = cfg.model.beta;
                    p.n_units = n_units;
                    IntegratorConfig<double> ic;
                    const auto initial = build_difference_state<double>({theta, 0.0}, p);
                    const int m = n_units + 1;
                    detail::integrate_raw<double>(
                        initial.data(), p, ic, [&](long, double t, const auto& y) {
                            const double d00 = y.segment(0, m).sum();
                            const double re = y.segment(2 * m, m).sum();
                            const double im = y.segment(3 * m, m).sum();
                            const double dist = std::sqrt(d00 * d00 + re * re + im * im);
                            worst = std::max(worst,
                                             std::abs(dist - analytic_undriven_distance(theta, p, t)));
                        });
                }
        report("undriven analytic oracle", worst < 1e-6,
               "max deviation " + format_number(worst, 3));
    }

    { // blockwise total distance vs explicit full-space eigenvalues
        std::mt19937_64 rng(20260810);
        double worst = 0.0;
        for (const int n_units : {2, 3})
            for (int trial = 0; trial < 100; ++trial) {
                FemeState<double> s(n_units, StateMode::Difference);
                std::uniform_real_distribution<double> dist(-1.0, 1.0);
                for (auto& v : s.data().reshaped()) v = dist(rng);
                const double shift = s.total_trace() / double(2 * (n_units + 1));
                s.s00() -= shift;
                s.s11() -= shift;

                const long dim_c = 1L << n_units;
                Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(2 * dim_c, 2 * dim_c);
                std::vector<double> mult(n_units + 1, 0.0);
                for (long k = 0; k < dim_c; ++k)
                    mult[std::popcount(static_cast<unsigned long>(k))] += 1.0;
                for (long k = 0; k < dim_c; ++k) {
                    const int n = std::popcount(static_cast<unsigned long>(k));
                    const auto block = s.block(n).matrix();
                    for (int i = 0; i < 2; ++i)
                        for (int j = 0; j < 2; ++j)
                            full(i * dim_c + k, j * dim_c + k) = block(i, j) / mult[n];
                }
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(full,
                                                                       Eigen::EigenvaluesOnly);
                const double brute = 0.5 * solver.eigenvalues().cwiseAbs().sum();
                worst = std::max(worst, std::abs(external_distance(s).d_total - brute));
            }
        report("total-state trace-norm oracle", worst < 1e-10,
               "max deviation " + format_number(worst, 3));
    }

    { // planted synthetic ridges
        SweepSpec spec;
        spec.lambda0_values = detail::linspace(0.005, 0.2, 40);
        spec.g_values = spec.lambda0_values;
        bool ok = true;
        std::string detail_msg;
        for (const double planted : {0.5, 2.0, 5.0}) {
            const auto ridge = extract_ridge(synthetic_ridge_grid(spec, planted));
            const bool good = ridge && std::abs(ridge->a_n - planted) / planted < 0.05;
            ok &= good;
            detail_msg += format_number(planted, 3) + "->" +
                          (ridge ? format_number(ridge->a_n, 4) : "none") + " ";
        }
        report("synthetic ridge recovery", ok, detail_msg);
    }

    if (failures) throw NumericError(std::to_string(failures) + " selftest checks failed");
    std::printf("selftest: all checks passed\n");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"driven qubit + finite calorimeter: information-flow toolkit"};
    app.require_subcommand(1);

    CliOverrides trace_opts, blp_opts, sweep_opts, trscan_opts, selftest_opts;

    auto* trace = app.add_subcommand("trace", "distance trace of one initial pair (trace.csv)");
    add_common_options(trace, trace_opts);
    trace->add_option("--theta", trace_opts.theta, "pair polar angle");
    trace->add_option("--phi", trace_opts.phi, "pair azimuth");

    auto* blp = app.add_subcommand("blp", "maximized backflow measure (blp.json)");
    add_common_options(blp, blp_opts);
    blp->add_option("--angle-step", blp_opts.angle_step, "grid step in rad");
    blp->add_flag("--full-sphere", blp_opts.full_sphere, "search phi too");

    auto* sweep = app.add_subcommand("sweep", "(lambda0, g) grids per size (sweep_N*.csv)");
    add_common_options(sweep, sweep_opts);
    sweep->add_option("--n-list", sweep_opts.n_list, "calorimeter sizes");
    sweep->add_option("--angle-step", sweep_opts.angle_step, "per-cell grid step in rad");
    sweep->add_option("--synthetic-ridge", sweep_opts.synthetic_ratio,
                      "skip dynamics; plant a ridge at this ratio and self-test the fit");
    sweep->add_flag("--full-sphere", sweep_opts.full_sphere, "search phi too");

    auto* trscan = app.add_subcommand("trscan", "backflow onsets along lambda0 = a_N g");
    add_common_options(trscan, trscan_opts);
    trscan->add_option("--n-list", trscan_opts.n_list, "calorimeter sizes");
    trscan->add_option("--a-n", trscan_opts.a_n, "ridge ratio applied to every N");
    trscan->add_option("--angle-step", trscan_opts.angle_step, "per-point grid step in rad");

    auto* selftest = app.add_subcommand("selftest", "run the verification oracles");
    add_common_options(selftest, selftest_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (trace->parsed()) return cmd_trace(resolve_config(trace_opts));
        if (blp->parsed()) return cmd_blp(resolve_config(blp_opts));
        if (sweep->parsed()) return cmd_sweep(resolve_config(sweep_opts));
        if (trscan->parsed()) return cmd_trscan(resolve_config(trscan_opts));
        if (selftest->parsed()) return cmd_selftest(resolve_config(selftest_opts));
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return 4;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
