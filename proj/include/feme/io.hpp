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

#ifndef FEME_IO_HPP
#define FEME_IO_HPP

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "feme/dynamics.hpp"
#include "feme/maximize.hpp"
#include "feme/measures.hpp"
#include "feme/sweep.hpp"

namespace feme {

using nlohmann::json;

enum class OutputFormat { Csv, Json };

/// Locale-independent significant-digit formatting via to_chars; NaN and
/// infinities come out as "nan" / "inf".
inline std::string format_number(double value, int precision) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value,
                                   std::chars_format::general, precision);
    return std::string(buf, res.ptr);
}

inline std::string format_number(long value) { return std::to_string(value); }

/// Rounds to the configured number of significant digits by a formatting
/// round trip; applied to JSON payload numbers so every emitted number obeys
/// the same precision setting.
inline double round_sig(double value, int precision) {
    if (!std::isfinite(value)) return value;
    const std::string s = format_number(value, precision);
    double out = value;
    std::from_chars(s.data(), s.data() + s.size(), out);
    return out;
}

/// Fully resolved run configuration: one struct per config-file section.
struct RunConfig {
    ModelParams<double> model = [] {
        ModelParams<double> p;
        p.lambda0 = 0.08;
        p.g = 0.066;
        p.beta = 2.0;
        p.n_units = 20;
        return p;
    }();
    IntegratorConfig<double> integrator;

    struct Measure {
        double angle_step = 0.08;
        bool restrict_phi = true;
    } measure;

    struct Pair {
        double theta = 1.69;
        double phi = 0.0;
    } pair;

    struct Sweep {
        std::vector<double> lambda0_values;
        std::vector<double> g_values;
        std::vector<int> n_list{5, 50, 100};
        double angle_step = 0.16;
        std::optional<double> synthetic_ratio;
    } sweep;

    struct TrScan {
        std::vector<double> lambda0_values;
        std::vector<int> n_list{5, 50, 100};
        std::map<int, double> a_n;
    } trscan;

    struct Output {
        std::string dir = ".";
        OutputFormat format = OutputFormat::Csv;
        int precision = 12;
    } output;

    int workers = 1;
};

namespace detail {

inline std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> v(count);
    for (int i = 0; i < count; ++i)
        v[i] = count == 1 ? lo : lo + (hi - lo) * double(i) / double(count - 1);
    return v;
}

inline void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                                const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok |= (key == k);
        if (!ok) throw ConfigError("unknown config key: " + where + key);
    }
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config key has the wrong type: ") + key);
    }
}

/// Axis spec: either {"values": [...]} or {"min":, "max":, "count":,
/// "spacing": "linear"|"log"}.
inline std::vector<double> parse_axis(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError("axis must be an object: " + where);
    reject_unknown_keys(j, {"values", "min", "max", "count", "spacing"}, where + ".");
    if (j.contains("values")) {
        std::vector<double> v;
        read_if(j, "values", v);
        return v;
    }
    double lo = 0, hi = 0;
    int count = 0;
    std::string spacing = "linear";
    read_if(j, "min", lo);
    read_if(j, "max", hi);
    read_if(j, "count", count);
    read_if(j, "spacing", spacing);
    if (count < 1) throw ConfigError("axis count must be >= 1: " + where);
    if (count > 1 && !(hi > lo)) throw ConfigError("axis needs max > min: " + where);
    if (spacing == "linear") return linspace(lo, hi, count);
    if (spacing != "log") throw ConfigError("axis spacing must be linear or log: " + where);
    if (!(lo > 0)) throw ConfigError("log axis needs min > 0: " + where);
    auto v = linspace(std::log(lo), std::log(hi), count);
    for (auto& x : v) x = std::exp(x);
    return v;
}

} // namespace detail

/// Parses and validates a configuration JSON document (any section may be
/// omitted; unknown keys are rejected with their path).
inline RunConfig parse_config(const json& root) {
    if (!root.is_object()) throw ConfigError("config root must be a JSON object");
    detail::reject_unknown_keys(
        root, {"model", "integrator", "measure", "pair", "sweep", "trscan", "output", "workers"},
        "");
    RunConfig cfg;

    // defaults for the axes live here so the echoed config is explicit
    cfg.sweep.lambda0_values = detail::linspace(0.005, 0.2, 40);
    cfg.sweep.g_values = detail::linspace(0.005, 0.2, 40);
    {
        auto v = detail::linspace(std::log(0.02), std::log(0.2), 9);
        for (auto& x : v) x = std::exp(x);
        cfg.trscan.lambda0_values = v;
    }

    if (root.contains("model")) {
        const auto& j = root.at("model");
        detail::reject_unknown_keys(j, {"omega0", "lambda0", "g", "beta", "n_units"}, "model.");
        detail::read_if(j, "omega0", cfg.model.omega0);
        detail::read_if(j, "lambda0", cfg.model.lambda0);
        detail::read_if(j, "g", cfg.model.g);
        detail::read_if(j, "beta", cfg.model.beta);
        detail::read_if(j, "n_units", cfg.model.n_units);
    }
    if (root.contains("integrator")) {
        const auto& j = root.at("integrator");
        detail::reject_unknown_keys(j, {"dt", "t_end", "sample_every", "picture"}, "integrator.");
        detail::read_if(j, "dt", cfg.integrator.dt);
        detail::read_if(j, "t_end", cfg.integrator.t_end);
        detail::read_if(j, "sample_every", cfg.integrator.sample_every);
        std::string picture = "interaction";
        detail::read_if(j, "picture", picture);
        if (picture == "interaction") cfg.integrator.picture = Picture::Interaction;
        else if (picture == "schroedinger") cfg.integrator.picture = Picture::Schroedinger;
        else throw ConfigError("integrator.picture must be interaction or schroedinger");
    }
    if (root.contains("measure")) {
        const auto& j = root.at("measure");
        detail::reject_unknown_keys(j, {"angle_step", "restrict_phi"}, "measure.");
        detail::read_if(j, "angle_step", cfg.measure.angle_step);
        detail::read_if(j, "restrict_phi", cfg.measure.restrict_phi);
        if (!(cfg.measure.angle_step > 0)) throw ConfigError("measure.angle_step must be > 0");
    }
    if (root.contains("pair")) {
        const auto& j = root.at("pair");
        detail::reject_unknown_keys(j, {"theta", "phi"}, "pair.");
        detail::read_if(j, "theta", cfg.pair.theta);
        detail::read_if(j, "phi", cfg.pair.phi);
    }
    if (root.contains("sweep")) {
        const auto& j = root.at("sweep");
        detail::reject_unknown_keys(
            j, {"lambda0", "g", "n_list", "angle_step", "synthetic_ratio"}, "sweep.");
        if (j.contains("lambda0")) cfg.sweep.lambda0_values = detail::parse_axis(j.at("lambda0"), "sweep.lambda0");
        if (j.contains("g")) cfg.sweep.g_values = detail::parse_axis(j.at("g"), "sweep.g");
        detail::read_if(j, "n_list", cfg.sweep.n_list);
        detail::read_if(j, "angle_step", cfg.sweep.angle_step);
        if (j.contains("synthetic_ratio")) {
            double r = 0;
            detail::read_if(j, "synthetic_ratio", r);
            cfg.sweep.synthetic_ratio = r;
        }
        if (!(cfg.sweep.angle_step > 0)) throw ConfigError("sweep.angle_step must be > 0");
    }
    if (root.contains("trscan")) {
        const auto& j = root.at("trscan");
        detail::reject_unknown_keys(j, {"lambda0", "n_list", "a_n"}, "trscan.");
        if (j.contains("lambda0"))
            cfg.trscan.lambda0_values = detail::parse_axis(j.at("lambda0"), "trscan.lambda0");
        detail::read_if(j, "n_list", cfg.trscan.n_list);
        if (j.contains("a_n")) {
            const auto& a = j.at("a_n");
            if (a.is_number()) {
                for (const int n : cfg.trscan.n_list) cfg.trscan.a_n[n] = a.get<double>();
            } else if (a.is_object()) {
                for (const auto& [key, value] : a.items()) {
                    try {
                        cfg.trscan.a_n[std::stoi(key)] = value.get<double>();
                    } catch (const std::exception&) {
                        throw ConfigError("trscan.a_n keys must be calorimeter sizes: " + key);
                    }
                }
            } else {
                throw ConfigError("trscan.a_n must be a number or an object keyed by N");
            }
        }
    }
    if (root.contains("output")) {
        const auto& j = root.at("output");
        detail::reject_unknown_keys(j, {"dir", "format", "precision"}, "output.");
        detail::read_if(j, "dir", cfg.output.dir);
        std::string format = "csv";
        detail::read_if(j, "format", format);
        if (format == "csv") cfg.output.format = OutputFormat::Csv;
        else if (format == "json") cfg.output.format = OutputFormat::Json;
        else throw ConfigError("output.format must be csv or json");
        detail::read_if(j, "precision", cfg.output.precision);
        if (cfg.output.precision < 1 || cfg.output.precision > 17)
            throw ConfigError("output.precision must be in [1, 17]");
    }
    detail::read_if(root, "workers", cfg.workers);
    if (cfg.workers < 0) throw ConfigError("workers must be >= 0");

    try {
        validate(cfg.model);
        validate(cfg.integrator);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!(cfg.pair.theta >= 0) || !(cfg.pair.theta < std::numbers::pi) ||
        !(cfg.pair.phi >= 0) || !(cfg.pair.phi < std::numbers::pi))
        throw ConfigError("pair angles must lie in [0, pi)");
    try {
        validate(SweepSpec{cfg.sweep.lambda0_values, cfg.sweep.g_values});
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("sweep axes: ") + e.what());
    }
    for (const int n : cfg.sweep.n_list)
        if (n < 1) throw ConfigError("sweep.n_list entries must be >= 1");
    for (const int n : cfg.trscan.n_list)
        if (n < 1) throw ConfigError("trscan.n_list entries must be >= 1");
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json root;
    try {
        in >> root;
    } catch (const json::exception& e) {
        throw ConfigError("config file is not valid JSON: " + path + ": " + e.what());
    }
    return parse_config(root);
}

/// The resolved configuration as explicit JSON; parsing it back reproduces
/// the identical run.
inline json config_to_json(const RunConfig& cfg) {
    json j;
    j["model"] = {{"omega0", cfg.model.omega0},
                  {"lambda0", cfg.model.lambda0},
                  {"g", cfg.model.g},
                  {"beta", cfg.model.beta},
                  {"n_units", cfg.model.n_units}};
    j["integrator"] = {
        {"dt", cfg.integrator.dt},
        {"t_end", cfg.integrator.t_end},
        {"sample_every", cfg.integrator.sample_every},
        {"picture", cfg.integrator.picture == Picture::Interaction ? "interaction" : "schroedinger"}};
    j["measure"] = {{"angle_step", cfg.measure.angle_step},
                    {"restrict_phi", cfg.measure.restrict_phi}};
    j["pair"] = {{"theta", cfg.pair.theta}, {"phi", cfg.pair.phi}};
    j["sweep"] = {{"lambda0", {{"values", cfg.sweep.lambda0_values}}},
                  {"g", {{"values", cfg.sweep.g_values}}},
                  {"n_list", cfg.sweep.n_list},
                  {"angle_step", cfg.sweep.angle_step}};
    if (cfg.sweep.synthetic_ratio) j["sweep"]["synthetic_ratio"] = *cfg.sweep.synthetic_ratio;
    j["trscan"] = {{"lambda0", {{"values", cfg.trscan.lambda0_values}}},
                   {"n_list", cfg.trscan.n_list}};
    if (!cfg.trscan.a_n.empty()) {
        json a = json::object();
        for (const auto& [n, v] : cfg.trscan.a_n) a[std::to_string(n)] = v;
        j["trscan"]["a_n"] = a;
    }
    j["output"] = {{"dir", cfg.output.dir},
                   {"format", cfg.output.format == OutputFormat::Csv ? "csv" : "json"},
                   {"precision", cfg.output.precision}};
    j["workers"] = cfg.workers;
    return j;
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary); // binary: keep \n on every platform
    if (!out) throw IoError("cannot open output file: " + path.string());
    return out;
}

inline void finish_output(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

} // namespace detail

/// Column-oriented table writer; csv emits one comma-separated line per row,
/// json emits {"columns": [...], "data": [[...], ...]}. Cells may be absent
/// (nan in csv, null in json).
class TableWriter {
public:
    using Cell = std::optional<double>;

    TableWriter(std::vector<std::string> columns, OutputFormat format, int precision)
        : columns_(std::move(columns)), format_(format), precision_(precision) {}

    void add_row(const std::vector<Cell>& row) { rows_.push_back(row); }

    /// Suggested file name: stem + ".csv" or ".json" depending on format.
    std::string file_name(const std::string& stem) const {
        return stem + (format_ == OutputFormat::Csv ? ".csv" : ".json");
    }

    void write(const std::filesystem::path& path) const {
        auto out = detail::open_output(path);
        if (format_ == OutputFormat::Csv) {
            for (std::size_t c = 0; c < columns_.size(); ++c)
                out << (c ? "," : "") << columns_[c];
            out << "\n";
            for (const auto& row : rows_) {
                for (std::size_t c = 0; c < row.size(); ++c) {
                    if (c) out << ",";
                    out << (row[c] ? format_number(*row[c], precision_) : "nan");
                }
                out << "\n";
            }
        } else {
            json j;
            j["columns"] = columns_;
            json data = json::array();
            for (const auto& row : rows_) {
                json r = json::array();
                for (const auto& cell : row)
                    r.push_back(cell ? json(round_sig(*cell, precision_)) : json(nullptr));
                data.push_back(std::move(r));
            }
            j["data"] = std::move(data);
            out << j.dump(1) << "\n";
        }
        detail::finish_output(out, path);
    }

private:
    std::vector<std::string> columns_;
    OutputFormat format_;
    int precision_;
    std::vector<std::vector<Cell>> rows_;
};

inline void write_json_file(const std::filesystem::path& path, const json& j) {
    auto out = detail::open_output(path);
    out << j.dump(1) << "\n";
    detail::finish_output(out, path);
}

/// trace.csv + crossings.csv (or .json twins) for one distance trace.
inline void emit_trace(const std::filesystem::path& dir, const DistanceTrace<double>& trace,
                       OutputFormat format, int precision) {
    TableWriter table({"t", "i_int", "i_ext", "d_total", "rate_int", "rate_ext", "rate_total"},
                      format, precision);
    for (std::size_t k = 0; k < trace.times.size(); ++k)
        table.add_row({trace.times[k], trace.i_int[k], trace.i_ext[k], trace.d_total[k],
                       trace.rate_int[k], trace.rate_ext[k],
                       trace.rate_int[k] + trace.rate_ext[k]});
    table.write(dir / table.file_name("trace"));

    TableWriter crossings({"t", "direction"}, format, precision);
    for (const auto& c : trace.crossings)
        crossings.add_row({c.time, double(c.direction)});
    crossings.write(dir / crossings.file_name("crossings"));
}

/// blp.json for one maximization result.
inline void emit_blp(const std::filesystem::path& dir, const BlpResult<double>& result,
                     int precision) {
    json j;
    j["value"] = round_sig(result.value, precision);
    j["theta"] = round_sig(result.argmax_pair.theta, precision);
    j["phi"] = round_sig(result.argmax_pair.phi, precision);
    j["t_r"] = result.t_r ? json(round_sig(*result.t_r, precision)) : json(nullptr);
    j["tail_i_int"] = round_sig(result.tail_i_int, precision);
    write_json_file(dir / "blp.json", j);
}

/// sweep_N<k>.csv plus ridge_N<k>.json for one sweep grid.
inline void emit_sweep(const std::filesystem::path& dir, const SweepGrid& grid,
                       const std::optional<RidgeFit>& ridge, OutputFormat format, int precision) {
    const std::string tag = "N" + std::to_string(grid.n_units);
    TableWriter table({"lambda0", "g", "blp", "theta_max", "t_r"}, format, precision);
    for (std::size_t i = 0; i < grid.lambda0_values.size(); ++i)
        for (std::size_t j = 0; j < grid.g_values.size(); ++j) {
            const auto& cell = grid.cell(i, j);
            table.add_row({grid.lambda0_values[i], grid.g_values[j], cell.value, cell.theta_max,
                           cell.t_r ? TableWriter::Cell(*cell.t_r) : std::nullopt});
        }
    table.write(dir / table.file_name("sweep_" + tag));

    json j;
    if (ridge) {
        j["a_n"] = round_sig(ridge->a_n, precision);
        j["n_max"] = round_sig(ridge->n_max, precision);
        j["peak_lambda0"] = round_sig(ridge->peak_lambda0, precision);
        j["peak_g"] = round_sig(ridge->peak_g, precision);
        j["residual"] = round_sig(ridge->residual, precision);
        j["markovian"] = false;
    } else {
        j["a_n"] = nullptr;
        j["n_max"] = nullptr;
        j["peak_lambda0"] = nullptr;
        j["peak_g"] = nullptr;
        j["residual"] = nullptr;
        j["markovian"] = true;
    }
    write_json_file(dir / ("ridge_" + tag + ".json"), j);
}

/// trscan_N<k>.csv per size plus one shared trscan_fit.json.
inline void emit_trscan(const std::filesystem::path& dir, const std::vector<TrScanResult>& scans,
                        OutputFormat format, int precision) {
    json fits = json::object();
    for (const auto& scan : scans) {
        const std::string tag = "N" + std::to_string(scan.n_units);
        TableWriter table({"lambda0", "g", "t_r"}, format, precision);
        for (const auto& pt : scan.points)
            table.add_row({pt.lambda0, pt.g, pt.t_r ? TableWriter::Cell(*pt.t_r) : std::nullopt});
        table.write(dir / table.file_name("trscan_" + tag));

        json f;
        f["a_n"] = round_sig(scan.a_n, precision);
        if (scan.fit) {
            f["slope"] = round_sig(scan.fit->slope, precision);
            f["intercept"] = round_sig(scan.fit->intercept, precision);
            f["underdetermined"] = false;
        } else {
            f["slope"] = nullptr;
            f["intercept"] = nullptr;
            f["underdetermined"] = true;
        }
        json skipped = json::array();
        for (const double l : scan.skipped) skipped.push_back(round_sig(l, precision));
        f["skipped"] = std::move(skipped);
        fits[tag] = std::move(f);
    }
    write_json_file(dir / "trscan_fit.json", fits);
}

} // namespace feme

#endif // FEME_IO_HPP
