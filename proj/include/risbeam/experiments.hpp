// SPDX-License-Identifier: Apache-2.0
//
// risbeam: cooperative beamforming for multi-RIS-assisted downlink systems
// Copyright (C) 2026 The risbeam authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef RISBEAM_EXPERIMENTS_HPP
#define RISBEAM_EXPERIMENTS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "risbeam/channel.hpp"
#include "risbeam/model.hpp"
#include "risbeam/numerics.hpp"
#include "risbeam/solver.hpp"

namespace risbeam {

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Output file could not be written.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class SweepAxis {
    snr_db,
    elements_per_ris,
    quantization_bits,
    csi_error_variance,
    ris1_x_position,
    ris_count,
    element_split,
};

inline constexpr std::array<std::pair<SweepAxis, std::string_view>, 7> kAxisNames{{
    {SweepAxis::snr_db, "snr-dB"},
    {SweepAxis::elements_per_ris, "elements-per-RIS"},
    {SweepAxis::quantization_bits, "quantization-bits"},
    {SweepAxis::csi_error_variance, "csi-error-variance"},
    {SweepAxis::ris1_x_position, "ris1-x-position"},
    {SweepAxis::ris_count, "ris-count-L"},
    {SweepAxis::element_split, "element-split-N1"},
}};

inline std::string_view to_string(SweepAxis a) {
    for (const auto& [v, name] : kAxisNames)
        if (v == a) return name;
    return "?";
}

inline SweepAxis parse_axis(std::string_view s) {
    for (const auto& [v, name] : kAxisNames)
        if (name == s) return v;
    throw ConfigError("axis: unknown sweep axis '" + std::string(s) + "'");
}

enum class Method { proposed, continuous, random_phase, single_reflection, single_ris };

inline std::string_view to_string(Method m) {
    switch (m) {
        case Method::proposed: return "proposed";
        case Method::continuous: return "continuous";
        case Method::random_phase: return "random-phase";
        case Method::single_reflection: return "single-reflection";
        case Method::single_ris: return "single-ris";
    }
    return "?";
}

struct Baselines {
    bool random_phase = false;
    bool single_reflection = false;
    bool single_ris = false;
};

struct ExperimentSpec {
    SystemConfig base;
    SweepAxis axis = SweepAxis::snr_db;
    std::vector<double> values;
    std::size_t realizations = 100;
    std::uint64_t seed = 1;
    SolverOptions solver;
    Baselines baselines;
    Vec3 single_ris_position{5.0, 0.0, 3.0};
    double mirror_span = 20.0;        // ris1-x-position: RIS 1 sits at mirror_span - x
    std::size_t element_total = 60;   // ris-count-L and element-split-N1
    ErrorScale csi_error_scale = ErrorScale::channel_gain;
    bool record_timing = false;       // mean_ms is left empty otherwise
    unsigned threads = 0;             // 0: hardware concurrency

    void validate() const {
        if (realizations < 1) throw ConfigError("realizations: must be >= 1");
        if (values.empty()) throw ConfigError("values: must be non-empty");
        try {
            base.validate();
            solver.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
};

struct RunRecord {
    std::string axis;
    double axis_value = 0.0;
    std::string method;
    double mean_rate = 0.0;
    double std_rate = 0.0;
    std::size_t realizations = 0;
    double mean_iters = 0.0;
    std::optional<double> mean_ms;
};

/// Fully resolved configuration of one axis value.
struct SpecPoint {
    SystemConfig cfg;
    SolverOptions solver;
    double csi_error = 0.0;
    ErrorScale csi_error_scale = ErrorScale::channel_gain;
    std::optional<unsigned> bits;
    Vec3 single_ris_position;
    std::size_t realizations = 1;
    std::uint64_t seed = 1;
    bool record_timing = false;
    unsigned threads = 0;
};

namespace detail {

inline constexpr std::array<std::array<double, 6>, 6> kRisCountLayout{{
    {1, 0, 0, 0, 0, 0},
    {1, 9, 0, 0, 0, 0},
    {1, 5, 9, 0, 0, 0},
    {1, 3, 6, 9, 0, 0},
    {1, 3, 5, 7, 9, 0},
    {0, 2, 4, 6, 8, 10},
}};

inline std::size_t integral_value(double v, const char* what) {
    if (!(v >= 1.0) || v != std::floor(v) || v > 1e9) throw ConfigError(std::string(what) + ": must be a positive integer");
    return static_cast<std::size_t>(v);
}

inline RisConfig grid_ris(std::size_t n, const RisConfig& like, double x) {
    const auto [nx, ny] = near_square_grid(n);
    RisConfig r = like;
    r.nx = nx;
    r.ny = ny;
    r.position.x = x;
    return r;
}

/// Compensated running sum.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double v) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

inline std::uint64_t error_stream_seed(std::uint64_t seed) { return seed ^ 0x9E3779B97F4A7C15ULL; }

}  // namespace detail

/// Applies one axis value to the base configuration.
inline SpecPoint make_point(const ExperimentSpec& spec, double value) {
    SpecPoint pt;
    pt.cfg = spec.base;
    pt.solver = spec.solver;
    pt.single_ris_position = spec.single_ris_position;
    pt.realizations = spec.realizations;
    pt.seed = spec.seed;
    pt.csi_error_scale = spec.csi_error_scale;
    pt.record_timing = spec.record_timing;
    pt.threads = spec.threads;
    auto& cfg = pt.cfg;
    switch (spec.axis) {
        case SweepAxis::snr_db:
            if (!std::isfinite(value)) throw ConfigError("values: SNR must be finite");
            cfg.tx_power_w = cfg.noise_power_w * std::pow(10.0, value / 10.0);
            break;
        case SweepAxis::elements_per_ris: {
            const std::size_t n = detail::integral_value(value, "values");
            for (auto& r : cfg.ris) r = detail::grid_ris(n, r, r.position.x);
            break;
        }
        case SweepAxis::quantization_bits: {
            const std::size_t b = detail::integral_value(value, "values");
            if (b > 30) throw ConfigError("values: quantization bits must be <= 30");
            pt.bits = static_cast<unsigned>(b);
            break;
        }
        case SweepAxis::csi_error_variance:
            if (!(value >= 0.0) || !std::isfinite(value)) throw ConfigError("values: error variance must be >= 0");
            pt.csi_error = value;
            break;
        case SweepAxis::ris1_x_position:
            if (cfg.ris.size() != 2) throw ConfigError("axis: ris1-x-position needs exactly two RISs in base.ris");
            cfg.ris[0].position.x = value;
            cfg.ris[1].position.x = spec.mirror_span - value;
            if (cfg.ris[0].position == cfg.ris[1].position)
                throw ConfigError("values: ris1-x-position places both RISs at the same point");
            break;
        case SweepAxis::ris_count: {
            const std::size_t L = detail::integral_value(value, "values");
            if (L > detail::kRisCountLayout.size()) throw ConfigError("values: ris-count-L supports at most 6 RISs");
            if (spec.element_total % L != 0) throw ConfigError("element_total: must be divisible by every RIS count");
            const RisConfig like = cfg.ris.front();
            cfg.ris.clear();
            for (std::size_t l = 0; l < L; ++l)
                cfg.ris.push_back(detail::grid_ris(spec.element_total / L, like, detail::kRisCountLayout[L - 1][l]));
            break;
        }
        case SweepAxis::element_split: {
            const std::size_t n1 = detail::integral_value(value, "values");
            if (cfg.ris.size() != 2) throw ConfigError("axis: element-split-N1 needs exactly two RISs in base.ris");
            if (n1 >= spec.element_total) throw ConfigError("values: element split exceeds element_total");
            cfg.ris[0] = detail::grid_ris(n1, cfg.ris[0], cfg.ris[0].position.x);
            cfg.ris[1] = detail::grid_ris(spec.element_total - n1, cfg.ris[1], cfg.ris[1].position.x);
            break;
        }
    }
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return pt;
}

/// Methods evaluated at every point of a sweep, in output order.
inline std::vector<Method> sweep_methods(const ExperimentSpec& spec) {
    std::vector<Method> m{Method::proposed};
    if (spec.axis == SweepAxis::quantization_bits) m.push_back(Method::continuous);
    if (spec.baselines.random_phase) m.push_back(Method::random_phase);
    if (spec.baselines.single_reflection) m.push_back(Method::single_reflection);
    if (spec.baselines.single_ris) m.push_back(Method::single_ris);
    return m;
}

struct RealizationResult {
    double rate = 0.0;
    double iterations = 0.0;
    double ms = 0.0;
};

/// One realization of one method. Channels, users and initial phases depend only
/// on (seed, index), so every method and axis value sees paired draws.
inline RealizationResult run_realization(const SpecPoint& pt, Method method, std::size_t index) {
    const std::uint64_t seed = pt.seed + index;
    const LinkBudget budget{pt.cfg.tx_power_w, pt.cfg.noise_power_w};
    SolverOptions opts = pt.solver;

    if (method == Method::single_ris) {
        SystemConfig one = pt.cfg;
        const auto [nx, ny] = near_square_grid(pt.cfg.total_elements());
        one.ris = {RisConfig{nx, ny, pt.single_ris_position, pt.cfg.ris.front().orientation}};
        Rng rng(seed);
        const ChannelSet set = gen_channel_set(one, rng);
        auto [st, rep] = run(set, budget, opts, rng);
        return {rep.sum_rate, static_cast<double>(rep.iterations), rep.wall_ms};
    }

    Rng rng(seed);
    const ChannelSet truth =
        gen_channel_set(pt.cfg, rng, ChannelOptions{.direct_bs_links = method == Method::single_reflection});

    if (method == Method::single_reflection) {
        const ChannelSet flat = stack_single_reflection(truth);
        auto [st, rep] = run(flat, budget, opts, rng);
        return {rep.sum_rate, static_cast<double>(rep.iterations), rep.wall_ms};
    }

    const PhaseSet initial = PhaseSet::random(truth, rng);
    ChannelSet estimate = truth;
    if (pt.csi_error > 0.0) {
        Rng err(detail::error_stream_seed(seed));
        estimate = perturb_channels(truth, pt.csi_error, err, pt.csi_error_scale);
    }
    if (method == Method::random_phase) opts.optimize_phases = false;
    if (method == Method::proposed && pt.bits) opts.phase_bits = *pt.bits;

    auto [st, rep] = run(estimate, budget, opts, rng, initial);
    const double rate = sum_rate(equivalent_channels(truth, st.phases), st.W, budget.noise_power);
    return {rate, static_cast<double>(rep.iterations), rep.wall_ms};
}

/// Mean and sample standard deviation over the point's realizations, run concurrently.
inline RunRecord monte_carlo(const SpecPoint& pt, Method method) {
    const std::size_t R = pt.realizations;
    if (R < 1) throw ConfigError("realizations: must be >= 1");
    std::vector<RealizationResult> res(R);
    std::vector<std::exception_ptr> errors(R);
    unsigned threads = pt.threads ? pt.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, R));
    auto worker = [&](unsigned t) {
        for (std::size_t i = t; i < R; i += threads) {
            try {
                res[i] = run_realization(pt, method, i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
        for (auto& th : pool) th.join();
    }
    for (std::size_t i = 0; i < R; ++i) {
        if (!errors[i]) continue;
        try {
            std::rethrow_exception(errors[i]);
        } catch (const std::exception& e) {
            throw std::runtime_error("realization " + std::to_string(i) + ": " + e.what());
        }
    }

    detail::KahanSum rate, iters, ms;
    for (const auto& r : res) {
        rate.add(r.rate);
        iters.add(r.iterations);
        ms.add(r.ms);
    }
    const double n = static_cast<double>(R);
    RunRecord rec;
    rec.method = std::string(to_string(method));
    rec.realizations = R;
    rec.mean_rate = rate.sum / n;
    rec.mean_iters = iters.sum / n;
    if (pt.record_timing) rec.mean_ms = ms.sum / n;
    if (R > 1) {
        detail::KahanSum sq;
        for (const auto& r : res) sq.add((r.rate - rec.mean_rate) * (r.rate - rec.mean_rate));
        rec.std_rate = std::sqrt(sq.sum / (n - 1.0));
    }
    return rec;
}

/// One record per (axis value, method), axis values in spec order.
inline std::vector<RunRecord> run_sweep(const ExperimentSpec& spec) {
    spec.validate();
    std::vector<SpecPoint> points;
    for (double v : spec.values) points.push_back(make_point(spec, v));
    std::vector<RunRecord> out;
    for (std::size_t p = 0; p < points.size(); ++p) {
        for (Method m : sweep_methods(spec)) {
            SpecPoint pt = points[p];
            if (m == Method::continuous) pt.bits.reset();
            RunRecord rec = monte_carlo(pt, m);
            rec.axis = std::string(to_string(spec.axis));
            rec.axis_value = spec.values[p];
            out.push_back(std::move(rec));
        }
    }
    return out;
}

// ---- CSV ---------------------------------------------------------------------------

inline constexpr std::string_view kCsvHeader = "axis,axis_value,method,mean_rate,std_rate,realizations,mean_iters,mean_ms";

inline std::string format_g6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string csv_text(const std::vector<RunRecord>& records) {
    std::string s(kCsvHeader);
    s += '\n';
    for (const auto& r : records) {
        s += r.axis + ',' + format_g6(r.axis_value) + ',' + r.method + ',' + format_g6(r.mean_rate) + ',' +
             format_g6(r.std_rate) + ',' + std::to_string(r.realizations) + ',' + format_g6(r.mean_iters) + ',';
        if (r.mean_ms) s += format_g6(*r.mean_ms);
        s += '\n';
    }
    return s;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << text;
    f.flush();
    if (!f) throw IoError("failed writing '" + path + "'");
}

inline void write_csv(const std::vector<RunRecord>& records, const std::string& path) {
    write_text(path, csv_text(records));
}

/// Objective trajectory as `iter,objective`, iterations numbered from 1.
inline std::string convergence_csv_text(const std::vector<double>& objective) {
    std::string s = "iter,objective\n";
    for (std::size_t i = 0; i < objective.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.10g", objective[i]);
        s += std::to_string(i + 1) + ',' + buf + '\n';
    }
    return s;
}

// ---- JSON configuration --------------------------------------------------------------

namespace detail {

using json = nlohmann::json;

inline void check_keys(const json& j, const std::string& where, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, _] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError(where + (where.empty() ? "" : ".") + key + ": unknown field");
    }
}

inline std::string join_path(const std::string& where, std::string_view key) {
    return where.empty() ? std::string(key) : where + "." + std::string(key);
}

inline double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path + ": expected a number");
    return j.get<double>();
}

inline std::size_t get_count(const json& j, const std::string& path) {
    if (!j.is_number_integer() || j.get<long long>() < 0) throw ConfigError(path + ": expected a non-negative integer");
    return j.get<std::size_t>();
}

inline bool get_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) throw ConfigError(path + ": expected true or false");
    return j.get<bool>();
}

inline Vec3 get_vec3(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(path + ": expected [x, y, z]");
    return {get_number(j[0], path), get_number(j[1], path), get_number(j[2], path)};
}

inline PanelOrientation parse_orientation(const json& j, const std::string& path) {
    check_keys(j, path, {"normal", "axis_x", "axis_y"});
    PanelOrientation o;
    if (j.contains("normal")) o.normal = get_vec3(j["normal"], path + ".normal");
    if (j.contains("axis_x")) o.axis_x = get_vec3(j["axis_x"], path + ".axis_x");
    if (j.contains("axis_y")) o.axis_y = get_vec3(j["axis_y"], path + ".axis_y");
    return o;
}

inline RisConfig parse_ris(const json& j, const std::string& path) {
    check_keys(j, path, {"nx", "ny", "position", "orientation"});
    RisConfig r;
    if (j.contains("nx")) r.nx = get_count(j["nx"], path + ".nx");
    if (j.contains("ny")) r.ny = get_count(j["ny"], path + ".ny");
    if (j.contains("position")) r.position = get_vec3(j["position"], path + ".position");
    if (j.contains("orientation")) r.orientation = parse_orientation(j["orientation"], path + ".orientation");
    return r;
}

inline SystemConfig parse_system(const json& j) {
    const std::string p = "base";
    check_keys(j, p,
               {"M", "K", "ris", "bs_position", "bs_array_axis", "user_center", "user_radius", "spacing_x", "spacing_y",
                "carrier_hz", "tx_power_w", "tx_power_dbw", "noise_power_w", "noise_power_dbm", "rician_factor",
                "antenna_area_m2", "element_area_m2"});
    SystemConfig c;
    if (j.contains("M")) c.M = get_count(j["M"], p + ".M");
    if (j.contains("K")) c.K = get_count(j["K"], p + ".K");
    if (j.contains("ris")) {
        if (!j["ris"].is_array()) throw ConfigError("base.ris: expected an array");
        c.ris.clear();
        for (std::size_t i = 0; i < j["ris"].size(); ++i)
            c.ris.push_back(parse_ris(j["ris"][i], p + ".ris." + std::to_string(i)));
    }
    if (j.contains("bs_position")) c.bs_position = get_vec3(j["bs_position"], p + ".bs_position");
    if (j.contains("bs_array_axis")) c.bs_array_axis = get_vec3(j["bs_array_axis"], p + ".bs_array_axis");
    if (j.contains("user_center")) c.user_center = get_vec3(j["user_center"], p + ".user_center");
    if (j.contains("user_radius")) c.user_radius = get_number(j["user_radius"], p + ".user_radius");
    if (j.contains("spacing_x")) c.spacing_x = get_number(j["spacing_x"], p + ".spacing_x");
    if (j.contains("spacing_y")) c.spacing_y = get_number(j["spacing_y"], p + ".spacing_y");
    if (j.contains("carrier_hz")) c.carrier_hz = get_number(j["carrier_hz"], p + ".carrier_hz");
    if (j.contains("tx_power_w") && j.contains("tx_power_dbw"))
        throw ConfigError("base.tx_power_dbw: conflicts with base.tx_power_w");
    if (j.contains("tx_power_w")) c.tx_power_w = get_number(j["tx_power_w"], p + ".tx_power_w");
    if (j.contains("tx_power_dbw")) c.tx_power_w = std::pow(10.0, get_number(j["tx_power_dbw"], p + ".tx_power_dbw") / 10.0);
    if (j.contains("noise_power_w") && j.contains("noise_power_dbm"))
        throw ConfigError("base.noise_power_dbm: conflicts with base.noise_power_w");
    if (j.contains("noise_power_w")) c.noise_power_w = get_number(j["noise_power_w"], p + ".noise_power_w");
    if (j.contains("noise_power_dbm"))
        c.noise_power_w = 1e-3 * std::pow(10.0, get_number(j["noise_power_dbm"], p + ".noise_power_dbm") / 10.0);
    if (j.contains("rician_factor")) {
        const json& r = j["rician_factor"];
        if (r.is_string() && r.get<std::string>() == "inf")
            c.rician_factor = std::numeric_limits<double>::infinity();
        else
            c.rician_factor = get_number(r, p + ".rician_factor");
    }
    if (j.contains("antenna_area_m2")) c.antenna_area_m2 = get_number(j["antenna_area_m2"], p + ".antenna_area_m2");
    if (j.contains("element_area_m2")) c.element_area_m2 = get_number(j["element_area_m2"], p + ".element_area_m2");
    return c;
}

inline PhaseRule parse_phase_rule(const json& j) {
    if (!j.is_string()) throw ConfigError("solver.phase_rule: expected a string");
    const auto s = j.get<std::string>();
    if (s == "exact") return PhaseRule::exact;
    if (s == "paper-literal" || s == "first-copy") return PhaseRule::paper_literal;
    throw ConfigError("solver.phase_rule: unknown rule '" + s + "'");
}

inline SolverOptions parse_solver(const json& j) {
    check_keys(j, "solver",
               {"threshold", "max_iters", "bisection_tol", "bisection_max_steps", "phase_rule", "phase_bits"});
    SolverOptions o;
    if (j.contains("threshold")) o.threshold = get_number(j["threshold"], "solver.threshold");
    if (j.contains("max_iters")) o.max_iters = get_count(j["max_iters"], "solver.max_iters");
    if (j.contains("bisection_tol")) o.bisection_tol = get_number(j["bisection_tol"], "solver.bisection_tol");
    if (j.contains("bisection_max_steps"))
        o.bisection_max_steps = get_count(j["bisection_max_steps"], "solver.bisection_max_steps");
    if (j.contains("phase_rule")) o.phase_rule = parse_phase_rule(j["phase_rule"]);
    if (j.contains("phase_bits")) o.phase_bits = static_cast<unsigned>(get_count(j["phase_bits"], "solver.phase_bits"));
    return o;
}

/// Splits a dotted path; numeric segments index arrays.
inline json* walk(json& root, const std::string& dotted, bool create_leaf) {
    json* cur = &root;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = dotted.find('.', start);
        const std::string seg = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (seg.empty()) throw ConfigError("--set: malformed key '" + dotted + "'");
        const bool last = dot == std::string::npos;
        if (cur->is_array()) {
            std::size_t idx = 0;
            try {
                std::size_t used = 0;
                idx = std::stoul(seg, &used);
                if (used != seg.size()) throw std::invalid_argument(seg);
            } catch (const std::exception&) {
                throw ConfigError(dotted + ": '" + seg + "' is not an array index");
            }
            if (idx >= cur->size()) throw ConfigError(dotted + ": index out of range");
            cur = &(*cur)[idx];
        } else {
            if (cur->is_null()) *cur = json::object();
            if (!cur->is_object()) throw ConfigError(dotted + ": '" + seg + "' is below a scalar");
            if (!cur->contains(seg) && !(last && create_leaf)) (*cur)[seg] = json::object();
            cur = &(*cur)[seg];
        }
        if (last) return cur;
        start = dot + 1;
    }
}

}  // namespace detail

/// Applies `dotted.key=value` overrides. Values parse as JSON when possible,
/// otherwise as a plain string.
inline void apply_overrides(nlohmann::json& root, const std::vector<std::string>& overrides) {
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--set: expected key=value, got '" + o + "'");
        const std::string key = o.substr(0, eq), raw = o.substr(eq + 1);
        nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
        if (value.is_discarded()) value = raw;
        *detail::walk(root, key, true) = std::move(value);
    }
}

/// Builds a spec from JSON. `axis` and `values` may be omitted when `require_axis` is false.
inline ExperimentSpec parse_spec(const nlohmann::json& j, bool require_axis = true) {
    using detail::get_bool;
    using detail::get_count;
    using detail::get_number;
    detail::check_keys(j, "",
                       {"base", "axis", "values", "realizations", "seed", "solver", "baselines", "single_ris_position",
                        "mirror_span", "element_total", "csi_error_scale", "record_timing", "threads"});
    ExperimentSpec s;
    if (j.contains("base")) s.base = detail::parse_system(j["base"]);
    if (j.contains("axis")) {
        if (!j["axis"].is_string()) throw ConfigError("axis: expected a string");
        s.axis = parse_axis(j["axis"].get<std::string>());
    } else if (require_axis) {
        throw ConfigError("axis: missing");
    }
    if (j.contains("values")) {
        if (!j["values"].is_array()) throw ConfigError("values: expected an array");
        for (const auto& v : j["values"]) s.values.push_back(get_number(v, "values"));
    } else if (require_axis) {
        throw ConfigError("values: missing");
    }
    if (j.contains("realizations")) s.realizations = get_count(j["realizations"], "realizations");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0))
            throw ConfigError("seed: expected a non-negative integer");
        s.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("solver")) s.solver = detail::parse_solver(j["solver"]);
    if (j.contains("baselines")) {
        const auto& b = j["baselines"];
        detail::check_keys(b, "baselines", {"random_phase", "single_reflection", "single_ris"});
        if (b.contains("random_phase")) s.baselines.random_phase = get_bool(b["random_phase"], "baselines.random_phase");
        if (b.contains("single_reflection"))
            s.baselines.single_reflection = get_bool(b["single_reflection"], "baselines.single_reflection");
        if (b.contains("single_ris")) s.baselines.single_ris = get_bool(b["single_ris"], "baselines.single_ris");
    }
    if (j.contains("single_ris_position")) s.single_ris_position = detail::get_vec3(j["single_ris_position"], "single_ris_position");
    if (j.contains("mirror_span")) s.mirror_span = get_number(j["mirror_span"], "mirror_span");
    if (j.contains("element_total")) s.element_total = get_count(j["element_total"], "element_total");
    if (j.contains("csi_error_scale")) {
        const auto& v = j["csi_error_scale"];
        if (v == "absolute")
            s.csi_error_scale = ErrorScale::absolute;
        else if (v == "channel-gain")
            s.csi_error_scale = ErrorScale::channel_gain;
        else
            throw ConfigError("csi_error_scale: expected \"absolute\" or \"channel-gain\"");
    }
    if (j.contains("record_timing")) s.record_timing = get_bool(j["record_timing"], "record_timing");
    if (j.contains("threads")) s.threads = static_cast<unsigned>(get_count(j["threads"], "threads"));
    if (require_axis) {
        s.validate();
    } else {
        if (s.realizations < 1) throw ConfigError("realizations: must be >= 1");
        try {
            s.base.validate();
            s.solver.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    return s;
}

/// Reads a JSON spec file, applies overrides, and parses it.
inline ExperimentSpec load_spec(const std::string& path, const std::vector<std::string>& overrides = {},
                                bool require_axis = true) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot read '" + path + "'");
    nlohmann::json j = nlohmann::json::parse(f, nullptr, false, true);
    if (j.is_discarded()) throw ConfigError("config: '" + path + "' is not valid JSON");
    apply_overrides(j, overrides);
    return parse_spec(j, require_axis);
}

}  // namespace risbeam

#endif
