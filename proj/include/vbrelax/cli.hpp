// Copyright 2026 The vbrelax Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Batch commands behind the `vbrelax` executable. Each command reads a JSON
// run configuration, validates every path, computes, and returns the files
// it would write; `commit` then writes them atomically.

#include <array>
#include <cctype>
#include <cmath>
#include <optional>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "vbrelax/decay_fit.hpp"
#include "vbrelax/error.hpp"
#include "vbrelax/io/csv.hpp"
#include "vbrelax/io/files.hpp"
#include "vbrelax/io/record.hpp"
#include "vbrelax/io/svg.hpp"
#include "vbrelax/kinetics.hpp"
#include "vbrelax/odmr.hpp"
#include "vbrelax/phonon.hpp"
#include "vbrelax/pulse.hpp"
#include "vbrelax/random.hpp"

namespace vbrelax::cli {

using io::Json;
namespace fs = std::filesystem;

enum class ExitCode : int { ok = 0, config = 2, fit = 3, io = 4, internal = 1 };

/// Exit status for an exception escaping a command.
inline ExitCode exit_code_for(const std::exception& e)
{
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const SchemaError*>(&e) ||
        dynamic_cast<const InvalidArgument*>(&e))
        return ExitCode::config;
    if (dynamic_cast<const FitError*>(&e) || dynamic_cast<const InfiniteT1*>(&e)) return ExitCode::fit;
    if (dynamic_cast<const IoError*>(&e)) return ExitCode::io;
    return ExitCode::internal;
}

enum class TableFormat { csv, json };

struct CommandOutput {
    Json record;
    io::OutputBatch files;
};

/// Typed access to one JSON object that rejects keys outside `allowed`.
class ConfigReader {
public:
    ConfigReader(const Json& j, std::string where, std::span<const std::string_view> allowed)
        : j_(j), where_(std::move(where))
    {
        if (!j_.is_object()) throw ConfigError(where_ + " must be a JSON object");
        const std::set<std::string_view> ok(allowed.begin(), allowed.end());
        for (const auto& [k, v] : j_.items())
            if (!ok.contains(k)) throw ConfigError(fmt::format("{}: unknown key '{}'", where_, k));
    }

    bool has(std::string_view key) const { return j_.contains(key); }

    const Json& at(std::string_view key) const
    {
        if (!has(key)) throw ConfigError(fmt::format("{}: missing required key '{}'", where_, key));
        return j_.at(std::string(key));
    }

    double number(std::string_view key) const
    {
        const Json& v = at(key);
        if (!v.is_number()) throw ConfigError(fmt::format("{}: '{}' must be a number", where_, key));
        return v.get<double>();
    }
    double number_or(std::string_view key, double def) const { return has(key) ? number(key) : def; }

    std::uint64_t unsigned_or(std::string_view key, std::uint64_t def) const
    {
        if (!has(key)) return def;
        const Json& v = at(key);
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
            throw ConfigError(fmt::format("{}: '{}' must be a nonnegative integer", where_, key));
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }

    std::string string(std::string_view key) const
    {
        const Json& v = at(key);
        if (!v.is_string()) throw ConfigError(fmt::format("{}: '{}' must be a string", where_, key));
        return v.get<std::string>();
    }
    std::string string_or(std::string_view key, std::string def) const { return has(key) ? string(key) : def; }

    bool boolean_or(std::string_view key, bool def) const
    {
        if (!has(key)) return def;
        const Json& v = at(key);
        if (!v.is_boolean()) throw ConfigError(fmt::format("{}: '{}' must be true or false", where_, key));
        return v.get<bool>();
    }

    std::vector<double> numbers(std::string_view key) const
    {
        const Json& v = at(key);
        if (!v.is_array()) throw ConfigError(fmt::format("{}: '{}' must be an array of numbers", where_, key));
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number()) throw ConfigError(fmt::format("{}: '{}' must be an array of numbers", where_, key));
            out.push_back(x.get<double>());
        }
        return out;
    }

    const std::string& where() const noexcept { return where_; }

private:
    const Json& j_;
    std::string where_;
};

inline constexpr std::array<std::string_view, 3> common_keys{"seed", "out_dir", "format"};

struct CommonOptions {
    fs::path out_dir = ".";
    std::uint64_t seed = 0;
    TableFormat format = TableFormat::csv;
};

inline CommonOptions read_common(const ConfigReader& r)
{
    CommonOptions c;
    c.out_dir = r.string_or("out_dir", ".");
    c.seed = r.unsigned_or("seed", 0);
    const std::string f = r.string_or("format", "csv");
    if (f == "csv") c.format = TableFormat::csv;
    else if (f == "json") c.format = TableFormat::json;
    else throw ConfigError(fmt::format("{}: format must be 'csv' or 'json', not '{}'", r.where(), f));
    return c;
}

inline std::vector<std::string_view> with_common(std::initializer_list<std::string_view> keys)
{
    std::vector<std::string_view> out(keys);
    out.insert(out.end(), common_keys.begin(), common_keys.end());
    return out;
}


namespace detail {

inline std::vector<double> linspace(double start, double stop, std::size_t count)
{
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = count == 1 ? start
                            : start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1);
    return out;
}

/// Either an explicit array under `list_key` or a grid object under
/// `grid_key` with start, stop and one of count / step.
inline std::vector<double> read_axis(const ConfigReader& r, std::string_view list_key, std::string_view grid_key)
{
    if (r.has(list_key) && r.has(grid_key))
        throw ConfigError(fmt::format("{}: give only one of '{}' and '{}'", r.where(), list_key, grid_key));
    if (r.has(list_key)) return r.numbers(list_key);
    static constexpr std::array<std::string_view, 4> keys{"start", "stop", "count", "step"};
    const ConfigReader g(r.at(grid_key), r.where() + "." + std::string(grid_key), keys);
    const double start = g.number("start"), stop = g.number("stop");
    if (!(stop >= start)) throw ConfigError(fmt::format("{}.{}: stop must be >= start", r.where(), grid_key));
    if (g.has("count") == g.has("step"))
        throw ConfigError(fmt::format("{}.{}: give exactly one of 'count' and 'step'", r.where(), grid_key));
    if (g.has("count")) {
        const auto n = g.unsigned_or("count", 0);
        if (n < 1) throw ConfigError(fmt::format("{}.{}: count must be >= 1", r.where(), grid_key));
        return linspace(start, stop, n);
    }
    const double step = g.number("step");
    if (!(step > 0.0)) throw ConfigError(fmt::format("{}.{}: step must be > 0", r.where(), grid_key));
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = start + step * static_cast<double>(i);
    return out;
}

inline std::string table_file(std::string_view stem, TableFormat f)
{
    return std::string(stem) + (f == TableFormat::csv ? ".csv" : ".json");
}

inline std::string format_table(std::span<const std::string_view> columns, const std::vector<std::vector<double>>& rows,
                                TableFormat f)
{
    if (f == TableFormat::csv) return io::format_table_csv(columns, rows);
    return io::table_to_json(columns, rows).dump(2) + "\n";
}

/// Record skeleton shared by all commands.
inline Json make_record(std::string_view command, const Json& config, std::span<const std::string> inputs)
{
    std::vector<std::string> parts{std::string(command), config.dump()};
    parts.insert(parts.end(), inputs.begin(), inputs.end());
    return Json{{"command", command},
                {"toolkit_version", io::toolkit_version},
                {"timestamp", io::utc_timestamp()},
                {"input_digest", "sha256:" + io::sha256_hex(parts)},
                {"config", config}};
}

inline void finish(CommandOutput& out, const fs::path& dir, std::string_view command)
{
    Json names = Json::array();
    for (const auto& [path, contents] : out.files.files()) names.push_back(path.filename().string());
    const std::string record_name = std::string(command) + ".json";
    names.push_back(record_name);
    out.record["outputs"] = names;
    out.files.add(dir / record_name, out.record.dump(2) + "\n");
}

/// Reads an input named by config key `key`, failing with IoError when absent.
inline std::string read_input(const ConfigReader& r, std::string_view key, std::string* path_out = nullptr)
{
    const std::string path = r.string(key);
    io::require_readable(path);
    if (path_out) *path_out = path;
    return io::read_file(path);
}

template <class F>
auto as_config_error(F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
}

inline std::vector<std::vector<double>> fit_rows(const FitModel& model, const FitResult& fit, std::span<const double> x,
                                                 std::span<const double> y)
{
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < x.size(); ++i) rows.push_back({x[i], y[i], model.eval(fit.params, x[i])});
    return rows;
}

inline std::vector<double> dense_axis(std::span<const double> x, std::size_t n = 200)
{
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    return linspace(*lo, *hi, n);
}

} // namespace detail

// ---------------------------------------------------------------------------
// simulate

/// Synthetic F1 and F2 decay datasets from known rates.
inline CommandOutput cmd_simulate(const Json& config)
{
    const auto keys = with_common({"omega_kHz", "gamma_kHz", "tau_us", "tau_grid", "f2_tau_us", "f2_tau_grid",
                                   "readout", "pi_fidelity", "polarization", "noise", "temperature_K"});
    const ConfigReader r(config, "simulate config", keys);
    const CommonOptions common = read_common(r);

    const RatePair rates = detail::as_config_error([&] { return RatePair(r.number("omega_kHz"), r.number("gamma_kHz")); });
    const std::vector<double> f1_taus = detail::read_axis(r, "tau_us", "tau_grid");
    const std::vector<double> f2_taus =
        r.has("f2_tau_us") || r.has("f2_tau_grid") ? detail::read_axis(r, "f2_tau_us", "f2_tau_grid") : f1_taus;

    ReadoutModel readout;
    if (r.has("readout")) {
        static constexpr std::array<std::string_view, 3> rk{"rate_bright", "rate_dark", "shots"};
        const ConfigReader ro(r.at("readout"), "simulate config.readout", rk);
        readout.rate_bright = ro.number_or("rate_bright", readout.rate_bright);
        readout.rate_dark = ro.number_or("rate_dark", readout.rate_dark);
        readout.shots = ro.unsigned_or("shots", readout.shots);
    }
    detail::as_config_error([&] { readout.validate(); });

    ProtocolOptions proto;
    proto.pi_fidelity = r.number_or("pi_fidelity", 1.0);
    if (r.has("polarization")) {
        const auto p = r.numbers("polarization");
        if (p.size() != 3) throw ConfigError("simulate config: 'polarization' needs 3 populations (-1, 0, +1)");
        proto.polarization = detail::as_config_error([&] { return PopulationState(p[0], p[1], p[2]); });
    }
    const bool noise = r.boolean_or("noise", true);
    const std::optional<double> temperature =
        r.has("temperature_K") ? std::optional<double>(r.number("temperature_K")) : std::nullopt;

    io::prepare_output_dir(common.out_dir);

    CommandOutput out;
    out.record = detail::make_record("simulate", config, {});
    Json results = Json::object();
    const std::pair<CurveKind, const std::vector<double>*> curves[] = {{CurveKind::f1, &f1_taus},
                                                                         {CurveKind::f2, &f2_taus}};
    for (std::size_t k = 0; k < 2; ++k) {
        const auto [kind, taus] = curves[k];
        const std::uint64_t sub_seed = split_seed(common.seed, k);
        DecayDataset d = detail::as_config_error([&] {
            return noise ? synth_dataset(kind, rates, readout, *taus, sub_seed, proto)
                         : expected_dataset(kind, rates, readout, *taus, proto);
        });
        d.temperature_K = temperature;
        const std::string stem = kind == CurveKind::f1 ? "f1" : "f2";
        const std::string name = detail::table_file(stem, common.format);
        if (common.format == TableFormat::csv) {
            out.files.add(common.out_dir / name, io::format_decay_csv(d));
        } else {
            static constexpr std::array<std::string_view, 3> cols{"tau_us", "signal", "sigma"};
            std::vector<std::vector<double>> rows;
            for (const auto& p : d.points) rows.push_back({p.tau_us, p.signal, p.sigma});
            out.files.add(common.out_dir / name, detail::format_table(cols, rows, common.format));
        }
        Json entry{{"file", name}, {"points", d.points.size()}, {"decay_rate_kHz", kind == CurveKind::f1 ? rates.f1_rate() : rates.f2_rate()}};
        if (noise) entry["seed"] = sub_seed;
        results[std::string(to_string(kind))] = entry;
    }
    results["t1_us"] = rates.f1_rate() + rates.gamma() > 0.0 ? Json(t1_from_rates(rates)) : Json(nullptr);
    out.record["results"] = results;
    detail::finish(out, common.out_dir, "simulate");
    return out;
}

// ---------------------------------------------------------------------------
// fit-decay

inline CommandOutput cmd_fit_decay(const Json& config)
{
    const auto keys = with_common({"f1", "f2", "joint", "temperature_K", "plots"});
    const ConfigReader r(config, "fit-decay config", keys);
    const CommonOptions common = read_common(r);
    std::string f1_path, f2_path;
    const std::string f1_text = detail::read_input(r, "f1", &f1_path);
    const std::string f2_text = detail::read_input(r, "f2", &f2_path);
    const bool joint = r.boolean_or("joint", false);
    const bool plots = r.boolean_or("plots", true);
    io::prepare_output_dir(common.out_dir);

    const DecayDataset f1 = io::parse_decay_csv(f1_text, f1_path, CurveKind::f1);
    const DecayDataset f2 = io::parse_decay_csv(f2_text, f2_path, CurveKind::f2);
    const std::vector<std::string> inputs{f1_text, f2_text};

    CommandOutput out;
    out.record = detail::make_record("fit-decay", config, inputs);
    Json results = Json::object();

    const FitModel model = exponential_decay_model();
    const FitResult fit1 = fit_single_exponential(f1);
    const FitResult fit2 = fit_single_exponential(f2);
    if (!fit1.converged || !fit2.converged)
        throw FitError(fmt::format("decay fit did not converge (F1 {} iterations, F2 {} iterations)",
                                   fit1.iterations, fit2.iterations));
    results["F1"] = io::fit_to_json(fit1);
    results["F2"] = io::fit_to_json(fit2);

    RateEstimate est{};
    double t1_var = 0.0;
    if (joint) {
        const JointRateFit jf = fit_rates_joint(f1, f2);
        if (!jf.fit.converged) throw FitError("joint decay fit did not converge");
        est = jf.rates;
        const auto& c = jf.fit.covariance;
        t1_var = 9.0 * c(4, 4) + c(5, 5) + 6.0 * c(4, 5);
        results["joint"] = io::fit_to_json(jf.fit);
    } else {
        est = extract_rates(fit1, fit2);
        // 3 omega + gamma = (5/6) k1 + k2 / 2 for independent k1, k2.
        t1_var = 25.0 / 36.0 * fit1.errors[1] * fit1.errors[1] + 0.25 * fit2.errors[1] * fit2.errors[1];
    }
    const double total = 3.0 * est.omega + est.gamma;
    Json t1 = total > 0.0 ? io::value_with_error(units::inverse_rate_us(total),
                                                 units::inverse_rate_us(total) / total * std::sqrt(t1_var))
                          : Json(nullptr);
    results["rates"] = Json{{"method", joint ? "joint" : "shared-omega"},
                            {"omega_kHz", io::value_with_error(est.omega, est.sigma_omega)},
                            {"gamma_kHz", io::value_with_error(est.gamma, est.sigma_gamma)},
                            {"consistent", est.consistent}};
    results["t1_us"] = t1;
    out.record["results"] = results;

    static constexpr std::array<std::string_view, 3> cols{"tau_us", "data", "fit"};
    const std::pair<const DecayDataset*, const FitResult*> curves[] = {{&f1, &fit1}, {&f2, &fit2}};
    for (const auto& [d, fit] : curves) {
        std::vector<double> x, y, e;
        for (const auto& p : d->points) {
            x.push_back(p.tau_us);
            y.push_back(p.signal);
            e.push_back(p.sigma);
        }
        const std::string stem = d->kind == CurveKind::f1 ? "f1_fit" : "f2_fit";
        out.files.add(common.out_dir / detail::table_file(stem, common.format),
                      detail::format_table(cols, detail::fit_rows(model, *fit, x, y), common.format));
        if (plots) {
            io::PlotSeries data{"data", io::SeriesStyle::markers, "#1f77b4", x, y, e};
            io::PlotSeries line{fmt::format("fit, k = {:.4g} kHz", fit->params[1]), io::SeriesStyle::line, "#d62728",
                                detail::dense_axis(x), {}, {}};
            for (double t : line.x) line.y.push_back(model.eval(fit->params, t));
            const io::PlotStyle style{fmt::format("{} decay", to_string(d->kind)), "tau (us)",
                                      "normalized fluorescence difference"};
            out.files.add(common.out_dir / (stem + ".svg"), io::emit_plot_svg({data, line}, style));
        }
    }
    detail::finish(out, common.out_dir, "fit-decay");
    return out;
}

// ---------------------------------------------------------------------------
// fit-odmr

inline CommandOutput cmd_fit_odmr(const Json& config)
{
    const auto keys = with_common({"spectrum", "plots"});
    const ConfigReader r(config, "fit-odmr config", keys);
    const CommonOptions common = read_common(r);
    std::string path;
    const std::string text = detail::read_input(r, "spectrum", &path);
    const bool plots = r.boolean_or("plots", true);
    io::prepare_output_dir(common.out_dir);

    const auto spectrum = io::parse_odmr_csv(text, path);
    const OdmrFit fit = fit_two_lorentzian(spectrum);
    if (!fit.fit.converged) throw FitError("two-Lorentzian fit did not converge");

    CommandOutput out;
    const std::vector<std::string> inputs{text};
    out.record = detail::make_record("fit-odmr", config, inputs);
    const auto& p = fit.fit.params;
    const auto& e = fit.fit.errors;
    out.record["results"] = Json{{"fit", io::fit_to_json(fit.fit)},
                                 {"nu1_MHz", io::value_with_error(p[2], e[2])},
                                 {"nu2_MHz", io::value_with_error(p[5], e[5])},
                                 {"nu0_MHz", io::value_with_error(fit.center_mhz, fit.center_error_mhz)},
                                 {"hwhm1_MHz", io::value_with_error(p[3], e[3])},
                                 {"hwhm2_MHz", io::value_with_error(p[6], e[6])}};

    const FitModel model = two_lorentzian_model();
    std::vector<double> x, y;
    for (const auto& s : spectrum) {
        x.push_back(s.freq_mhz);
        y.push_back(s.contrast);
    }
    static constexpr std::array<std::string_view, 3> cols{"freq_MHz", "data", "fit"};
    out.files.add(common.out_dir / detail::table_file("odmr_fit", common.format),
                  detail::format_table(cols, detail::fit_rows(model, fit.fit, x, y), common.format));
    if (plots) {
        io::PlotSeries data{"data", io::SeriesStyle::markers, "#1f77b4", x, y, {}};
        io::PlotSeries line{"two-Lorentzian fit", io::SeriesStyle::line, "#d62728", detail::dense_axis(x, 400), {}, {}};
        for (double f : line.x) line.y.push_back(model.eval(fit.fit.params, f));
        out.files.add(common.out_dir / "odmr_fit.svg",
                      io::emit_plot_svg({data, line}, {"ODMR spectrum", "microwave frequency (MHz)", "contrast"}));
    }
    detail::finish(out, common.out_dir, "fit-odmr");
    return out;
}

// ---------------------------------------------------------------------------
// fit-temp

namespace detail {

inline std::string file_stem_for_spot(std::string_view base, const std::string& label)
{
    if (label.empty()) return std::string(base);
    std::string safe;
    for (char c : label) safe += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_';
    return std::string(base) + "_" + safe;
}

inline std::vector<std::vector<double>> t1_rows(const std::vector<T1Point>& curve)
{
    std::vector<std::vector<double>> rows;
    for (const auto& p : curve) rows.push_back({p.temperature_K, p.omega_khz, p.gamma_khz, p.t1_us});
    return rows;
}

inline constexpr std::array<std::string_view, 4> t1_columns{"T_K", "omega_kHz", "gamma_kHz", "t1_us"};

} // namespace detail

inline CommandOutput cmd_fit_temp(const Json& config)
{
    const auto keys = with_common({"series", "pdos", "mode_count", "grid", "plots"});
    const ConfigReader r(config, "fit-temp config", keys);
    const CommonOptions common = read_common(r);
    std::string series_path, pdos_path;
    const std::string series_text = detail::read_input(r, "series", &series_path);
    const std::string pdos_text = detail::read_input(r, "pdos", &pdos_path);
    const auto mode_count = r.unsigned_or("mode_count", 3);
    if (mode_count < 1) throw ConfigError("fit-temp config: mode_count must be >= 1");
    const std::vector<double> grid =
        r.has("grid") ? detail::read_axis(r, "temperatures_K", "grid") : detail::linspace(290.0, 420.0, 131);
    for (double t : grid)
        if (!(t > 0.0)) throw ConfigError("fit-temp config: grid temperatures must be > 0");
    const bool plots = r.boolean_or("plots", true);
    io::prepare_output_dir(common.out_dir);

    const auto all_series = io::parse_series_csv(series_text, series_path);
    const auto pdos = io::parse_pdos_csv(pdos_text, pdos_path);
    const auto modes = detail::as_config_error([&] { return pdos_peaks(pdos, mode_count); });

    CommandOutput out;
    const std::vector<std::string> inputs{series_text, pdos_text};
    out.record = detail::make_record("fit-temp", config, inputs);
    Json modes_json = Json::array();
    for (const auto& m : modes) modes_json.push_back(m.energy_meV());
    Json spots = Json::array();

    for (const auto& series : all_series) {
        const TemperatureFit tf = fit_temperature_series(series, modes);
        const auto curve = predict_t1_curve(tf.coupling, grid);
        const double om400 = rate_model(RateKind::omega, tf.coupling, 400.0);
        const double ga400 = rate_model(RateKind::gamma, tf.coupling, 400.0);
        spots.push_back(Json{{"spot_label", series.spot_label},
                             {"points", series.points.size()},
                             {"coupling", io::coupling_to_json(tf.coupling)},
                             {"omega_fit", io::fit_to_json(tf.omega_fit)},
                             {"gamma_fit", io::fit_to_json(tf.gamma_fit)},
                             {"gamma_over_omega_400K", om400 > 0.0 ? Json(ga400 / om400) : Json(nullptr)}});

        const std::string stem = detail::file_stem_for_spot("t1_curve", series.spot_label);
        out.files.add(common.out_dir / detail::table_file(stem, common.format),
                      detail::format_table(detail::t1_columns, detail::t1_rows(curve), common.format));
        if (plots) {
            io::PlotSeries om{"omega data", io::SeriesStyle::markers, "#e6a800", {}, {}, {}};
            io::PlotSeries ga{"gamma data", io::SeriesStyle::markers, "#1f77b4", {}, {}, {}};
            for (const auto& p : series.points) {
                om.x.push_back(p.temperature_K);
                om.y.push_back(p.omega_khz);
                om.y_error.push_back(p.sigma_omega_khz);
                ga.x.push_back(p.temperature_K);
                ga.y.push_back(p.gamma_khz);
                ga.y_error.push_back(p.sigma_gamma_khz);
            }
            io::PlotSeries om_fit{"omega model", io::SeriesStyle::line, "#e6a800", grid, {}, {}};
            io::PlotSeries ga_fit{"gamma model", io::SeriesStyle::line, "#1f77b4", grid, {}, {}};
            for (const auto& p : curve) {
                om_fit.y.push_back(p.omega_khz);
                ga_fit.y.push_back(p.gamma_khz);
            }
            const std::string title =
                series.spot_label.empty() ? "relaxation rates" : "relaxation rates, " + series.spot_label;
            out.files.add(common.out_dir / (detail::file_stem_for_spot("rates", series.spot_label) + ".svg"),
                          io::emit_plot_svg({om, ga, om_fit, ga_fit}, {title, "temperature (K)", "rate (kHz)"}));
        }
    }
    out.record["results"] = Json{{"modes_meV", modes_json}, {"spots", spots}};
    detail::finish(out, common.out_dir, "fit-temp");
    return out;
}

// ---------------------------------------------------------------------------
// predict-t1

inline CommandOutput cmd_predict_t1(const Json& config)
{
    const auto keys = with_common({"coupling", "coupling_file", "spot", "grid", "temperatures_K"});
    const ConfigReader r(config, "predict-t1 config", keys);
    const CommonOptions common = read_common(r);
    if (r.has("coupling") == r.has("coupling_file"))
        throw ConfigError("predict-t1 config: give exactly one of 'coupling' and 'coupling_file'");

    std::vector<std::string> inputs;
    Json coupling_json;
    if (r.has("coupling")) {
        coupling_json = r.at("coupling");
    } else {
        inputs.push_back(detail::read_input(r, "coupling_file"));
        Json doc;
        try {
            doc = Json::parse(inputs.back());
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("coupling_file is not valid JSON: ") + e.what());
        }
        if (doc.contains("results") && doc["results"].contains("spots")) {
            const std::string spot = r.string_or("spot", "");
            const auto& spots = doc["results"]["spots"];
            const Json* found = nullptr;
            for (const auto& s : spots)
                if (!r.has("spot") || s.value("spot_label", "") == spot) {
                    found = &s;
                    break;
                }
            if (!found) throw ConfigError("coupling_file has no spot '" + spot + "'");
            coupling_json = (*found)["coupling"];
        } else {
            coupling_json = doc;
        }
    }
    const CouplingSet coupling = io::coupling_from_json(coupling_json);
    const std::vector<double> grid = r.has("grid") || r.has("temperatures_K")
                                         ? detail::read_axis(r, "temperatures_K", "grid")
                                         : detail::linspace(290.0, 420.0, 131);
    for (double t : grid)
        if (!(t > 0.0)) throw ConfigError("predict-t1 config: temperatures must be > 0");
    io::prepare_output_dir(common.out_dir);

    const auto curve = predict_t1_curve(coupling, grid);
    CommandOutput out;
    out.record = detail::make_record("predict-t1", config, inputs);
    const std::string name = detail::table_file("t1_curve", common.format);
    out.record["results"] = Json{{"coupling", io::coupling_to_json(coupling)}, {"points", curve.size()}, {"file", name}};
    out.files.add(common.out_dir / name, detail::format_table(detail::t1_columns, detail::t1_rows(curve), common.format));
    detail::finish(out, common.out_dir, "predict-t1");
    return out;
}

inline constexpr std::array<std::string_view, 5> command_names{"simulate", "fit-decay", "fit-odmr", "fit-temp",
                                                                "predict-t1"};

inline CommandOutput run_command(std::string_view name, const Json& config)
{
    if (name == "simulate") return cmd_simulate(config);
    if (name == "fit-decay") return cmd_fit_decay(config);
    if (name == "fit-odmr") return cmd_fit_odmr(config);
    if (name == "fit-temp") return cmd_fit_temp(config);
    if (name == "predict-t1") return cmd_predict_t1(config);
    throw ConfigError(fmt::format("unknown command '{}'", name));
}

} // namespace vbrelax::cli
