// Copyright 2026 The vbrelax Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Numeric table schemas. Every file starts with its header line; numbers
// are written with 17 significant digits so a write/read cycle is exact.
//
//   decay               tau_us,signal,sigma
//   ODMR spectrum       freq_MHz,contrast
//   temperature series  T_K,omega_kHz,sigma_omega_kHz,gamma_kHz,sigma_gamma_kHz[,spot_label]
//   PDOS                energy_meV,density

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "vbrelax/error.hpp"
#include "vbrelax/odmr.hpp"
#include "vbrelax/phonon.hpp"
#include "vbrelax/pulse.hpp"

namespace vbrelax::io {

inline constexpr std::string_view decay_header = "tau_us,signal,sigma";
inline constexpr std::string_view odmr_header = "freq_MHz,contrast";
inline constexpr std::string_view series_header = "T_K,omega_kHz,sigma_omega_kHz,gamma_kHz,sigma_gamma_kHz";
inline constexpr std::string_view pdos_header = "energy_meV,density";

inline std::string format_number(double v) { return fmt::format("{:.17g}", v); }

/// A parsed table row; `line` is the 1-based line number in the file.
struct Row {
    std::size_t line;
    std::vector<std::string> cells;
};

inline std::vector<std::string> split_cells(std::string_view line)
{
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        cells.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    for (auto& c : cells) {
        const auto b = c.find_first_not_of(" \t");
        const auto e = c.find_last_not_of(" \t");
        c = b == std::string::npos ? std::string{} : c.substr(b, e - b + 1);
    }
    return cells;
}

/// Splits `text` into rows after checking the header. Returns the header
/// cells actually present (the required ones plus any allowed extension).
inline std::vector<Row> parse_table(std::string_view text, const std::string& source, std::string_view header,
                                    std::span<const std::string_view> extensions, std::vector<std::string>* columns)
{
    std::vector<Row> rows;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    std::vector<std::string> head;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line_no == 1) {
            head = split_cells(line);
            continue;
        }
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
        rows.push_back({line_no, split_cells(line)});
    }
    if (line_no == 0) throw SchemaError(source, 0, fmt::format("empty file; expected header '{}'", header));

    const auto required = split_cells(header);
    bool ok = head.size() >= required.size() && std::equal(required.begin(), required.end(), head.begin());
    for (std::size_t i = required.size(); ok && i < head.size(); ++i)
        ok = std::find(extensions.begin(), extensions.end(), head[i]) != extensions.end();
    if (!ok) throw SchemaError(source, 1, fmt::format("header must be '{}'", header));
    if (rows.empty()) throw SchemaError(source, 0, "no data rows");
    for (const auto& r : rows)
        if (r.cells.size() != head.size())
            throw SchemaError(source, r.line, fmt::format("expected {} columns, found {}", head.size(), r.cells.size()));
    if (columns) *columns = head;
    return rows;
}

inline double parse_number(const std::string& cell, const std::string& source, std::size_t line)
{
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (!cell.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (cell.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v))
        throw SchemaError(source, line, fmt::format("'{}' is not a finite number", cell));
    return v;
}

// ---------------------------------------------------------------------------
// Decay curves

inline DecayDataset parse_decay_csv(std::string_view text, const std::string& source, CurveKind kind)
{
    const auto rows = parse_table(text, source, decay_header, {}, nullptr);
    DecayDataset d{kind, {}, std::nullopt};
    for (const auto& r : rows) {
        const DecayPoint p{parse_number(r.cells[0], source, r.line), parse_number(r.cells[1], source, r.line),
                           parse_number(r.cells[2], source, r.line)};
        if (p.tau_us < 0.0) throw SchemaError(source, r.line, "tau_us must be >= 0");
        if (!d.points.empty() && !(p.tau_us > d.points.back().tau_us))
            throw SchemaError(source, r.line, "tau_us must be strictly increasing");
        if (!(p.sigma > 0.0)) throw SchemaError(source, r.line, "sigma must be > 0");
        d.points.push_back(p);
    }
    return d;
}

inline std::string format_decay_csv(const DecayDataset& d)
{
    std::string out(decay_header);
    out += '\n';
    for (const auto& p : d.points)
        out += fmt::format("{},{},{}\n", format_number(p.tau_us), format_number(p.signal), format_number(p.sigma));
    return out;
}

// ---------------------------------------------------------------------------
// ODMR spectra

inline std::vector<SpectrumPoint> parse_odmr_csv(std::string_view text, const std::string& source)
{
    const auto rows = parse_table(text, source, odmr_header, {}, nullptr);
    std::vector<SpectrumPoint> out;
    for (const auto& r : rows) {
        const SpectrumPoint p{parse_number(r.cells[0], source, r.line), parse_number(r.cells[1], source, r.line)};
        if (!out.empty() && !(p.freq_mhz > out.back().freq_mhz))
            throw SchemaError(source, r.line, "freq_MHz must be strictly increasing");
        out.push_back(p);
    }
    return out;
}

inline std::string format_odmr_csv(std::span<const SpectrumPoint> s)
{
    std::string out(odmr_header);
    out += '\n';
    for (const auto& p : s) out += fmt::format("{},{}\n", format_number(p.freq_mhz), format_number(p.contrast));
    return out;
}

// ---------------------------------------------------------------------------
// Temperature series

/// Series keyed by spot label, in order of first appearance. Without a
/// spot_label column all rows form one series with an empty label.
inline std::vector<TemperatureSeries> parse_series_csv(std::string_view text, const std::string& source)
{
    static constexpr std::string_view ext[] = {"spot_label"};
    std::vector<std::string> columns;
    const auto rows = parse_table(text, source, series_header, ext, &columns);
    const bool labelled = columns.size() == 6;

    std::vector<TemperatureSeries> out;
    std::map<std::string, std::size_t> slot;
    for (const auto& r : rows) {
        TemperaturePoint p{};
        p.temperature_K = parse_number(r.cells[0], source, r.line);
        p.omega_khz = parse_number(r.cells[1], source, r.line);
        p.sigma_omega_khz = parse_number(r.cells[2], source, r.line);
        p.gamma_khz = parse_number(r.cells[3], source, r.line);
        p.sigma_gamma_khz = parse_number(r.cells[4], source, r.line);
        if (!(p.temperature_K > 0.0)) throw SchemaError(source, r.line, "T_K must be > 0");
        if (!(p.sigma_omega_khz > 0.0) || !(p.sigma_gamma_khz > 0.0))
            throw SchemaError(source, r.line, "sigmas must be > 0");
        const std::string label = labelled ? r.cells[5] : std::string{};
        auto [it, fresh] = slot.try_emplace(label, out.size());
        if (fresh) out.push_back({{}, label});
        auto& series = out[it->second];
        if (!series.points.empty() && !(p.temperature_K > series.points.back().temperature_K))
            throw SchemaError(source, r.line, "T_K must be strictly increasing within a spot");
        series.points.push_back(p);
    }
    return out;
}

inline std::string format_series_csv(std::span<const TemperatureSeries> all)
{
    bool labelled = false;
    for (const auto& s : all) labelled = labelled || !s.spot_label.empty();
    std::string out(series_header);
    out += labelled ? ",spot_label\n" : "\n";
    for (const auto& s : all)
        for (const auto& p : s.points) {
            out += fmt::format("{},{},{},{},{}", format_number(p.temperature_K), format_number(p.omega_khz),
                               format_number(p.sigma_omega_khz), format_number(p.gamma_khz),
                               format_number(p.sigma_gamma_khz));
            out += labelled ? "," + s.spot_label + "\n" : "\n";
        }
    return out;
}

// ---------------------------------------------------------------------------
// Phonon density of states

inline std::vector<PdosPoint> parse_pdos_csv(std::string_view text, const std::string& source)
{
    const auto rows = parse_table(text, source, pdos_header, {}, nullptr);
    std::vector<PdosPoint> out;
    for (const auto& r : rows) {
        const PdosPoint p{parse_number(r.cells[0], source, r.line), parse_number(r.cells[1], source, r.line)};
        if (!out.empty() && !(p.energy_meV > out.back().energy_meV))
            throw SchemaError(source, r.line, "energy_meV must be strictly increasing");
        out.push_back(p);
    }
    return out;
}

inline std::string format_pdos_csv(std::span<const PdosPoint> s)
{
    std::string out(pdos_header);
    out += '\n';
    for (const auto& p : s) out += fmt::format("{},{}\n", format_number(p.energy_meV), format_number(p.density));
    return out;
}

// ---------------------------------------------------------------------------
// Generic numeric tables (plot data, predicted curves)

inline std::string format_table_csv(std::span<const std::string_view> columns,
                                    const std::vector<std::vector<double>>& rows)
{
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) out += ',';
        out += columns[i];
    }
    out += '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i) out += ',';
            out += format_number(r[i]);
        }
        out += '\n';
    }
    return out;
}

} // namespace vbrelax::io
