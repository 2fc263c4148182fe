// Copyright 2026 The vbrelax Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// JSON result records and the helpers that serialize fit results into them.

#include <algorithm>
#include <chrono>
#include <ctime>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <openssl/evp.h>

#include "json.hpp"
#include "vbrelax/error.hpp"
#include "vbrelax/lm.hpp"
#include "vbrelax/phonon.hpp"

namespace vbrelax::io {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view toolkit_version = "0.1.0";

/// Hex SHA-256 over the concatenation of `parts`, each prefixed by its
/// length so that moving bytes between parts changes the digest.
inline std::string sha256_hex(std::span<const std::string> parts)
{
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) throw Error("cannot allocate digest context");
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    for (const auto& p : parts) {
        const std::string len = std::to_string(p.size()) + ":";
        EVP_DigestUpdate(ctx, len.data(), len.size());
        EVP_DigestUpdate(ctx, p.data(), p.size());
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int n = 0;
    EVP_DigestFinal_ex(ctx, md, &n);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    for (unsigned int i = 0; i < n; ++i) hex += fmt::format("{:02x}", md[i]);
    return hex;
}

inline std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(now));
}

inline Json value_with_error(double value, double error) { return Json{{"value", value}, {"stderr", error}}; }

inline Json fit_to_json(const FitResult& fit)
{
    Json params = Json::object();
    for (std::size_t i = 0; i < fit.params.size(); ++i)
        params[fit.param_names[i]] = value_with_error(fit.params[i], fit.errors[i]);
    return Json{{"params", params},
                {"chi2", fit.chi2},
                {"dof", fit.dof},
                {"reduced_chi2", fit.reduced_chi2()},
                {"converged", fit.converged},
                {"iterations", fit.iterations}};
}

inline Json coupling_to_json(const CouplingSet& c)
{
    Json modes = Json::array();
    for (const auto& m : c.modes) modes.push_back(m.energy_meV());
    return Json{{"modes_meV", modes},
                {"a_coeffs_kHz", c.a_coeffs},
                {"a_offset_kHz", c.a_offset},
                {"b_coeffs_kHz", c.b_coeffs},
                {"b_offset_kHz", c.b_offset}};
}

inline CouplingSet coupling_from_json(const Json& j)
{
    static constexpr std::string_view keys[] = {"modes_meV", "a_coeffs_kHz", "a_offset_kHz", "b_coeffs_kHz",
                                                "b_offset_kHz"};
    if (!j.is_object()) throw ConfigError("coupling must be a JSON object");
    for (const auto& [k, v] : j.items())
        if (std::find(std::begin(keys), std::end(keys), k) == std::end(keys))
            throw ConfigError("unknown coupling key '" + k + "'");
    try {
        CouplingSet c;
        for (double e : j.at("modes_meV").get<std::vector<double>>()) c.modes.emplace_back(e);
        c.a_coeffs = j.at("a_coeffs_kHz").get<std::vector<double>>();
        c.a_offset = j.at("a_offset_kHz").get<double>();
        c.b_coeffs = j.at("b_coeffs_kHz").get<std::vector<double>>();
        c.b_offset = j.at("b_offset_kHz").get<double>();
        c.validate();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid coupling: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("invalid coupling: ") + e.what());
    }
}

/// Table as {"columns": [...], "rows": [[...], ...]}.
inline Json table_to_json(std::span<const std::string_view> columns, const std::vector<std::vector<double>>& rows)
{
    Json cols = Json::array();
    for (auto c : columns) cols.push_back(std::string(c));
    return Json{{"columns", cols}, {"rows", rows}};
}

} // namespace vbrelax::io
