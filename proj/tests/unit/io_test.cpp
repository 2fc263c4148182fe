// Copyright 2026 The vbrelax Authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <gtest/gtest.h>

#include "vbrelax/io/csv.hpp"
#include "vbrelax/io/files.hpp"
#include "vbrelax/io/record.hpp"
#include "vbrelax/io/svg.hpp"

using namespace vbrelax;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("vbrelax_io_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::size_t schema_row(const std::string& text)
{
    try {
        io::parse_decay_csv(text, "in.csv", CurveKind::f1);
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.path(), "in.csv");
        return e.row();
    }
    ADD_FAILURE() << "no schema error for:\n" << text;
    return 999;
}

} // namespace

TEST(Csv, DecayRoundTripIsExact)
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    DecayDataset d{CurveKind::f2, {}, std::nullopt};
    double tau = 0.0;
    for (int i = 0; i < 50; ++i) {
        d.points.push_back({tau, u(rng) * 3.0 - 1.0, 1e-5 + u(rng)});
        tau += u(rng) * 1.7 + 1e-9;
    }
    const auto text = io::format_decay_csv(d);
    EXPECT_EQ(text.substr(0, text.find('\n')), "tau_us,signal,sigma");
    EXPECT_EQ(io::parse_decay_csv(text, "x", CurveKind::f2).points, d.points);
}

TEST(Csv, OtherSchemasRoundTrip)
{
    const std::vector<SpectrumPoint> odmr{{3300.1, 0.99}, {3301.7, 0.98123456789012345}};
    EXPECT_EQ(io::parse_odmr_csv(io::format_odmr_csv(odmr), "o"), odmr);

    std::vector<PdosPoint> pdos;
    for (int i = 0; i < 5; ++i) pdos.push_back({0.1 * i + 1.0 / 3.0, std::exp(-i * 0.7)});
    EXPECT_EQ(io::parse_pdos_csv(io::format_pdos_csv(pdos), "p"), pdos);

    TemperatureSeries a{{{293.0, 30.1, 1.5, 80.2, 4.0}, {303.0, 33.3, 1.6, 90.1, 4.5}}, "spot1"};
    TemperatureSeries b{{{293.0, 20.0, 1.0, 60.0, 3.0}}, "spot2"};
    const std::vector<TemperatureSeries> all{a, b};
    const auto back = io::parse_series_csv(io::format_series_csv(all), "s");
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].spot_label, "spot1");
    EXPECT_EQ(back[0].points, a.points);
    EXPECT_EQ(back[1].points, b.points);
}

TEST(Csv, SeriesWithoutLabelColumn)
{
    const std::string text = "T_K,omega_kHz,sigma_omega_kHz,gamma_kHz,sigma_gamma_kHz\n300,1,0.1,2,0.2\n310,1.1,0.1,2.2,0.2\n";
    const auto s = io::parse_series_csv(text, "s");
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0].points.size(), 2u);
}

TEST(Csv, SeriesGroupsInterleavedLabels)
{
    const std::string text = "T_K,omega_kHz,sigma_omega_kHz,gamma_kHz,sigma_gamma_kHz,spot_label\n"
                             "300,1,0.1,2,0.2,b\n300,5,0.1,6,0.2,a\n310,1.1,0.1,2.2,0.2,b\n";
    const auto s = io::parse_series_csv(text, "s");
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[0].spot_label, "b");
    EXPECT_EQ(s[0].points.size(), 2u);
    EXPECT_EQ(s[1].spot_label, "a");
}

TEST(Csv, AcceptsCrLfAndBlankLines)
{
    const auto d = io::parse_decay_csv("tau_us,signal,sigma\r\n0,1,0.1\r\n\r\n1,0.5,0.1\r\n", "x", CurveKind::f1);
    EXPECT_EQ(d.points.size(), 2u);
}

TEST(Csv, SchemaErrorsCarryRowNumbers)
{
    EXPECT_EQ(schema_row(""), 0u);
    EXPECT_EQ(schema_row("tau,signal,sigma\n0,1,1\n"), 1u);
    EXPECT_EQ(schema_row("tau_us,signal,sigma\n"), 0u);
    EXPECT_EQ(schema_row("tau_us,signal,sigma\n0,1,0.1\n1,abc,0.1\n"), 3u);
    EXPECT_EQ(schema_row("tau_us,signal,sigma\n0,1,0.1\n1,0.5\n"), 3u);
    EXPECT_EQ(schema_row("tau_us,signal,sigma\n0,1,0.1\n2,1,0.1\n1,0.5,0.1\n"), 4u);
    EXPECT_EQ(schema_row("tau_us,signal,sigma\n0,1,0\n"), 2u);
    EXPECT_EQ(schema_row("tau_us,signal,sigma\n-1,1,0.1\n"), 2u);
    EXPECT_EQ(schema_row("tau_us,signal,sigma\n0,nan,0.1\n"), 2u);
    EXPECT_EQ(schema_row("tau_us,signal,sigma\n0,inf,0.1\n"), 2u);
    EXPECT_EQ(schema_row("tau_us,signal,sigma,extra\n0,1,0.1,3\n"), 1u);
}

TEST(Csv, SchemaErrorMessageNamesFileAndRow)
{
    try {
        io::parse_odmr_csv("freq_MHz,contrast\n3300,x\n", "spectrum.csv");
        FAIL();
    } catch (const SchemaError& e) {
        EXPECT_NE(std::string(e.what()).find("spectrum.csv:2"), std::string::npos);
    }
}

TEST(Svg, ParsesAsXmlWithBothSeries)
{
    io::PlotSeries data{"data", io::SeriesStyle::markers, "#1f77b4", {0, 1, 2, 3}, {1.0, 0.6, 0.35, 0.2}, {0.05, 0.05, 0.05, 0.05}};
    io::PlotSeries fit{"fit <model> & more", io::SeriesStyle::line, "#d62728", {0, 1.5, 3}, {1.0, 0.45, 0.2}, {}};
    const auto svg = io::emit_plot_svg({data, fit}, {"F1 decay", "tau (us)", "signal", 640, 420});

    std::istringstream in(svg);
    boost::property_tree::ptree tree;
    ASSERT_NO_THROW(boost::property_tree::read_xml(in, tree));
    const auto& root = tree.get_child("svg");
    int groups = 0;
    for (const auto& [tag, node] : root)
        if (tag == "g" && node.get<std::string>("<xmlattr>.class", "") == "series") ++groups;
    EXPECT_EQ(groups, 2);
    EXPECT_NE(svg.find("id=\"series-0\""), std::string::npos);
    EXPECT_NE(svg.find("id=\"series-1\""), std::string::npos);
    EXPECT_NE(svg.find("&lt;model&gt; &amp; more"), std::string::npos);
}

TEST(Svg, Deterministic)
{
    io::PlotSeries s{"a", io::SeriesStyle::markers, "#000", {1, 2, 3}, {3, 2, 1}, {}};
    EXPECT_EQ(io::emit_plot_svg({s}, {"t", "x", "y"}), io::emit_plot_svg({s}, {"t", "x", "y"}));
}

TEST(Svg, HandlesDegenerateRanges)
{
    io::PlotSeries s{"flat", io::SeriesStyle::line, "#000", {5, 5}, {1, 1}, {}};
    const auto svg = io::emit_plot_svg({s}, {"t", "x", "y"});
    EXPECT_EQ(svg.find("nan"), std::string::npos);
    EXPECT_EQ(svg.find("inf"), std::string::npos);
}

TEST(Svg, RejectsMalformedSeries)
{
    io::PlotSeries s{"bad", io::SeriesStyle::markers, "#000", {1, 2}, {3}, {}};
    EXPECT_THROW(io::emit_plot_svg({s}, {}), InvalidArgument);
    EXPECT_THROW(io::emit_plot_svg({}, {}), InvalidArgument);
}

TEST(Digest, KnownVectorAndSensitivity)
{
    const std::vector<std::string> parts{"abc", ""};
    EXPECT_EQ(io::sha256_hex(parts), "bdf1004d3099a7a3712d12c456e15ebb2b81d43740868f77760be8f639855aad");
    const std::vector<std::string> moved{"ab", "c"};
    EXPECT_NE(io::sha256_hex(parts), io::sha256_hex(moved));
    const std::vector<std::string> changed{"abd", ""};
    EXPECT_NE(io::sha256_hex(parts), io::sha256_hex(changed));
}

TEST(Record, CouplingRoundTripAndValidation)
{
    CouplingSet c{reference_modes(), {1.0, 2.0, 3.0}, 0.5, {4.0, 5.0, 6.0}, 0.25};
    const auto back = io::coupling_from_json(io::coupling_to_json(c));
    EXPECT_EQ(back.modes, c.modes);
    EXPECT_EQ(back.a_coeffs, c.a_coeffs);
    EXPECT_EQ(back.b_offset, c.b_offset);

    auto j = io::coupling_to_json(c);
    j["extra"] = 1;
    EXPECT_THROW(io::coupling_from_json(j), ConfigError);
    j = io::coupling_to_json(c);
    j["a_coeffs_kHz"] = {1.0, -2.0, 3.0};
    EXPECT_THROW(io::coupling_from_json(j), ConfigError);
    j = io::coupling_to_json(c);
    j.erase("b_offset_kHz");
    EXPECT_THROW(io::coupling_from_json(j), ConfigError);
}

TEST(OutputBatch, CommitsAllFiles)
{
    const auto dir = scratch("commit");
    io::OutputBatch batch;
    batch.add(dir / "a.txt", "alpha");
    batch.add(dir / "b.txt", "beta");
    batch.commit();
    EXPECT_EQ(io::read_file(dir / "a.txt"), "alpha");
    EXPECT_EQ(io::read_file(dir / "b.txt"), "beta");
    for (const auto& e : fs::directory_iterator(dir)) EXPECT_EQ(e.path().string().find(".tmp."), std::string::npos);
}

TEST(OutputBatch, FailureLeavesNoPartialOutput)
{
    const auto dir = scratch("fail");
    io::OutputBatch batch;
    batch.add(dir / "a.txt", "alpha");
    batch.add(dir / "missing" / "b.txt", "beta");
    EXPECT_THROW(batch.commit(), IoError);
    EXPECT_TRUE(fs::is_empty(dir));
}

TEST(Files, ReadErrorsAreIoErrors)
{
    EXPECT_THROW(io::read_file("/nonexistent/vbrelax/file.csv"), IoError);
    EXPECT_THROW(io::require_readable("/nonexistent/vbrelax/file.csv"), IoError);
}

TEST(Files, PrepareOutputDirCreatesNestedDirectories)
{
    const auto dir = scratch("prepare") / "x" / "y";
    io::prepare_output_dir(dir);
    EXPECT_TRUE(fs::is_directory(dir));
    EXPECT_TRUE(fs::is_empty(dir));
}
