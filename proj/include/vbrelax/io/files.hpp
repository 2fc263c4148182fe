// Copyright 2026 The vbrelax Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include <unistd.h>

#include "vbrelax/error.hpp"

namespace vbrelax::io {

namespace fs = std::filesystem;

inline std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("error reading " + path.string());
    return ss.str();
}

/// Files written together or not at all. Contents are staged in memory,
/// written to temporaries next to their targets, then renamed into place.
class OutputBatch {
public:
    void add(fs::path path, std::string contents) { files_.emplace_back(std::move(path), std::move(contents)); }

    const std::vector<std::pair<fs::path, std::string>>& files() const noexcept { return files_; }

    void commit() const
    {
        std::vector<fs::path> temps;
        std::vector<fs::path> placed;
        auto cleanup = [&] {
            std::error_code ec;
            for (const auto& t : temps) fs::remove(t, ec);
            for (const auto& p : placed) fs::remove(p, ec);
        };
        try {
            for (const auto& [path, contents] : files_) {
                fs::path tmp = path;
                tmp += ".tmp." + std::to_string(::getpid());
                temps.push_back(tmp);
                std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
                if (!out) throw IoError("cannot write " + tmp.string());
                out << contents;
                out.close();
                if (!out) throw IoError("error writing " + tmp.string());
            }
            for (std::size_t i = 0; i < files_.size(); ++i) {
                std::error_code ec;
                fs::rename(temps[i], files_[i].first, ec);
                if (ec) throw IoError("cannot move " + temps[i].string() + " into place: " + ec.message());
                placed.push_back(files_[i].first);
            }
        } catch (...) {
            cleanup();
            throw;
        }
    }

private:
    std::vector<std::pair<fs::path, std::string>> files_;
};

/// Creates `dir` if needed and checks that files can be created in it.
inline void prepare_output_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
    const fs::path probe = dir / (".vbrelax-probe." + std::to_string(::getpid()));
    {
        std::ofstream out(probe);
        if (!out) throw IoError("output directory " + dir.string() + " is not writable");
    }
    fs::remove(probe, ec);
}

inline void require_readable(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open input " + path.string());
}

} // namespace vbrelax::io
