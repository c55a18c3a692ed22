#pragma once

// Shared fixtures for the test suite.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "pddlkit/source.hpp"

namespace testutil {

inline std::filesystem::path data_dir() { return std::filesystem::path(PDDLKIT_DATA_DIR); }

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("test fixture missing: " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline std::string fixture(const std::string& name) {
    return read_file(data_dir() / "fixtures" / name);
}

inline std::vector<pddlkit::Diagnostic> errors_of(const std::vector<pddlkit::Diagnostic>& diags) {
    std::vector<pddlkit::Diagnostic> out;
    for (const auto& d : diags)
        if (d.severity == pddlkit::Severity::error) out.push_back(d);
    return out;
}

// unique scratch directory under the system temp dir, removed on destruction
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        static std::atomic<unsigned long> counter{0};
        auto stamp = std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1));
        path = std::filesystem::temp_directory_path() / ("pddlkit-test-" + stamp);
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string str() const { return path.string(); }
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
}

} // namespace testutil
