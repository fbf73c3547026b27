#ifndef AUTOTUNE_TEST_UTIL_HPP
#define AUTOTUNE_TEST_UTIL_HPP

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <stdlib.h>

#include "space.hpp"

namespace testutil {

/// Self-deleting unique directory for tests that touch the filesystem.
class TempDir {
public:
    TempDir() {
        std::string tmpl =
            (std::filesystem::temp_directory_path() / "autotune-test-XXXXXX").string();
        if (!mkdtemp(tmpl.data()))
            throw std::runtime_error("mkdtemp failed");
        path_ = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

inline std::filesystem::path campaigns_dir() {
    return std::filesystem::path(AUTOTUNE_CAMPAIGNS_DIR);
}

inline std::filesystem::path openmc_space_path() {
    return campaigns_dir() / "openmc" / "space.json";
}

/// Small conditional space used across tests: a 2-choice categorical, a
/// quantized integer, an ordinal, and one child gated on mode == "a".
/// Cardinality: 6*3*(3 + 1) * ... = mode a: 6*3*3 = 54, mode b: 6*3 = 18 => 72.
inline autotune::ParameterSpace small_space() {
    using namespace autotune;
    std::vector<ParameterSpec> params;
    params.push_back({"mode", CategoricalKind{{"a", "b"}}, Value{std::string("a")}});
    params.push_back({"level", UniformIntKind{0, 10, 2}, Value{std::int64_t{4}}});
    params.push_back({"scale", OrdinalKind{{0.5, 1.0, 2.0}}, Value{1.0}});
    params.push_back({"depth", UniformIntKind{1, 3, 1}, Value{std::int64_t{2}}});
    std::vector<ActivationCondition> conds;
    conds.push_back({"depth", "mode", Value{std::string("a")}});
    return ParameterSpace(std::move(params), std::move(conds));
}

inline std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (char c : text)
        n += c == '\n';
    return n;
}

} // namespace testutil

#endif
