#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "attackmap/matrix.hpp"
#include "attackmap/rng.hpp"

namespace testing {

inline const std::filesystem::path kTestData = ATTACKMAP_TEST_DATA;
inline const std::filesystem::path kFixtures = ATTACKMAP_FIXTURES;
inline const std::filesystem::path kSnapshot = ATTACKMAP_SNAPSHOT;
inline const std::filesystem::path kStopwordsFile = ATTACKMAP_STOPWORDS;

// Scratch directory removed on scope exit.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("attackmap-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline attackmap::FeatureMatrix dense(const std::vector<std::vector<double>>& rows) {
    attackmap::DenseMatrix m(0, rows.empty() ? 0 : rows.front().size());
    for (const auto& r : rows) m.append_row(r);
    return {m, {}};
}

inline attackmap::DenseMatrix random_matrix(attackmap::Rng& rng, std::size_t rows, std::size_t cols) {
    attackmap::DenseMatrix m(rows, cols);
    for (double& v : m.data()) v = rng.normal();
    return m;
}

// Gaussian blobs around well separated centers.
struct Blobs {
    attackmap::FeatureMatrix x;
    std::vector<int> y;
};

inline Blobs make_blobs(std::uint64_t seed, std::size_t points, std::size_t classes, std::size_t dims,
                        double spread = 1.0, double separation = 6.0) {
    attackmap::Rng rng(seed);
    std::vector<std::vector<double>> centers(classes, std::vector<double>(dims));
    for (auto& c : centers)
        for (double& v : c) v = rng.uniform(-separation, separation);
    attackmap::DenseMatrix x(0, dims);
    Blobs out;
    for (std::size_t i = 0; i < points; ++i) {
        const std::size_t label = i % classes;
        std::vector<double> row(dims);
        for (std::size_t d = 0; d < dims; ++d) row[d] = centers[label][d] + spread * rng.normal();
        x.append_row(row);
        out.y.push_back(static_cast<int>(label));
    }
    out.x = {std::move(x), {}};
    return out;
}

}  // namespace testing
