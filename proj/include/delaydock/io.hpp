#pragma once

// Deterministic text formatting and small file helpers shared by the CSV
// interfaces and the CLI. All numeric output is locale-independent.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace delaydock::io {

/// Format a double with 9 significant digits (CSV payload convention for
/// analysis artifacts: curves, grids, locus traces).
inline std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

/// Shortest round-trip representation; used for trajectory CSVs, whose
/// ingestion must reproduce the metrics exactly.
inline std::string rt_num(double v) {
    if (!std::isfinite(v)) return csv_num(v);
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// Write a file atomically: write to a sibling temp file, then rename.
inline void atomic_write(const std::filesystem::path& path, std::string_view content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

/// Split one CSV line on commas. No quoting support; the trace format does
/// not need it.
inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

/// Thread cap for sweep parallelism, from DELAYDOCK_THREADS (>= 1).
inline unsigned sweep_threads() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("DELAYDOCK_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1 && v < 1024) return static_cast<unsigned>(v) < hw ? static_cast<unsigned>(v) : hw;
        return 1;
    }
    return hw;
}

/// Index-parallel loop with deterministic output: each index owns its slot,
/// so assembly order does not depend on scheduling.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    unsigned threads = sweep_threads();
    if (threads <= 1 || n < 256) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        std::size_t lo = t * chunk;
        std::size_t hi = lo + chunk < n ? lo + chunk : n;
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace delaydock::io
