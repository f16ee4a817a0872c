#pragma once

#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "motiontok/common.hpp"

namespace motiontok::eval {

struct EvalReport {
    std::string task;
    std::map<std::string, double> metrics;  // metric name -> millimeters
    int sample_count = 0;
    std::string config_hash;

    void validate() const {
        if (sample_count < 0) throw DataError("eval report: negative sample count");
        for (const auto& [name, v] : metrics)
            if (!std::isfinite(v) || v < 0.0) throw DataError("eval report: metric " + name + " must be finite and >= 0");
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["task"] = task;
        j["sample_count"] = sample_count;
        j["config_hash"] = config_hash;
        j["metrics"] = metrics;
        return j;
    }

    std::string to_text() const {
        std::ostringstream out;
        out << "task: " << task << "  samples: " << sample_count << "  config: " << config_hash << "\n";
        std::size_t width = 0;
        for (const auto& [name, v] : metrics) width = std::max(width, name.size());
        for (const auto& [name, v] : metrics)
            out << "  " << std::left << std::setw(static_cast<int>(width)) << name << "  " << std::right
                << std::fixed << std::setprecision(4) << v << "\n";
        return out.str();
    }
};

struct CodebookUsageReport {
    int codes = 0;
    int frequent = 0;
    int active = 0;
    int underused = 0;
    int unused = 0;
    std::vector<double> frequencies;  // per code, sums to 1 over used codes
    std::int64_t total_cells = 0;

    void validate() const {
        if (frequent + active + underused + unused != codes)
            throw DataError("usage report: buckets must partition the codebook");
        double sum = 0.0;
        for (double f : frequencies) sum += f;
        if (total_cells > 0 && std::fabs(sum - 1.0) > 1e-9)
            throw DataError("usage report: frequencies must sum to 1");
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["codes"] = codes;
        j["total_cells"] = total_cells;
        j["buckets"] = {{"frequent", frequent}, {"active", active}, {"underused", underused}, {"unused", unused}};
        j["frequencies"] = frequencies;
        return j;
    }
};

struct CosineHistogram {
    int bins = 0;
    std::vector<std::int64_t> counts;  // over [-1, 1]

    std::int64_t total() const {
        std::int64_t t = 0;
        for (auto c : counts) t += c;
        return t;
    }

    std::string to_csv() const {
        std::ostringstream out;
        out << "bin_lo,bin_hi,count\n";
        for (int b = 0; b < bins; ++b) {
            const double lo = -1.0 + 2.0 * b / bins;
            const double hi = -1.0 + 2.0 * (b + 1) / bins;
            out << lo << "," << hi << "," << counts[static_cast<std::size_t>(b)] << "\n";
        }
        return out.str();
    }
};

struct SemanticSphereEntry {
    int code = 0;
    std::int64_t count = 0;
    double direction[3] = {0.0, 0.0, 0.0};  // unit length unless flagged
    bool zero_flagged = false;
};

inline std::string spheres_to_csv(const std::vector<SemanticSphereEntry>& entries) {
    std::ostringstream out;
    out << "code,count,ux,uy,uz,zero_flagged\n";
    for (const auto& e : entries)
        out << e.code << "," << e.count << "," << e.direction[0] << "," << e.direction[1] << "," << e.direction[2]
            << "," << (e.zero_flagged ? 1 : 0) << "\n";
    return out.str();
}

}  // namespace motiontok::eval
