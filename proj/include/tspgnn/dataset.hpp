// Copyright (c) 2026 the tspgnn authors. Licensed under the Apache License 2.0.
#pragma once

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tspgnn/common.hpp"
#include "tspgnn/instance.hpp"
#include "tspgnn/oracles.hpp"
#include "tspgnn/parallel.hpp"

namespace tspgnn {

/// A solved instance: the graph, how it was produced, and its optimal tour
/// cost (exact from the dynamic program, or flagged approximate when the
/// instance is beyond its reach).
struct DatasetRecord {
    TspInstance instance;
    GeneratorTag tag = GeneratorTag::kEuclidean;
    std::uint64_t seed = 0;
    bool approx = false;

    double optimal() const {
        if (!instance.optimal_cost) throw DataError("DatasetRecord: missing optimal cost");
        return *instance.optimal_cost;
    }
};

/// Policy for ground truth past the exact solver's capacity.
enum class OraclePolicy { kExactOnly, kAllowApproximate };

inline DatasetRecord make_record(GeneratorTag tag, std::size_t n, std::uint64_t seed,
                                 OraclePolicy policy = OraclePolicy::kExactOnly,
                                 std::size_t approx_restarts = 8) {
    DatasetRecord rec;
    rec.tag = tag;
    rec.seed = seed;
    rec.instance = generate_instance(tag, n, seed);
    if (n <= kHeldKarpMaxCities) {
        rec.instance.optimal_cost = held_karp(rec.instance).cost;
        rec.approx = false;
    } else if (policy == OraclePolicy::kAllowApproximate) {
        rec.instance.optimal_cost = sa_with_restarts(rec.instance, approx_restarts, seed).cost;
        rec.approx = true;
    } else {
        throw DataError("make_record: n=" + std::to_string(n) +
                        " exceeds the exact oracle capacity; pass kAllowApproximate to accept "
                        "heuristic ground truth");
    }
    return rec;
}

/// Generates `count` solved records with sizes uniform in [n_min, n_max].
/// Every record is a pure function of (tag, size, derived seed), so the
/// result is identical no matter how the work is spread over threads.
std::vector<DatasetRecord> make_records(GeneratorTag tag, std::size_t count, std::size_t n_min,
                                        std::size_t n_max, std::uint64_t master_seed,
                                        OraclePolicy policy = OraclePolicy::kExactOnly,
                                        std::size_t threads = 1);

/// YES/NO decision instances at targets (1 +- x) * C*, sharing one graph.
/// Labels are correct by construction: a tour of cost C* exists, none
/// cheaper does.
struct DualPair {
    DecisionInstance positive;
    DecisionInstance negative;
    double deviation = 0.0;
};

inline DualPair make_dual_pair(const DatasetRecord& record, double deviation) {
    if (!(deviation > 0.0 && deviation < 1.0))
        throw DataError("make_dual_pair: deviation must be in (0,1)");
    const double opt = record.optimal();
    DualPair pair;
    pair.deviation = deviation;
    pair.positive = DecisionInstance::make(record.instance, (1.0 + deviation) * opt, true);
    pair.negative = DecisionInstance::make(record.instance, (1.0 - deviation) * opt, false);
    return pair;
}

// ---------------------------------------------------------------------------
// Persistence: line-delimited text, one record per line after a version
// header. Reals are serialized as hex floats so round-trips are bitwise.
//
//   tspgnn-dataset v1
//   <tag> <seed> <n> <exact|approx> <optimal_cost> <payload...>
//
// Payload: 2n coordinates for euclidean records, the n(n-1)/2 upper-triangle
// weights otherwise.
// ---------------------------------------------------------------------------

inline constexpr const char* kDatasetHeader = "tspgnn-dataset v1";

inline std::vector<DatasetRecord> make_records(GeneratorTag tag, std::size_t count,
                                               std::size_t n_min, std::size_t n_max,
                                               std::uint64_t master_seed, OraclePolicy policy,
                                               std::size_t threads) {
    if (n_min < 3 || n_max < n_min) throw ConfigError("make_records: bad size range");
    std::vector<DatasetRecord> records(count);
    parallel_for(count, threads, [&](std::size_t i) {
        const std::uint64_t seed = derive_seed(master_seed, i);
        Rng size_rng(derive_seed(master_seed, 0x517e0000ULL + i));
        const std::size_t n = static_cast<std::size_t>(
            size_rng.uniform_int(static_cast<std::int64_t>(n_min),
                                 static_cast<std::int64_t>(n_max)));
        records[i] = make_record(tag, n, seed, policy);
    });
    return records;
}

inline void save_dataset(const std::vector<DatasetRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("save_dataset: cannot open " + path);
    out << kDatasetHeader << '\n';
    for (const DatasetRecord& rec : records) {
        out << to_string(rec.tag) << ' ' << rec.seed << ' ' << rec.instance.n << ' '
            << (rec.approx ? "approx" : "exact") << ' ' << detail::hex_double(rec.optimal());
        if (rec.tag == GeneratorTag::kEuclidean) {
            for (const auto& p : rec.instance.coords)
                out << ' ' << detail::hex_double(p[0]) << ' ' << detail::hex_double(p[1]);
        } else {
            for (std::size_t i = 0; i < rec.instance.n; ++i)
                for (std::size_t j = i + 1; j < rec.instance.n; ++j)
                    out << ' ' << detail::hex_double(rec.instance.weight(i, j));
        }
        out << '\n';
    }
    if (!out) throw DataError("save_dataset: write failed for " + path);
}

inline std::vector<DatasetRecord> load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("load_dataset: cannot open " + path);
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line) || line != kDatasetHeader)
        throw ParseError("line 1: expected header '" + std::string(kDatasetHeader) + "'");

    std::vector<DatasetRecord> records;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::size_t record_index = records.size();
        std::istringstream fields(line);
        auto fail = [&](const std::string& what) -> ParseError {
            return ParseError("line " + std::to_string(line_no) + " (record " +
                              std::to_string(record_index) + "): " + what);
        };

        std::string tag_str, approx_str, opt_str;
        std::uint64_t seed = 0;
        std::size_t n = 0;
        if (!(fields >> tag_str >> seed >> n >> approx_str >> opt_str))
            throw fail("truncated record header");
        DatasetRecord rec;
        rec.tag = generator_tag_from(tag_str);
        rec.seed = seed;
        if (approx_str != "exact" && approx_str != "approx")
            throw fail("bad oracle flag '" + approx_str + "'");
        rec.approx = (approx_str == "approx");
        const double opt = detail::parse_double(opt_str, line_no);

        std::string token;
        if (rec.tag == GeneratorTag::kEuclidean) {
            std::vector<std::array<double, 2>> coords(n);
            for (std::size_t i = 0; i < n; ++i)
                for (int axis = 0; axis < 2; ++axis) {
                    if (!(fields >> token)) throw fail("truncated coordinates");
                    coords[i][static_cast<std::size_t>(axis)] =
                        detail::parse_double(token, line_no);
                }
            rec.instance = instance_from_coords(std::move(coords));
        } else {
            rec.instance.n = n;
            rec.instance.weights = Tensor::matrix(n, n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) {
                    if (!(fields >> token)) throw fail("truncated weight triangle");
                    const double w = detail::parse_double(token, line_no);
                    rec.instance.weights(i, j) = w;
                    rec.instance.weights(j, i) = w;
                }
        }
        if (fields >> token) throw fail("trailing fields");
        rec.instance.optimal_cost = opt;
        rec.instance.validate();
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace tspgnn
