// Copyright (c) 2026 the tspgnn authors. Licensed under the Apache License 2.0.
#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tspgnn/common.hpp"
#include "tspgnn/instance.hpp"

namespace tspgnn {

struct UnsupportedFormatError : ParseError {
    explicit UnsupportedFormatError(const std::string& msg) : ParseError(msg) {}
};

enum class TsplibWeightType { kEuc2d, kGeo };

/// How raw distances are computed from node coordinates.
///  - kEuc2dRounded: nint(euclidean), the TSPLIB convention behind the
///    documented optima of EUC_2D instances.
///  - kEuc2dReal: plain euclidean distance.
///  - kGeoHaversine: great-circle distance by the haversine formula on a
///    mean-radius sphere (the convention used for the ulysses* results).
///  - kGeoStrict: TSPLIB's own GEO formula, for cross-checking documented
///    optima of GEO instances.
enum class DistanceConvention { kEuc2dRounded, kEuc2dReal, kGeoHaversine, kGeoStrict };

struct TsplibFile {
    std::string name;
    std::size_t dimension = 0;
    TsplibWeightType weight_type = TsplibWeightType::kEuc2d;
    std::vector<std::array<double, 2>> coords;  // x/y, or latitude/longitude input
};

struct TsplibInstance {
    std::string name;
    std::size_t n = 0;
    TsplibWeightType weight_type = TsplibWeightType::kEuc2d;
    DistanceConvention convention = DistanceConvention::kEuc2dRounded;
    Tensor raw;                // raw distance matrix under the convention
    TspInstance normalized;    // raw / factor, the model's input
    double normalization = 1;  // max raw distance

    double denormalize(double model_cost) const { return model_cost * normalization; }
};

namespace tsplib_detail {

/// TSPLIB GEO coordinates are DDD.MM (degrees and minutes). The degree part
/// truncates toward zero; rounding it instead shifts ulysses16 off its
/// documented optimum.
inline double ddmm_to_radians(double x) {
    constexpr double kPi = 3.141592;
    const double deg = std::trunc(x);
    const double min = x - deg;
    return kPi * (deg + 5.0 * min / 3.0) / 180.0;
}

inline double geo_strict(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    constexpr double kRadius = 6378.388;
    const double lat1 = ddmm_to_radians(a[0]), lon1 = ddmm_to_radians(a[1]);
    const double lat2 = ddmm_to_radians(b[0]), lon2 = ddmm_to_radians(b[1]);
    const double q1 = std::cos(lon1 - lon2);
    const double q2 = std::cos(lat1 - lat2);
    const double q3 = std::cos(lat1 + lat2);
    return std::floor(kRadius * std::acos(0.5 * ((1.0 + q1) * q2 - (1.0 - q1) * q3)) + 1.0);
}

inline double geo_haversine(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    constexpr double kRadius = 6371.0;
    const double lat1 = ddmm_to_radians(a[0]), lon1 = ddmm_to_radians(a[1]);
    const double lat2 = ddmm_to_radians(b[0]), lon2 = ddmm_to_radians(b[1]);
    const double sin_lat = std::sin(0.5 * (lat2 - lat1));
    const double sin_lon = std::sin(0.5 * (lon2 - lon1));
    const double h = sin_lat * sin_lat + std::cos(lat1) * std::cos(lat2) * sin_lon * sin_lon;
    return 2.0 * kRadius * std::asin(std::min(1.0, std::sqrt(h)));
}

inline double distance(const std::array<double, 2>& a, const std::array<double, 2>& b,
                       DistanceConvention conv) {
    switch (conv) {
        case DistanceConvention::kEuc2dRounded: return std::round(euclidean(a, b));
        case DistanceConvention::kEuc2dReal: return euclidean(a, b);
        case DistanceConvention::kGeoHaversine: return geo_haversine(a, b);
        case DistanceConvention::kGeoStrict: return geo_strict(a, b);
    }
    throw InternalError("unknown distance convention");
}

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

}  // namespace tsplib_detail

inline DistanceConvention default_convention(TsplibWeightType type, bool paper_mode = true) {
    if (type == TsplibWeightType::kEuc2d) return DistanceConvention::kEuc2dRounded;
    return paper_mode ? DistanceConvention::kGeoHaversine : DistanceConvention::kGeoStrict;
}

/// Parses the node-coordinate TSPLIB format (EUC_2D and GEO weight types).
inline TsplibFile tsplib_parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("tsplib: cannot open " + path);

    TsplibFile file;
    std::string line;
    std::size_t line_no = 0;
    bool in_coords = false;
    bool have_type = false;

    while (std::getline(in, line)) {
        ++line_no;
        std::string text = tsplib_detail::trim(line);
        if (text.empty()) continue;
        if (!in_coords) {
            // "KEY : value" headers, colon optionally unspaced.
            std::string key = text, value;
            const auto colon = text.find(':');
            if (colon != std::string::npos) {
                key = tsplib_detail::trim(text.substr(0, colon));
                value = tsplib_detail::trim(text.substr(colon + 1));
            }
            if (key == "NAME") {
                file.name = value;
            } else if (key == "DIMENSION") {
                file.dimension = std::stoul(value);
            } else if (key == "EDGE_WEIGHT_TYPE") {
                have_type = true;
                if (value == "EUC_2D")
                    file.weight_type = TsplibWeightType::kEuc2d;
                else if (value == "GEO")
                    file.weight_type = TsplibWeightType::kGeo;
                else
                    throw UnsupportedFormatError("tsplib line " + std::to_string(line_no) +
                                                 ": unsupported EDGE_WEIGHT_TYPE " + value);
            } else if (key == "NODE_COORD_SECTION") {
                in_coords = true;
                if (file.dimension == 0)
                    throw ParseError("tsplib line " + std::to_string(line_no) +
                                     ": NODE_COORD_SECTION before DIMENSION");
                file.coords.resize(file.dimension);
            }
            // TYPE, COMMENT, DISPLAY_DATA_TYPE and the like are ignored.
        } else {
            if (text == "EOF") break;
            std::istringstream fields(text);
            std::size_t index = 0;
            double x = 0, y = 0;
            if (!(fields >> index >> x >> y) || index == 0 || index > file.dimension)
                throw ParseError("tsplib line " + std::to_string(line_no) +
                                 ": malformed node coordinate entry '" + text + "'");
            file.coords[index - 1] = {x, y};
        }
    }
    if (!have_type) throw ParseError("tsplib: missing EDGE_WEIGHT_TYPE in " + path);
    if (!in_coords || file.coords.size() != file.dimension)
        throw ParseError("tsplib: missing or incomplete NODE_COORD_SECTION in " + path);
    return file;
}

inline TsplibInstance tsplib_instance(const TsplibFile& file, DistanceConvention convention) {
    if ((convention == DistanceConvention::kEuc2dReal ||
         convention == DistanceConvention::kEuc2dRounded) !=
        (file.weight_type == TsplibWeightType::kEuc2d))
        throw ConfigError("tsplib: distance convention does not match the weight type");

    TsplibInstance inst;
    inst.name = file.name;
    inst.n = file.dimension;
    inst.weight_type = file.weight_type;
    inst.convention = convention;
    inst.raw = Tensor::matrix(inst.n, inst.n);
    double max_raw = 0.0;
    for (std::size_t i = 0; i < inst.n; ++i)
        for (std::size_t j = i + 1; j < inst.n; ++j) {
            const double d = tsplib_detail::distance(file.coords[i], file.coords[j], convention);
            inst.raw(i, j) = d;
            inst.raw(j, i) = d;
            max_raw = std::max(max_raw, d);
        }
    if (max_raw <= 0.0) throw DataError("tsplib: degenerate instance (all distances zero)");
    inst.normalization = max_raw;
    inst.normalized.n = inst.n;
    inst.normalized.weights = Tensor::matrix(inst.n, inst.n);
    for (std::size_t i = 0; i < inst.n * inst.n; ++i)
        inst.normalized.weights[i] = inst.raw[i] / max_raw;
    inst.normalized.coords.clear();
    inst.normalized.validate();
    return inst;
}

inline TsplibInstance tsplib_parse(const std::string& path, bool paper_mode = true) {
    TsplibFile file = tsplib_parse_file(path);
    return tsplib_instance(file, default_convention(file.weight_type, paper_mode));
}

/// Parses a TSPLIB .tour file (TOUR_SECTION, 1-based indices, -1 sentinel).
inline std::vector<std::size_t> tsplib_parse_tour(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("tsplib: cannot open tour file " + path);
    std::vector<std::size_t> tour;
    std::string line;
    bool in_tour = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = tsplib_detail::trim(line);
        if (text.empty()) continue;
        if (!in_tour) {
            if (text == "TOUR_SECTION") in_tour = true;
            continue;
        }
        if (text == "EOF") break;
        std::istringstream fields(text);
        long long v = 0;
        while (fields >> v) {
            if (v == -1) return tour;
            if (v <= 0)
                throw ParseError("tour line " + std::to_string(line_no) + ": bad city index");
            tour.push_back(static_cast<std::size_t>(v - 1));
        }
    }
    if (!in_tour) throw ParseError("tour file has no TOUR_SECTION: " + path);
    return tour;
}

/// Cyclic cost of a tour under the raw distance matrix.
inline double tsplib_tour_cost(const TsplibInstance& inst, const std::vector<std::size_t>& tour) {
    if (tour.size() != inst.n) throw DataError("tsplib_tour_cost: tour length != n");
    double cost = 0.0;
    for (std::size_t i = 0; i < tour.size(); ++i)
        cost += inst.raw(tour[i], tour[(i + 1) % tour.size()]);
    return cost;
}

}  // namespace tspgnn
