// Copyright (c) 2026 the tspgnn authors. Licensed under the Apache License 2.0.
#pragma once

#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "tspgnn/common.hpp"
#include "tspgnn/version.hpp"

namespace tspgnn {

/// Flat key=value run configuration. Every key has a default; unknown keys
/// are rejected at set() time, so typos fail fast. Precedence is
/// defaults < config file < command-line overrides (last write wins).
class RunConfig {
public:
    RunConfig() : values_(defaults()) {}

    static const std::map<std::string, std::string>& defaults() {
        static const std::map<std::string, std::string> kDefaults = {
            {"seed", "0"},
            {"threads", "1"},
            {"out_dir", "out"},
            {"dataset", ""},
            {"checkpoint", ""},

            {"model.d", "64"},
            {"model.t_max", "32"},

            {"train.epochs", "50"},
            {"train.batches_per_epoch", "128"},
            {"train.pairs_per_batch", "16"},
            {"train.deviation", "0.02"},
            {"train.lr", "2e-5"},
            {"train.checkpoint_every", "10"},
            {"train.resume", "false"},
            {"train.fine_tune", "false"},
            {"train.fine_tune_lr_scale", "0.1"},

            {"gen.tag", "euclidean"},
            {"gen.count", "1000"},
            {"gen.n_min", "10"},
            {"gen.n_max", "18"},
            {"gen.allow_approx", "false"},

            {"eval.deviations", "0.01,0.02,0.05,0.10"},
            {"eval.samples", "256"},
            {"eval.n_min", "10"},
            {"eval.n_max", "18"},
            {"eval.sizes", ""},
            {"eval.distributions", ""},

            {"curve.grid", "-0.3:0.3:0.05"},
            {"curve.sizes", "10,14,18"},
            {"curve.samples", "256"},
            {"curve.oracle", "false"},

            {"cost.delta", "0.01"},
            {"cost.p", "0.5"},
            {"cost.count", "100"},
            {"cost.n_min", "10"},
            {"cost.n_max", "15"},
            {"cost.tsplib", ""},
            {"cost.midpoint", "false"},

            {"baseline.count", "100"},
            {"baseline.budget", "50"},
            {"baseline.calib_count", "30"},
            {"baseline.deviations", "0.0,0.01,0.02,0.04,0.06,0.08,0.10,0.15,0.20"},
            {"baseline.n_min", "10"},
            {"baseline.n_max", "15"},
        };
        return kDefaults;
    }

    void set(const std::string& key, const std::string& value) {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("unknown config key: " + key);
        it->second = value;
    }

    void load_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file " + path);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.resize(hash);
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                if (line.find_first_not_of(" \t\r\n") != std::string::npos)
                    throw ConfigError(path + ":" + std::to_string(line_no) +
                                      ": expected key = value");
                continue;
            }
            set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
    }

    const std::string& str(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("unknown config key: " + key);
        return it->second;
    }

    std::uint64_t u64(const std::string& key) const {
        try {
            return std::stoull(str(key));
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + ": expected integer, got '" + str(key) + "'");
        }
    }

    double real(const std::string& key) const {
        try {
            std::size_t used = 0;
            const double v = std::stod(str(key), &used);
            if (used != str(key).size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + ": expected real, got '" + str(key) + "'");
        }
    }

    bool flag(const std::string& key) const {
        const std::string& v = str(key);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw ConfigError("config key " + key + ": expected boolean, got '" + v + "'");
    }

    std::vector<double> reals(const std::string& key) const {
        std::vector<double> out;
        for (const std::string& item : split(str(key))) {
            try {
                out.push_back(std::stod(item));
            } catch (const std::exception&) {
                throw ConfigError("config key " + key + ": bad real '" + item + "'");
            }
        }
        return out;
    }

    std::vector<std::size_t> sizes(const std::string& key) const {
        std::vector<std::size_t> out;
        for (const std::string& item : split(str(key))) {
            try {
                out.push_back(std::stoul(item));
            } catch (const std::exception&) {
                throw ConfigError("config key " + key + ": bad integer '" + item + "'");
            }
        }
        return out;
    }

    std::vector<std::string> strings(const std::string& key) const { return split(str(key)); }

    /// "min:max:step" grids (used for deviation axes).
    std::vector<double> grid(const std::string& key) const {
        const std::string& v = str(key);
        std::vector<std::string> parts;
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ':')) parts.push_back(item);
        if (parts.size() != 3) throw ConfigError("config key " + key + ": expected min:max:step");
        const double lo = std::stod(parts[0]);
        const double hi = std::stod(parts[1]);
        const double step = std::stod(parts[2]);
        if (!(step > 0.0) || hi < lo) throw ConfigError("config key " + key + ": bad grid");
        std::vector<double> out;
        // Walk by index to dodge per-step rounding drift.
        const std::size_t count = static_cast<std::size_t>((hi - lo) / step + 1.5);
        for (std::size_t i = 0; i < count; ++i) out.push_back(lo + step * static_cast<double>(i));
        return out;
    }

    /// Sorted key=value dump plus the tool version; written next to every
    /// command's outputs.
    void write_resolved(std::ostream& out, const std::string& command) const {
        out << "# " << kVersion << "\n# command = " << command << '\n';
        for (const auto& [key, value] : values_) out << key << " = " << value << '\n';
    }

private:
    static std::string trim(const std::string& s) {
        const auto begin = s.find_first_not_of(" \t\r\n");
        if (begin == std::string::npos) return "";
        const auto end = s.find_last_not_of(" \t\r\n");
        return s.substr(begin, end - begin + 1);
    }

    static std::vector<std::string> split(const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const std::string t = trim(item);
            if (!t.empty()) out.push_back(t);
        }
        return out;
    }

    std::map<std::string, std::string> values_;
};

}  // namespace tspgnn
