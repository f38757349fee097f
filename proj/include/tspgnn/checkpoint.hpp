// Copyright (c) 2026 the tspgnn authors. Licensed under the Apache License 2.0.
#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tspgnn/common.hpp"
#include "tspgnn/model.hpp"
#include "tspgnn/params.hpp"

namespace tspgnn {

struct CheckpointMeta {
    std::uint64_t epoch = 0;
    double loss = 0.0;
    double accuracy = 0.0;
    std::uint64_t seed = 0;
};

struct Checkpoint {
    ModelParams params;
    CheckpointMeta meta;
    std::optional<AdamState> adam;
};

// Versioned structured text. Reals are hex floats, so save/load round-trips
// reproduce parameters bit for bit.
//
//   tspgnn-checkpoint v1
//   config d=<n> t_max=<n> msg=<a,b,c> init=<a,b,c> vote=<a,b> ln_eps=<hex>
//   meta epoch=<n> loss=<hex> accuracy=<hex> seed=<n>
//   param <name> <rows> <cols>
//   <rows*cols hex values on one line>
//   ...
//   [adam t=<n> lr=<hex> beta1=<hex> beta2=<hex> eps=<hex>
//    moment <m|v> <name> followed by a value line, mirroring params]
//   end

inline constexpr const char* kCheckpointHeader = "tspgnn-checkpoint v1";

namespace detail {

inline std::string sizes_str(const std::vector<std::size_t>& sizes) {
    std::string out;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(sizes[i]);
    }
    return out;
}

inline std::vector<std::size_t> parse_sizes(const std::string& s) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoul(item));
    return out;
}

inline std::string kv_value(const std::string& token, const std::string& key,
                            std::size_t line_no) {
    if (token.rfind(key + "=", 0) != 0)
        throw ParseError("line " + std::to_string(line_no) + ": expected " + key + "=...");
    return token.substr(key.size() + 1);
}

inline void write_tensor_line(std::ofstream& out, const Tensor& t) {
    for (std::size_t i = 0; i < t.numel(); ++i) {
        if (i) out << ' ';
        out << hex_double(t[i]);
    }
    out << '\n';
}

inline Tensor read_tensor_line(std::istream& in, std::size_t rows, std::size_t cols,
                               std::size_t& line_no, const std::string& name) {
    std::string line;
    if (!std::getline(in, line))
        throw ParseError("unexpected end of file reading values of " + name);
    ++line_no;
    std::istringstream values(line);
    Tensor t = Tensor::matrix(rows, cols);
    std::string token;
    for (std::size_t i = 0; i < t.numel(); ++i) {
        if (!(values >> token))
            throw ParseError("line " + std::to_string(line_no) + ": parameter " + name +
                             " has fewer values than its shape " + t.shape_str());
        t[i] = parse_double(token, line_no);
    }
    if (values >> token)
        throw ParseError("line " + std::to_string(line_no) + ": parameter " + name +
                         " has more values than its shape");
    return t;
}

}  // namespace detail

inline void save_checkpoint(const ModelParams& params, const CheckpointMeta& meta,
                            const std::string& path, const AdamState* adam = nullptr) {
    std::ofstream out(path);
    if (!out) throw DataError("save_checkpoint: cannot open " + path);
    const ModelConfig& cfg = params.config;
    out << kCheckpointHeader << '\n';
    out << "config d=" << cfg.d << " t_max=" << cfg.t_max << " msg="
        << detail::sizes_str(cfg.msg_layers) << " init=" << detail::sizes_str(cfg.init_hidden)
        << " vote=" << detail::sizes_str(cfg.vote_hidden)
        << " ln_eps=" << detail::hex_double(cfg.ln_eps) << '\n';
    out << "meta epoch=" << meta.epoch << " loss=" << detail::hex_double(meta.loss)
        << " accuracy=" << detail::hex_double(meta.accuracy) << " seed=" << meta.seed << '\n';
    for (const auto& [name, slot] : params.store) {
        out << "param " << name << ' ' << slot.value.rows() << ' ' << slot.value.cols() << '\n';
        detail::write_tensor_line(out, slot.value);
    }
    if (adam) {
        const AdamState& state = *adam;
        out << "adam t=" << state.step_count() << " lr=" << detail::hex_double(state.lr)
            << " beta1=" << detail::hex_double(state.beta1)
            << " beta2=" << detail::hex_double(state.beta2)
            << " eps=" << detail::hex_double(state.eps) << '\n';
        for (const auto& [name, m] : state.first_moments()) {
            out << "moment m " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
            detail::write_tensor_line(out, m);
        }
        for (const auto& [name, v] : state.second_moments()) {
            out << "moment v " << name << ' ' << v.rows() << ' ' << v.cols() << '\n';
            detail::write_tensor_line(out, v);
        }
    }
    out << "end\n";
    if (!out) throw DataError("save_checkpoint: write failed for " + path);
}

/// Loads a checkpoint. When `expected` is given, any mismatch against the
/// stored model configuration is an error (a d=8 checkpoint cannot feed a
/// d=64 model).
inline Checkpoint load_checkpoint(const std::string& path,
                                  const std::optional<ModelConfig>& expected = std::nullopt) {
    std::ifstream in(path);
    if (!in) throw DataError("load_checkpoint: cannot open " + path);
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line) || line != kCheckpointHeader)
        throw ParseError("line 1: expected header '" + std::string(kCheckpointHeader) +
                         "' in " + path);

    Checkpoint ckpt;
    // config line
    if (!std::getline(in, line)) throw ParseError("missing config line");
    ++line_no;
    {
        std::istringstream fields(line);
        std::string word, tok;
        fields >> word;
        if (word != "config") throw ParseError("line 2: expected config line");
        ModelConfig cfg;
        fields >> tok;
        cfg.d = std::stoul(detail::kv_value(tok, "d", line_no));
        fields >> tok;
        cfg.t_max = std::stoul(detail::kv_value(tok, "t_max", line_no));
        fields >> tok;
        cfg.msg_layers = detail::parse_sizes(detail::kv_value(tok, "msg", line_no));
        fields >> tok;
        cfg.init_hidden = detail::parse_sizes(detail::kv_value(tok, "init", line_no));
        fields >> tok;
        cfg.vote_hidden = detail::parse_sizes(detail::kv_value(tok, "vote", line_no));
        fields >> tok;
        cfg.ln_eps = detail::parse_double(detail::kv_value(tok, "ln_eps", line_no), line_no);
        cfg.validate();
        if (expected && !(cfg == *expected))
            throw ConfigError("load_checkpoint: model config mismatch (checkpoint d=" +
                              std::to_string(cfg.d) + ", t_max=" + std::to_string(cfg.t_max) +
                              " vs expected d=" + std::to_string(expected->d) + ", t_max=" +
                              std::to_string(expected->t_max) + ")");
        ckpt.params.config = cfg;
    }
    // meta line
    if (!std::getline(in, line)) throw ParseError("missing meta line");
    ++line_no;
    {
        std::istringstream fields(line);
        std::string word, tok;
        fields >> word;
        if (word != "meta") throw ParseError("line 3: expected meta line");
        fields >> tok;
        ckpt.meta.epoch = std::stoull(detail::kv_value(tok, "epoch", line_no));
        fields >> tok;
        ckpt.meta.loss = detail::parse_double(detail::kv_value(tok, "loss", line_no), line_no);
        fields >> tok;
        ckpt.meta.accuracy =
            detail::parse_double(detail::kv_value(tok, "accuracy", line_no), line_no);
        fields >> tok;
        ckpt.meta.seed = std::stoull(detail::kv_value(tok, "seed", line_no));
    }

    // Parameters and optional optimizer state.
    ModelParams reference = init_model_params(ckpt.params.config, 0);
    std::size_t loaded = 0;
    bool saw_end = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string word;
        fields >> word;
        if (word == "end") {
            saw_end = true;
            break;
        }
        if (word == "param") {
            std::string name;
            std::size_t rows = 0, cols = 0;
            if (!(fields >> name >> rows >> cols))
                throw ParseError("line " + std::to_string(line_no) + ": bad param header");
            if (!reference.store.contains(name))
                throw ParseError("line " + std::to_string(line_no) +
                                 ": unknown parameter " + name);
            const Tensor& ref = reference.store.value(name);
            if (ref.rows() != rows || ref.cols() != cols)
                throw ParseError("line " + std::to_string(line_no) + ": parameter " + name +
                                 " has shape " + std::to_string(rows) + "x" +
                                 std::to_string(cols) + ", expected " + ref.shape_str());
            Tensor t = detail::read_tensor_line(in, rows, cols, line_no, name);
            ckpt.params.store.add(name, std::move(t));
            ++loaded;
        } else if (word == "adam") {
            AdamState adam;
            std::string tok;
            fields >> tok;
            adam.set_step_count(std::stoull(detail::kv_value(tok, "t", line_no)));
            fields >> tok;
            adam.lr = detail::parse_double(detail::kv_value(tok, "lr", line_no), line_no);
            fields >> tok;
            adam.beta1 = detail::parse_double(detail::kv_value(tok, "beta1", line_no), line_no);
            fields >> tok;
            adam.beta2 = detail::parse_double(detail::kv_value(tok, "beta2", line_no), line_no);
            fields >> tok;
            adam.eps = detail::parse_double(detail::kv_value(tok, "eps", line_no), line_no);
            ckpt.adam = std::move(adam);
        } else if (word == "moment") {
            if (!ckpt.adam)
                throw ParseError("line " + std::to_string(line_no) + ": moment before adam");
            std::string which, name;
            std::size_t rows = 0, cols = 0;
            if (!(fields >> which >> name >> rows >> cols))
                throw ParseError("line " + std::to_string(line_no) + ": bad moment header");
            Tensor t = detail::read_tensor_line(in, rows, cols, line_no, name);
            auto& store = which == "m" ? ckpt.adam->first_moments()
                                       : ckpt.adam->second_moments();
            store[name] = std::move(t);
        } else {
            throw ParseError("line " + std::to_string(line_no) + ": unexpected '" + word + "'");
        }
    }
    if (!saw_end) throw ParseError("checkpoint truncated: missing end marker");
    if (loaded != reference.store.size()) {
        for (const auto& [name, slot] : reference.store)
            if (!ckpt.params.store.contains(name))
                throw ParseError("checkpoint is missing parameter " + name);
    }
    return ckpt;
}

}  // namespace tspgnn
