// Copyright (c) 2026 the tspgnn authors. Licensed under the Apache License 2.0.
#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "tspgnn/common.hpp"
#include "tspgnn/rng.hpp"
#include "tspgnn/tape.hpp"
#include "tspgnn/tensor.hpp"

namespace tspgnn {

/// Named trainable parameters with one gradient slot each. Iteration is
/// lexicographic by name (std::map), which keeps every walk over the store
/// deterministic.
class ParamStore {
public:
    struct Slot {
        Tensor value;
        Tensor grad;
    };

    Tensor& add(const std::string& name, Tensor value) {
        if (slots_.count(name)) throw InternalError("ParamStore: duplicate parameter " + name);
        Slot slot;
        slot.grad = Tensor(value.shape());
        slot.value = std::move(value);
        return slots_.emplace(name, std::move(slot)).first->second.value;
    }

    bool contains(const std::string& name) const { return slots_.count(name) != 0; }

    Tensor& value(const std::string& name) { return slot(name).value; }
    const Tensor& value(const std::string& name) const { return slot(name).value; }
    Tensor& grad(const std::string& name) { return slot(name).grad; }
    const Tensor& grad(const std::string& name) const { return slot(name).grad; }

    void zero_grads() {
        for (auto& [name, slot] : slots_) slot.grad.fill(0.0);
    }

    std::size_t size() const { return slots_.size(); }

    auto begin() { return slots_.begin(); }
    auto end() { return slots_.end(); }
    auto begin() const { return slots_.begin(); }
    auto end() const { return slots_.end(); }

private:
    Slot& slot(const std::string& name) {
        auto it = slots_.find(name);
        if (it == slots_.end()) throw InternalError("ParamStore: unknown parameter " + name);
        return it->second;
    }
    const Slot& slot(const std::string& name) const {
        auto it = slots_.find(name);
        if (it == slots_.end()) throw InternalError("ParamStore: unknown parameter " + name);
        return it->second;
    }

    std::map<std::string, Slot> slots_;
};

/// Glorot/Xavier uniform: entries in +-sqrt(6 / (fan_in + fan_out)) for a
/// (fan_in x fan_out) kernel. Deterministic for a fixed Rng state.
inline Tensor glorot_init(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor t = Tensor::matrix(fan_in, fan_out);
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-bound, bound);
    return t;
}

/// Leaf handles for every parameter of a store on one tape, plus gradient
/// harvesting back into the store after backward().
class TapedParams {
public:
    TapedParams(Tape& tape, const ParamStore& store) : tape_(&tape), store_(&store) {
        for (const auto& [name, slot] : store) vars_.emplace(name, tape.leaf(slot.value, true));
    }

    Var operator[](const std::string& name) const {
        auto it = vars_.find(name);
        if (it == vars_.end()) throw InternalError("TapedParams: unknown parameter " + name);
        return it->second;
    }

    /// Adds this tape's parameter gradients into the store's slots.
    void accumulate_grads(ParamStore& store) const {
        for (const auto& [name, var] : vars_) {
            const Tensor g = tape_->grad_of(var);
            Tensor& slot = store.grad(name);
            for (std::size_t i = 0; i < slot.numel(); ++i) slot[i] += g[i];
        }
    }

private:
    Tape* tape_;
    const ParamStore* store_;
    std::map<std::string, Var> vars_;
};

/// Adam with bias-corrected moments. Moment tensors mirror the store.
class AdamState {
public:
    double lr = 2e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    void reset() {
        m_.clear();
        v_.clear();
        t_ = 0;
    }

    std::uint64_t step_count() const { return t_; }

    void step(ParamStore& params) {
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
        for (auto& [name, slot] : params) {
            Tensor& m = moment(m_, name, slot.value);
            Tensor& v = moment(v_, name, slot.value);
            const Tensor& g = slot.grad;
            Tensor& p = slot.value;
            for (std::size_t i = 0; i < p.numel(); ++i) {
                m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                const double mhat = m[i] / bc1;
                const double vhat = v[i] / bc2;
                p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
            }
        }
    }

    std::map<std::string, Tensor>& first_moments() { return m_; }
    std::map<std::string, Tensor>& second_moments() { return v_; }
    const std::map<std::string, Tensor>& first_moments() const { return m_; }
    const std::map<std::string, Tensor>& second_moments() const { return v_; }
    void set_step_count(std::uint64_t t) { t_ = t; }

private:
    static Tensor& moment(std::map<std::string, Tensor>& store, const std::string& name,
                          const Tensor& like) {
        auto it = store.find(name);
        if (it == store.end()) it = store.emplace(name, Tensor(like.shape())).first;
        return it->second;
    }

    std::map<std::string, Tensor> m_;
    std::map<std::string, Tensor> v_;
    std::uint64_t t_ = 0;
};

}  // namespace tspgnn
