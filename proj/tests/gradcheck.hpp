// Copyright (c) 2026 the tspgnn authors. Licensed under the Apache License 2.0.
#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "tspgnn/params.hpp"
#include "tspgnn/tensor.hpp"

// Test-side oracle: central finite differences, independent of the tape's
// reverse sweep. Loss functions are re-evaluated from scratch around each
// perturbed parameter element.
namespace gradcheck {

inline constexpr double kStep = 1e-5;

struct Report {
    double max_rel_err = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
};

inline double rel_err(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-6});
    return std::abs(a - b) / scale;
}

/// Compares an analytic gradient store against central differences of
/// `loss`, which must evaluate the loss from the current store contents.
inline Report against_finite_differences(tspgnn::ParamStore& params,
                                         const std::function<double()>& loss,
                                         double h = kStep) {
    Report report;
    for (auto& [name, slot] : params) {
        for (std::size_t i = 0; i < slot.value.numel(); ++i) {
            const double saved = slot.value[i];
            slot.value[i] = saved + h;
            const double up = loss();
            slot.value[i] = saved - h;
            const double down = loss();
            slot.value[i] = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double err = rel_err(slot.grad[i], numeric);
            if (err > report.max_rel_err) {
                report.max_rel_err = err;
                report.worst_param = name;
                report.worst_index = i;
                report.analytic = slot.grad[i];
                report.numeric = numeric;
            }
        }
    }
    return report;
}

}  // namespace gradcheck
