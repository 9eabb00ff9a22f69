#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "conenet/error.hpp"
#include "conenet/network.hpp"
#include "conenet/tensor.hpp"

namespace conenet {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

namespace detail {
/// Parameter matrix `index` belongs to layer index / 2 (weights, then bias).
inline void check_grads(std::span<const Matrix> params, std::span<const Matrix> grads) {
    if (params.size() != grads.size()) throw DimensionError("gradient count does not match parameter count");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].rows() != grads[i].rows() || params[i].cols() != grads[i].cols()) {
            throw DimensionError("gradient " + grads[i].shape() + " does not match parameter " + params[i].shape());
        }
        if (!grads[i].all_finite()) throw TrainingDivergedError("non-finite gradient", i / 2);
    }
}
}  // namespace detail

/// Adam with bias-corrected moments.
class Adam {
public:
    explicit Adam(AdamConfig config = {}) : config_(config) {
        if (!(config_.lr > 0.0)) throw ValidationError("learning rate must be positive");
        if (!(config_.beta1 > 0.0 && config_.beta1 < 1.0) || !(config_.beta2 > 0.0 && config_.beta2 < 1.0)) {
            throw ValidationError("beta1 and beta2 must lie in (0, 1)");
        }
        if (!(config_.epsilon > 0.0)) throw ValidationError("epsilon must be positive");
    }

    /// Updates `params` in place. Moment buffers are created on the first call.
    void step(std::span<Matrix> params, std::span<const Matrix> grads) {
        detail::check_grads(params, grads);
        if (m_.empty()) {
            for (const auto& p : params) {
                m_.emplace_back(p.rows(), p.cols());
                v_.emplace_back(p.rows(), p.cols());
            }
        } else if (m_.size() != params.size()) {
            throw DimensionError("parameter set changed between Adam steps");
        }
        ++step_;
        const double t = static_cast<double>(step_);
        const double correction1 = 1.0 - std::pow(config_.beta1, t);
        const double correction2 = 1.0 - std::pow(config_.beta2, t);

        for (std::size_t i = 0; i < params.size(); ++i) {
            auto p = params[i].data();
            auto g = grads[i].data();
            auto m = m_[i].data();
            auto v = v_[i].data();
            for (std::size_t k = 0; k < p.size(); ++k) {
                m[k] = config_.beta1 * m[k] + (1.0 - config_.beta1) * g[k];
                v[k] = config_.beta2 * v[k] + (1.0 - config_.beta2) * g[k] * g[k];
                const double m_hat = m[k] / correction1;
                const double v_hat = v[k] / correction2;
                p[k] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
            }
        }
    }

    void step(Network& net, const Gradients& grads) {
        std::vector<Matrix> params;
        params.reserve(net.parameter_count());
        for (std::size_t i = 0; i < net.parameter_count(); ++i) params.push_back(std::move(net.parameter(i)));
        try {
            step(params, grads.params);
        } catch (...) {
            for (std::size_t i = 0; i < params.size(); ++i) net.parameter(i) = std::move(params[i]);
            throw;
        }
        for (std::size_t i = 0; i < params.size(); ++i) net.parameter(i) = std::move(params[i]);
    }

    [[nodiscard]] std::size_t step_count() const noexcept { return step_; }
    [[nodiscard]] const AdamConfig& config() const noexcept { return config_; }
    [[nodiscard]] std::span<const Matrix> first_moments() const noexcept { return m_; }
    [[nodiscard]] std::span<const Matrix> second_moments() const noexcept { return v_; }

private:
    AdamConfig config_;
    std::size_t step_ = 0;
    std::vector<Matrix> m_;
    std::vector<Matrix> v_;
};

/// p <- p - lr * g
inline void sgd_step(std::span<Matrix> params, std::span<const Matrix> grads, double lr) {
    detail::check_grads(params, grads);
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto p = params[i].data();
        auto g = grads[i].data();
        for (std::size_t k = 0; k < p.size(); ++k) p[k] -= lr * g[k];
    }
}

inline void sgd_step(Network& net, const Gradients& grads, double lr) {
    if (grads.params.size() != net.parameter_count()) {
        throw DimensionError("gradient count does not match parameter count");
    }
    detail::check_grads(std::span<const Matrix>(grads.params), grads.params);
    for (std::size_t i = 0; i < net.parameter_count(); ++i) {
        sgd_step(std::span<Matrix>(&net.parameter(i), 1), std::span<const Matrix>(&grads.params[i], 1), lr);
    }
}

}  // namespace conenet
