// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include "core.hpp"

namespace bodysplat {

struct AdamConfig {
    double lr    = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps   = 1e-8;

    void
    validate() const {
        require(lr > 0.0 && std::isfinite(lr), "adam: lr must be positive");
        require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0,
                "adam: betas must lie in [0, 1)");
        require(eps > 0.0, "adam: eps must be positive");
    }
};

/// Adam with bias correction over one flat parameter block; constant learning rate.
class Adam {
  public:
    Adam() = default;
    Adam(std::size_t size, AdamConfig cfg) : cfg_(cfg), m_(VecX::Zero(size)), v_(VecX::Zero(size)) {
        cfg_.validate();
    }

    void
    step(Eigen::Ref<VecX> params, const Eigen::Ref<const VecX> &grad) {
        require(params.size() == m_.size() && grad.size() == m_.size(), "adam: size mismatch");
        ++t_;
        const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        for (Eigen::Index i = 0; i < params.size(); ++i) {
            m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
            v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
            params[i] -= cfg_.lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + cfg_.eps);
        }
    }

    long steps() const { return t_; }
    const AdamConfig &config() const { return cfg_; }
    const VecX &first_moment() const { return m_; }
    const VecX &second_moment() const { return v_; }

    /// Restores optimizer state (checkpoint resume).
    void
    set_state(long t, VecX m, VecX v) {
        require(m.size() == m_.size() && v.size() == v_.size() && t >= 0, "adam: bad state");
        t_ = t;
        m_ = std::move(m);
        v_ = std::move(v);
    }

  private:
    AdamConfig cfg_;
    VecX m_;
    VecX v_;
    long t_ = 0;
};

} // namespace bodysplat
