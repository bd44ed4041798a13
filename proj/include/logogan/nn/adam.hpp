#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "logogan/nn/param.hpp"

namespace logogan {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.0;
    double beta2 = 0.99;
    double eps = 1e-8;
};

class AdamOptimizer {
public:
    explicit AdamOptimizer(AdamConfig cfg = {}) : cfg_(cfg) {}

    void step(const ParamList& params) {
        ++t_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
        const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
        for (Param* p : params) {
            auto& st = state_[p->name];
            if (st.m.empty()) {
                st.m.assign(p->size(), 0.0);
                st.v.assign(p->size(), 0.0);
            }
            for (std::size_t i = 0; i < p->size(); ++i) {
                const double g = p->grad[i];
                st.m[i] = cfg_.beta1 * st.m[i] + (1.0 - cfg_.beta1) * g;
                st.v[i] = cfg_.beta2 * st.v[i] + (1.0 - cfg_.beta2) * g * g;
                const double mhat = st.m[i] / bc1;
                const double vhat = st.v[i] / bc2;
                p->value[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
            }
        }
    }

    long steps() const { return t_; }

    // moment access for checkpointing
    struct Moments {
        std::vector<double> m, v;
    };
    const std::map<std::string, Moments>& state() const { return state_; }
    void restore(std::map<std::string, Moments> st, long t) {
        state_ = std::move(st);
        t_ = t;
    }

private:
    AdamConfig cfg_;
    long t_ = 0;
    std::map<std::string, Moments> state_;
};

} // namespace logogan
