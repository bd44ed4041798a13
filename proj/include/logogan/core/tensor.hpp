#pragma once

#include <cassert>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace logogan {

// Dense double tensor, NCHW layout for 4-d data. Deliberately minimal:
// the layers index into raw data and hand the heavy lifting to Eigen.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        data.assign(count(shape), 0.0);
    }

    static std::size_t count(const std::vector<int>& s) {
        std::size_t n = 1;
        for (int d : s) {
            if (d < 0) throw std::invalid_argument("negative tensor dim");
            n *= static_cast<std::size_t>(d);
        }
        return n;
    }

    std::size_t size() const { return data.size(); }
    int dim(int i) const { return shape.at(static_cast<std::size_t>(i)); }

    double& at4(int n, int c, int h, int w) {
        assert(shape.size() == 4);
        return data[((static_cast<std::size_t>(n) * shape[1] + c) * shape[2] + h) * shape[3] + w];
    }
    double at4(int n, int c, int h, int w) const {
        assert(shape.size() == 4);
        return data[((static_cast<std::size_t>(n) * shape[1] + c) * shape[2] + h) * shape[3] + w];
    }
    double& at2(int r, int c) {
        assert(shape.size() == 2);
        return data[static_cast<std::size_t>(r) * shape[1] + c];
    }
    double at2(int r, int c) const {
        assert(shape.size() == 2);
        return data[static_cast<std::size_t>(r) * shape[1] + c];
    }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

} // namespace logogan
