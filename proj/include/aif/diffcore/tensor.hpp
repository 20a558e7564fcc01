#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "aif/common/check.hpp"

namespace aif::diffcore {

/// Dense row-major tensor of 64-bit reals. Rank 0 is a scalar (one value),
/// rank 1 a vector, rank 2 a matrix. Values are required to stay finite;
/// ops that could produce NaN/Inf check their outputs.
class Tensor {
public:
    Tensor() : shape_{}, values_(1, 0.0) {}

    Tensor(std::vector<std::size_t> shape, std::vector<double> values)
        : shape_(std::move(shape)), values_(std::move(values)) {
        check_arg(values_.size() == shape_count(shape_),
                  "Tensor: value count does not match shape");
    }

    static Tensor scalar(double v) { return Tensor({}, {v}); }

    static Tensor zeros(std::vector<std::size_t> shape) {
        std::size_t n = shape_count(shape);
        return Tensor(std::move(shape), std::vector<double>(n, 0.0));
    }

    static Tensor full(std::vector<std::size_t> shape, double v) {
        std::size_t n = shape_count(shape);
        return Tensor(std::move(shape), std::vector<double>(n, v));
    }

    static Tensor vector(std::vector<double> values) {
        std::size_t n = values.size();
        return Tensor({n}, std::move(values));
    }

    static Tensor matrix(std::size_t rows, std::size_t cols,
                         std::vector<double> values) {
        return Tensor({rows, cols}, std::move(values));
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return values_.size(); }

    std::size_t rows() const {
        check_arg(rank() == 2, "Tensor::rows: rank-2 required");
        return shape_[0];
    }
    std::size_t cols() const {
        check_arg(rank() == 2, "Tensor::cols: rank-2 required");
        return shape_[1];
    }

    bool is_scalar() const { return shape_.empty(); }

    double item() const {
        check_arg(values_.size() == 1, "Tensor::item: not a scalar");
        return values_[0];
    }

    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    double at(std::size_t r, std::size_t c) const {
        return values_[r * shape_[1] + c];
    }
    double& at(std::size_t r, std::size_t c) {
        return values_[r * shape_[1] + c];
    }

    const double* data() const { return values_.data(); }
    double* data() { return values_.data(); }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    bool all_finite() const {
        for (double v : values_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    static std::size_t shape_count(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (std::size_t d : shape) n *= d;
        return n;
    }

private:
    std::vector<std::size_t> shape_;
    std::vector<double> values_;
};

}  // namespace aif::diffcore
