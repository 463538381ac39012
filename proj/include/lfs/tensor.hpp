#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <numeric>
#include <vector>

#include "lfs/common.hpp"

namespace lfs {

namespace detail {

// std::vector value-initializes on resize; this allocator leaves doubles
// uninitialized so freshly allocated buffers that are written in full do not
// pay for a redundant zeroing pass.
template <class T>
struct NoInitAlloc : std::allocator<T> {
    template <class U>
    struct rebind {
        using other = NoInitAlloc<U>;
    };
    template <class U>
    void construct(U* p) noexcept {
        ::new (static_cast<void*>(p)) U;
    }
    template <class U, class... Args>
    void construct(U* p, Args&&... args) {
        ::new (static_cast<void*>(p)) U(std::forward<Args>(args)...);
    }
};

using Buffer = std::vector<double, NoInitAlloc<double>>;

}  // namespace detail

// Dense row-major tensor of doubles. Storage is shared between views;
// tensors flowing through the autograd graph are treated as immutable.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<int> shape)
        : shape_(std::move(shape)), size_(count(shape_)),
          data_(std::make_shared<detail::Buffer>(size_, 0.0)) {}

    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }

    // Allocated but not cleared; every element must be written before use.
    static Tensor uninit(std::vector<int> shape) {
        Tensor t;
        t.shape_ = std::move(shape);
        t.size_ = count(t.shape_);
        t.data_ = std::make_shared<detail::Buffer>();
        t.data_->resize(static_cast<size_t>(t.size_));
        return t;
    }

    static Tensor full(std::vector<int> shape, double v) {
        Tensor t(std::move(shape));
        std::fill(t.data(), t.data() + t.size(), v);
        return t;
    }

    static Tensor ones(std::vector<int> shape) { return full(std::move(shape), 1.0); }

    static Tensor from(std::vector<int> shape, const std::vector<double>& values) {
        if (count(shape) != static_cast<int64_t>(values.size()))
            throw ShapeMismatch("Tensor::from: value count does not match shape");
        Tensor t = uninit(std::move(shape));
        std::copy(values.begin(), values.end(), t.data());
        return t;
    }

    const std::vector<int>& shape() const { return shape_; }
    int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
    int ndim() const { return static_cast<int>(shape_.size()); }
    int64_t size() const { return size_; }
    bool empty() const { return size_ == 0; }

    double* data() { return data_->data(); }
    const double* data() const { return data_->data(); }

    double& operator[](int64_t i) { return (*data_)[static_cast<size_t>(i)]; }
    double operator[](int64_t i) const { return (*data_)[static_cast<size_t>(i)]; }

    // Shares storage; no copy.
    Tensor reshaped(std::vector<int> shape) const {
        if (count(shape) != size_)
            throw ShapeMismatch("Tensor::reshaped: element count mismatch");
        Tensor t;
        t.shape_ = std::move(shape);
        t.size_ = size_;
        t.data_ = data_;
        return t;
    }

    Tensor clone() const {
        Tensor t;
        t.shape_ = shape_;
        t.size_ = size_;
        t.data_ = std::make_shared<detail::Buffer>(*data_);
        return t;
    }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    static int64_t count(const std::vector<int>& shape) {
        int64_t n = 1;
        for (int d : shape) n *= d;
        return shape.empty() ? 0 : n;
    }

private:
    std::vector<int> shape_;
    int64_t size_ = 0;
    std::shared_ptr<detail::Buffer> data_;
};

}  // namespace lfs
