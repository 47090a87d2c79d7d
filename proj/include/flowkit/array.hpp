#pragma once

#include <cassert>
#include <vector>

namespace flowkit {

/// Dense 3-d scalar field, x fastest, z slowest. 2-d data uses nz = 1.
class Array3 {
public:
    Array3() : nx_(0), ny_(0), nz_(0) {}
    Array3(int nx, int ny, int nz) : nx_(nx), ny_(ny), nz_(nz), data_(static_cast<size_t>(nx) * ny * nz, 0.0) {}

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int nz() const { return nz_; }
    size_t size() const { return data_.size(); }

    double& operator()(int i, int j, int k) {
        assert(i >= 0 && i < nx_ && j >= 0 && j < ny_ && k >= 0 && k < nz_);
        return data_[(static_cast<size_t>(k) * ny_ + j) * nx_ + i];
    }
    double operator()(int i, int j, int k) const {
        assert(i >= 0 && i < nx_ && j >= 0 && j < ny_ && k >= 0 && k < nz_);
        return data_[(static_cast<size_t>(k) * ny_ + j) * nx_ + i];
    }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    void fill(double v) { data_.assign(data_.size(), v); }

    bool same_shape(const Array3& o) const { return nx_ == o.nx_ && ny_ == o.ny_ && nz_ == o.nz_; }

private:
    int nx_, ny_, nz_;
    std::vector<double> data_;
};

}  // namespace flowkit
