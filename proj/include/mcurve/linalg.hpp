#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <initializer_list>

namespace mcurve {

/// Largest ambient dimension supported by the fixed-capacity vector types.
inline constexpr int kMaxDim = 8;

/// Small fixed-capacity vector in R^k, k <= kMaxDim. Lives on the stack so the
/// inner loops of the tube evaluations never allocate.
class Vec {
public:
    Vec() = default;
    explicit Vec(int dim) : dim_(dim) { assert(dim >= 0 && dim <= kMaxDim); }
    Vec(std::initializer_list<double> values) : dim_(static_cast<int>(values.size()))
    {
        assert(dim_ <= kMaxDim);
        int i = 0;
        for (double v : values) c_[i++] = v;
    }

    int dim() const { return dim_; }
    double& operator[](int i) { return c_[i]; }
    double operator[](int i) const { return c_[i]; }

    double dot(const Vec& o) const
    {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) s += c_[i] * o.c_[i];
        return s;
    }
    double squared_norm() const { return dot(*this); }
    double norm() const { return std::sqrt(squared_norm()); }
    double max_abs() const
    {
        double m = 0.0;
        for (int i = 0; i < dim_; ++i) m = std::max(m, std::abs(c_[i]));
        return m;
    }

    Vec& operator+=(const Vec& o)
    {
        for (int i = 0; i < dim_; ++i) c_[i] += o.c_[i];
        return *this;
    }
    Vec& operator-=(const Vec& o)
    {
        for (int i = 0; i < dim_; ++i) c_[i] -= o.c_[i];
        return *this;
    }
    Vec& operator*=(double s)
    {
        for (int i = 0; i < dim_; ++i) c_[i] *= s;
        return *this;
    }
    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator*(Vec a, double s) { return a *= s; }
    friend Vec operator*(double s, Vec a) { return a *= s; }

private:
    std::array<double, kMaxDim> c_{};
    int dim_ = 0;
};

/// Square k x k matrix, column-major, fixed capacity.
class Mat {
public:
    Mat() = default;
    explicit Mat(int dim) : dim_(dim) { assert(dim >= 0 && dim <= kMaxDim); }

    static Mat identity(int dim)
    {
        Mat m(dim);
        for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }

    int dim() const { return dim_; }
    double& operator()(int row, int col) { return a_[col * kMaxDim + row]; }
    double operator()(int row, int col) const { return a_[col * kMaxDim + row]; }

    Vec col(int j) const
    {
        Vec v(dim_);
        for (int i = 0; i < dim_; ++i) v[i] = (*this)(i, j);
        return v;
    }
    void set_col(int j, const Vec& v)
    {
        for (int i = 0; i < dim_; ++i) (*this)(i, j) = v[i];
    }

    Mat transpose() const
    {
        Mat t(dim_);
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) t(i, j) = (*this)(j, i);
        return t;
    }

    friend Mat operator*(const Mat& a, const Mat& b)
    {
        Mat c(a.dim_);
        for (int i = 0; i < a.dim_; ++i)
            for (int j = 0; j < a.dim_; ++j) {
                double s = 0.0;
                for (int l = 0; l < a.dim_; ++l) s += a(i, l) * b(l, j);
                c(i, j) = s;
            }
        return c;
    }
    friend Vec operator*(const Mat& a, const Vec& v)
    {
        Vec r(a.dim_);
        for (int i = 0; i < a.dim_; ++i) {
            double s = 0.0;
            for (int l = 0; l < a.dim_; ++l) s += a(i, l) * v[l];
            r[i] = s;
        }
        return r;
    }

    /// Mᵀ v without forming the transpose.
    Vec transpose_times(const Vec& v) const
    {
        Vec r(dim_);
        for (int j = 0; j < dim_; ++j) {
            double s = 0.0;
            for (int i = 0; i < dim_; ++i) s += (*this)(i, j) * v[i];
            r[j] = s;
        }
        return r;
    }

    double max_abs_diff(const Mat& o) const
    {
        double m = 0.0;
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) m = std::max(m, std::abs((*this)(i, j) - o(i, j)));
        return m;
    }

private:
    std::array<double, kMaxDim * kMaxDim> a_{};
    int dim_ = 0;
};

} // namespace mcurve
