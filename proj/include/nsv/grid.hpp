#pragma once

#include <cstddef>
#include <numbers>

namespace nsv {

/// Uniform periodic box [0,L]^3 sampled on n^3 collocation points, with a
/// symmetric dealiasing mask on the Fourier side.
///
/// A mode index i in [0,n) maps to the signed integer frequency
/// m = i for i <= n/2, m = i - n otherwise, and to the wavenumber
/// k = (2*pi/L) * m.  The retained set is {|m| < dealias_fraction * n/2}
/// per axis (strict inequality, Nyquist never retained).  At the default
/// fraction 2/3 this gives 3*max_mode() < n, which keeps quadratic products
/// alias-free on the mask and makes collocation quadrature of triple
/// products exact; the trilinear identities then hold to roundoff.
class PeriodicGrid {
  public:
    PeriodicGrid(int n, double length, double dealias_fraction = 2.0 / 3.0);

    int n() const { return n_; }
    double length() const { return length_; }
    double dealias_fraction() const { return dealias_fraction_; }

    std::size_t points() const { return std::size_t(n_) * n_ * n_; }
    double spacing() const { return length_ / n_; }
    double cell_volume() const { double h = spacing(); return h * h * h; }
    double volume() const { return length_ * length_ * length_; }

    /// Fundamental wavenumber 2*pi/L.
    double k0() const { return 2.0 * std::numbers::pi / length_; }

    /// Signed integer frequency for storage index i in [0,n).
    int freq(int i) const { return i <= n_ / 2 ? i : i - n_; }
    double wavenumber(int i) const { return k0() * freq(i); }

    /// Largest retained |m| per axis.
    int max_mode() const { return max_mode_; }

    bool mode_retained(int m) const { return m >= -max_mode_ && m <= max_mode_; }
    bool retained(int ix, int iy, int iz) const {
        return mode_retained(freq(ix)) && mode_retained(freq(iy)) && mode_retained(freq(iz));
    }

    std::size_t index(int ix, int iy, int iz) const {
        return std::size_t(ix) + std::size_t(n_) * (std::size_t(iy) + std::size_t(n_) * iz);
    }

    bool operator==(const PeriodicGrid& o) const {
        return n_ == o.n_ && length_ == o.length_ && dealias_fraction_ == o.dealias_fraction_;
    }
    bool operator!=(const PeriodicGrid& o) const { return !(*this == o); }

  private:
    int n_;
    double length_;
    double dealias_fraction_;
    int max_mode_;
};

}  // namespace nsv
