#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace tcgreen {

using Point = std::vector<double>;
using PointFunction = std::function<double(std::span<const double>)>;

/// Periodic lattice with n points per axis and spacing h; index 0 is the origin and coordinates
/// use the minimum image, so axis coordinates run over [-n/2, n/2) * h.
struct Grid {
    int dim = 3;
    int n = 64;
    double h = 0.4;

    void validate() const;
    std::size_t size() const;
    double extent() const { return n * h; }
    double cell_volume() const;
    /// Minimum-image coordinate of an axis index.
    double coordinate(int index) const { return (index < n / 2 ? index : index - n) * h; }
    /// Coordinates of a flat (row-major) site index.
    Point site(std::size_t flat) const;
    /// Flat index of the site nearest to x, periodically wrapped.
    std::size_t nearest_site(std::span<const double> x) const;

    bool operator==(const Grid&) const = default;
};

struct Field {
    Grid grid;
    std::vector<double> values;
    double time = 0.0;

    /// h^d times the sum of values.
    double mass() const;
};

Field sample_field(const Grid& grid, const PointFunction& f);
/// Lattice delta at a site: h^-d at that site, 0 elsewhere.
Field delta_field(const Grid& grid, std::size_t site);
double sup_distance(const Field& a, const Field& b);

/// Real-to-half-complex discrete Fourier transform of lattice fields (FFTW).
/// Spectra hold n^(d-1) (n/2+1) modes in row-major order.
class FourierTransform {
public:
    explicit FourierTransform(const Grid& grid);

    const Grid& grid() const { return grid_; }
    std::size_t spectrum_size() const { return spectrum_size_; }

    std::vector<std::complex<double>> forward(std::span<const double> values) const;
    /// Inverse including the 1/n^d factor, so inverse(forward(v)) == v.
    std::vector<double> inverse(std::span<const std::complex<double>> spectrum) const;

    /// Number of full-spectrum modes a stored mode stands for in a real reconstruction (1 or 2).
    int multiplicity(std::size_t mode) const;
    /// Angular wavenumber components of a stored mode.
    std::vector<double> wavenumber(std::size_t mode) const;

private:
    Grid grid_;
    std::size_t spectrum_size_;
};

}  // namespace tcgreen
