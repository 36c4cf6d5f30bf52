#include "tcgreen/lattice.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

#include "tcgreen/error.hpp"

namespace tcgreen {

namespace {

// The FFTW planner is not reentrant; executing plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::vector<int> dims_of(const Grid& g) { return std::vector<int>(g.dim, g.n); }

}  // namespace

void Grid::validate() const {
    if (dim < 1 || dim > 3) throw ParameterError("grid dimension must be 1, 2 or 3");
    if (n < 4 || n % 2 != 0) throw ParameterError("grid needs an even number of points per axis, at least 4");
    if (!(h > 0.0) || !std::isfinite(h)) throw ParameterError("grid spacing must be positive");
}

std::size_t Grid::size() const {
    std::size_t s = 1;
    for (int i = 0; i < dim; ++i) s *= static_cast<std::size_t>(n);
    return s;
}

double Grid::cell_volume() const { return std::pow(h, dim); }

Point Grid::site(std::size_t flat) const {
    Point x(dim);
    for (int axis = dim - 1; axis >= 0; --axis) {
        x[axis] = coordinate(static_cast<int>(flat % n));
        flat /= n;
    }
    return x;
}

std::size_t Grid::nearest_site(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim) throw ShapeError("point dimension does not match the grid");
    std::size_t flat = 0;
    for (int axis = 0; axis < dim; ++axis) {
        long i = std::lround(x[axis] / h) % n;
        if (i < 0) i += n;
        flat = flat * n + static_cast<std::size_t>(i);
    }
    return flat;
}

double Field::mass() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * grid.cell_volume();
}

Field sample_field(const Grid& grid, const PointFunction& f) {
    grid.validate();
    Field out{grid, std::vector<double>(grid.size()), 0.0};
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const Point x = grid.site(i);
        out.values[i] = f(x);
    }
    return out;
}

Field delta_field(const Grid& grid, std::size_t site) {
    grid.validate();
    Field out{grid, std::vector<double>(grid.size(), 0.0), 0.0};
    out.values.at(site) = 1.0 / grid.cell_volume();
    return out;
}

double sup_distance(const Field& a, const Field& b) {
    if (!(a.grid == b.grid)) throw ShapeError("fields live on different grids");
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

FourierTransform::FourierTransform(const Grid& grid) : grid_(grid) {
    grid.validate();
    spectrum_size_ = grid.size() / grid.n * (grid.n / 2 + 1);
}

std::vector<std::complex<double>> FourierTransform::forward(std::span<const double> values) const {
    if (values.size() != grid_.size()) throw ShapeError("field size does not match the grid");
    std::vector<double> in(values.begin(), values.end());
    std::vector<std::complex<double>> out(spectrum_size_);
    const auto dims = dims_of(grid_);
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_r2c(grid_.dim, dims.data(), in.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

std::vector<double> FourierTransform::inverse(std::span<const std::complex<double>> spectrum) const {
    if (spectrum.size() != spectrum_size_) throw ShapeError("spectrum size does not match the grid");
    std::vector<std::complex<double>> in(spectrum.begin(), spectrum.end());  // c2r overwrites its input
    std::vector<double> out(grid_.size());
    const auto dims = dims_of(grid_);
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_c2r(grid_.dim, dims.data(), reinterpret_cast<fftw_complex*>(in.data()), out.data(),
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    const double scale = 1.0 / static_cast<double>(grid_.size());
    for (double& v : out) v *= scale;
    return out;
}

int FourierTransform::multiplicity(std::size_t mode) const {
    const std::size_t last = mode % static_cast<std::size_t>(grid_.n / 2 + 1);
    return (last == 0 || last == static_cast<std::size_t>(grid_.n / 2)) ? 1 : 2;
}

std::vector<double> FourierTransform::wavenumber(std::size_t mode) const {
    const int half = grid_.n / 2 + 1;
    std::vector<double> k(grid_.dim);
    const double unit = 2.0 * std::numbers::pi / grid_.extent();
    k[grid_.dim - 1] = unit * static_cast<double>(mode % half);
    mode /= half;
    for (int axis = grid_.dim - 2; axis >= 0; --axis) {
        const int i = static_cast<int>(mode % grid_.n);
        k[axis] = unit * (i < grid_.n / 2 ? i : i - grid_.n);
        mode /= grid_.n;
    }
    return k;
}

}  // namespace tcgreen
