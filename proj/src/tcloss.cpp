#include "topoadv/tcloss.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "topoadv/errors.hpp"

namespace topoadv {

namespace {

void require_dim_coverage(const PersistenceDiagram& diagram, int max_dim, const char* which) {
    if (diagram.max_dim < max_dim)
        throw InputError(std::string("diagram ") + which + " covers dimensions up to " +
                         std::to_string(diagram.max_dim) + ", loss needs " +
                         std::to_string(max_dim));
}

std::vector<std::pair<double, double>> finite_points(const PersistenceDiagram& diagram, int dim) {
    std::vector<std::pair<double, double>> pts;
    for (const PersistencePair& pair : diagram.pairs)
        if (pair.dim == dim && pair.finite()) pts.emplace_back(pair.birth, pair.death);
    return pts;
}

} // namespace

void TCParams::validate() const {
    if (alpha <= 0.0) throw InputError("TC loss: alpha must be > 0");
    if (sigma <= 0.0) throw InputError("TC loss: sigma must be > 0");
    if (max_dim < 0) throw InputError("TC loss: max_dim must be >= 0");
}

double total_persistence(const PersistenceDiagram& diagram, int dim, double alpha) {
    double sum = 0.0;
    for (const PersistencePair& pair : diagram.pairs)
        if (pair.dim == dim && pair.finite()) sum += std::pow(pair.persistence(), alpha);
    return sum;
}

double tp_loss(const PersistenceDiagram& diag_x, const PersistenceDiagram& diag_y,
               const TCParams& params) {
    params.validate();
    require_dim_coverage(diag_x, params.max_dim, "X");
    require_dim_coverage(diag_y, params.max_dim, "Y");
    double loss = 0.0;
    for (int i = 0; i <= params.max_dim; ++i)
        loss += std::abs(total_persistence(diag_x, i, params.alpha) -
                         total_persistence(diag_y, i, params.alpha));
    return loss;
}

double multiscale_kernel(const PersistenceDiagram& diag_x, const PersistenceDiagram& diag_y,
                         int dim, double sigma) {
    if (sigma <= 0.0) throw InputError("multiscale kernel: sigma must be > 0");
    const auto px = finite_points(diag_x, dim);
    const auto py = finite_points(diag_y, dim);
    if (px.empty() || py.empty()) return 0.0;
    const double inv8s = 1.0 / (8.0 * sigma);
    double sum = 0.0;
    for (const auto& [bx, dx] : px) {
        for (const auto& [by, dy] : py) {
            const double d2 = (bx - by) * (bx - by) + (dx - dy) * (dx - dy);
            const double m2 = (bx - dy) * (bx - dy) + (dx - by) * (dx - by);
            sum += std::exp(-d2 * inv8s) - std::exp(-m2 * inv8s);
        }
    }
    return sum / (8.0 * std::numbers::pi * sigma);
}

double mk_loss(const PersistenceDiagram& diag_x, const PersistenceDiagram& diag_y,
               const TCParams& params) {
    params.validate();
    require_dim_coverage(diag_x, params.max_dim, "X");
    require_dim_coverage(diag_y, params.max_dim, "Y");
    double loss = 0.0;
    for (int i = 0; i <= params.max_dim; ++i) {
        const double k = multiscale_kernel(diag_x, diag_y, i, params.sigma);
        if (k < -1e-9)
            throw NumericError("multi-scale kernel evaluated below the numerical floor: " +
                               std::to_string(k));
        loss += k;
    }
    return loss;
}

double tc_loss(const PersistenceDiagram& diag_x, const PersistenceDiagram& diag_y,
               const TCParams& params) {
    return params.method == TCMethod::TP ? tp_loss(diag_x, diag_y, params)
                                         : mk_loss(diag_x, diag_y, params);
}

double mk_median_sigma(const PersistenceDiagram& diag_x, const PersistenceDiagram& diag_y,
                       int dim) {
    const auto px = finite_points(diag_x, dim);
    const auto py = finite_points(diag_y, dim);
    if (px.empty() || py.empty()) return 1.0;
    std::vector<double> sq;
    sq.reserve(px.size() * py.size());
    for (const auto& [bx, dx] : px)
        for (const auto& [by, dy] : py)
            sq.push_back((bx - by) * (bx - by) + (dx - dy) * (dx - dy));
    const std::size_t mid = sq.size() / 2;
    std::nth_element(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(mid), sq.end());
    const double med = sq[mid];
    return med > 0.0 ? med / 8.0 : 1.0;
}

} // namespace topoadv
