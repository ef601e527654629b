#include "lahda/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lahda {

Mesh1D::Mesh1D(std::vector<double> nodes)
{
    if (nodes.size() < 2) {
        throw std::invalid_argument("Mesh1D: need at least two nodes");
    }
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        if (!(nodes[i + 1] > nodes[i]) || !std::isfinite(nodes[i + 1])) {
            std::ostringstream os;
            os << "Mesh1D: nodes not strictly increasing at index " << i << " (" << nodes[i] << ", "
               << nodes[i + 1] << ")";
            throw std::invalid_argument(os.str());
        }
    }
    nodes_ = std::make_shared<const std::vector<double>>(std::move(nodes));
}

Mesh1D Mesh1D::uniform(double lo, double hi, int intervals)
{
    if (intervals < 1 || !(hi > lo)) {
        throw std::invalid_argument("Mesh1D::uniform: need hi > lo and at least one interval");
    }
    std::vector<double> x(intervals + 1);
    for (int i = 0; i <= intervals; ++i) {
        x[i] = lo + (hi - lo) * static_cast<double>(i) / intervals;
    }
    x.back() = hi;
    return Mesh1D(std::move(x));
}

double Mesh1D::min_width() const
{
    double w = width(0);
    for (int k = 1; k < intervals(); ++k) {
        w = std::min(w, width(k));
    }
    return w;
}

double Mesh1D::max_width() const
{
    double w = width(0);
    for (int k = 1; k < intervals(); ++k) {
        w = std::max(w, width(k));
    }
    return w;
}

StateField::StateField(Mesh1D mesh, int components)
    : mesh_(std::move(mesh))
{
    if (components < 1) {
        throw std::invalid_argument("StateField: need at least one component");
    }
    data_.assign(components, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh_.size())));
}

StateField::StateField(Mesh1D mesh, std::vector<Eigen::VectorXd> components)
    : mesh_(std::move(mesh)), data_(std::move(components))
{
    if (data_.empty()) {
        throw std::invalid_argument("StateField: need at least one component");
    }
    for (const auto& c : data_) {
        if (static_cast<std::size_t>(c.size()) != mesh_.size()) {
            std::ostringstream os;
            os << "StateField: component length " << c.size() << " does not match node count " << mesh_.size();
            throw std::invalid_argument(os.str());
        }
    }
}

Eigen::VectorXd StateField::stacked() const
{
    const auto n = static_cast<Eigen::Index>(mesh_.size());
    Eigen::VectorXd v(n * components());
    for (int c = 0; c < components(); ++c) {
        v.segment(c * n, n) = data_[c];
    }
    return v;
}

void StateField::set_stacked(const Eigen::VectorXd& v)
{
    const auto n = static_cast<Eigen::Index>(mesh_.size());
    if (v.size() != n * components()) {
        throw std::invalid_argument("StateField::set_stacked: length mismatch");
    }
    for (int c = 0; c < components(); ++c) {
        data_[c] = v.segment(c * n, n);
    }
}

} // namespace lahda
