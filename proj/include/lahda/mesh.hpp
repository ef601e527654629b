#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace lahda {

/// Strictly increasing node coordinates on a fixed interval [lo, hi].
///
/// Node storage is immutable and shared between copies, so copying a mesh is
/// cheap and `same_as` can tell whether two meshes are the same object.
class Mesh1D {
public:
    explicit Mesh1D(std::vector<double> nodes);

    static Mesh1D uniform(double lo, double hi, int intervals);

    std::span<const double> nodes() const { return *nodes_; }
    double operator[](std::size_t i) const { return (*nodes_)[i]; }
    std::size_t size() const { return nodes_->size(); }
    int intervals() const { return static_cast<int>(nodes_->size()) - 1; }
    double lo() const { return nodes_->front(); }
    double hi() const { return nodes_->back(); }
    double length() const { return hi() - lo(); }
    double width(int element) const { return (*nodes_)[element + 1] - (*nodes_)[element]; }
    double midpoint(int element) const { return 0.5 * ((*nodes_)[element + 1] + (*nodes_)[element]); }
    double min_width() const;
    double max_width() const;

    /// True when both meshes share node storage.
    bool same_as(const Mesh1D& other) const { return nodes_ == other.nodes_; }
    bool operator==(const Mesh1D& other) const { return same_as(other) || *nodes_ == *other.nodes_; }

private:
    std::shared_ptr<const std::vector<double>> nodes_;
};

/// Multi-component nodal field on a mesh; every component has one value per node.
class StateField {
public:
    StateField(Mesh1D mesh, int components);
    StateField(Mesh1D mesh, std::vector<Eigen::VectorXd> components);

    const Mesh1D& mesh() const { return mesh_; }
    int components() const { return static_cast<int>(data_.size()); }
    Eigen::VectorXd& component(int c) { return data_[c]; }
    const Eigen::VectorXd& component(int c) const { return data_[c]; }

    /// Components stacked component-major: index c·(N+1) + j.
    Eigen::VectorXd stacked() const;
    void set_stacked(const Eigen::VectorXd& v);

private:
    Mesh1D mesh_;
    std::vector<Eigen::VectorXd> data_;
};

inline std::span<const double> as_span(const Eigen::VectorXd& v)
{
    return {v.data(), static_cast<std::size_t>(v.size())};
}

} // namespace lahda
