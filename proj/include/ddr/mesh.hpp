#pragma once

#include "ddr/geometry.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace ddr {

using affine_d = affine_map<double>;

struct incidence {
    int sub = -1;
    int sign = 1;
    affine_d T; // subcell reference -> cell reference
};

struct cell {
    int dim = 0;
    std::string kind;
    json params;
    int chart = 0;
    int orientation = 1; // sign of det DI for 2-cells
    param_ptr param;
    std::vector<incidence> boundary;
    Eigen::Vector2d center = Eigen::Vector2d::Zero(); // chart point at the reference centroid
};

struct closure_entry {
    int dim = 0, id = 0;
    affine_d T; // subcell reference -> cell reference
};

class mesh {
public:
    atlas charts;

    int add_cell(int dim, const std::string& kind, const json& params, int chart);
    int add_vertex(const Eigen::Vector2d& x, int chart);

    std::size_t count(int d) const { return cells_[d].size(); }
    const cell& at(int d, int id) const { return cells_.at(d).at(id); }
    cell& at_mut(int d, int id) { return cells_.at(d).at(id); }
    const std::vector<cell>& cells(int d) const { return cells_.at(d); }

    // Expresses a chart point of a subcell in the chart of `target`.
    Eigen::Vector2d to_chart_of(const cell& target, int from_chart, const Eigen::Vector2d& x) const;

    // Trace map and relative orientation of `sub` in the boundary of cell (d, id),
    // derived from the parametrizations.
    incidence compute_incidence(int d, int id, int sub) const;
    void set_boundary(int d, int id, const std::vector<int>& subs);

    // Rebuilds parametrizations, orientations and closures; call after edits.
    void finalize();
    bool finalized() const { return finalized_; }

    // Cell itself first, then edges, then vertices (for 2-cells).
    const std::vector<closure_entry>& closure(int d, int id) const { return closure_.at(d).at(id); }
    // 2-cells sharing each edge
    const std::vector<std::vector<int>>& edge_faces() const { return edge_faces_; }

    cell_geometry geometry(int d, int id) const { return cell_geometry(at(d, id).param, &charts, at(d, id).chart); }

    long euler_characteristic() const { return long(count(0)) - long(count(1)) + long(count(2)); }
    // max over 2-cells of |f|^{1/2}; used for convergence rates
    double meshsize() const;
    // sqrt(total area / number of 2-cells)
    double mean_meshsize() const;

private:
    std::array<std::vector<cell>, 3> cells_;
    std::array<std::vector<std::vector<closure_entry>>, 3> closure_;
    std::vector<std::vector<int>> edge_faces_;
    bool finalized_ = false;
};

affine_d compose(const affine_d& outer, const affine_d& inner);
Eigen::VectorXd apply(const affine_d& T, const Eigen::VectorXd& u);

struct validation_report {
    bool ok = true;
    double affine_residual = 0;      // max deviation of sampled trace composites from affinity
    double map_mismatch = 0;         // max deviation of the fitted map from the stored one
    double composition_residual = 0; // closure maps vs direct vertex embeddings
    double min_det = 0;              // min det G over quadrature nodes of 1- and 2-cells
    double max_size_ratio = 0;       // max h_f / h_f' over incidences
    long euler = 0;
    std::vector<std::string> problems;
};

validation_report validate_mesh(const mesh& m, double tol = 1e-10);

// Evaluator of the points of an interface edge in chart `to`.
std::function<Eigen::Vector2d(double)> chart_transition_edge(const mesh& m, int edge, int from_chart, int to_chart);

json mesh_to_json(const mesh& m);
mesh mesh_from_json(const json& j);
void save_mesh(const mesh& m, const std::string& path);
mesh load_mesh(const std::string& path);

} // namespace ddr
