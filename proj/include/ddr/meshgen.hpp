#pragma once

#include "ddr/mesh.hpp"

namespace ddr {

// n x n periodic grid of unit-square boxes on the flat torus.
mesh gen_torus(int n);

// Two stereographic hemisphere disks glued on the equator; the outermost
// layer of each disk consists of curved cone sections.
mesh gen_sphere(double rs);

// Default refinement sequence for the sphere.
std::vector<double> sphere_sequence(int levels = 3);

struct sphere_census {
    int boundary = 0; // cone sections
    int triangles = 0, quads = 0, pentagons = 0, other = 0;
};

sphere_census census(const mesh& m);

// Single-cell meshes for the curved constructions, one flat chart.
mesh cone_cell(const json& params);
mesh tri_two_curved(const json& params);
mesh quad_four_curved(const json& params);

} // namespace ddr
