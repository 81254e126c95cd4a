#pragma once

#include "rdlab/common.hpp"

namespace rdlab {

/// 1D mesh on [0,1]: n_elements intervals, n_elements + 1 nodes.
struct Mesh1D {
    int n_elements = 0;
    Vector nodes;   // strictly increasing, nodes[0] = 0, nodes[last] = 1
    double h = 0.0; // max element length

    int n_nodes() const { return static_cast<int>(nodes.size()); }
};

inline Mesh1D uniform_mesh(int n_elements) {
    if (n_elements < 1) throw std::invalid_argument("mesh: n_elements must be positive");
    Mesh1D mesh;
    mesh.n_elements = n_elements;
    mesh.nodes = Vector::LinSpaced(n_elements + 1, 0.0, 1.0);
    mesh.h = 1.0 / n_elements;
    return mesh;
}

inline void validate_mesh(const Mesh1D& mesh) {
    if (mesh.n_elements < 1 || mesh.nodes.size() != mesh.n_elements + 1)
        throw std::invalid_argument("mesh: inconsistent sizes");
    if (mesh.nodes[0] != 0.0 || mesh.nodes[mesh.n_elements] != 1.0)
        throw std::invalid_argument("mesh: endpoints must be 0 and 1");
    for (int e = 0; e < mesh.n_elements; ++e)
        if (mesh.nodes[e + 1] <= mesh.nodes[e])
            throw std::invalid_argument("mesh: nodes not strictly increasing");
}

}  // namespace rdlab
