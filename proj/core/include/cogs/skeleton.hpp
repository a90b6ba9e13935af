// skeleton.hpp - joint graph topology and diffusion transition matrices
#pragma once

#include <string>
#include <vector>

#include "cogs/tensor.hpp"

namespace cogs {

/// Kinematic tree over the direction-vector nodes. The static adjacency is
/// the tree's symmetric 0/1 matrix with self-loops.
struct SkeletonTopology {
    std::vector<std::string> names;
    std::vector<std::int64_t> parents;  // -1 for the root

    std::int64_t joints() const { return static_cast<std::int64_t>(names.size()); }
    /// Symmetric 0/1 adjacency with unit diagonal, [J, J].
    Tensor static_adjacency() const;
    /// Throws graph_error unless the tree is a single connected component
    /// with exactly one root and in-bounds parent indices.
    void validate() const;

    /// Built-in upper-body chain over 9 direction vectors.
    static SkeletonTopology default9();
    /// Built-in expressive upper-body + hands chain over 42 direction vectors.
    static SkeletonTopology default42();
};

/// Load/save as JSON: {"joints": [{"name": ..., "parent": -1|index}, ...]}.
SkeletonTopology load_skeleton(const std::string& path);
void save_skeleton(const std::string& path, const SkeletonTopology& topo);

/// Row-normalized forward and backward transition matrices of an adjacency.
struct TransitionMatrices {
    Tensor forward;   // A / rowsum(A)
    Tensor backward;  // A^T / rowsum(A^T)
};
TransitionMatrices transition_matrices(const Tensor& adjacency);

}  // namespace cogs
