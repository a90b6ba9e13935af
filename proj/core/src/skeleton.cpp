// skeleton.cpp
#include "cogs/skeleton.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace cogs {

using nlohmann::json;

Tensor SkeletonTopology::static_adjacency() const {
    validate();
    const auto J = joints();
    std::vector<double> a(static_cast<std::size_t>(J * J), 0.0);
    for (std::int64_t i = 0; i < J; ++i) {
        a[static_cast<std::size_t>(i * J + i)] = 1.0;
        const auto p = parents[static_cast<std::size_t>(i)];
        if (p >= 0) {
            a[static_cast<std::size_t>(i * J + p)] = 1.0;
            a[static_cast<std::size_t>(p * J + i)] = 1.0;
        }
    }
    return Tensor::from_vector({J, J}, std::move(a));
}

void SkeletonTopology::validate() const {
    const auto J = joints();
    if (J < 1) throw graph_error("skeleton: no joints");
    if (parents.size() != names.size()) throw graph_error("skeleton: names/parents length mismatch");
    std::int64_t roots = 0;
    for (std::int64_t i = 0; i < J; ++i) {
        const auto p = parents[static_cast<std::size_t>(i)];
        if (p == -1) {
            ++roots;
        } else if (p < 0 || p >= J) {
            throw graph_error("skeleton: parent index " + std::to_string(p) + " out of range at joint " +
                              std::to_string(i));
        } else if (p == i) {
            throw graph_error("skeleton: joint " + std::to_string(i) + " is its own parent");
        }
    }
    if (roots != 1) throw graph_error("skeleton: expected exactly one root, found " + std::to_string(roots));
    // connectivity: walk each node to the root, bounded by J hops
    for (std::int64_t i = 0; i < J; ++i) {
        auto cur = i;
        std::int64_t hops = 0;
        while (parents[static_cast<std::size_t>(cur)] != -1) {
            cur = parents[static_cast<std::size_t>(cur)];
            if (++hops > J) throw graph_error("skeleton: cycle detected through joint " + std::to_string(i));
        }
    }
}

SkeletonTopology SkeletonTopology::default9() {
    SkeletonTopology t;
    t.names = {"spine", "neck", "head", "l_shoulder", "l_elbow", "l_wrist",
               "r_shoulder", "r_elbow", "r_wrist"};
    t.parents = {-1, 0, 1, 1, 3, 4, 1, 6, 7};
    return t;
}

SkeletonTopology SkeletonTopology::default42() {
    SkeletonTopology t;
    t.names = {"spine", "neck", "head", "jaw"};
    t.parents = {-1, 0, 1, 2};
    for (const char* side : {"l", "r"}) {
        const auto neck = std::int64_t{1};
        t.names.push_back(std::string(side) + "_shoulder");
        t.parents.push_back(neck);
        const auto shoulder = static_cast<std::int64_t>(t.names.size()) - 1;
        t.names.push_back(std::string(side) + "_elbow");
        t.parents.push_back(shoulder);
        t.names.push_back(std::string(side) + "_wrist");
        t.parents.push_back(static_cast<std::int64_t>(t.names.size()) - 2);
        const auto wrist = static_cast<std::int64_t>(t.names.size()) - 1;
        t.names.push_back(std::string(side) + "_palm");
        t.parents.push_back(wrist);
        const auto palm = static_cast<std::int64_t>(t.names.size()) - 1;
        for (int finger = 0; finger < 5; ++finger) {
            auto parent = palm;
            for (int seg = 0; seg < 3; ++seg) {
                t.names.push_back(std::string(side) + "_f" + std::to_string(finger) + "_" +
                                  std::to_string(seg));
                t.parents.push_back(parent);
                parent = static_cast<std::int64_t>(t.names.size()) - 1;
            }
        }
    }
    t.validate();
    return t;
}

SkeletonTopology load_skeleton(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open skeleton config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw parse_error("skeleton config is not valid JSON: " + path + ": " + e.what());
    }
    if (!j.contains("joints") || !j["joints"].is_array()) {
        throw parse_error("skeleton config missing 'joints' array: " + path);
    }
    SkeletonTopology t;
    for (const auto& entry : j["joints"]) {
        if (!entry.contains("name") || !entry.contains("parent")) {
            throw parse_error("skeleton joint entries need 'name' and 'parent': " + path);
        }
        t.names.push_back(entry["name"].get<std::string>());
        t.parents.push_back(entry["parent"].get<std::int64_t>());
    }
    t.validate();
    return t;
}

void save_skeleton(const std::string& path, const SkeletonTopology& topo) {
    topo.validate();
    json j;
    j["joints"] = json::array();
    for (std::size_t i = 0; i < topo.names.size(); ++i) {
        j["joints"].push_back({{"name", topo.names[i]}, {"parent", topo.parents[i]}});
    }
    std::ofstream out(path);
    if (!out) throw io_error("cannot write skeleton config: " + path);
    out << j.dump(2) << '\n';
}

TransitionMatrices transition_matrices(const Tensor& adjacency) {
    if (adjacency.rank() != 2 || adjacency.dim(0) != adjacency.dim(1)) {
        throw shape_error("transition_matrices: adjacency must be square, got " +
                          shape_str(adjacency.shape()));
    }
    const auto J = adjacency.dim(0);
    const auto& a = adjacency.values();
    std::vector<double> fwd(a.size()), bwd(a.size());
    for (std::int64_t r = 0; r < J; ++r) {
        double rs = 0.0, cs = 0.0;
        for (std::int64_t c = 0; c < J; ++c) {
            rs += a[static_cast<std::size_t>(r * J + c)];
            cs += a[static_cast<std::size_t>(c * J + r)];  // row sum of A^T
        }
        if (rs <= 0.0 || cs <= 0.0) {
            throw value_error("transition_matrices: zero row/column sum at node " + std::to_string(r));
        }
        for (std::int64_t c = 0; c < J; ++c) {
            fwd[static_cast<std::size_t>(r * J + c)] = a[static_cast<std::size_t>(r * J + c)] / rs;
            bwd[static_cast<std::size_t>(r * J + c)] = a[static_cast<std::size_t>(c * J + r)] / cs;
        }
    }
    TransitionMatrices tm;
    tm.forward = Tensor::from_vector({J, J}, std::move(fwd));
    tm.backward = Tensor::from_vector({J, J}, std::move(bwd));
    return tm;
}

}  // namespace cogs
