// pose_io.hpp - pose sequence container and its JSON / CSV serializations.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cogs/common.hpp"

namespace cogs {

/// T frames of J direction vectors, row-major [T, J, 3].
struct PoseSequence {
    double fps = 15.0;
    std::vector<std::string> joint_names;
    std::vector<double> data;
    std::int64_t frames = 0;

    std::int64_t joints() const { return static_cast<std::int64_t>(joint_names.size()); }
    double at(std::int64_t t, std::int64_t j, std::int64_t c) const {
        return data[static_cast<std::size_t>((t * joints() + j) * 3 + c)];
    }
    void validate() const;
};

/// JSON: {"fps": ..., "joints": [names], "frames": [[[x,y,z] x J] x T]}.
/// Doubles survive a save/load round trip bit-exactly.
void save_pose_json(const std::string& path, const PoseSequence& seq);
PoseSequence load_pose_json(const std::string& path);

/// CSV: header j0.x,j0.y,... then one frame per row (J*3 columns).
void save_pose_csv(const std::string& path, const PoseSequence& seq);

}  // namespace cogs
