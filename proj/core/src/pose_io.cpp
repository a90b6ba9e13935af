// pose_io.cpp
#include "cogs/pose_io.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace cogs {

void PoseSequence::validate() const {
    if (fps <= 0.0) throw value_error("pose sequence: fps must be positive");
    if (joint_names.empty()) throw value_error("pose sequence: no joints");
    if (frames < 0) throw value_error("pose sequence: negative frame count");
    if (data.size() != static_cast<std::size_t>(frames * joints() * 3)) {
        throw shape_error("pose sequence: buffer holds " + std::to_string(data.size()) +
                          " values, expected " + std::to_string(frames * joints() * 3));
    }
}

void save_pose_json(const std::string& path, const PoseSequence& seq) {
    seq.validate();
    nlohmann::json j;
    j["fps"] = seq.fps;
    j["joints"] = seq.joint_names;
    auto frames = nlohmann::json::array();
    for (std::int64_t t = 0; t < seq.frames; ++t) {
        auto frame = nlohmann::json::array();
        for (std::int64_t jt = 0; jt < seq.joints(); ++jt) {
            frame.push_back({seq.at(t, jt, 0), seq.at(t, jt, 1), seq.at(t, jt, 2)});
        }
        frames.push_back(std::move(frame));
    }
    j["frames"] = std::move(frames);
    std::ofstream out(path);
    if (!out) throw io_error("cannot write pose file: " + path);
    out << j.dump();
    if (!out) throw io_error("short write to pose file: " + path);
}

PoseSequence load_pose_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open pose file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw parse_error("pose file is not valid JSON: " + path + ": " + e.what());
    }
    if (!j.contains("fps") || !j.contains("joints") || !j.contains("frames")) {
        throw parse_error("pose file missing fps/joints/frames: " + path);
    }
    PoseSequence seq;
    try {
        seq.fps = j.at("fps").get<double>();
        seq.joint_names = j.at("joints").get<std::vector<std::string>>();
        const auto& frames = j.at("frames");
        seq.frames = static_cast<std::int64_t>(frames.size());
        seq.data.reserve(frames.size() * seq.joint_names.size() * 3);
        for (const auto& frame : frames) {
            if (frame.size() != seq.joint_names.size()) {
                throw parse_error("pose frame has " + std::to_string(frame.size()) +
                                  " joints, header names " +
                                  std::to_string(seq.joint_names.size()) + ": " + path);
            }
            for (const auto& v : frame) {
                if (!v.is_array() || v.size() != 3) {
                    throw parse_error("pose entries must be [x, y, z] triples: " + path);
                }
                for (const auto& c : v) seq.data.push_back(c.get<double>());
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw parse_error("pose file has wrong field types: " + path + ": " + e.what());
    }
    seq.validate();
    return seq;
}

void save_pose_csv(const std::string& path, const PoseSequence& seq) {
    seq.validate();
    std::ofstream out(path);
    if (!out) throw io_error("cannot write pose csv: " + path);
    for (std::size_t j = 0; j < seq.joint_names.size(); ++j) {
        for (const char* axis : {".x", ".y", ".z"}) {
            out << seq.joint_names[j] << axis
                << (j + 1 == seq.joint_names.size() && axis[1] == 'z' ? "" : ",");
        }
    }
    out << "\n";
    out.precision(17);
    for (std::int64_t t = 0; t < seq.frames; ++t) {
        for (std::int64_t i = 0; i < seq.joints() * 3; ++i) {
            out << seq.data[static_cast<std::size_t>(t * seq.joints() * 3 + i)]
                << (i + 1 == seq.joints() * 3 ? "" : ",");
        }
        out << "\n";
    }
    if (!out) throw io_error("short write to pose csv: " + path);
}

}  // namespace cogs
