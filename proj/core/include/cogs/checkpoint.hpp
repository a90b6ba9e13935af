// checkpoint.hpp - bit-exact persistence: a JSON manifest naming tensors and
// byte offsets plus a binary blob of little-endian 64-bit floats.
#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cogs/tensor.hpp"

namespace cogs {

struct NamedTensor {
    std::string name;
    Tensor tensor;
};

/// Writes `json_path` (manifest) and the sibling blob with extension ".bin".
/// `meta` carries scalar run state (epoch, step, rng state, config hash) as
/// strings so the manifest stays self-describing.
void save_checkpoint(const std::string& json_path, const std::vector<NamedTensor>& tensors,
                     const std::map<std::string, std::string>& meta);

struct LoadedCheckpoint {
    std::map<std::string, std::string> meta;
    std::vector<std::string> order;  // manifest order
    std::map<std::string, std::pair<Shape, std::vector<double>>> tensors;

    const std::vector<double>& values(const std::string& name) const;
    const Shape& shape(const std::string& name) const;
    /// Meta lookup that throws a parse_error naming the missing key.
    const std::string& meta_at(const std::string& key) const;
};

LoadedCheckpoint load_checkpoint(const std::string& json_path);

/// Copies stored values into the target tensors (leaf writes, bit-exact).
/// Missing names or shape mismatches raise errors naming the tensor.
void assign_from_checkpoint(const LoadedCheckpoint& ckpt, const std::vector<NamedTensor>& targets);

}  // namespace cogs
