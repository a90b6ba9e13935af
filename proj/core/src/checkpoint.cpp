// checkpoint.cpp
#include "cogs/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

namespace cogs {

namespace {

std::string blob_path_for(const std::string& json_path) {
    std::filesystem::path p(json_path);
    p.replace_extension(".bin");
    return p.string();
}

void append_le64(std::string* out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t read_le64(const std::string& in, std::size_t off) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[off + i])) << (8 * i);
    }
    return v;
}

}  // namespace

void save_checkpoint(const std::string& json_path, const std::vector<NamedTensor>& tensors,
                     const std::map<std::string, std::string>& meta) {
    const auto blob_path = blob_path_for(json_path);
    nlohmann::json manifest;
    manifest["format"] = "tensor-manifest-v1";
    manifest["blob"] = std::filesystem::path(blob_path).filename().string();
    manifest["meta"] = meta;

    std::string blob;
    auto entries = nlohmann::json::array();
    for (const auto& nt : tensors) {
        if (!nt.tensor.defined()) throw value_error("checkpoint: undefined tensor " + nt.name);
        nlohmann::json e;
        e["name"] = nt.name;
        e["shape"] = nt.tensor.shape();
        e["offset"] = blob.size();
        e["count"] = nt.tensor.numel();
        entries.push_back(std::move(e));
        for (double v : nt.tensor.values()) append_le64(&blob, std::bit_cast<std::uint64_t>(v));
    }
    manifest["tensors"] = std::move(entries);

    std::ofstream bout(blob_path, std::ios::binary);
    if (!bout) throw io_error("cannot write checkpoint blob: " + blob_path);
    bout.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!bout) throw io_error("short write to checkpoint blob: " + blob_path);
    bout.close();

    std::ofstream jout(json_path);
    if (!jout) throw io_error("cannot write checkpoint manifest: " + json_path);
    jout << manifest.dump(2);
    if (!jout) throw io_error("short write to checkpoint manifest: " + json_path);
}

const std::vector<double>& LoadedCheckpoint::values(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw value_error("checkpoint has no tensor named " + name);
    return it->second.second;
}

const Shape& LoadedCheckpoint::shape(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw value_error("checkpoint has no tensor named " + name);
    return it->second.first;
}

const std::string& LoadedCheckpoint::meta_at(const std::string& key) const {
    auto it = meta.find(key);
    if (it == meta.end()) throw parse_error("checkpoint meta missing key " + key);
    return it->second;
}

LoadedCheckpoint load_checkpoint(const std::string& json_path) {
    std::ifstream jin(json_path);
    if (!jin) throw io_error("cannot open checkpoint manifest: " + json_path);
    nlohmann::json manifest;
    try {
        jin >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw parse_error("checkpoint manifest is not valid JSON: " + json_path + ": " + e.what());
    }
    if (manifest.value("format", "") != "tensor-manifest-v1") {
        throw parse_error("unrecognized checkpoint format in " + json_path);
    }

    const auto blob_path =
        (std::filesystem::path(json_path).parent_path() / manifest.at("blob").get<std::string>())
            .string();
    std::ifstream bin(blob_path, std::ios::binary);
    if (!bin) throw io_error("cannot open checkpoint blob: " + blob_path);
    std::string blob((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());

    LoadedCheckpoint out;
    if (manifest.contains("meta")) {
        out.meta = manifest.at("meta").get<std::map<std::string, std::string>>();
    }
    for (const auto& e : manifest.at("tensors")) {
        const auto name = e.at("name").get<std::string>();
        const auto shape = e.at("shape").get<Shape>();
        const auto offset = e.at("offset").get<std::size_t>();
        const auto count = e.at("count").get<std::size_t>();
        std::size_t expect = 1;
        for (auto d : shape) expect *= static_cast<std::size_t>(d);
        if (count != expect) {
            throw parse_error("checkpoint tensor " + name + " count disagrees with its shape");
        }
        if (offset + count * 8 > blob.size()) {
            throw parse_error("checkpoint blob truncated at tensor " + name);
        }
        std::vector<double> vals(count);
        for (std::size_t i = 0; i < count; ++i) {
            vals[i] = std::bit_cast<double>(read_le64(blob, offset + i * 8));
        }
        out.order.push_back(name);
        out.tensors.emplace(name, std::make_pair(shape, std::move(vals)));
    }
    return out;
}

void assign_from_checkpoint(const LoadedCheckpoint& ckpt, const std::vector<NamedTensor>& targets) {
    for (const auto& nt : targets) {
        auto it = ckpt.tensors.find(nt.name);
        if (it == ckpt.tensors.end()) {
            throw value_error("checkpoint is missing tensor " + nt.name);
        }
        if (it->second.first != nt.tensor.shape()) {
            throw shape_error("checkpoint tensor " + nt.name + " has shape " +
                              shape_str(it->second.first) + ", model expects " +
                              shape_str(nt.tensor.shape()));
        }
        auto target = nt.tensor;  // handles share the node
        target.values_mut() = it->second.second;
    }
}

}  // namespace cogs
