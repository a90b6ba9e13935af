// common.hpp - shared error types and small helpers
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cogs {

/// Base class for all toolkit errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Tensor dimension / extent mismatches.
struct shape_error : error {
    using error::error;
};

/// Invalid argument values or violated operation contracts.
struct value_error : error {
    using error::error;
};

/// Filesystem and container-format failures.
struct io_error : error {
    using error::error;
};

/// Malformed text or JSON inputs.
struct parse_error : error {
    using error::error;
};

/// Non-finite values detected while finite checks are enabled.
struct numeric_error : error {
    using error::error;
};

/// Misuse of the computation record (double backward, detached graph).
struct graph_error : error {
    using error::error;
};

using Shape = std::vector<std::int64_t>;

std::int64_t numel_of(const Shape& s);
std::string shape_str(const Shape& s);

/// FNV-1a 64-bit over raw bytes; used for content hashes and stable token ids.
std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed = 0xcbf29ce484222325ull);
std::uint64_t fnv1a64(const std::string& s, std::uint64_t seed = 0xcbf29ce484222325ull);
std::string hex64(std::uint64_t v);

}  // namespace cogs
