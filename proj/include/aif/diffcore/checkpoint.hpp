#pragma once

#include <map>
#include <string>
#include <vector>

#include "aif/diffcore/optimizer.hpp"
#include "aif/diffcore/tensor.hpp"

namespace aif::diffcore {

/// Named parameter tensors in a fixed order, plus free-form string metadata
/// (model mode, normalization statistics, architecture descriptor, ...).
struct Checkpoint {
    std::vector<std::string> names;
    std::vector<Tensor> tensors;
    std::map<std::string, std::string> metadata;
    bool has_optimizer = false;
    std::int64_t optimizer_step = 0;
    AdamConfig optimizer_config;
    std::vector<Tensor> optimizer_m;
    std::vector<Tensor> optimizer_v;

    void add(std::string name, Tensor t) {
        names.push_back(std::move(name));
        tensors.push_back(std::move(t));
    }
    const Tensor& find(const std::string& name) const;
};

/// Binary container with a versioned header: magic "AIFCKPT1", little-endian
/// shapes and raw 64-bit values per named parameter, optional optimizer
/// moments, and a metadata block.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace aif::diffcore
