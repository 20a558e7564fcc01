#include "aif/diffcore/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace aif::diffcore {

namespace {

constexpr char kMagic[8] = {'A', 'I', 'F', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_f64(std::ostream& os, double v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_string(std::ostream& os, const std::string& s) {
    write_u64(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}
void write_tensor(std::ostream& os, const Tensor& t) {
    write_u32(os, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) write_u64(os, d);
    os.write(reinterpret_cast<const char*>(t.data()),
             static_cast<std::streamsize>(t.size() * sizeof(double)));
}

std::uint32_t read_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
std::uint64_t read_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
double read_f64(std::istream& is) {
    double v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
std::string read_string(std::istream& is) {
    std::uint64_t n = read_u64(is);
    std::string s(n, '\0');
    is.read(s.data(), static_cast<std::streamsize>(n));
    return s;
}
Tensor read_tensor(std::istream& is) {
    std::uint32_t rank = read_u32(is);
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(read_u64(is));
    std::size_t count = Tensor::shape_count(shape);
    std::vector<double> vals(count);
    is.read(reinterpret_cast<char*>(vals.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    return Tensor(std::move(shape), std::move(vals));
}

}  // namespace

const Tensor& Checkpoint::find(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return tensors[i];
    fail_runtime("Checkpoint: missing parameter '" + name + "'");
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    check_arg(ckpt.names.size() == ckpt.tensors.size(),
              "save_checkpoint: name/tensor count mismatch");
    std::ofstream os(path, std::ios::binary);
    check_runtime(os.good(), "save_checkpoint: cannot open " + path);

    os.write(kMagic, sizeof kMagic);
    write_u32(os, kVersion);

    write_u64(os, ckpt.metadata.size());
    for (const auto& [k, v] : ckpt.metadata) {
        write_string(os, k);
        write_string(os, v);
    }

    write_u64(os, ckpt.names.size());
    for (std::size_t i = 0; i < ckpt.names.size(); ++i) {
        write_string(os, ckpt.names[i]);
        write_tensor(os, ckpt.tensors[i]);
    }

    os.put(ckpt.has_optimizer ? 1 : 0);
    if (ckpt.has_optimizer) {
        write_u64(os, static_cast<std::uint64_t>(ckpt.optimizer_step));
        write_f64(os, ckpt.optimizer_config.learning_rate);
        write_f64(os, ckpt.optimizer_config.beta1);
        write_f64(os, ckpt.optimizer_config.beta2);
        write_f64(os, ckpt.optimizer_config.epsilon);
        write_u64(os, ckpt.optimizer_m.size());
        for (const Tensor& t : ckpt.optimizer_m) write_tensor(os, t);
        for (const Tensor& t : ckpt.optimizer_v) write_tensor(os, t);
    }
    check_runtime(os.good(), "save_checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    check_runtime(is.good(), "load_checkpoint: cannot open " + path);

    char magic[8];
    is.read(magic, sizeof magic);
    check_runtime(is.good() && std::memcmp(magic, kMagic, sizeof kMagic) == 0,
                  "load_checkpoint: bad magic in " + path);
    std::uint32_t version = read_u32(is);
    check_runtime(version == kVersion, "load_checkpoint: unsupported version");

    Checkpoint ckpt;
    std::uint64_t n_meta = read_u64(is);
    for (std::uint64_t i = 0; i < n_meta; ++i) {
        std::string k = read_string(is);
        std::string v = read_string(is);
        ckpt.metadata.emplace(std::move(k), std::move(v));
    }

    std::uint64_t n_params = read_u64(is);
    for (std::uint64_t i = 0; i < n_params; ++i) {
        std::string name = read_string(is);
        ckpt.add(std::move(name), read_tensor(is));
    }

    int flag = is.get();
    check_runtime(flag == 0 || flag == 1, "load_checkpoint: truncated file");
    ckpt.has_optimizer = flag == 1;
    if (ckpt.has_optimizer) {
        ckpt.optimizer_step = static_cast<std::int64_t>(read_u64(is));
        ckpt.optimizer_config.learning_rate = read_f64(is);
        ckpt.optimizer_config.beta1 = read_f64(is);
        ckpt.optimizer_config.beta2 = read_f64(is);
        ckpt.optimizer_config.epsilon = read_f64(is);
        std::uint64_t n_mom = read_u64(is);
        for (std::uint64_t i = 0; i < n_mom; ++i)
            ckpt.optimizer_m.push_back(read_tensor(is));
        for (std::uint64_t i = 0; i < n_mom; ++i)
            ckpt.optimizer_v.push_back(read_tensor(is));
    }
    check_runtime(is.good(), "load_checkpoint: truncated file " + path);
    return ckpt;
}

}  // namespace aif::diffcore
