#include "coformer/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace coformer {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'C', 'O', 'F', 'O'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    char bytes[4];
    for (int i = 0; i < 4; ++i) {
        bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    }
    out.write(bytes, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    char bytes[8];
    for (int i = 0; i < 8; ++i) {
        bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    }
    out.write(bytes, 8);
}

std::uint32_t take_u32(std::istream& in, const char* what) {
    unsigned char bytes[4];
    if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
        throw std::runtime_error(std::string("checkpoint: truncated ") + what);
    }
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
    }
    return v;
}

std::uint64_t take_u64(std::istream& in, const char* what) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
        throw std::runtime_error(std::string("checkpoint: truncated ") + what);
    }
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    }
    return v;
}

}  // namespace

ParameterStore quantize_f32(const ParameterStore& params) {
    ParameterStore out;
    for (const auto& [name, tensor] : params) {
        Tensor q = tensor;
        for (auto& v : q.values) {
            v = static_cast<double>(static_cast<float>(v));
        }
        out.add(name, std::move(q));
    }
    return out;
}

void save_checkpoint(const ParameterStore& params, const RunConfig& config,
                     const std::string& path) {
    json manifest;
    manifest["config"] = config.to_json();
    json records = json::array();
    std::uint64_t offset = 0;
    for (const auto& [name, tensor] : params) {
        records.push_back({{"name", name},
                           {"shape", tensor.shape},
                           {"dtype", "f32"},
                           {"offset", offset},
                           {"count", tensor.numel()}});
        offset += tensor.numel();
    }
    manifest["params"] = std::move(records);
    const std::string manifest_text = manifest.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("checkpoint: cannot open for writing: " + path);
    }
    out.write(kMagic, 4);
    put_u32(out, kFormatVersion);
    put_u64(out, manifest_text.size());
    out.write(manifest_text.data(), static_cast<std::streamsize>(manifest_text.size()));
    for (const auto& [name, tensor] : params) {
        (void)name;
        for (double v : tensor.values) {
            put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
        }
    }
    if (!out) {
        throw std::runtime_error("checkpoint: write failed: " + path);
    }
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    save_checkpoint(ckpt.params, ckpt.config, path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("checkpoint: cannot open: " + path);
    }
    char magic[4];
    if (!in.read(magic, 4) || std::string(magic, 4) != std::string(kMagic, 4)) {
        throw std::runtime_error("checkpoint: not a checkpoint file: " + path);
    }
    const std::uint32_t version = take_u32(in, "header");
    if (version != kFormatVersion) {
        throw std::runtime_error("checkpoint: unsupported format version " +
                                 std::to_string(version));
    }
    const std::uint64_t manifest_len = take_u64(in, "header");
    std::string manifest_text(manifest_len, '\0');
    if (!in.read(manifest_text.data(), static_cast<std::streamsize>(manifest_len))) {
        throw std::runtime_error("checkpoint: truncated manifest");
    }
    json manifest;
    try {
        manifest = json::parse(manifest_text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("checkpoint: invalid manifest: ") + e.what());
    }
    if (!manifest.is_object() || !manifest.contains("config") || !manifest.contains("params") ||
        !manifest["params"].is_array()) {
        throw std::runtime_error("checkpoint: manifest missing config or params");
    }

    Checkpoint ckpt;
    ckpt.config = RunConfig::from_json(manifest["config"]);

    std::uint64_t expected_offset = 0;
    for (const auto& rec : manifest["params"]) {
        if (!rec.is_object() || !rec.contains("name") || !rec.contains("shape") ||
            !rec.contains("dtype") || !rec.contains("offset") || !rec.contains("count")) {
            throw std::runtime_error("checkpoint: malformed parameter record");
        }
        if (rec["dtype"].get<std::string>() != "f32") {
            throw std::runtime_error("checkpoint: unsupported dtype " +
                                     rec["dtype"].get<std::string>());
        }
        const auto name = rec["name"].get<std::string>();
        const auto shape = rec["shape"].get<std::vector<int>>();
        const auto offset = rec["offset"].get<std::uint64_t>();
        const auto count = rec["count"].get<std::uint64_t>();
        if (offset != expected_offset) {
            throw std::runtime_error("checkpoint: non-contiguous payload at " + name);
        }
        if (shape_numel(shape) != count) {
            throw std::runtime_error("checkpoint: shape/count mismatch at " + name);
        }
        Tensor t = Tensor::zeros(shape);
        for (std::uint64_t i = 0; i < count; ++i) {
            const std::uint32_t bits = take_u32(in, "payload");
            t[static_cast<std::size_t>(i)] =
                static_cast<double>(std::bit_cast<float>(bits));
        }
        ckpt.params.add(name, std::move(t));
        expected_offset += count;
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw std::runtime_error("checkpoint: trailing bytes after payload");
    }
    return ckpt;
}

}  // namespace coformer
