#include "lpsr/weights.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "lpsr/errors.hpp"
#include "lpsr/srnet.hpp"

namespace lpsr::srnet {

using nlohmann::json;

namespace {

constexpr char kMagic[5] = {'S', 'R', 'W', 'T', '1'};
constexpr std::uint8_t kVersion = 1;
constexpr std::size_t kHeaderSize = 10;

static_assert(std::endian::native == std::endian::little, "SRWT1 I/O assumes a little-endian host");

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::int64_t product(const std::vector<std::int64_t>& dims) {
    std::int64_t n = 1;
    for (auto d : dims) n *= d;
    return n;
}

void check_schema(const WeightStore& store) {
    if (store.arch_tag == "rrdb_gen") {
        validate_generator_weights(store, GeneratorConfig::from_json(store.config));
    } else if (store.arch_tag == "unet_disc" || store.arch_tag == "attn_unet_disc") {
        const auto variant = store.arch_tag == "unet_disc" ? DiscVariant::plain : DiscVariant::attention;
        validate_discriminator_weights(store, DiscriminatorConfig::from_json(store.config, variant));
    }
}

}  // namespace

std::int64_t WeightTensor::numel() const noexcept { return product(dims); }

void WeightStore::add(const std::string& name, WeightTensor t) {
    if (name.empty()) throw InvalidArgument("weight tensor name is empty");
    if (t.dims.empty() || std::ranges::any_of(t.dims, [](auto d) { return d < 1; }))
        throw InvalidArgument("weight tensor '" + name + "' has invalid dims");
    if (static_cast<std::int64_t>(t.data.size()) != t.numel())
        throw InvalidArgument("weight tensor '" + name + "' data length does not match dims");
    if (!tensors_.emplace(name, std::move(t)).second)
        throw InvalidArgument("duplicate weight tensor '" + name + "'");
}

const WeightTensor* WeightStore::find(const std::string& name) const {
    auto it = tensors_.find(name);
    return it == tensors_.end() ? nullptr : &it->second;
}

const WeightTensor& WeightStore::get(const std::string& name) const {
    if (const auto* t = find(name)) return *t;
    throw WeightSchemaError(name, "missing weight tensor '" + name + "'");
}

WeightTensor& WeightStore::mutable_tensor(const std::string& name) {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw WeightSchemaError(name, "missing weight tensor '" + name + "'");
    return it->second;
}

std::vector<std::uint8_t> serialize_weights(const WeightStore& store) {
    json entries = json::array();
    std::uint64_t offset = 0;
    for (const auto& [name, t] : store.tensors()) {  // std::map iterates name-sorted
        const std::uint64_t len = 4 * t.data.size();
        entries.push_back({{"name", name}, {"dims", t.dims}, {"offset", offset}, {"len", len}});
        offset += len;
    }
    const json manifest = {
        {"arch_tag", store.arch_tag},
        {"config", store.config},
        {"provenance", store.provenance},
        {"tensors", entries},
    };
    const std::string text = manifest.dump();

    std::vector<std::uint8_t> out;
    out.reserve(kHeaderSize + text.size() + offset);
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    out.push_back(kVersion);
    put_u32(out, static_cast<std::uint32_t>(text.size()));
    out.insert(out.end(), text.begin(), text.end());
    for (const auto& [_, t] : store.tensors()) {
        const auto* p = reinterpret_cast<const std::uint8_t*>(t.data.data());
        out.insert(out.end(), p, p + 4 * t.data.size());
    }
    return out;
}

WeightStore parse_weights(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kHeaderSize) throw FormatError(bytes.size(), "SRWT1 header truncated");
    if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) throw FormatError(0, "bad SRWT1 magic");
    if (bytes[5] != kVersion)
        throw FormatError(5, "unsupported SRWT1 version " + std::to_string(static_cast<int>(bytes[5])));
    const std::uint64_t manifest_len = get_u32(bytes.data() + 6);
    if (kHeaderSize + manifest_len > bytes.size())
        throw FormatError(6, "manifest length " + std::to_string(manifest_len) + " exceeds file size");

    json manifest;
    try {
        manifest = json::parse(bytes.begin() + kHeaderSize, bytes.begin() + static_cast<std::ptrdiff_t>(kHeaderSize + manifest_len));
    } catch (const json::parse_error& e) {
        throw FormatError(kHeaderSize + e.byte, std::string("manifest is not valid JSON: ") + e.what());
    }

    const std::uint64_t blob_start = kHeaderSize + manifest_len;
    const std::uint64_t blob_size = bytes.size() - blob_start;
    WeightStore store;
    try {
        store.arch_tag = manifest.at("arch_tag").get<std::string>();
        store.config = manifest.value("config", json::object());
        store.provenance = manifest.value("provenance", std::string{});
        const json& entries = manifest.at("tensors");
        if (!entries.is_array()) throw FormatError(kHeaderSize, "manifest 'tensors' is not an array");

        std::uint64_t end = 0;
        for (const auto& e : entries) {
            const auto name = e.at("name").get<std::string>();
            const auto dims = e.at("dims").get<std::vector<std::int64_t>>();
            const auto offset = e.at("offset").get<std::uint64_t>();
            const auto len = e.at("len").get<std::uint64_t>();
            if (dims.empty() || std::ranges::any_of(dims, [](auto d) { return d < 1; }))
                throw FormatError(kHeaderSize, "tensor '" + name + "' has invalid dims");
            if (len != 4 * static_cast<std::uint64_t>(product(dims)))
                throw FormatError(kHeaderSize, "tensor '" + name + "' byte length " + std::to_string(len) +
                                                   " does not match its dims");
            if (offset + len > blob_size)
                throw FormatError(blob_start + std::min(offset, blob_size),
                                  "tensor '" + name + "' missing: blob section holds " + std::to_string(blob_size) +
                                      " bytes, tensor needs [" + std::to_string(offset) + ", " +
                                      std::to_string(offset + len) + ")");
            WeightTensor t;
            t.dims = dims;
            t.data.resize(len / 4);
            std::memcpy(t.data.data(), bytes.data() + blob_start + offset, len);
            for (std::size_t i = 0; i < t.data.size(); ++i)
                if (!std::isfinite(t.data[i]))
                    throw FormatError(blob_start + offset + 4 * i, "tensor '" + name + "' holds a non-finite value");
            if (store.contains(name)) throw FormatError(kHeaderSize, "duplicate tensor name '" + name + "'");
            store.add(name, std::move(t));
            end = std::max(end, offset + len);
        }
        if (end != blob_size)
            throw FormatError(blob_start + end, std::to_string(blob_size - end) + " trailing bytes after last blob");
    } catch (const json::exception& e) {
        throw FormatError(kHeaderSize, std::string("malformed manifest: ") + e.what());
    }
    check_schema(store);
    return store;
}

WeightStore load_weights(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open weight file '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_weights(bytes);
}

void save_weights(const WeightStore& store, const std::filesystem::path& path) {
    const auto bytes = serialize_weights(store);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write weight file '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to '" + path.string() + "'");
}

}  // namespace lpsr::srnet

namespace lpsr::srnet {

const Tensor4& TestVector::tensor(const std::string& name) const {
    const auto it = tensors.find(name);
    if (it == tensors.end()) throw InvalidArgument("test vector has no tensor '" + name + "'");
    return it->second;
}

void save_test_vector(const TestVector& vec, const std::filesystem::path& path) {
    WeightStore store;
    store.arch_tag = "test_vector";
    store.config = json{{"arch", vec.arch}, {"meta", vec.meta}};
    for (const auto& [name, t] : vec.tensors) {
        const auto d = t.data();
        store.add(name, WeightTensor{{t.batch(), t.channels(), t.height(), t.width()}, std::vector<float>(d.begin(), d.end())});
    }
    save_weights(store, path);
}

TestVector load_test_vector(const std::filesystem::path& path) {
    const WeightStore store = load_weights(path);
    if (store.arch_tag != "test_vector")
        throw InvalidArgument("'" + path.string() + "' is not a test vector (arch_tag '" + store.arch_tag + "')");
    TestVector vec;
    try {
        vec.arch = store.config.at("arch").get<std::string>();
        vec.meta = store.config.value("meta", json::object());
    } catch (const json::exception& e) {
        throw InvalidArgument("test vector config: " + std::string(e.what()));
    }
    for (const auto& [name, t] : store.tensors()) {
        if (t.dims.size() != 4) throw InvalidArgument("test vector tensor '" + name + "' is not 4-D");
        vec.tensors.emplace(name, Tensor4(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]),
                                          static_cast<int>(t.dims[2]), static_cast<int>(t.dims[3]), t.data));
    }
    return vec;
}

void validate_test_vector(const TestVector& vec, const WeightStore& store) {
    if (vec.arch != store.arch_tag)
        throw InvalidArgument("test vector is for '" + vec.arch + "' but the weights are '" + store.arch_tag + "'");
    const Tensor4& in = vec.tensor("input");
    if (in.batch() != 1) throw InvalidArgument("test vector input must have batch 1");
    const char* first = store.arch_tag == "rrdb_gen" ? "conv_first.weight" : "conv0.weight";
    const WeightTensor& w = store.get(first);
    if (in.channels() != w.dims.at(1))
        throw InvalidArgument("test vector input has " + std::to_string(in.channels()) + " channels, weights expect " +
                              std::to_string(w.dims.at(1)));
    if (store.arch_tag != "rrdb_gen" && (in.height() % 8 != 0 || in.width() % 8 != 0))
        throw InvalidArgument("discriminator test vector input dims must be multiples of 8");
}

}  // namespace lpsr::srnet
