#include "eval/checkpoint.hpp"

#include <zlib.h>

#include <cstring>
#include <set>

#include "error.hpp"
#include "fileio.hpp"

namespace dgp {

namespace {

constexpr char kMagic[4] = {'D', 'G', 'P', 'T'};
constexpr const char* kScheduleBeta = "schedule.beta";

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint32_t crc_of(const unsigned char* data, std::size_t n) {
    return static_cast<std::uint32_t>(crc32(crc32(0L, Z_NULL, 0), data, static_cast<uInt>(n)));
}

class Reader {
public:
    Reader(const std::vector<unsigned char>& bytes, std::size_t end) : bytes_(bytes), end_(end) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::string str() {
        const std::uint32_t n = u32();
        need(n);
        std::string s(bytes_.begin() + pos_, bytes_.begin() + pos_ + n);
        pos_ += n;
        return s;
    }
    float f32() {
        const std::uint32_t bits = u32();
        float f;
        std::memcpy(&f, &bits, 4);
        return f;
    }
    bool done() const { return pos_ == end_; }

private:
    void need(std::size_t n) const {
        if (end_ - pos_ < n) fail(ErrorCode::Format, "checkpoint truncated");
    }

    const std::vector<unsigned char>& bytes_;
    std::size_t end_;
    std::size_t pos_ = 4;
};

void load_params(ParamSet& params, const Checkpoint& ckpt, const std::set<std::string>& extra) {
    std::set<std::string> expected(extra);
    for (auto& [name, t] : params) {
        expected.insert(name);
        const Tensor& src = ckpt.get(name);
        if (src.shape() != t.shape()) {
            fail(ErrorCode::Format, "tensor '" + name + "' has shape " + shape_str(src.shape()) + ", expected " +
                                        shape_str(t.shape()));
        }
        auto dst = t.mutable_data();
        std::copy(src.data().begin(), src.data().end(), dst.begin());
    }
    for (const auto& [name, _] : ckpt.tensors) {
        if (!expected.count(name)) fail(ErrorCode::Format, "unexpected tensor '" + name + "' in " + ckpt.kind + " checkpoint");
    }
}

void require_kind(const Checkpoint& ckpt, const char* kind) {
    if (ckpt.kind != kind) {
        fail(ErrorCode::Kind, "checkpoint kind is '" + ckpt.kind + "', expected '" + kind + "'");
    }
}

}  // namespace

const Tensor& Checkpoint::get(const std::string& name) const {
    for (const auto& [n, t] : tensors) {
        if (n == name) return t;
    }
    fail(ErrorCode::MissingTensor, "missing tensor '" + name + "'");
}

std::vector<unsigned char> encode_checkpoint(const Checkpoint& ckpt) {
    std::set<std::string> names;
    std::vector<unsigned char> out(kMagic, kMagic + 4);
    put_u32(out, kCheckpointVersion);
    put_u32(out, static_cast<std::uint32_t>(ckpt.kind.size()));
    out.insert(out.end(), ckpt.kind.begin(), ckpt.kind.end());
    put_u32(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
    for (const auto& [name, t] : ckpt.tensors) {
        if (!names.insert(name).second) fail(ErrorCode::InvalidArgument, "duplicate tensor name '" + name + "'");
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out.insert(out.end(), name.begin(), name.end());
        put_u32(out, static_cast<std::uint32_t>(t.rank()));
        for (int d : t.shape()) put_u32(out, static_cast<std::uint32_t>(d));
        for (float f : t.data()) {
            std::uint32_t bits;
            std::memcpy(&bits, &f, 4);
            put_u32(out, bits);
        }
    }
    put_u32(out, crc_of(out.data(), out.size()));
    return out;
}

Checkpoint decode_checkpoint(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) fail(ErrorCode::Format, "not a checkpoint (bad magic)");
    const std::size_t body = bytes.size() - 4;
    std::uint32_t stored = 0;
    for (int i = 0; i < 4; ++i) stored |= static_cast<std::uint32_t>(bytes[body + i]) << (8 * i);
    Reader r(bytes, body);
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion) fail(ErrorCode::Version, "unsupported checkpoint version " + std::to_string(version));
    if (crc_of(bytes.data(), body) != stored) fail(ErrorCode::Checksum, "checkpoint CRC mismatch");

    Checkpoint ckpt;
    ckpt.kind = r.str();
    const std::uint32_t count = r.u32();
    std::set<std::string> names;
    for (std::uint32_t e = 0; e < count; ++e) {
        std::string name = r.str();
        if (!names.insert(name).second) fail(ErrorCode::Format, "duplicate tensor name '" + name + "'");
        const std::uint32_t rank = r.u32();
        if (rank == 0 || rank > 8) fail(ErrorCode::Format, "tensor '" + name + "' has invalid rank");
        Shape shape(rank);
        std::size_t n = 1;
        for (auto& d : shape) {
            const std::uint32_t v = r.u32();
            if (v == 0 || v > (1u << 24)) fail(ErrorCode::Format, "tensor '" + name + "' has invalid dimension");
            d = static_cast<int>(v);
            n *= v;
            if (n > body) fail(ErrorCode::Format, "checkpoint truncated");
        }
        std::vector<float> data(n);
        for (auto& f : data) f = r.f32();
        ckpt.tensors.emplace_back(std::move(name), Tensor(std::move(shape), std::move(data)));
    }
    if (!r.done()) fail(ErrorCode::Format, "trailing bytes after checkpoint entries");
    return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) { write_file_atomic(path, encode_checkpoint(ckpt)); }

Checkpoint load_checkpoint(const std::string& path) {
    try {
        return decode_checkpoint(read_file(path));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Io) throw;
        throw Error(e.code(), path + ": " + e.what());
    }
}

Checkpoint to_checkpoint(const EpsilonNet& net, const NoiseSchedule& schedule) {
    Checkpoint ckpt{EpsilonNet::kKind, {}};
    for (const auto& [name, t] : net.params()) ckpt.tensors.emplace_back(name, t.detach());
    ckpt.tensors.emplace_back(kScheduleBeta, Tensor({schedule.steps()}, schedule.betas()));
    return ckpt;
}

Checkpoint to_checkpoint(const Generator& g) {
    Checkpoint ckpt{Generator::kKind, {}};
    for (const auto& [name, t] : g.params()) ckpt.tensors.emplace_back(name, t.detach());
    return ckpt;
}

DiffusionModel epsilon_net_from_checkpoint(const Checkpoint& ckpt) {
    require_kind(ckpt, EpsilonNet::kKind);
    const Tensor& first = ckpt.get("enc1.weight");
    if (first.rank() != 4 || first.dim(1) < 2) fail(ErrorCode::Format, "epsilon net: malformed enc1.weight");
    DiffusionModel model{EpsilonNet(first.dim(1) - 1, 0), NoiseSchedule(std::vector<float>(ckpt.get(kScheduleBeta).data().begin(), ckpt.get(kScheduleBeta).data().end()))};
    load_params(model.net.params(), ckpt, {kScheduleBeta});
    return model;
}

Generator generator_from_checkpoint(const Checkpoint& ckpt) {
    require_kind(ckpt, Generator::kKind);
    const Tensor& out = ckpt.get("out.weight");
    if (out.rank() != 4) fail(ErrorCode::Format, "generator: malformed out.weight");
    Generator g(out.dim(0), 0);
    load_params(g.params(), ckpt, {});
    return g;
}

}  // namespace dgp
