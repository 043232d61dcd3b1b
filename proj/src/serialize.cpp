#include "taco/serialize.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "taco/error.hpp"

namespace taco {

namespace {

constexpr char kArchiveMagic[8] = {'T', 'A', 'C', 'O', 'C', 'M', 'P', '1'};
constexpr char kTensorMagic[8] = {'T', 'A', 'C', 'O', 'T', 'N', 'S', 'R'};

void put_magic(std::vector<uint8_t>& out, const char (&magic)[8]) {
    for (char ch : magic) out.push_back(static_cast<uint8_t>(ch));
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<uint8_t>& out, float v) {
    put_u32(out, std::bit_cast<uint32_t>(v));
}

class Reader {
  public:
    explicit Reader(std::span<const uint8_t> data,
                    const char* eof_msg = "unexpected end of archive")
        : data_(data), eof_msg_(eof_msg) {}

    void need(size_t n) const {
        if (at_ + n > data_.size()) fail(ErrorCode::Corrupt, eof_msg_);
    }
    uint8_t u8() {
        need(1);
        return data_[at_++];
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(data_[at_++]) << (8 * i);
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(data_[at_++]) << (8 * i);
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    void bytes(uint8_t* dst, size_t n) {
        need(n);
        std::memcpy(dst, data_.data() + at_, n);
        at_ += n;
    }
    void expect_magic(const char (&magic)[8], const char* what) {
        need(8);
        if (std::memcmp(data_.data() + at_, magic, 8) != 0) {
            fail(ErrorCode::Corrupt, std::string("bad magic, not a ") + what);
        }
        at_ += 8;
    }
    size_t remaining() const { return data_.size() - at_; }

  private:
    std::span<const uint8_t> data_;
    const char* eof_msg_;
    size_t at_ = 0;
};

uint8_t format_id(const CompressedTensor& ct) {
    switch (ct.kind) {
        case CodecKind::Int8Uniform:
        case CodecKind::AshInt8:
            return 2;
        case CodecKind::Identity:
            return 3;
        default:
            return static_cast<uint8_t>(ct.format);
    }
}

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open file: " + path);
    std::vector<uint8_t> data((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
    if (in.bad()) fail(ErrorCode::Io, "read failed: " + path);
    return data;
}

void write_file(const std::string& path, const void* data, size_t n) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot open file for writing: " + path);
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    if (!out) fail(ErrorCode::Io, "write failed: " + path);
}

}  // namespace

std::vector<uint8_t> archive_bytes(const CompressedTensor& ct) {
    std::vector<uint8_t> out;
    const size_t payload = ct.kind == CodecKind::Identity ? 4u * ct.block_size : ct.block_size;
    out.reserve(22 + ct.blocks.size() * (payload + 8));
    put_magic(out, kArchiveMagic);
    out.push_back(static_cast<uint8_t>(ct.kind));
    out.push_back(format_id(ct));
    put_u32(out, ct.block_size);
    put_u64(out, ct.original_length);
    for (const auto& blk : ct.blocks) {
        out.insert(out.end(), blk.payload.begin(), blk.payload.end());
        put_f32(out, blk.alpha);
        put_f32(out, blk.scale);
    }
    return out;
}

CompressedTensor archive_parse(std::span<const uint8_t> bytes) {
    Reader r(bytes);
    r.expect_magic(kArchiveMagic, "compressed archive");
    const uint8_t kind_byte = r.u8();
    if (kind_byte > static_cast<uint8_t>(CodecKind::AshInt8)) {
        fail(ErrorCode::Corrupt, "unknown codec kind in archive");
    }
    const uint8_t fmt_byte = r.u8();
    if (fmt_byte > 3) fail(ErrorCode::Corrupt, "unknown payload format in archive");

    CompressedTensor ct;
    ct.kind = static_cast<CodecKind>(kind_byte);
    ct.format = fmt_byte == 1 ? Fp8Variant::E5M2 : Fp8Variant::E4M3;
    ct.block_size = r.u32();
    if (!is_valid_block_size(ct.block_size)) {
        fail(ErrorCode::Corrupt, "archive block size is not a valid power of two");
    }
    ct.original_length = r.u64();
    if (ct.original_length == 0) fail(ErrorCode::Corrupt, "archive declares zero elements");

    const uint64_t blocks = (ct.original_length + ct.block_size - 1) / ct.block_size;
    const size_t payload = ct.kind == CodecKind::Identity ? 4u * ct.block_size : ct.block_size;
    ct.blocks.resize(blocks);
    for (auto& blk : ct.blocks) {
        blk.payload.resize(payload);
        r.bytes(blk.payload.data(), payload);
        blk.alpha = r.f32();
        blk.scale = r.f32();
        if (!std::isfinite(blk.alpha) || !std::isfinite(blk.scale)) {
            fail(ErrorCode::Corrupt, "block scalars must be finite");
        }
    }
    if (r.remaining() != 0) fail(ErrorCode::Corrupt, "trailing bytes after archive payload");
    return ct;
}

void write_archive(const std::string& path, const CompressedTensor& ct) {
    auto bytes = archive_bytes(ct);
    write_file(path, bytes.data(), bytes.size());
}

CompressedTensor read_archive(const std::string& path) {
    auto bytes = read_file(path);
    return archive_parse(bytes);
}

uint64_t archive_size_bytes(const CodecConfig& cfg, uint64_t n) {
    const uint64_t blocks = (n + cfg.block_size - 1) / cfg.block_size;
    const uint64_t payload =
        cfg.kind == CodecKind::Identity ? 4 * cfg.block_size : cfg.block_size;
    return 22 + blocks * (payload + 8);
}

void write_tensor_file(const std::string& path, std::span<const float> x) {
    std::vector<uint8_t> out;
    out.reserve(20 + 4 * x.size());
    put_magic(out, kTensorMagic);
    put_u32(out, 1);
    put_u64(out, x.size());
    for (float v : x) put_f32(out, v);
    write_file(path, out.data(), out.size());
}

TensorBuffer read_tensor_file(const std::string& path) {
    auto bytes = read_file(path);
    Reader r(bytes, "unexpected end of tensor file");
    r.expect_magic(kTensorMagic, "tensor file");
    const uint32_t version = r.u32();
    if (version != 1) fail(ErrorCode::Corrupt, "unsupported tensor file version");
    const uint64_t n = r.u64();
    if (r.remaining() < n * 4) fail(ErrorCode::Corrupt, "unexpected end of tensor file");
    if (r.remaining() > n * 4) {
        fail(ErrorCode::Corrupt, "tensor file length does not match the element count");
    }
    TensorBuffer x(n);
    for (auto& v : x) v = r.f32();
    return x;
}

TensorBuffer read_raw_floats(const std::string& path) {
    auto bytes = read_file(path);
    if (bytes.empty() || bytes.size() % 4 != 0) {
        fail(ErrorCode::Corrupt, "raw float file length must be a positive multiple of 4");
    }
    TensorBuffer x(bytes.size() / 4);
    Reader r{std::span<const uint8_t>(bytes)};
    for (auto& v : x) v = r.f32();
    return x;
}

}  // namespace taco
