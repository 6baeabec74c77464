#include "imaging/netpbm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "error.hpp"
#include "fileio.hpp"

namespace dgp {

namespace {

class HeaderReader {
public:
    explicit HeaderReader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

    long next_int(const char* field) {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
            fail(ErrorCode::Format, std::string("malformed header: expected ") + field);
        }
        long v = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            v = v * 10 + (bytes_[pos_++] - '0');
            if (v > 1 << 24) fail(ErrorCode::Format, std::string("malformed header: ") + field + " too large");
        }
        return v;
    }

    // Exactly one whitespace byte separates maxval from the payload.
    std::size_t payload_start() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
            fail(ErrorCode::Format, "malformed header: missing whitespace before payload");
        }
        return pos_ + 1;
    }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    const std::vector<unsigned char>& bytes_;
    std::size_t pos_ = 2;
};

}  // namespace

unsigned char quantize(float x) {
    const float v = std::round(std::clamp(x, -1.0f, 1.0f) * 127.5f + 127.5f);
    return static_cast<unsigned char>(std::clamp(v, 0.0f, 255.0f));
}

float dequantize(unsigned char v) { return static_cast<float>(v) / 127.5f - 1.0f; }

Image decode_netpbm(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
        fail(ErrorCode::Format, "wrong magic: expected P5 or P6");
    }
    const int channels = bytes[1] == '5' ? 1 : 3;
    HeaderReader header(bytes);
    const long width = header.next_int("width");
    const long height = header.next_int("height");
    const long maxval = header.next_int("maxval");
    if (width < 1 || height < 1) fail(ErrorCode::Format, "malformed header: zero image dimension");
    if (maxval != 255) fail(ErrorCode::Format, "unsupported maxval " + std::to_string(maxval));
    const std::size_t start = header.payload_start();
    const std::size_t need = static_cast<std::size_t>(width) * height * channels;
    if (bytes.size() < start + need) {
        fail(ErrorCode::Format, "truncated payload: expected " + std::to_string(need) + " bytes, got " +
                                    std::to_string(bytes.size() - std::min(bytes.size(), start)));
    }
    // Payload is interleaved; Image is planar.
    std::vector<float> values(need);
    const std::size_t plane = static_cast<std::size_t>(width) * height;
    for (std::size_t p = 0; p < plane; ++p) {
        for (int c = 0; c < channels; ++c) values[c * plane + p] = dequantize(bytes[start + p * channels + c]);
    }
    return Image(channels, static_cast<int>(height), static_cast<int>(width), std::move(values));
}

std::vector<unsigned char> encode_netpbm(const Image& img) {
    const std::string header = std::string(img.channels() == 1 ? "P5" : "P6") + "\n" + std::to_string(img.width()) +
                               " " + std::to_string(img.height()) + "\n255\n";
    std::vector<unsigned char> out(header.begin(), header.end());
    const std::size_t plane = static_cast<std::size_t>(img.width()) * img.height();
    out.reserve(out.size() + plane * img.channels());
    for (std::size_t p = 0; p < plane; ++p) {
        for (int c = 0; c < img.channels(); ++c) out.push_back(quantize(img.values()[c * plane + p]));
    }
    return out;
}

Image load_image(const std::string& path) {
    try {
        return decode_netpbm(read_file(path));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Io) throw;
        throw Error(e.code(), path + ": " + e.what());
    }
}

void save_image(const Image& img, const std::string& path) { write_file_atomic(path, encode_netpbm(img)); }

Mask load_mask(const std::string& path) {
    const Image img = load_image(path);
    if (img.channels() != 1) fail(ErrorCode::Format, path + ": mask must be a PGM (P5) file");
    try {
        return Mask::from_image(img);
    } catch (const Error&) {
        fail(ErrorCode::Format, path + ": mask pixels must be 0 (known) or 255 (hole)");
    }
}

void save_mask(const Mask& mask, const std::string& path) { save_image(mask.to_image(), path); }

}  // namespace dgp
