#include "debie/serialize.hpp"

#include <bit>
#include <fstream>
#include <stdexcept>

#include <openssl/evp.h>

namespace debie {

namespace {
constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}
} // namespace

std::string doubles_to_hex(std::span<const double> values) {
    std::string out;
    out.reserve(values.size() * 16);
    for (double v : values) {
        const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
        for (int shift = 60; shift >= 0; shift -= 4) out.push_back(kHexDigits[(bits >> shift) & 0xF]);
    }
    return out;
}

std::vector<double> hex_to_doubles(const std::string& hex) {
    if (hex.size() % 16 != 0) throw std::invalid_argument("hex payload length not a multiple of 16");
    std::vector<double> out;
    out.reserve(hex.size() / 16);
    for (std::size_t i = 0; i < hex.size(); i += 16) {
        std::uint64_t bits = 0;
        for (std::size_t j = 0; j < 16; ++j) {
            const int v = hex_value(hex[i + j]);
            if (v < 0) throw std::invalid_argument("invalid hex digit in payload");
            bits = (bits << 4) | static_cast<std::uint64_t>(v);
        }
        out.push_back(std::bit_cast<double>(bits));
    }
    return out;
}

std::string sha256_hex(const void* data, std::size_t len) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int digest_len = 0;
    if (!EVP_Digest(data, len, digest, &digest_len, EVP_sha256(), nullptr))
        throw std::runtime_error("sha256 failed");
    std::string out;
    out.reserve(digest_len * 2);
    for (unsigned int i = 0; i < digest_len; ++i) {
        out.push_back(kHexDigits[digest[i] >> 4]);
        out.push_back(kHexDigits[digest[i] & 0xF]);
    }
    return out;
}

std::string sha256_file_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for checksum: " + path);
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) throw std::runtime_error("sha256 context allocation failed");
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize got = in.gcount();
        if (got > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(got));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int digest_len = 0;
    EVP_DigestFinal_ex(ctx, digest, &digest_len);
    EVP_MD_CTX_free(ctx);
    std::string out;
    out.reserve(digest_len * 2);
    for (unsigned int i = 0; i < digest_len; ++i) {
        out.push_back(kHexDigits[digest[i] >> 4]);
        out.push_back(kHexDigits[digest[i] & 0xF]);
    }
    return out;
}

} // namespace debie
