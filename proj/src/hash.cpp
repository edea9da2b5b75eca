#include "itgan/hash.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <memory>
#include <vector>

namespace itgan::hash {

namespace {

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
            fail(ErrorCode::Internal, "SHA-256 initialisation failed");
    }
    void update(const void* data, std::size_t n) {
        if (n && EVP_DigestUpdate(ctx_.get(), data, n) != 1) fail(ErrorCode::Internal, "SHA-256 update failed");
    }
    void update(std::string_view s) { update(s.data(), s.size()); }
    template <class T>
    void value(const T& v) {
        update(&v, sizeof v);
    }
    std::string hex() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx_.get(), md.data(), &len) != 1) fail(ErrorCode::Internal, "SHA-256 final failed");
        static const char* digits = "0123456789abcdef";
        std::string out;
        for (unsigned int i = 0; i < len; ++i) {
            out += digits[md[i] >> 4];
            out += digits[md[i] & 15];
        }
        return out;
    }

private:
    std::unique_ptr<EVP_MD_CTX, void (*)(EVP_MD_CTX*)> ctx_;
};

void feed_file(Sha256& h, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
}

}  // namespace

std::string sha256(std::string_view bytes) {
    Sha256 h;
    h.update(bytes);
    return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
    Sha256 h;
    feed_file(h, path);
    return h.hex();
}

std::string sha256_dir(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    std::error_code ec;
    for (const auto& e : std::filesystem::directory_iterator(dir, ec))
        if (e.is_regular_file()) files.push_back(e.path());
    if (ec) fail(ErrorCode::Io, "cannot list " + dir.string() + ": " + ec.message());
    std::sort(files.begin(), files.end());
    Sha256 h;
    for (const auto& f : files) {
        const std::string name = f.filename().string();
        h.value(static_cast<std::uint64_t>(name.size()));
        h.update(name);
        h.value(static_cast<std::uint64_t>(std::filesystem::file_size(f)));
        feed_file(h, f);
    }
    return h.hex();
}

std::string sha256_dataset(const features::Dataset& ds) {
    Sha256 h;
    h.value(static_cast<std::uint64_t>(ds.matrix.rows()));
    h.value(static_cast<std::uint64_t>(ds.matrix.cols()));
    h.update(ds.matrix.data(), sizeof(double) * static_cast<std::size_t>(ds.matrix.size()));
    for (int y : ds.labels) h.value(static_cast<std::int32_t>(y));
    return h.hex();
}

}  // namespace itgan::hash
