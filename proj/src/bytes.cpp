#include "octvf/bytes.hpp"

#include <cstdio>
#include <memory>

namespace octvf {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

std::string read_file_bytes(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw Error("cannot open for reading: " + path);
    if (std::fseek(f.get(), 0, SEEK_END) != 0) throw Error("seek failed: " + path);
    const long size = std::ftell(f.get());
    if (size < 0) throw Error("tell failed: " + path);
    std::rewind(f.get());
    std::string bytes(static_cast<size_t>(size), '\0');
    if (size > 0 && std::fread(bytes.data(), 1, bytes.size(), f.get()) != bytes.size()) {
        throw Error("short read: " + path);
    }
    return bytes;
}

void write_file_bytes(const std::string& path, const std::string& bytes) {
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw Error("cannot open for writing: " + path);
    if (!bytes.empty() && std::fwrite(bytes.data(), 1, bytes.size(), f.get()) != bytes.size()) {
        throw Error("short write: " + path);
    }
    if (std::fflush(f.get()) != 0) throw Error("flush failed: " + path);
}

}  // namespace octvf
