#pragma once

// Little-endian byte buffers shared by the binary containers.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

#include "itof/errors.hpp"

namespace itof::detail {

static_assert(std::endian::native == std::endian::little, "binary I/O assumes a little-endian host");

class Writer {
public:
    template <typename T>
    void put(T v) {
        const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
        bytes_.insert(bytes_.end(), p, p + sizeof(T));
    }
    void put_tag(const std::array<char, 4>& tag) { bytes_.insert(bytes_.end(), tag.begin(), tag.end()); }
    void put_string(const std::string& s) {
        put<std::uint16_t>(static_cast<std::uint16_t>(s.size()));
        bytes_.insert(bytes_.end(), s.begin(), s.end());
    }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    template <typename T>
    T get(const char* what) {
        if (bytes_.size() - pos_ < sizeof(T)) {
            throw FormatError(std::string("truncated while reading ") + what, pos_);
        }
        T v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::array<char, 4> get_tag(const char* what) {
        std::array<char, 4> tag{};
        for (auto& c : tag) c = get<char>(what);
        return tag;
    }
    std::string get_string(const char* what) {
        const auto n = get<std::uint16_t>(what);
        if (bytes_.size() - pos_ < n) throw FormatError(std::string("truncated while reading ") + what, pos_);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    std::size_t pos() const noexcept { return pos_; }
    bool done() const noexcept { return pos_ == bytes_.size(); }

private:
    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

inline void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace itof::detail
