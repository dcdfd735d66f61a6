#include "doctest.h"

#include <cstring>
#include <filesystem>

#include "itof/dataset_io.hpp"
#include "support.hpp"

using namespace itof;

namespace {

std::filesystem::path temp_path(const char* name) {
    auto dir = std::filesystem::temp_directory_path() / "itof_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("dataset round trip") {
    std::vector<TransientFrame> frames{testutil::small_frame(1, 1, 8), testutil::small_frame(2, 2, 8),
                                       testutil::small_frame(3, 3, 6)};
    frames[1].meta.clipped_paths = 17;
    std::vector<WeibullParamMap> maps{{1, std::vector<std::array<float, 4>>(64, {0.5f, 401.0f, 1.5f, 80.0f})}};

    const auto path = temp_path("roundtrip.titf");
    write_dataset(frames, path, maps);
    const auto ds = read_dataset(path);
    REQUIRE(ds.frames.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(ds.frames[i] == frames[i]);
    CHECK(ds.weibull_maps == maps);

    CHECK(encode_dataset(frames, maps) == encode_dataset(ds.frames, ds.weibull_maps));
}

TEST_CASE("empty dataset") {
    const auto bytes = encode_dataset({});
    CHECK(bytes.size() == 10);
    CHECK(std::memcmp(bytes.data(), "TITF", 4) == 0);
    const auto ds = decode_dataset(bytes);
    CHECK(ds.frames.empty());
    CHECK(ds.weibull_maps.empty());
}

TEST_CASE("corrupt files are rejected") {
    const auto frames = std::vector<TransientFrame>{testutil::small_frame(5, 2, 6)};
    const auto good = encode_dataset(frames);

    auto bad_magic = good;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(decode_dataset(bad_magic), FormatError);
    try {
        decode_dataset(bad_magic);
    } catch (const FormatError& e) {
        CHECK(e.offset() == 0);
    }

    auto bad_version = good;
    bad_version[4] = 99;
    CHECK_THROWS_AS(decode_dataset(bad_version), FormatError);

    for (std::size_t cut : {std::size_t{3}, std::size_t{9}, good.size() / 2, good.size() - 1}) {
        std::vector<std::uint8_t> truncated(good.begin(), good.begin() + static_cast<std::ptrdiff_t>(cut));
        CHECK_THROWS_AS(decode_dataset(truncated), FormatError);
    }

    auto trailing = good;
    trailing.push_back(0);
    CHECK_THROWS_AS(decode_dataset(trailing), FormatError);

    const auto path = temp_path("missing.titf");
    std::filesystem::remove(path);
    CHECK_THROWS(read_dataset(path));
}
