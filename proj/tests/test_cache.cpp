#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "qdvol/analytics.hpp"
#include "qdvol/cache.hpp"

using namespace qdvol;
namespace fs = std::filesystem;

namespace {
struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("qdvol-test-" + std::to_string(::getpid()) + "-" +
                std::to_string(reinterpret_cast<uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};
}  // namespace

TEST_CASE("cache round-trip: identical outputs, zero recomputation") {
    TempDir dir;
    fs::path file = CacheFile::file_in(dir.path);

    TrSession first;
    Analytics an1(first);
    PiScalar vol = an1.volume_principal(2, 1);
    first.f_table(1, 2);
    CacheFile::save(file, first);
    CHECK(first.amplitudes_computed() > 0);

    TrSession second;
    auto res = CacheFile::load_into(file, second);
    CHECK(res.status == CacheFile::LoadStatus::loaded);
    CHECK(res.entries_loaded > 0);
    Analytics an2(second);
    CHECK(an2.volume_principal(2, 1) == vol);
    CHECK(an2.session().f_entry(1, 2, {1, 1}) == ExactScalar(1, 96));
    CHECK(second.amplitudes_computed() == 0);
}

TEST_CASE("cache merge keeps previous entries") {
    TempDir dir;
    fs::path file = CacheFile::file_in(dir.path);
    {
        TrSession s;
        s.f_table(0, 4);
        CacheFile::save(file, s);
    }
    {
        TrSession s;
        s.f_table(1, 1);
        CacheFile::save(file, s);  // merge, not clobber
    }
    TrSession probe;
    CacheFile::load_into(file, probe);
    CHECK(probe.f_entry(0, 4, {1, 0, 0, 0}) == ExactScalar(1, 4));
    CHECK(probe.f_entry(1, 1, {1}) == ExactScalar(1, 48));
    CHECK(probe.amplitudes_computed() == 0);
}

TEST_CASE("mismatched curve or version is ignored with a warning") {
    TempDir dir;
    fs::path file = CacheFile::file_in(dir.path);

    std::ofstream(file) << R"({"schema_version": 1,
        "curve": {"a": "-1", "b": 3},
        "entries": [{"g": 1, "n": 1, "k": [0], "num": "999", "den": "1"}]})";
    TrSession s;
    auto res = CacheFile::load_into(file, s);
    CHECK(res.status == CacheFile::LoadStatus::curve_mismatch);
    CHECK(s.f_entry(1, 1, {0}) == ExactScalar(-1, 24));  // recomputed, not merged

    std::ofstream(file) << R"({"schema_version": 99,
        "curve": {"a": "-1", "b": 2}, "entries": []})";
    TrSession s2;
    CHECK(CacheFile::load_into(file, s2).status == CacheFile::LoadStatus::version_mismatch);
}

TEST_CASE("corrupted cache files are rejected whole") {
    TempDir dir;
    fs::path file = CacheFile::file_in(dir.path);

    std::ofstream(file) << "{ not json";
    TrSession s;
    CHECK(CacheFile::load_into(file, s).status == CacheFile::LoadStatus::rejected);

    // tampered denominator "0": reject the file, merge nothing
    std::ofstream(file) << R"({"schema_version": 1,
        "curve": {"a": "-1", "b": 2},
        "entries": [
          {"g": 0, "n": 3, "k": [0,0,0], "num": "1", "den": "2"},
          {"g": 1, "n": 1, "k": [0], "num": "7", "den": "0"}]})";
    TrSession s2;
    CHECK(CacheFile::load_into(file, s2).status == CacheFile::LoadStatus::rejected);
    CHECK(s2.f_entry(1, 1, {0}) == ExactScalar(-1, 24));
    CHECK(s2.amplitudes_computed() > 0);  // nothing was preloaded

    TrSession s3;
    CHECK(CacheFile::load_into(dir.path / "absent.json", s3).status ==
          CacheFile::LoadStatus::missing);
}
