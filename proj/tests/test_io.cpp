// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0
//
// Text artifact formats: shortest round-trip double formatting, CSV and PGM
// serialization, dataset and checkpoint persistence with corruption
// detection, and the per-directory manifest verifier.

#include <doctest.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "deskdiff/dataset.hpp"
#include "deskdiff/denoiser.hpp"
#include "deskdiff/errors.hpp"
#include "deskdiff/eval.hpp"
#include "deskdiff/io.hpp"
#include "deskdiff/rng.hpp"
#include "deskdiff/schedule.hpp"

using namespace deskdiff;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("deskdiff_io_test_" + std::to_string(std::rand()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("format_double is shortest round-trip text") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.5) == "-2.5");
    CHECK(format_double(0.1 + 0.2) == "0.30000000000000004");
    CHECK(format_double(1e-7) == "1e-07");
    CHECK(format_double(0.0) == "0");
    // Round trip through strtod is exact.
    for (double v : {1.0 / 3.0, 2.5e-17, 123456.789, -9.95, 4.118193638138445e-05}) {
        const std::string s = format_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
}

TEST_CASE("text and binary files round trip") {
    TempDir tmp;
    const std::string text = "line one\nline two\n";
    write_text_file(tmp.file("a.txt"), text);
    CHECK(read_text_file(tmp.file("a.txt")) == text);

    const std::vector<std::uint8_t> payload{0, 1, 2, 255, 128, 7};
    write_binary_file(tmp.file("b.bin"), payload.data(), payload.size());
    CHECK(read_binary_file(tmp.file("b.bin")) == payload);
    CHECK(hash_file(tmp.file("b.bin")) == fnv1a64(payload.data(), payload.size()));
}

TEST_CASE("missing files raise the missing-input error kind") {
    TempDir tmp;
    try {
        read_text_file(tmp.file("absent.json"));
        FAIL("expected a throw");
    } catch (const ConfigError& e) {
        CHECK(e.kind() == "missing-input");
        CHECK(e.exit_code() == kExitUsage);
    }
    CHECK_THROWS_AS(read_binary_file(tmp.file("absent.bin")), ConfigError);
}

TEST_CASE("csv serialization is exact and validated") {
    CsvTable t;
    t.header = {"method", "r", "value"};
    t.add_row({"diffedit", "0.5", "1.25"});
    t.add_row({"sdedit", "0.9", "-3"});
    CHECK(t.serialize() == "method,r,value\ndiffedit,0.5,1.25\nsdedit,0.9,-3\n");
    CHECK_THROWS(t.add_row({"too", "short"}));
    CsvTable bad;
    bad.header = {"a,b"};
    CHECK_THROWS(bad.serialize());

    TempDir tmp;
    write_csv(tmp.file("t.csv"), t);
    CHECK(read_text_file(tmp.file("t.csv")) == t.serialize());
}

TEST_CASE("pgm output maps and clamps the value range") {
    TempDir tmp;
    const float values[4] = {-1.0f, 0.0f, 1.0f, 2.0f};  // last clamps to 255
    write_pgm(tmp.file("img.pgm"), values, 2, 2, -1.0f, 1.0f);
    const std::string body = read_text_file(tmp.file("img.pgm"));
    CHECK(body == "P2\n2 2\n255\n0 128\n255 255\n");
}

TEST_CASE("dataset save/load round trips both families") {
    TempDir tmp;
    for (DatasetFamily family : {DatasetFamily::kGm2d, DatasetFamily::kShapes}) {
        DatasetSpec spec;
        spec.family = family;
        spec.classes = 4;
        spec.size = 12;
        spec.seed = 77;
        const auto samples = generate(spec);
        const std::string stem = tmp.file(to_string(family));
        save_dataset(stem, spec, samples);
        const LoadedDataset loaded = load_dataset(stem);
        CHECK(loaded.spec.family == family);
        CHECK(loaded.spec.size == 12);
        CHECK(loaded.spec.seed == 77);
        REQUIRE(loaded.samples.size() == samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) {
            CHECK(loaded.samples[i].data == samples[i].data);
            CHECK(loaded.samples[i].label == samples[i].label);
            CHECK(loaded.samples[i].truth_region == samples[i].truth_region);
            CHECK(loaded.samples[i].shape == samples[i].shape);
        }
    }
}

TEST_CASE("dataset loader rejects payload corruption") {
    TempDir tmp;
    DatasetSpec spec;
    spec.family = DatasetFamily::kGm2d;
    spec.classes = 4;
    spec.size = 8;
    spec.seed = 5;
    const auto samples = generate(spec);
    const std::string stem = tmp.file("data");
    save_dataset(stem, spec, samples);

    auto payload = read_binary_file(stem + ".bin");
    payload[3] ^= 0x40;
    write_binary_file(stem + ".bin", payload.data(), payload.size());
    CHECK_THROWS_AS(load_dataset(stem), ConfigError);

    // Truncation is also rejected.
    write_binary_file(stem + ".bin", payload.data(), payload.size() - 4);
    CHECK_THROWS_AS(load_dataset(stem), ConfigError);
}

TEST_CASE("denoiser checkpoints round trip exactly") {
    TempDir tmp;
    Rng rng(3);
    Denoiser model = make_denoiser<float>(2, 4, 24, 2, rng);
    for (auto& v : model.params) v += 0.1f * rng.normal_f();
    model.schedule_fingerprint = NoiseSchedule::linear().fingerprint();
    const std::string path = tmp.file("model.ckpt");
    save_denoiser(path, model);
    const Denoiser loaded = load_denoiser(path);
    CHECK(loaded.params == model.params);
    CHECK(loaded.arch == model.arch);
    CHECK(loaded.data_dim == model.data_dim);
    CHECK(loaded.n_classes == model.n_classes);
    CHECK(loaded.schedule_fingerprint == model.schedule_fingerprint);

    // Reruns of save produce identical bytes.
    const auto bytes_a = read_binary_file(path);
    save_denoiser(path, model);
    CHECK(read_binary_file(path) == bytes_a);

    // A flipped payload byte is caught at load time.
    auto bytes = read_binary_file(path);
    bytes[bytes.size() - 2] ^= 0x11;
    write_binary_file(path, bytes.data(), bytes.size());
    CHECK_THROWS_AS(load_denoiser(path), ConfigError);
}

TEST_CASE("classifier checkpoints round trip exactly") {
    TempDir tmp;
    Classifier clf;
    clf.arch = MlpArch{256, 32, 1, 4};
    Rng rng(8);
    clf.params = mlp_init<float>(clf.arch, rng);
    clf.n_classes = 4;
    clf.shape = DataShape{16, 16, 1};
    clf.held_out_accuracy = 0.973;
    const std::string path = tmp.file("clf.ckpt");
    save_classifier(path, clf);
    const Classifier loaded = load_classifier(path);
    CHECK(loaded.params == clf.params);
    CHECK(loaded.arch == clf.arch);
    CHECK(loaded.n_classes == 4);
    CHECK(loaded.shape == clf.shape);
    CHECK(loaded.held_out_accuracy == doctest::Approx(0.973).epsilon(1e-12));

    // Denoiser and classifier checkpoints are not interchangeable.
    CHECK_THROWS_AS(load_denoiser(path), ConfigError);
}

TEST_CASE("manifest records and verifies artifact hashes") {
    TempDir tmp;
    write_text_file(tmp.file("a.csv"), "x\n1\n");
    write_text_file(tmp.file("b.txt"), "hello\n");
    Manifest m;
    m.add(tmp.path.string(), "a.csv");
    m.add(tmp.path.string(), "b.txt");
    m.write(tmp.path.string());
    CHECK(fs::exists(tmp.file("manifest.json")));

    VerifyReport ok = verify_manifest(tmp.path.string());
    CHECK(ok.checked == 2);
    CHECK(ok.ok());

    // Tampering flips the report.
    write_text_file(tmp.file("a.csv"), "x\n2\n");
    VerifyReport bad = verify_manifest(tmp.path.string());
    CHECK(!bad.ok());
    REQUIRE(bad.mismatched.size() == 1);
    CHECK(bad.mismatched[0] == "a.csv");

    // Deleting is reported as missing, not as a crash.
    fs::remove(tmp.file("b.txt"));
    VerifyReport gone = verify_manifest(tmp.path.string());
    REQUIRE(gone.missing.size() == 1);
    CHECK(gone.missing[0] == "b.txt");
}
