// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0
//
// Plain-text persistence: CSV tables, ASCII PGM images, dataset payloads
// (JSON manifest + little-endian binary), model checkpoints (JSON header +
// little-endian payload), and per-directory artifact manifests with content
// hashes. All numeric formatting is locale-independent and fixed, so reruns
// produce identical bytes.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deskdiff/dataset.hpp"
#include "deskdiff/denoiser.hpp"
#include "deskdiff/eval.hpp"

namespace deskdiff {

// Fixed shortest-round-trip formatting ("%.17g" trimmed); used everywhere a
// double lands in a text artifact.
std::string format_double(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
std::vector<std::uint8_t> read_binary_file(const std::string& path);
void write_binary_file(const std::string& path, const void* data, std::size_t bytes);
std::uint64_t hash_file(const std::string& path);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
    std::string serialize() const;
};

void write_csv(const std::string& path, const CsvTable& table);

// ASCII PGM (P2), mapping [lo, hi] to [0, 255] with clamping.
void write_pgm(const std::string& path, const float* values, int h, int w,
               float lo, float hi);

// Dataset persistence: `<stem>.json` manifest plus `<stem>.bin` payload
// holding sample data (f32), labels (i32), and truth regions (u8), all
// little-endian in index order.
void save_dataset(const std::string& stem, const DatasetSpec& spec,
                  const std::vector<Sample>& samples);
struct LoadedDataset {
    DatasetSpec spec;
    std::vector<Sample> samples;
};
LoadedDataset load_dataset(const std::string& stem);

// Checkpoints: one JSON header line, then f32 parameters little-endian.
void save_denoiser(const std::string& path, const Denoiser& model);
Denoiser load_denoiser(const std::string& path);
void save_classifier(const std::string& path, const Classifier& clf);
Classifier load_classifier(const std::string& path);

// Ordered artifact manifest for an output directory. Hashes are fnv-1a over
// raw file bytes.
class Manifest {
  public:
    // Records a file that already exists at dir/name.
    void add(const std::string& dir, const std::string& name);
    std::string serialize() const;
    void write(const std::string& dir) const;  // dir/manifest.json

  private:
    struct Entry {
        std::string name;
        std::uint64_t bytes = 0;
        std::string fnv1a64;
    };
    std::vector<Entry> entries_;
};

struct VerifyReport {
    int checked = 0;
    std::vector<std::string> mismatched;
    std::vector<std::string> missing;
    bool ok() const { return mismatched.empty() && missing.empty(); }
};

// Re-hashes every artifact listed in dir/manifest.json.
VerifyReport verify_manifest(const std::string& dir);

}  // namespace deskdiff
