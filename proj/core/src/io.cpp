// Copyright 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#include "deskdiff/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "deskdiff/errors.hpp"
#include "deskdiff/hash.hpp"

namespace deskdiff {

namespace {

using ordered_json = nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little,
              "payload formats are little-endian");

void append_bytes(std::vector<std::uint8_t>& out, const void* data, std::size_t bytes) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out.insert(out.end(), p, p + bytes);
}

[[noreturn]] void throw_unreadable(const std::string& path) {
    if (!std::filesystem::exists(path))
        throw ConfigError("missing input file: " + path, "missing-input");
    throw ConfigError("cannot read file: " + path);
}

ordered_json parse_json(const std::string& text, const std::string& what) {
    ordered_json j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError(what + ": invalid JSON");
    return j;
}

ordered_json background_to_json(const ShapesBackground& bg) {
    ordered_json j;
    j["base_min"] = bg.base_min;
    j["base_max"] = bg.base_max;
    j["gradient_max"] = bg.gradient_max;
    j["noise_amp"] = bg.noise_amp;
    return j;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_unreadable(path);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    return content;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write file: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ConfigError("short write: " + path);
}

std::vector<std::uint8_t> read_binary_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_unreadable(path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

void write_binary_file(const std::string& path, const void* data, std::size_t bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write file: " + path);
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
    if (!out) throw ConfigError("short write: " + path);
}

std::uint64_t hash_file(const std::string& path) {
    const std::vector<std::uint8_t> bytes = read_binary_file(path);
    return fnv1a64(bytes.data(), bytes.size());
}

void CsvTable::add_row(std::vector<std::string> row) {
    if (row.size() != header.size()) throw ConfigError("csv: row width mismatch");
    rows.push_back(std::move(row));
}

std::string CsvTable::serialize() const {
    std::string out;
    const auto emit = [&out](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (fields[i].find_first_of(",\n\"") != std::string::npos)
                throw ConfigError("csv: unsupported character in field");
            if (i) out += ',';
            out += fields[i];
        }
        out += '\n';
    };
    emit(header);
    for (const auto& row : rows) emit(row);
    return out;
}

void write_csv(const std::string& path, const CsvTable& table) {
    write_text_file(path, table.serialize());
}

void write_pgm(const std::string& path, const float* values, int h, int w,
               float lo, float hi) {
    if (!(hi > lo)) throw ConfigError("pgm: empty value range");
    std::string out = "P2\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const float v = values[static_cast<std::size_t>(y * w + x)];
            const double unit = std::clamp((static_cast<double>(v) - lo) / (hi - lo), 0.0, 1.0);
            const int level = static_cast<int>(std::lround(unit * 255.0));
            if (x) out += ' ';
            out += std::to_string(level);
        }
        out += '\n';
    }
    write_text_file(path, out);
}

void save_dataset(const std::string& stem, const DatasetSpec& spec,
                  const std::vector<Sample>& samples) {
    if (static_cast<int>(samples.size()) != spec.size)
        throw ConfigError("dataset save: sample count does not match spec");
    const DataShape shape = spec.shape();
    const bool truth = spec.family == DatasetFamily::kShapes;

    std::vector<std::uint8_t> payload;
    for (const Sample& s : samples) {
        if (!(s.shape == shape)) throw ConfigError("dataset save: shape mismatch");
        append_bytes(payload, s.data.data(), s.data.size() * sizeof(float));
    }
    for (const Sample& s : samples) {
        const std::int32_t label = s.label;
        append_bytes(payload, &label, sizeof(label));
    }
    if (truth)
        for (const Sample& s : samples) {
            if (static_cast<int>(s.truth_region.size()) != shape.locations())
                throw ConfigError("dataset save: truth region size mismatch");
            append_bytes(payload, s.truth_region.data(), s.truth_region.size());
        }

    const std::string bin_path = stem + ".bin";
    write_binary_file(bin_path, payload.data(), payload.size());

    ordered_json j;
    j["family"] = to_string(spec.family);
    j["classes"] = spec.classes;
    j["size"] = spec.size;
    j["seed"] = spec.seed;
    j["shape"] = {{"h", shape.h}, {"w", shape.w}, {"c", shape.c}};
    j["background"] = background_to_json(spec.background);
    j["payload"] = std::filesystem::path(bin_path).filename().string();
    j["payload_bytes"] = payload.size();
    j["payload_fnv1a64"] = hex64(fnv1a64(payload.data(), payload.size()));
    write_text_file(stem + ".json", j.dump(2) + "\n");
}

LoadedDataset load_dataset(const std::string& stem) {
    const ordered_json j = parse_json(read_text_file(stem + ".json"), "dataset manifest");
    LoadedDataset out;
    out.spec.family = dataset_family_from_string(j.at("family").get<std::string>());
    out.spec.classes = j.at("classes").get<int>();
    out.spec.size = j.at("size").get<int>();
    out.spec.seed = j.at("seed").get<std::uint64_t>();
    const auto& bg = j.at("background");
    out.spec.background.base_min = bg.at("base_min").get<double>();
    out.spec.background.base_max = bg.at("base_max").get<double>();
    out.spec.background.gradient_max = bg.at("gradient_max").get<double>();
    out.spec.background.noise_amp = bg.at("noise_amp").get<double>();

    const DataShape shape = out.spec.shape();
    if (shape.h != j.at("shape").at("h").get<int>() ||
        shape.w != j.at("shape").at("w").get<int>() ||
        shape.c != j.at("shape").at("c").get<int>())
        throw ConfigError("dataset load: shape does not match family");

    const std::string bin_path =
        (std::filesystem::path(stem).parent_path() / j.at("payload").get<std::string>())
            .string();
    const std::vector<std::uint8_t> payload = read_binary_file(bin_path);
    if (payload.size() != j.at("payload_bytes").get<std::size_t>())
        throw ConfigError("dataset load: payload size mismatch");
    if (hex64(fnv1a64(payload.data(), payload.size())) !=
        j.at("payload_fnv1a64").get<std::string>())
        throw ConfigError("dataset load: payload hash mismatch");

    const std::size_t n = static_cast<std::size_t>(out.spec.size);
    const std::size_t d = static_cast<std::size_t>(shape.size());
    const bool truth = out.spec.family == DatasetFamily::kShapes;
    const std::size_t expected = n * d * sizeof(float) + n * sizeof(std::int32_t) +
                                 (truth ? n * static_cast<std::size_t>(shape.locations()) : 0);
    if (payload.size() != expected) throw ConfigError("dataset load: payload layout mismatch");

    out.samples.resize(n);
    const std::uint8_t* p = payload.data();
    for (std::size_t i = 0; i < n; ++i) {
        out.samples[i].shape = shape;
        out.samples[i].data.resize(d);
        std::memcpy(out.samples[i].data.data(), p, d * sizeof(float));
        p += d * sizeof(float);
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::int32_t label = 0;
        std::memcpy(&label, p, sizeof(label));
        out.samples[i].label = label;
        p += sizeof(label);
    }
    if (truth)
        for (std::size_t i = 0; i < n; ++i) {
            out.samples[i].truth_region.assign(p, p + shape.locations());
            p += shape.locations();
        }
    return out;
}

void save_denoiser(const std::string& path, const Denoiser& model) {
    ordered_json j;
    j["kind"] = "denoiser";
    j["version"] = 1;
    j["data_dim"] = model.data_dim;
    j["n_classes"] = model.n_classes;
    j["width"] = model.arch.width;
    j["depth"] = model.arch.depth;
    j["schedule_fingerprint"] = model.schedule_fingerprint;
    j["param_count"] = model.params.size();
    std::string out = j.dump() + "\n";
    out.append(reinterpret_cast<const char*>(model.params.data()),
               model.params.size() * sizeof(float));
    write_binary_file(path, out.data(), out.size());
}

namespace {

std::pair<ordered_json, std::vector<float>> load_checkpoint(const std::string& path,
                                                            const std::string& kind) {
    const std::vector<std::uint8_t> bytes = read_binary_file(path);
    const auto newline = std::find(bytes.begin(), bytes.end(), std::uint8_t{'\n'});
    if (newline == bytes.end()) throw ConfigError("checkpoint: missing header: " + path);
    const std::string header(bytes.begin(), newline);
    const ordered_json j = parse_json(header, "checkpoint header");
    if (j.at("kind").get<std::string>() != kind)
        throw ConfigError("checkpoint: expected kind '" + kind + "': " + path);
    const std::size_t count = j.at("param_count").get<std::size_t>();
    const std::size_t offset = static_cast<std::size_t>(newline - bytes.begin()) + 1;
    if (bytes.size() - offset != count * sizeof(float))
        throw ConfigError("checkpoint: payload size mismatch: " + path);
    std::vector<float> params(count);
    std::memcpy(params.data(), bytes.data() + offset, count * sizeof(float));
    return {j, std::move(params)};
}

}  // namespace

Denoiser load_denoiser(const std::string& path) {
    auto [j, params] = load_checkpoint(path, "denoiser");
    Denoiser model;
    model.data_dim = j.at("data_dim").get<int>();
    model.n_classes = j.at("n_classes").get<int>();
    model.arch = MlpArch{model.data_dim + kTimeEmbDim + kCondEmbDim,
                         j.at("width").get<int>(), j.at("depth").get<int>(),
                         model.data_dim};
    model.schedule_fingerprint = j.at("schedule_fingerprint").get<std::string>();
    model.params = std::move(params);
    if (model.params.size() != model.param_count())
        throw ConfigError("checkpoint: parameter count mismatch: " + path);
    return model;
}

void save_classifier(const std::string& path, const Classifier& clf) {
    ordered_json j;
    j["kind"] = "classifier";
    j["version"] = 1;
    j["shape"] = {{"h", clf.shape.h}, {"w", clf.shape.w}, {"c", clf.shape.c}};
    j["n_classes"] = clf.n_classes;
    j["width"] = clf.arch.width;
    j["depth"] = clf.arch.depth;
    j["held_out_accuracy"] = clf.held_out_accuracy;
    j["param_count"] = clf.params.size();
    std::string out = j.dump() + "\n";
    out.append(reinterpret_cast<const char*>(clf.params.data()),
               clf.params.size() * sizeof(float));
    write_binary_file(path, out.data(), out.size());
}

Classifier load_classifier(const std::string& path) {
    auto [j, params] = load_checkpoint(path, "classifier");
    Classifier clf;
    clf.shape = DataShape{j.at("shape").at("h").get<int>(), j.at("shape").at("w").get<int>(),
                          j.at("shape").at("c").get<int>()};
    clf.n_classes = j.at("n_classes").get<int>();
    clf.arch = MlpArch{clf.shape.size(), j.at("width").get<int>(), j.at("depth").get<int>(),
                       clf.n_classes};
    clf.held_out_accuracy = j.at("held_out_accuracy").get<double>();
    clf.params = std::move(params);
    if (clf.params.size() != clf.arch.param_count())
        throw ConfigError("checkpoint: parameter count mismatch: " + path);
    return clf;
}

void Manifest::add(const std::string& dir, const std::string& name) {
    const std::string path = (std::filesystem::path(dir) / name).string();
    Entry e;
    e.name = name;
    const std::vector<std::uint8_t> bytes = read_binary_file(path);
    e.bytes = bytes.size();
    e.fnv1a64 = hex64(fnv1a64(bytes.data(), bytes.size()));
    entries_.push_back(std::move(e));
}

std::string Manifest::serialize() const {
    ordered_json j;
    j["artifacts"] = ordered_json::array();
    for (const Entry& e : entries_) {
        ordered_json a;
        a["name"] = e.name;
        a["bytes"] = e.bytes;
        a["fnv1a64"] = e.fnv1a64;
        j["artifacts"].push_back(a);
    }
    return j.dump(2) + "\n";
}

void Manifest::write(const std::string& dir) const {
    write_text_file((std::filesystem::path(dir) / "manifest.json").string(), serialize());
}

VerifyReport verify_manifest(const std::string& dir) {
    const std::string path = (std::filesystem::path(dir) / "manifest.json").string();
    const ordered_json j = parse_json(read_text_file(path), "manifest");
    VerifyReport report;
    for (const auto& a : j.at("artifacts")) {
        const std::string name = a.at("name").get<std::string>();
        const std::string file = (std::filesystem::path(dir) / name).string();
        ++report.checked;
        if (!std::filesystem::exists(file)) {
            report.missing.push_back(name);
            continue;
        }
        const std::vector<std::uint8_t> bytes = read_binary_file(file);
        if (bytes.size() != a.at("bytes").get<std::size_t>() ||
            hex64(fnv1a64(bytes.data(), bytes.size())) != a.at("fnv1a64").get<std::string>())
            report.mismatched.push_back(name);
    }
    return report;
}

}  // namespace deskdiff
