#include "store.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace emblens {
namespace {

constexpr char kMagic[6] = {'E', 'M', 'B', 'V', '1', '\n'};

void write_u32_le(std::ostream& out, std::uint32_t value) {
    unsigned char bytes[4];
    bytes[0] = static_cast<unsigned char>(value & 0xff);
    bytes[1] = static_cast<unsigned char>((value >> 8) & 0xff);
    bytes[2] = static_cast<unsigned char>((value >> 16) & 0xff);
    bytes[3] = static_cast<unsigned char>((value >> 24) & 0xff);
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

std::uint32_t read_u32_le(const unsigned char* bytes) {
    return static_cast<std::uint32_t>(bytes[0]) |
           (static_cast<std::uint32_t>(bytes[1]) << 8) |
           (static_cast<std::uint32_t>(bytes[2]) << 16) |
           (static_cast<std::uint32_t>(bytes[3]) << 24);
}

std::uint64_t read_u64_le(const unsigned char* bytes) {
    std::uint64_t lo = read_u32_le(bytes);
    std::uint64_t hi = read_u32_le(bytes + 4);
    return lo | (hi << 32);
}

void write_u64_le(std::ostream& out, std::uint64_t value) {
    write_u32_le(out, static_cast<std::uint32_t>(value & 0xffffffffULL));
    write_u32_le(out, static_cast<std::uint32_t>(value >> 32));
}

EmbeddingSet load_embeddings_binary(const std::string& path, const std::string& bytes) {
    const std::size_t header_size = 6 + 1 + 4 + 4;
    if (bytes.size() < header_size)
        fail(ErrorCode::format, path + ": malformed header (file shorter than header)");
    const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::uint8_t dtype_code = raw[6];
    if (dtype_code > 1)
        fail(ErrorCode::format, path + ": malformed header (unknown dtype code " +
                                    std::to_string(dtype_code) + ")");
    const std::uint32_t n = read_u32_le(raw + 7);
    const std::uint32_t d = read_u32_le(raw + 11);
    if (n == 0 || d == 0)
        fail(ErrorCode::format, path + ": malformed header (n and d must be >= 1)");

    const std::size_t value_size = dtype_code == 0 ? 4 : 8;
    const std::uint64_t count = static_cast<std::uint64_t>(n) * d;
    const std::uint64_t expected = header_size + count * value_size;
    if (bytes.size() < expected)
        fail(ErrorCode::format,
             path + ": truncated payload (header declares " + std::to_string(count) +
                 " values, file holds " +
                 std::to_string((bytes.size() - header_size) / value_size) + ")");
    if (bytes.size() > expected)
        fail(ErrorCode::format, path + ": trailing bytes after declared payload");

    EmbeddingSet result;
    result.values = Matrix(n, d);
    const unsigned char* payload = raw + header_size;
    for (std::uint64_t idx = 0; idx < count; ++idx) {
        double value;
        if (dtype_code == 0) {
            const std::uint32_t word = read_u32_le(payload + idx * 4);
            value = static_cast<double>(std::bit_cast<float>(word));
        } else {
            value = std::bit_cast<double>(read_u64_le(payload + idx * 8));
        }
        if (!std::isfinite(value))
            fail(ErrorCode::format, path + ": non-finite entry at row " +
                                        std::to_string(idx / d) + ", column " +
                                        std::to_string(idx % d));
        result.values.data()[idx] = value;
    }
    return result;
}

EmbeddingSet load_embeddings_csv(const std::string& path, const std::string& bytes) {
    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t cols = 0;

    std::istringstream in(bytes);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t row_cols = 0;
        const char* cur = line.data();
        const char* end = line.data() + line.size();
        while (true) {
            const char* comma = std::find(cur, end, ',');
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(cur, comma, value);
            // from_chars does not skip whitespace; tolerate surrounding spaces.
            if (ec != std::errc() || ptr != comma) {
                std::string token(cur, comma);
                try {
                    std::size_t used = 0;
                    value = std::stod(token, &used);
                    while (used < token.size() && std::isspace(static_cast<unsigned char>(token[used]))) ++used;
                    if (used != token.size()) throw std::invalid_argument(token);
                } catch (const std::exception&) {
                    fail(ErrorCode::format, path + ": unparseable value '" + token +
                                                "' on line " + std::to_string(line_no));
                }
            }
            if (!std::isfinite(value))
                fail(ErrorCode::format, path + ": non-finite entry at row " +
                                            std::to_string(rows) + ", column " +
                                            std::to_string(row_cols));
            values.push_back(value);
            ++row_cols;
            if (comma == end) break;
            cur = comma + 1;
        }
        if (cols == 0) {
            cols = row_cols;
        } else if (row_cols != cols) {
            fail(ErrorCode::format, path + ": line " + std::to_string(line_no) + " has " +
                                        std::to_string(row_cols) + " values, expected " +
                                        std::to_string(cols));
        }
        ++rows;
    }
    if (rows == 0 || cols == 0) fail(ErrorCode::format, path + ": empty CSV file");

    EmbeddingSet result;
    result.values = Matrix(rows, cols, std::move(values));
    return result;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io, path + ": cannot open file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) fail(ErrorCode::io, path + ": read failure");
    return std::move(buffer).str();
}

} // namespace

EmbeddingSet load_embeddings(const std::string& path) {
    const std::string bytes = read_file(path);
    if (bytes.size() >= 6 && std::memcmp(bytes.data(), kMagic, 6) == 0)
        return load_embeddings_binary(path, bytes);
    return load_embeddings_csv(path, bytes);
}

void save_embeddings(const EmbeddingSet& embeddings, const std::string& path, Dtype dtype) {
    embeddings.validate();
    if (embeddings.n() > 0xffffffffULL || embeddings.d() > 0xffffffffULL)
        fail(ErrorCode::invalid, "embedding set too large for the binary format");

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::io, path + ": cannot open for writing");

    out.write(kMagic, 6);
    const std::uint8_t code = static_cast<std::uint8_t>(dtype);
    out.write(reinterpret_cast<const char*>(&code), 1);
    write_u32_le(out, static_cast<std::uint32_t>(embeddings.n()));
    write_u32_le(out, static_cast<std::uint32_t>(embeddings.d()));

    for (double value : embeddings.values.data()) {
        if (dtype == Dtype::f32) {
            write_u32_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(value)));
        } else {
            write_u64_le(out, std::bit_cast<std::uint64_t>(value));
        }
    }
    out.flush();
    if (!out) fail(ErrorCode::io, path + ": write failure");
}

Partition load_partition(const std::string& path, std::size_t n_expected) {
    const std::string bytes = read_file(path);
    std::istringstream in(bytes);
    std::string line;
    std::vector<std::int32_t> labels;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::int64_t label = 0;
        auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), label);
        if (ec != std::errc() || ptr != line.data() + line.size())
            fail(ErrorCode::format,
                 path + ": non-integer label '" + line + "' on line " + std::to_string(line_no));
        if (label < 0)
            fail(ErrorCode::format,
                 path + ": negative label on line " + std::to_string(line_no));
        if (label > 0x7fffffff)
            fail(ErrorCode::format, path + ": label too large on line " + std::to_string(line_no));
        labels.push_back(static_cast<std::int32_t>(label));
    }
    if (labels.size() != n_expected)
        fail(ErrorCode::format, path + ": expected " + std::to_string(n_expected) +
                                    " labels, found " + std::to_string(labels.size()));
    return partition_from_labels(std::move(labels));
}

void save_partition(const Partition& partition, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::io, path + ": cannot open for writing");
    for (auto label : partition.assignments) out << label << '\n';
    out.flush();
    if (!out) fail(ErrorCode::io, path + ": write failure");
}

namespace {

using nlohmann::json;

EvalSettings settings_from_json(const json& node, bool* has_seed) {
    EvalSettings settings;
    if (node.contains("k1")) settings.k1 = node.at("k1").get<std::int32_t>();
    if (node.contains("bin_sigma_factor"))
        settings.bin_sigma_factor = node.at("bin_sigma_factor").get<double>();
    if (node.contains("reducer")) {
        const std::string name = node.at("reducer").get<std::string>();
        if (name == "pca") settings.reducer = ReducerKind::pca;
        else if (name == "umap-lite") settings.reducer = ReducerKind::umap_lite;
        else fail(ErrorCode::format, "manifest settings.reducer must be 'pca' or 'umap-lite'");
    }
    if (node.contains("seed")) {
        settings.seed = node.at("seed").get<std::uint64_t>();
        if (has_seed) *has_seed = true;
    }
    if (node.contains("n_neighbors"))
        settings.n_neighbors = node.at("n_neighbors").get<std::int32_t>();
    if (node.contains("target_dim"))
        settings.target_dim = node.at("target_dim").get<std::int32_t>();
    return settings;
}

} // namespace

RunManifest load_manifest(const std::string& path) {
    const std::string bytes = read_file(path);
    json doc;
    try {
        doc = json::parse(bytes);
    } catch (const json::parse_error& err) {
        fail(ErrorCode::format, path + ": " + err.what());
    }

    RunManifest manifest;
    try {
        manifest.run_id = doc.at("run_id").get<std::string>();
        if (doc.contains("settings"))
            manifest.settings = settings_from_json(doc.at("settings"), &manifest.has_seed);

        const auto base = std::filesystem::path(path).parent_path();
        std::set<std::string> seen_ids;
        std::int64_t prev_epoch = -1;
        for (const auto& item : doc.at("milestones")) {
            MilestoneEntry entry;
            entry.id = item.at("id").get<std::string>();
            entry.epoch = item.at("epoch").get<std::int64_t>();
            if (entry.epoch < 0)
                fail(ErrorCode::format, path + ": milestone '" + entry.id + "' has negative epoch");
            if (!seen_ids.insert(entry.id).second)
                fail(ErrorCode::format, path + ": duplicate milestone id '" + entry.id + "'");
            if (entry.epoch < prev_epoch)
                fail(ErrorCode::format,
                     path + ": milestone epochs decrease at '" + entry.id + "'");
            prev_epoch = entry.epoch;

            auto resolve = [&](const std::string& rel) {
                std::filesystem::path p(rel);
                if (p.is_relative()) p = base / p;
                if (!std::filesystem::exists(p))
                    fail(ErrorCode::io, path + ": milestone '" + entry.id +
                                            "' references missing file " + p.string());
                return p.string();
            };
            entry.embeddings_path = resolve(item.at("embeddings").get<std::string>());
            if (item.contains("labels") && !item.at("labels").is_null())
                entry.labels_path = resolve(item.at("labels").get<std::string>());
            if (item.contains("reference_value") && !item.at("reference_value").is_null())
                entry.reference_value = item.at("reference_value").get<double>();
            manifest.milestones.push_back(std::move(entry));
        }
    } catch (const json::exception& err) {
        fail(ErrorCode::format, path + ": " + err.what());
    }
    if (manifest.milestones.empty())
        fail(ErrorCode::format, path + ": manifest contains no milestones");
    return manifest;
}

void save_manifest(const RunManifest& manifest, const std::string& path) {
    json doc;
    doc["run_id"] = manifest.run_id;
    json settings;
    settings["k1"] = manifest.settings.k1;
    settings["bin_sigma_factor"] = manifest.settings.bin_sigma_factor;
    settings["reducer"] = reducer_name(manifest.settings.reducer);
    settings["n_neighbors"] = manifest.settings.n_neighbors;
    settings["target_dim"] = manifest.settings.target_dim;
    settings["seed"] = manifest.settings.seed;
    doc["settings"] = settings;

    const auto base = std::filesystem::path(path).parent_path();
    json milestones = json::array();
    for (const auto& entry : manifest.milestones) {
        json item;
        item["id"] = entry.id;
        item["epoch"] = entry.epoch;
        auto relativize = [&](const std::string& p) {
            const auto rel = std::filesystem::proximate(p, base);
            return rel.string();
        };
        item["embeddings"] = relativize(entry.embeddings_path);
        if (entry.labels_path) item["labels"] = relativize(*entry.labels_path);
        if (entry.reference_value) item["reference_value"] = *entry.reference_value;
        milestones.push_back(std::move(item));
    }
    doc["milestones"] = milestones;

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::io, path + ": cannot open for writing");
    out << doc.dump(2) << '\n';
    out.flush();
    if (!out) fail(ErrorCode::io, path + ": write failure");
}

Milestone load_milestone(const MilestoneEntry& entry) {
    Milestone milestone;
    milestone.id = entry.id;
    milestone.epoch = entry.epoch;
    milestone.embeddings = load_embeddings(entry.embeddings_path);
    milestone.embeddings.milestone_id = entry.id;
    if (entry.labels_path)
        milestone.ground_truth = load_partition(*entry.labels_path, milestone.embeddings.n());
    milestone.reference_value = entry.reference_value;
    return milestone;
}

} // namespace emblens
