#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "ctg/model.hpp"
#include "ctg/preprocess.hpp"

namespace ctg {

inline constexpr int kModelFormatVersion = 1;

// On-disk model document. The standardizer travels with the model so a loaded
// model can score raw feature rows on its own.
struct ModelFile {
    int format_version = kModelFormatVersion;
    ModelKind kind = ModelKind::decision_tree;
    std::uint64_t seed = 0;
    std::string config_hash;  // hash of the experiment config that built it
    std::string timestamp;    // ISO 8601 UTC, informational only
    std::optional<Standardizer> standardizer;
    nlohmann::json payload;

    ModelPtr instantiate() const;
};

ModelFile model_file_for(const Model& model, std::uint64_t seed,
                         std::string config_hash,
                         std::optional<Standardizer> standardizer);

void save_model(const ModelFile& file, const std::filesystem::path& path);
// Unknown format versions are rejected; malformed JSON reports the byte
// offset from the parser.
ModelFile load_model(const std::filesystem::path& path);

// Write to a sibling temp file, then rename over the target.
void write_text_atomic(const std::filesystem::path& path,
                       std::string_view text);

std::string fnv1a_hex(std::string_view text);
std::string utc_timestamp();

}  // namespace ctg
