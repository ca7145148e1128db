#include "ctg/model_io.hpp"

#include <ctime>
#include <fstream>

#include <fmt/format.h>

#include "ctg/error.hpp"
#include "ctg/model_factory.hpp"
#include "ctg/rng.hpp"

namespace ctg {

ModelPtr ModelFile::instantiate() const {
    return model_from_payload(kind, payload);
}

ModelFile model_file_for(const Model& model, std::uint64_t seed,
                         std::string config_hash,
                         std::optional<Standardizer> standardizer) {
    ModelFile file;
    file.kind = model.kind();
    file.seed = seed;
    file.config_hash = std::move(config_hash);
    file.timestamp = utc_timestamp();
    file.standardizer = std::move(standardizer);
    file.payload = model.payload();
    return file;
}

void save_model(const ModelFile& file, const std::filesystem::path& path) {
    nlohmann::json doc = {{"format_version", file.format_version},
                          {"model_kind", to_string(file.kind)},
                          {"trained",
                           {{"seed", file.seed},
                            {"config_hash", file.config_hash},
                            {"timestamp", file.timestamp}}},
                          {"payload", file.payload}};
    if (file.standardizer) {
        doc["standardizer"] = {{"means", file.standardizer->means},
                               {"stds", file.standardizer->stds}};
    }
    write_text_atomic(path, doc.dump(2) + "\n");
}

ModelFile load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw_input("cannot open model file '" + path.string() + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        // e.byte carries the offset of the failure
        throw_runtime(fmt::format("model file '{}' is corrupt: {}",
                                  path.string(), e.what()));
    }

    ModelFile file;
    try {
        file.format_version = doc.at("format_version").get<int>();
        if (file.format_version != kModelFormatVersion)
            throw_input(fmt::format(
                "model file '{}' has format_version {}, expected {}",
                path.string(), file.format_version, kModelFormatVersion));
        file.kind =
            model_kind_from_string(doc.at("model_kind").get<std::string>());
        const nlohmann::json& trained = doc.at("trained");
        file.seed = trained.at("seed").get<std::uint64_t>();
        file.config_hash = trained.at("config_hash").get<std::string>();
        file.timestamp = trained.at("timestamp").get<std::string>();
        if (doc.contains("standardizer")) {
            Standardizer s;
            s.means = doc["standardizer"].at("means").get<std::vector<double>>();
            s.stds = doc["standardizer"].at("stds").get<std::vector<double>>();
            if (s.means.size() != s.stds.size())
                throw_input("standardizer means/stds length mismatch");
            file.standardizer = std::move(s);
        }
        file.payload = doc.at("payload");
    } catch (const nlohmann::json::exception& e) {
        throw_runtime(fmt::format("model file '{}' is malformed: {}",
                                  path.string(), e.what()));
    }
    return file;
}

void write_text_atomic(const std::filesystem::path& path,
                       std::string_view text) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw_runtime("cannot write '" + tmp.string() + "'");
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        out.flush();
        if (!out) throw_runtime("short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw_runtime(fmt::format("cannot move '{}' into place: {}",
                                  tmp.string(), ec.message()));
}

std::string fnv1a_hex(std::string_view text) {
    std::uint64_t hash = 14695981039346656037ull;
    for (unsigned char ch : text) {
        hash ^= ch;
        hash *= 1099511628211ull;
    }
    return fmt::format("{:016x}", hash);
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace ctg
