#include "tcgreen/cli/output.hpp"

#include <fstream>
#include <system_error>

#include <boost/version.hpp>
#include <fftw3.h>

namespace tcgreen::cli {

using nlohmann::json;

ArtifactWriter::ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_))
        throw IoError("cannot create output directory '" + dir_.string() + "'" + (ec ? ": " + ec.message() : ""));
}

void ArtifactWriter::write(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << content;
    out.close();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
    artifacts_.push_back(name);
}

void ArtifactWriter::write_json(const std::string& name, const json& doc) { write(name, doc.dump(2) + "\n"); }

std::string config_hash(const ExperimentConfig& config) {
    json resolved = config.to_json();
    resolved["run"].erase("threads");
    resolved.erase("output");
    return fnv1a_hex(resolved.dump());
}

json library_versions() {
    return {{"boost", BOOST_LIB_VERSION},
            {"fftw", std::string(fftw_version)},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
            {"compiler", __VERSION__}};
}

json build_manifest(const std::string& subcommand, const ExperimentConfig& config,
                    const std::vector<std::string>& artifacts) {
    json m;
    m["tool"] = "tcgreen";
    m["version"] = TCGREEN_VERSION;
    m["subcommand"] = subcommand;
    m["config_hash"] = config_hash(config);
    m["seed"] = config.seed ? json(*config.seed) : json(nullptr);
    m["threads"] = config.threads;
    m["config"] = config.to_json();
    m["artifacts"] = artifacts;
    m["libraries"] = library_versions();
    return m;
}

void write_manifest(ArtifactWriter& writer, const std::string& subcommand, const ExperimentConfig& config) {
    const json m = build_manifest(subcommand, config, writer.artifacts());
    writer.write_json("manifest.json", m);
}

}  // namespace tcgreen::cli
