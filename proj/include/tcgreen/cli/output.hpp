#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "tcgreen/cli/config.hpp"

namespace tcgreen::cli {

/// Unwritable output location (exit status 74).
class IoError : public Error {
public:
    using Error::Error;
};

/// Writes artifacts into one directory and remembers their names for the manifest.
class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path dir);

    const std::filesystem::path& dir() const { return dir_; }
    void write(const std::string& name, const std::string& content);
    void write_json(const std::string& name, const nlohmann::json& doc);
    const std::vector<std::string>& artifacts() const { return artifacts_; }

private:
    std::filesystem::path dir_;
    std::vector<std::string> artifacts_;
};

/// Hash of the resolved configuration, ignoring fields that cannot change results (threads, output dir).
std::string config_hash(const ExperimentConfig& config);

nlohmann::json library_versions();

nlohmann::json build_manifest(const std::string& subcommand, const ExperimentConfig& config,
                              const std::vector<std::string>& artifacts);

/// Writes manifest.json after every other artifact.
void write_manifest(ArtifactWriter& writer, const std::string& subcommand, const ExperimentConfig& config);

}  // namespace tcgreen::cli
