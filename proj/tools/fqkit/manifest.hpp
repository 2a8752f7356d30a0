#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace fqkit::cli {

// What a run did, enough to rerun it: the subcommand and its fully
// resolved flag list (defaults included). Written next to the outputs.
struct RunManifest {
    std::string command;
    std::vector<std::string> args;           // canonical "--flag value" list
    std::map<std::string, std::string> config;  // flag -> resolved value
    std::string seed;
    std::string tool_version;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    double duration_s = 0.0;
};

std::string to_json(const RunManifest& m);
RunManifest manifest_from_json(const std::string& text);

void write_manifest(const std::filesystem::path& path, const RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& path);

// Small file helpers shared by the commands.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace fqkit::cli
