#include "manifest.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fqkit/util/error.hpp"

namespace fqkit::cli {

using json = nlohmann::json;

std::string to_json(const RunManifest& m) {
    json j{{"command", m.command},
           {"args", m.args},
           {"config", m.config},
           {"seed", m.seed},
           {"tool_version", m.tool_version},
           {"inputs", m.inputs},
           {"outputs", m.outputs},
           {"duration_s", m.duration_s}};
    return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
    try {
        json j = json::parse(text);
        RunManifest m;
        m.command = j.at("command").get<std::string>();
        m.args = j.at("args").get<std::vector<std::string>>();
        m.config = j.value("config", std::map<std::string, std::string>{});
        m.seed = j.value("seed", std::string{});
        m.tool_version = j.value("tool_version", std::string{});
        m.inputs = j.value("inputs", std::vector<std::string>{});
        m.outputs = j.value("outputs", std::vector<std::string>{});
        m.duration_s = j.value("duration_s", 0.0);
        return m;
    } catch (const json::exception& e) {
        throw Error(std::string("bad manifest: ") + e.what());
    }
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) { write_file(path, to_json(m)); }

RunManifest read_manifest(const std::filesystem::path& path) { return manifest_from_json(read_file(path)); }

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << bytes;
    if (!out) throw Error("write failed for " + path.string());
}

}  // namespace fqkit::cli
