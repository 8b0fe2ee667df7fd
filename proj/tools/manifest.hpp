#ifndef HETMIX_TOOLS_MANIFEST_HPP
#define HETMIX_TOOLS_MANIFEST_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace hetmix::cli {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kManifestFormatVersion = 1;

std::string sha256_hex(const std::string& bytes);

// Collects what a command read and wrote so that `hetmix replay` can re-run it
// and check the outputs byte for byte.
class Manifest {
public:
    Manifest(std::string command, std::vector<std::string> argv, nlohmann::json config);

    void add_input(const std::string& role, const std::filesystem::path& path, const std::string& content);
    // Writes the file atomically into the output directory and records it.
    void write_output(const std::filesystem::path& dir, const std::string& name, const std::string& format,
                      const std::string& content);
    void warn(std::string message) { warnings_.push_back(std::move(message)); }
    void set_result(nlohmann::json result) { result_ = std::move(result); }

    void save(const std::filesystem::path& dir) const;

private:
    nlohmann::json doc_;
    std::vector<std::string> warnings_;
    nlohmann::json result_ = nlohmann::json::object();
};

}  // namespace hetmix::cli

#endif  // HETMIX_TOOLS_MANIFEST_HPP
