#include "manifest.hpp"

#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

#include "hetmix/io.hpp"

namespace hetmix::cli {

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    std::ostringstream out;
    for (unsigned int i = 0; i < length; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return out.str();
}

Manifest::Manifest(std::string command, std::vector<std::string> argv, nlohmann::json config) {
    doc_["format"] = "hetmix-manifest";
    doc_["format_version"] = kManifestFormatVersion;
    doc_["tool"] = "hetmix";
    doc_["tool_version"] = kToolVersion;
    doc_["command"] = std::move(command);
    doc_["argv"] = std::move(argv);
    doc_["config_sha256"] = sha256_hex(config.dump());
    doc_["config"] = std::move(config);
    doc_["inputs"] = nlohmann::json::object();
    doc_["outputs"] = nlohmann::json::object();
}

void Manifest::add_input(const std::string& role, const std::filesystem::path& path, const std::string& content) {
    doc_["inputs"][role] = {{"path", std::filesystem::absolute(path).lexically_normal().string()},
                            {"sha256", sha256_hex(content)}};
}

void Manifest::write_output(const std::filesystem::path& dir, const std::string& name, const std::string& format,
                            const std::string& content) {
    io::write_file_atomic(dir / name, content);
    doc_["outputs"][name] = {{"format", format}, {"sha256", sha256_hex(content)}};
}

void Manifest::save(const std::filesystem::path& dir) const {
    nlohmann::json doc = doc_;
    doc["warnings"] = warnings_;
    doc["result"] = result_;
    io::write_file_atomic(dir / "manifest.json", doc.dump(2) + "\n");
}

}  // namespace hetmix::cli
