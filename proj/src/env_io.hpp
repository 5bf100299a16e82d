#pragma once

#include <string>

#include "hash.hpp"
#include "radiosim.hpp"
#include "urban.hpp"

namespace cgmkit {

// Environment bundled with the channel model that defines its ground
// truth. The occupancy mask is recomputed on load, never stored.
struct EnvironmentFile {
  UrbanEnvironment env;
  ChannelParams channel;
};

// Canonical JSON serialization: stable key order and round-trip float
// formatting, so save -> load -> save is byte-identical and the SHA-256
// of the bytes can serve as the environment identity.
std::string serialize_environment(const EnvironmentFile& file);
EnvironmentFile deserialize_environment(const std::string& text);

void save_environment(const EnvironmentFile& file, const std::string& path);
EnvironmentFile load_environment(const std::string& path);

Sha256 environment_hash(const EnvironmentFile& file);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);

}  // namespace cgmkit
