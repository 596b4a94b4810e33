#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "polywsd/bcl.hpp"

namespace polywsd {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Binary layout is described in docs/checkpoint-format.md. Serialization is a
// pure function of the state: equal states give equal bytes.
std::string serialize_checkpoint(const TrainState& state);

// IncompatibleVersionError for another format version, IntegrityError for a
// bad magic, truncation, checksum mismatch or inconsistent contents.
TrainState deserialize_checkpoint(std::string_view bytes);

// Atomic: written to a temporary next to `path`, then renamed.
void save_checkpoint(const std::filesystem::path& path, const TrainState& state);
TrainState load_checkpoint(const std::filesystem::path& path);

}  // namespace polywsd
