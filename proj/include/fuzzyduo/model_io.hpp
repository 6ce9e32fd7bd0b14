#pragma once

#include "fuzzyduo/data.hpp"
#include "fuzzyduo/model.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>

namespace fuzzyduo {

inline constexpr std::uint32_t kModelFormatVersion = 1;

/// Model parameters plus the input standardization they were trained with.
struct ModelFile {
    DuoModelParams params;
    std::optional<ChannelStats> standardization;
};

// Little-endian binary: "FZDUOMDL", u32 version, u32 classes/channels/timesteps,
// then per filter (spatial, temporal) u8 family, u8 tied, u32 rules, u32 dim and
// the centers, raw widths, query and value projections; then the classifier
// weights and bias; then u8 has_standardization and the per-channel mean and sd.
// Every tensor is row-major IEEE-754 double, so a round trip is bit-exact.
void write_model(std::ostream& out, const ModelFile& model);
ModelFile read_model(std::istream& in);

void save_model(const std::filesystem::path& path, const ModelFile& model);
ModelFile load_model(const std::filesystem::path& path);

} // namespace fuzzyduo
