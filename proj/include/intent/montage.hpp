#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace intent {

// Unit-sphere electrode position: x right, y anterior (nose), z superior.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

// 64-channel 10-10 montage (LiveAmp/actiCAP-style layout).
const std::vector<std::string>& standard_64_channels();

std::optional<Vec3> standard_position(std::string_view channel);

// montage.csv rows: name,x,y,z (normalized to unit length on read).
std::map<std::string, Vec3> read_montage_csv(const std::filesystem::path& file);

// Positions for each channel, from the override file when given, else the
// built-in table. Throws DataError for channels without a position.
std::vector<Vec3> montage_positions(std::span<const std::string> channels,
                                    const std::filesystem::path& montage_csv = {});

}  // namespace intent
