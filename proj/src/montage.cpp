#include "intent/montage.hpp"

#include "csv_util.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numbers>

namespace intent {

namespace {

// Positions follow the 10-10 construction: electrodes sit at fixed fractions of
// the arc from the midline electrode of their row to the row's electrode on the
// equatorial ring.
struct Row {
  std::string_view prefix;
  double midline_polar_deg;  // signed: positive anterior, negative posterior
  double ring_azimuth_deg;   // azimuth of the row's equatorial electrode
};

constexpr std::array<Row, 10> kRows = {{{"fp", 90.0, 18.0},
                                        {"af", 67.5, 36.0},
                                        {"f", 45.0, 54.0},
                                        {"fc", 22.5, 72.0},
                                        {"c", 0.0, 90.0},
                                        {"cp", -22.5, 108.0},
                                        {"p", -45.0, 126.0},
                                        {"po", -67.5, 144.0},
                                        {"o", -90.0, 162.0},
                                        {"i", -112.5, 180.0}}};

Vec3 spherical(double polar_deg, double azimuth_deg) {
  const double th = polar_deg * std::numbers::pi / 180.0;
  const double ph = azimuth_deg * std::numbers::pi / 180.0;
  return {std::sin(th) * std::sin(ph), std::sin(th) * std::cos(ph), std::cos(th)};
}

Vec3 slerp(const Vec3& a, const Vec3& b, double t) {
  const double dot = std::clamp(a.x * b.x + a.y * b.y + a.z * b.z, -1.0, 1.0);
  const double w = std::acos(dot);
  if (w < 1e-12) return a;
  const double sa = std::sin((1.0 - t) * w) / std::sin(w);
  const double sb = std::sin(t * w) / std::sin(w);
  return {sa * a.x + sb * b.x, sa * a.y + sb * b.y, sa * a.z + sb * b.z};
}

Vec3 midline(const Row& r) {
  return r.midline_polar_deg >= 0.0 ? spherical(r.midline_polar_deg, 0.0)
                                    : spherical(-r.midline_polar_deg, 180.0);
}

const Row* find_row(std::string_view prefix) {
  for (const auto& r : kRows) {
    if (r.prefix == prefix) return &r;
  }
  return nullptr;
}

Vec3 normalized(Vec3 v) {
  const double n = std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
  return {v.x / n, v.y / n, v.z / n};
}

}  // namespace

const std::vector<std::string>& standard_64_channels() {
  static const std::vector<std::string> names = {
      "Fp1", "Fp2", "AF7", "AF3", "AFz", "AF4", "AF8", "F7",   "F5",  "F3",  "F1",  "Fz",  "F2",
      "F4",  "F6",  "F8",  "FT9", "FT7", "FC5", "FC3", "FC1",  "FCz", "FC2", "FC4", "FC6", "FT8",
      "FT10", "T7", "C5",  "C3",  "C1",  "Cz",  "C2",  "C4",   "C6",  "T8",  "TP9", "TP7", "CP5",
      "CP3", "CP1", "CPz", "CP2", "CP4", "CP6", "TP8", "TP10", "P7",  "P5",  "P3",  "P1",  "Pz",
      "P2",  "P4",  "P6",  "P8",  "PO7", "PO3", "POz", "PO4",  "PO8", "O1",  "Oz",  "O2"};
  return names;
}

std::optional<Vec3> standard_position(std::string_view channel) {
  std::string name(channel);
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  const auto split = name.find_first_of("z0123456789");
  if (split == std::string::npos || split == 0) return std::nullopt;
  std::string prefix = name.substr(0, split);
  const std::string suffix = name.substr(split);

  // Temporal aliases sit on the equatorial ring of the FC/C/CP rows.
  bool temporal = false;
  if (prefix == "ft" || prefix == "tp" || prefix == "t") {
    temporal = true;
    prefix = prefix == "ft" ? "fc" : prefix == "tp" ? "cp" : "c";
  }
  const Row* row = find_row(prefix);
  if (row == nullptr) return std::nullopt;
  if (suffix == "z") return temporal ? std::nullopt : std::optional<Vec3>(midline(*row));

  int digit = 0;
  for (char c : suffix) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    digit = digit * 10 + (c - '0');
  }
  if (digit <= 0) return std::nullopt;
  const double side = digit % 2 == 1 ? -1.0 : 1.0;  // odd numbers on the left
  const double ring_az = side * row->ring_azimuth_deg;

  if (temporal) {
    if (digit == 7 || digit == 8) return spherical(90.0, ring_az);
    if ((digit == 9 || digit == 10) && prefix != "c") return spherical(112.5, ring_az);
    return std::nullopt;
  }
  const bool ring_only = prefix == "fp" || prefix == "o";
  if (ring_only) {
    return digit <= 2 ? std::optional<Vec3>(spherical(90.0, ring_az)) : std::nullopt;
  }
  if (digit == 7 || digit == 8) return spherical(90.0, ring_az);
  if (digit > 6) return std::nullopt;
  const int lateral = (digit + 1) / 2;  // 1..3
  return slerp(midline(*row), spherical(90.0, ring_az), lateral / 4.0);
}

std::map<std::string, Vec3> read_montage_csv(const std::filesystem::path& file) {
  const std::string text = csv::read_file(file);
  std::map<std::string, Vec3> out;
  std::vector<std::string_view> fields;
  bool first = true;
  csv::for_each_line(text, [&](std::string_view line) {
    if (line.empty()) return;
    csv::split(line, fields);
    Vec3 v;
    const bool ok = fields.size() == 4 && csv::parse_double(fields[1], v.x) &&
                    csv::parse_double(fields[2], v.y) && csv::parse_double(fields[3], v.z);
    if (!ok) {
      if (first) {  // header row
        first = false;
        return;
      }
      throw DataError(file.string() + ": malformed montage row");
    }
    first = false;
    if (v.x == 0.0 && v.y == 0.0 && v.z == 0.0) {
      throw DataError(file.string() + ": zero montage position");
    }
    out[std::string(fields[0])] = normalized(v);
  });
  return out;
}

std::vector<Vec3> montage_positions(std::span<const std::string> channels,
                                    const std::filesystem::path& montage_csv) {
  std::map<std::string, Vec3> overrides;
  if (!montage_csv.empty()) overrides = read_montage_csv(montage_csv);
  std::vector<Vec3> out;
  out.reserve(channels.size());
  for (const auto& ch : channels) {
    if (auto it = overrides.find(ch); it != overrides.end()) {
      out.push_back(it->second);
    } else if (auto p = standard_position(ch)) {
      out.push_back(*p);
    } else {
      throw DataError("no electrode position for channel " + ch);
    }
  }
  return out;
}

}  // namespace intent
