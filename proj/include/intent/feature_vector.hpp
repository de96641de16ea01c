#pragma once

#include <string>
#include <vector>

namespace intent {

enum class Modality { Eeg, Gaze, Fused };

struct FeatureVector {
  std::vector<double> values;
  std::vector<std::string> names;
  Modality modality = Modality::Eeg;
  std::string epoch_id;
  std::vector<std::string> warnings;

  std::size_t size() const { return values.size(); }
};

}  // namespace intent
