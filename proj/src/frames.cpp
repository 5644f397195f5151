#include "framerank/frames.hpp"

#include <string>

#include "framerank/error.hpp"

namespace framerank {
namespace {

constexpr std::array<std::string_view, kFrameCount> kNames = {
    "Economic",
    "Capacity and Resources",
    "Morality",
    "Fairness and Equality",
    "Legality, Constitutionality and Jurisprudence",
    "Policy Prescription and Evaluation",
    "Crime and Punishment",
    "Security and Defense",
    "Health and Safety",
    "Quality of Life",
    "Cultural Identity",
    "Public Opinion",
    "Political",
    "External Regulation and Reputation",
    "Other",
};

}  // namespace

std::string_view frame_name(FrameLabel frame) {
  return kNames.at(frame_index(frame));
}

FrameLabel parse_frame(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<FrameLabel>(i);
  }
  throw InvalidArgument("unknown frame label '" + std::string(name) + "'");
}

FrameLabel frame_from_index(std::size_t index) {
  if (index >= kFrameCount) {
    throw InvalidArgument("frame index " + std::to_string(index) +
                          " out of range");
  }
  return static_cast<FrameLabel>(index);
}

const std::array<FrameLabel, kFrameCount>& all_frames() {
  static const std::array<FrameLabel, kFrameCount> frames = [] {
    std::array<FrameLabel, kFrameCount> out{};
    for (std::size_t i = 0; i < kFrameCount; ++i) {
      out[i] = static_cast<FrameLabel>(i);
    }
    return out;
  }();
  return frames;
}

}  // namespace framerank
