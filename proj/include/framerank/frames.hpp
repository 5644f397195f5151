#pragma once

#include <array>
#include <cstdint>
#include <cstddef>
#include <string_view>

namespace framerank {

// The closed set of media frames. Enumerator order is fixed and is used as
// the frame id wherever a dense index is needed.
enum class FrameLabel : std::uint8_t {
  Economic,
  CapacityAndResources,
  Morality,
  FairnessAndEquality,
  Legality,
  PolicyPrescription,
  CrimeAndPunishment,
  SecurityAndDefense,
  HealthAndSafety,
  QualityOfLife,
  CulturalIdentity,
  PublicOpinion,
  Political,
  ExternalRegulation,
  Other,
};

inline constexpr std::size_t kFrameCount = 15;

// Canonical spelling used in article files.
std::string_view frame_name(FrameLabel frame);

// Exact, case-sensitive match against the canonical names. Throws
// InvalidArgument for anything else.
FrameLabel parse_frame(std::string_view name);

constexpr std::size_t frame_index(FrameLabel frame) {
  return static_cast<std::size_t>(frame);
}

FrameLabel frame_from_index(std::size_t index);

const std::array<FrameLabel, kFrameCount>& all_frames();

}  // namespace framerank
