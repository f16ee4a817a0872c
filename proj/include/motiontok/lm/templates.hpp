#pragma once

#include <string>

namespace motiontok::lm {

// Instruction templates, version-pinned. `<video>` expands to the vision
// placeholder tokens (names configurable); `<skeleton>` expands to the
// serialized skeleton tokens of the conditioning sequence.
inline constexpr int kTemplateVersion = 1;

inline constexpr const char* kPeTemplate =
    "Please describe the motion of the person in the video <video> using skeleton tokens. "
    "Your response should be formatted as: \"Frame 1: torso: ... left_arm: ... right_arm: ... "
    "left_leg: ... right_leg: ... Frame 2: ... \"";

inline constexpr const char* kMpTemplate =
    "Here's a motion sequence represented using skeleton tokens:\n<skeleton>\n"
    "Predict the future motion using skeleton tokens that have the same number of frames as the "
    "history motion. Your response should be formatted as: \"Future Frame 1: torso: ... "
    "left_arm: ... right_arm: ... left_leg: ... right_leg: ... Future Frame 2: ... \"";

inline constexpr const char* kMibTemplate =
    "Here's a motion sequence with missing in-between frames. It contains only the start and end "
    "keyframes, represented using skeleton tokens:\n<skeleton>\n"
    "Generate the in-between frames to create a smooth transition between the provided keyframes. "
    "Your response should be formatted as a complete sequence: \"Frame 1: ... left_arm: ... "
    "right_arm: ... left_leg: ... right_leg: ... Frame 2: ... \"";

}  // namespace motiontok::lm
