#pragma once

#include <array>
#include <string>
#include <vector>

#include "motiontok/common.hpp"

namespace motiontok::skeleton {

// Canonical body-part grouping. The serializer emits groups in this order.
inline const std::array<std::string, 5>& group_names() {
    static const std::array<std::string, 5> names = {
        "torso", "left_arm", "right_arm", "left_leg", "right_leg"};
    return names;
}

struct JointLayout {
    std::vector<std::string> names;
    int root_index = 0;
    // groups[g] lists joint indices for group_names()[g], in emission order.
    std::array<std::vector<int>, 5> groups;

    int joint_count() const { return static_cast<int>(names.size()); }

    // Joint indices must partition {0..N-1}: no overlap, no gap.
    void validate() const {
        const int n = joint_count();
        std::vector<int> seen(static_cast<std::size_t>(n), 0);
        for (const auto& g : groups) {
            for (int j : g) {
                if (j < 0 || j >= n) throw DataError("joint layout: group index out of range");
                if (seen[static_cast<std::size_t>(j)]++) throw DataError("joint layout: group overlap");
            }
        }
        for (int c : seen) {
            if (c != 1) throw DataError("joint layout: groups do not cover all joints");
        }
        bool root_in_torso = false;
        for (int j : groups[0]) root_in_torso = root_in_torso || (j == root_index);
        if (!root_in_torso) throw DataError("joint layout: root joint must belong to the torso group");
    }
};

// Human3.6M 17-joint skeleton in the ordering used by the common
// 2D-to-3D lifting pipelines (pelvis first, then right leg, left leg,
// spine/head, left arm, right arm).
inline const JointLayout& h36m17() {
    static const JointLayout layout = [] {
        JointLayout l;
        l.names = {"pelvis",     "r_hip",      "r_knee",   "r_ankle", "l_hip",    "l_knee",
                   "l_ankle",    "spine",      "thorax",   "neck",    "head",     "l_shoulder",
                   "l_elbow",    "l_wrist",    "r_shoulder", "r_elbow", "r_wrist"};
        l.root_index = 0;
        l.groups[0] = {0, 7, 8, 9, 10};   // torso
        l.groups[1] = {11, 12, 13};       // left_arm
        l.groups[2] = {14, 15, 16};       // right_arm
        l.groups[3] = {4, 5, 6};          // left_leg
        l.groups[4] = {1, 2, 3};          // right_leg
        l.validate();
        return l;
    }();
    return layout;
}

}  // namespace motiontok::skeleton
