#pragma once

#include <optional>
#include <string>

#include "motiontok/common.hpp"
#include "motiontok/numerics/feature_map.hpp"
#include "motiontok/skeleton/pose.hpp"

namespace motiontok::skeleton {

enum class Task { PE, MP, MIB };

inline std::string to_string(Task t) {
    switch (t) {
        case Task::PE: return "pe";
        case Task::MP: return "mp";
        default: return "mib";
    }
}

inline Task task_from_string(const std::string& s) {
    if (s == "pe") return Task::PE;
    if (s == "mp") return Task::MP;
    if (s == "mib") return Task::MIB;
    throw ConfigError("unknown task: " + s);
}

// One evaluation/training instance. Pose estimation conditions on visual
// features; prediction and in-betweening condition on an input pose.
struct TaskSample {
    Task task = Task::PE;
    std::optional<PoseSequence> input_pose;
    std::optional<num::FeatureMapSequence> visual_features;
    PoseSequence target_pose;

    void validate() const {
        target_pose.validate();
        if (task == Task::PE && !visual_features)
            throw DataError("task sample: pose estimation requires visual features");
        if ((task == Task::MP || task == Task::MIB) && !input_pose)
            throw DataError("task sample: prediction/in-betweening require an input pose");
        if (input_pose && input_pose->joints != target_pose.joints)
            throw DataError("task sample: input/target joint counts differ");
    }
};

}  // namespace motiontok::skeleton
