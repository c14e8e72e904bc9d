#pragma once

// Generated from data/templates.json by tools/embed_data.sh; do not edit.

namespace behaviorplan::data {

inline constexpr const char* kTemplatesJson = R"json({
  "templates": [
    {
      "name": "stand",
      "keywords": [
        "stand",
        "standing",
        "stand still",
        "idle"
      ],
      "cyclic": false,
      "repetitions": 1,
      "steps": [
        {
          "keyframe": "The spine2 is vertical. The left knee is straight. The right knee is straight.",
          "transition": "The person holds the pose."
        },
        {
          "keyframe": "The spine2 is vertical. The left knee is straight. The right knee is straight.",
          "transition": ""
        }
      ]
    },
    {
      "name": "walk forward",
      "keywords": [
        "walk forward",
        "walk",
        "walks",
        "walking",
        "step forward"
      ],
      "cyclic": true,
      "repetitions": 2,
      "steps": [
        {
          "keyframe": "The left knee is slightly bent. The right knee is straight. The left foot is in front of the right foot.",
          "transition": "The person moves forward."
        },
        {
          "keyframe": "The right knee is slightly bent. The left knee is straight. The right foot is in front of the left foot.",
          "transition": "The person moves forward."
        },
        {
          "keyframe": "The left knee is slightly bent. The right knee is straight. The left foot is in front of the right foot.",
          "transition": ""
        }
      ]
    },
    {
      "name": "wave right hand",
      "keywords": [
        "wave right hand",
        "wave",
        "waves",
        "waving",
        "wave hand"
      ],
      "cyclic": true,
      "repetitions": 3,
      "steps": [
        {
          "keyframe": "The right wrist is above the head. The right elbow is partially bent.",
          "transition": "The right wrist moves to the right."
        },
        {
          "keyframe": "The right wrist is above the head. The right elbow is slightly bent. The right wrist is at the right of the head.",
          "transition": "The right wrist moves to the left."
        },
        {
          "keyframe": "The right wrist is above the head. The right elbow is partially bent.",
          "transition": ""
        }
      ]
    },
    {
      "name": "squat",
      "keywords": [
        "squat",
        "squats",
        "squatting",
        "crouch"
      ],
      "cyclic": true,
      "repetitions": 2,
      "steps": [
        {
          "keyframe": "The spine2 is vertical. The left knee is straight. The right knee is straight.",
          "transition": "The left knee becomes completely bent slowly. At the same time, the right knee becomes completely bent slowly."
        },
        {
          "keyframe": "The left knee is almost completely bent. The right knee is almost completely bent. The pelvis is leaning slightly forward.",
          "transition": "The left knee becomes straight. At the same time, the right knee becomes straight."
        },
        {
          "keyframe": "The spine2 is vertical. The left knee is straight. The right knee is straight.",
          "transition": ""
        }
      ]
    },
    {
      "name": "turn around",
      "keywords": [
        "turn around",
        "turn",
        "turns",
        "turning",
        "about face"
      ],
      "cyclic": false,
      "repetitions": 1,
      "steps": [
        {
          "keyframe": "The spine2 is vertical. The left knee is straight. The right knee is straight.",
          "transition": "The person turns greatly clockwise."
        },
        {
          "keyframe": "The spine2 is vertical. The left knee is straight. The right knee is straight.",
          "transition": ""
        }
      ]
    },
    {
      "name": "sit down",
      "keywords": [
        "sit down",
        "sit",
        "sits",
        "sitting",
        "take a seat"
      ],
      "cyclic": false,
      "repetitions": 1,
      "steps": [
        {
          "keyframe": "The spine2 is vertical. The left knee is straight. The right knee is straight.",
          "transition": "The left knee becomes completely bent slowly. At the same time, the right knee becomes completely bent slowly."
        },
        {
          "keyframe": "The left knee is bent at a right angle. The right knee is bent at a right angle. The pelvis is leaning slightly forward. The left foot is on the ground. The right foot is on the ground.",
          "transition": "The person holds the pose."
        },
        {
          "keyframe": "The left knee is bent at a right angle. The right knee is bent at a right angle. The pelvis is leaning slightly forward. The left foot is on the ground. The right foot is on the ground.",
          "transition": ""
        }
      ]
    }
  ]
}
)json";

}  // namespace behaviorplan::data
