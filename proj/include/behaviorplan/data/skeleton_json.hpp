#pragma once

// Generated from data/skeleton.json by tools/embed_data.sh; do not edit.

namespace behaviorplan::data {

inline constexpr const char* kSkeletonJson = R"json({
  "fixed_root": false,
  "shoulder_width": 0.38,
  "feet": [
    "left_foot",
    "right_foot"
  ],
  "distance_pairs": [
    [
      "left_foot",
      "right_foot"
    ],
    [
      "left_wrist",
      "right_wrist"
    ]
  ],
  "joints": [
    {
      "name": "pelvis",
      "parent": null,
      "offset": [
        0,
        0,
        0
      ],
      "dofs": 0,
      "limits": [],
      "max_velocity": 12.0,
      "max_acceleration": 150.0,
      "torque_limit": 0.0
    },
    {
      "name": "left_hip",
      "parent": "pelvis",
      "offset": [
        0.08,
        -0.09,
        0.0
      ],
      "dofs": 3,
      "limits": [
        [
          -2.2,
          0.8
        ],
        [
          -0.8,
          0.8
        ],
        [
          -0.6,
          1.0
        ]
      ],
      "max_velocity": 12.0,
      "max_acceleration": 150.0,
      "torque_limit": 200.0
    },
    {
      "name": "right_hip",
      "parent": "pelvis",
      "offset": [
        -0.08,
        -0.09,
        0.0
      ],
      "dofs": 3,
      "limits": [
        [
          -2.2,
          0.8
        ],
        [
          -0.8,
          0.8
        ],
        [
          -1.0,
          0.6
        ]
      ],
      "max_velocity": 12.0,
      "max_acceleration": 150.0,
      "torque_limit": 200.0
    },
    {
      "name": "spine1",
      "parent": "pelvis",
      "offset": [
        0.0,
        0.11,
        -0.01
      ],
      "dofs": 3,
      "limits": [
        [
          -0.6,
          0.6
        ],
        [
          -0.5,
          0.5
        ],
        [
          -0.4,
          0.4
        ]
      ],
      "max_velocity": 12.0,
      "max_acceleration": 150.0,
      "torque_limit": 200.0
    },
    {
      "name": "left_knee",
      "parent": "left_hip",
      "offset": [
        0.03,
        -0.38,
        0.0
      ],
      "dofs": 1,
      "axis": [
        1,
        0,
        0
      ],
      "limits": [
        [
          0.0,
          2.5
        ]
      ],
      "max_velocity": 12.0,
      "max_acceleration": 150.0,
      "torque_limit": 200.0
    },
    {
      "name": "right_knee",
      "parent": "right_hip",
      "offset": [
        -0.03,
        -0.38,
        0.0
      ],
      "dofs": 1,
      "axis": [
        1,
        0,
        0
      ],
      "limits": [
        [
          0.0,
          2.5
        ]
      ],
      "max_velocity": 12.0,
      "max_acceleration": 150.0,
      "torque_limit": 200.0
    },
    {
      "name": "spine2",
      "parent": "spine1",
      "offset": [
        0.0,
        0.13,
        0.0
      ],
      "dofs": 3,
      "limits": [
        [
          -0.5,
          0.5
        ],
        [
          -0.5,
          0.5
        ],
        [
          -0.4,
          0.4
        ]
      ],
      "max_velocity": 12.0,
      "max_acceleration": 150.0,
      "torque_limit": 200.0
    },
    {
      "name": "left_ankle",
      "parent": "left_knee",
      "offset": [
        0.0,
        -0.4,
        -0.02
      ],
      "dofs": 3,
      "limits": [
        [
          -0.8,
          0.8
        ],
        [
          -0.4,
          0.4
        ],
        [
          -0.4,
          0.4
        ]
      ],
      "max_velocity": 12.0,
      "max_acceleration": 150.0,
      "torque_limit": 200.0
    },
    {
      "name": "right_ankle",
      "parent": "right_knee",
      "offset": [
        0.0,
        -0.4,
        -0.02
      ],
      "dofs": 3,
      "limits": [
        [
          -0.8,
          0.8
        ],
        [
          -0.4,
          0.4
        ],
        [
          -0.4,
          0.4
        ]
      ],
      "max_velocity": 12.0,
      "max_acceleration": 150.0,
      "torque_limit": 200.0
    },
    {
      "name": "spine3",
      "parent": "spine2",
      "offset": [
        0.0,
        0.06,
        0.01
      ],
      "dofs": 3,
      "limits": [
        [
          -0.4,
          0.4
        ],
        [
          -0.4,
          0.4
        ],
        [
          -0.3,
          0.3
        ]
      ],
      "max_velocity": 12.0,
      "max_acceleration": 150.0,
      "torque_limit": 200.0
    },
    {
      "name": "left_foot",
      "parent": "left_ankle",
      "offset": [
        0.0,
        -0.05,
        0.13
      ],
      "dofs": 3,
      "limits": [
        [
          -0.4,
          0.4
        ],
        [
          -0.2,
          0.2
        ],
        [
          -0.2,
          0.2
        ]
      ],
      "max_velocity": 12.0,
      "max_acceleration": 150.0,
      "torque_limit": 200.0
    },
    {
      "name": "right_foot",
      "parent": "right_ankle",
      "offset": [
        0.0,
        -0.05,
        0.13
      ],
      "dofs": 3,
      "limits": [
        [
          -0.4,
          0.4
        ],
        [
          -0.2,
          0.2
        ],
        [
          -0.2,
          0.2
        ]
      ],
      "max_velocity": 12.0,
      "max_acceleration": 150.0,
      "torque_limit": 200.0
    },
    {
      "name": "neck",
      "parent": "spine3",
      "offset": [
        0.0,
        0.21,
        -0.02
      ],
      "dofs": 3,
      "limits": [
        [
          -0.6,
          0.6
        ],
        [
          -0.7,
          0.7
        ],
        [
          -0.5,
          0.5
        ]
      ],
      "max_velocity": 12.0,
      "max_acceleration": 150.0,
      "torque_limit": 40.0
    },
    {
      "name": "left_collar",
      "parent": "spine3",
      "offset": [
        0.07,
        0.12,
        0.0
      ],
      "dofs": 3,
      "limits": [
        [
          -0.3,
          0.3
        ],
        [
          -0.3,
          0.3
        ],
        [
          -0.3,
          0.3
        ]
      ],
      "max_velocity": 12.0,
      "max_acceleration": 150.0,
      "torque_limit": 80.0
    },
    {
      "name": "right_collar",
      "parent": "spine3",
      "offset": [
        -0.07,
        0.12,
        0.0
      ],
      "dofs": 3,
      "limits": [
        [
          -0.3,
          0.3
        ],
        [
          -0.3,
          0.3
        ],
        [
          -0.3,
          0.3
        ]
      ],
      "max_velocity": 12.0,
      "max_acceleration": 150.0,
      "torque_limit": 80.0
    },
    {
      "name": "head",
      "parent": "neck",
      "offset": [
        0.0,
        0.09,
        0.04
      ],
      "dofs": 3,
      "limits": [
        [
          -0.5,
          0.5
        ],
        [
          -0.6,
          0.6
        ],
        [
          -0.4,
          0.4
        ]
      ],
      "max_velocity": 12.0,
      "max_acceleration": 150.0,
      "torque_limit": 40.0
    },
    {
      "name": "left_shoulder",
      "parent": "left_collar",
      "offset": [
        0.12,
        0.03,
        0.0
      ],
      "dofs": 3,
      "limits": [
        [
          -1.6,
          1.6
        ],
        [
          -2.2,
          2.2
        ],
        [
          -1.7,
          1.6
        ]
      ],
      "max_velocity": 12.0,
      "max_acceleration": 150.0,
      "torque_limit": 80.0
    },
    {
      "name": "right_shoulder",
      "parent": "right_collar",
      "offset": [
        -0.12,
        0.03,
        0.0
      ],
      "dofs": 3,
      "limits": [
        [
          -1.6,
          1.6
        ],
        [
          -2.2,
          2.2
        ],
        [
          -1.6,
          1.7
        ]
      ],
      "max_velocity": 12.0,
      "max_acceleration": 150.0,
      "torque_limit": 80.0
    },
    {
      "name": "left_elbow",
      "parent": "left_shoulder",
      "offset": [
        0.26,
        0.0,
        0.0
      ],
      "dofs": 1,
      "axis": [
        0,
        -1,
        0
      ],
      "limits": [
        [
          0.0,
          2.62
        ]
      ],
      "max_velocity": 12.0,
      "max_acceleration": 150.0,
      "torque_limit": 80.0
    },
    {
      "name": "right_elbow",
      "parent": "right_shoulder",
      "offset": [
        -0.26,
        0.0,
        0.0
      ],
      "dofs": 1,
      "axis": [
        0,
        1,
        0
      ],
      "limits": [
        [
          0.0,
          2.62
        ]
      ],
      "max_velocity": 12.0,
      "max_acceleration": 150.0,
      "torque_limit": 80.0
    },
    {
      "name": "left_wrist",
      "parent": "left_elbow",
      "offset": [
        0.25,
        0.0,
        0.0
      ],
      "dofs": 3,
      "limits": [
        [
          -1.0,
          1.0
        ],
        [
          -0.6,
          0.6
        ],
        [
          -1.0,
          1.0
        ]
      ],
      "max_velocity": 12.0,
      "max_acceleration": 150.0,
      "torque_limit": 80.0
    },
    {
      "name": "right_wrist",
      "parent": "right_elbow",
      "offset": [
        -0.25,
        0.0,
        0.0
      ],
      "dofs": 3,
      "limits": [
        [
          -1.0,
          1.0
        ],
        [
          -0.6,
          0.6
        ],
        [
          -1.0,
          1.0
        ]
      ],
      "max_velocity": 12.0,
      "max_acceleration": 150.0,
      "torque_limit": 80.0
    }
  ],
  "links": [
    {
      "a": "pelvis",
      "b": "left_hip",
      "radius": 0.06,
      "mass": 5.0
    },
    {
      "a": "pelvis",
      "b": "right_hip",
      "radius": 0.06,
      "mass": 5.0
    },
    {
      "a": "spine1",
      "b": "spine2",
      "radius": 0.1,
      "mass": 6.0
    },
    {
      "a": "spine2",
      "b": "spine3",
      "radius": 0.1,
      "mass": 6.0
    },
    {
      "a": "spine3",
      "b": "neck",
      "radius": 0.1,
      "mass": 7.0
    },
    {
      "a": "left_collar",
      "b": "left_shoulder",
      "radius": 0.05,
      "mass": 0.5
    },
    {
      "a": "right_collar",
      "b": "right_shoulder",
      "radius": 0.05,
      "mass": 0.5
    },
    {
      "a": "neck",
      "b": "head",
      "radius": 0.05,
      "mass": 1.0
    },
    {
      "a": "head",
      "b": "head",
      "radius": 0.1,
      "mass": 4.6
    },
    {
      "a": "left_shoulder",
      "b": "left_elbow",
      "radius": 0.045,
      "mass": 1.9
    },
    {
      "a": "left_elbow",
      "b": "left_wrist",
      "radius": 0.04,
      "mass": 1.1
    },
    {
      "a": "left_wrist",
      "b": "left_wrist",
      "radius": 0.045,
      "mass": 0.45
    },
    {
      "a": "right_shoulder",
      "b": "right_elbow",
      "radius": 0.045,
      "mass": 1.9
    },
    {
      "a": "right_elbow",
      "b": "right_wrist",
      "radius": 0.04,
      "mass": 1.1
    },
    {
      "a": "right_wrist",
      "b": "right_wrist",
      "radius": 0.045,
      "mass": 0.45
    },
    {
      "a": "left_hip",
      "b": "left_knee",
      "radius": 0.07,
      "mass": 9.75
    },
    {
      "a": "left_knee",
      "b": "left_ankle",
      "radius": 0.05,
      "mass": 3.0
    },
    {
      "a": "left_ankle",
      "b": "left_foot",
      "radius": 0.04,
      "mass": 1.0
    },
    {
      "a": "right_hip",
      "b": "right_knee",
      "radius": 0.07,
      "mass": 9.75
    },
    {
      "a": "right_knee",
      "b": "right_ankle",
      "radius": 0.05,
      "mass": 3.0
    },
    {
      "a": "right_ankle",
      "b": "right_foot",
      "radius": 0.04,
      "mass": 1.0
    }
  ]
}
)json";

}  // namespace behaviorplan::data
