/** Fixed 25-joint skeleton layout shared with the service. */

export const NUM_JOINTS = 25;

export const JOINT_NAMES = [
  "SpineBase", "SpineMid", "Neck", "Head",
  "ShoulderLeft", "ElbowLeft", "WristLeft", "HandLeft",
  "ShoulderRight", "ElbowRight", "WristRight", "HandRight",
  "HipLeft", "KneeLeft", "AnkleLeft", "FootLeft",
  "HipRight", "KneeRight", "AnkleRight", "FootRight",
  "SpineShoulder", "HandTipLeft", "ThumbLeft", "HandTipRight", "ThumbRight",
] as const;

/** 24 bones as (parent, child) joint index pairs. */
export const BONES: ReadonlyArray<readonly [number, number]> = [
  [0, 1], [1, 20], [20, 2], [2, 3],
  [20, 4], [4, 5], [5, 6], [6, 7], [7, 21], [6, 22],
  [20, 8], [8, 9], [9, 10], [10, 11], [11, 23], [10, 24],
  [0, 12], [12, 13], [13, 14], [14, 15],
  [0, 16], [16, 17], [17, 18], [18, 19],
];
