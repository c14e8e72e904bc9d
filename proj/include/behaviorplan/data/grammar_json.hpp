#pragma once

// Generated from data/grammar.json by tools/embed_data.sh; do not edit.

namespace behaviorplan::data {

inline constexpr const char* kGrammarJson = R"json({
  "tokens": {
    "straight": "angle:straight",
    "slightly bent": "angle:slightly bent",
    "partially bent": "angle:partially bent",
    "bent at a right angle": "angle:bent at a right angle",
    "bent at right angle": "angle:bent at a right angle",
    "almost completely bent": "angle:almost completely bent",
    "completely bent": "angle:completely bent",
    "fully bent": "angle:completely bent",
    "close": "distance:close",
    "close together": "distance:close",
    "close to": "distance:close",
    "near": "distance:close",
    "shoulder width apart": "distance:shoulder width apart",
    "spread": "distance:spread",
    "spread apart": "distance:spread",
    "wide apart": "distance:wide apart",
    "at the right of": "relpos_x:at the right of",
    "to the right of": "relpos_x:at the right of",
    "x ignored": "relpos_x:x-ignored",
    "at the left of": "relpos_x:at the left of",
    "to the left of": "relpos_x:at the left of",
    "below": "relpos_y:below",
    "y ignored": "relpos_y:y-ignored",
    "above": "relpos_y:above",
    "behind": "relpos_z:behind",
    "z ignored": "relpos_z:z-ignored",
    "in front of": "relpos_z:in front of",
    "vertical": "pitch_roll:vertical",
    "standing upright": "pitch_roll:vertical",
    "horizontal": "pitch_roll:horizontal",
    "extended outward": "pitch_roll:horizontal",
    "pitch roll ignored": "pitch_roll:pitch-roll-ignored",
    "on the ground": "ground_contact:on the ground",
    "touching the ground": "ground_contact:on the ground",
    "ground ignored": "ground_contact:ground-ignored",
    "lying flat forward": "orientation:lying flat forward",
    "leaning slightly forward": "orientation:leaning slightly forward",
    "slight forward lean": "orientation:leaning slightly forward",
    "upright": "orientation:upright",
    "leaning slightly backward": "orientation:leaning slightly backward",
    "slight backward lean": "orientation:leaning slightly backward",
    "lying flat backward": "orientation:lying flat backward",
    "leaning far left": "orientation:leaning far left",
    "leaning slightly left": "orientation:leaning slightly left",
    "slight left lean": "orientation:leaning slightly left",
    "not leaning sideways": "orientation:not leaning sideways",
    "leaning slightly right": "orientation:leaning slightly right",
    "slight right lean": "orientation:leaning slightly right",
    "leaning far right": "orientation:leaning far right",
    "about face turned clockwise": "orientation:turned about-face clockwise",
    "turned about face clockwise": "orientation:turned about-face clockwise",
    "turned slightly clockwise": "orientation:turned slightly clockwise",
    "facing forward": "orientation:facing forward",
    "turned slightly counterclockwise": "orientation:turned slightly counterclockwise",
    "about face turned counterclockwise": "orientation:turned about-face counterclockwise",
    "turned about face counterclockwise": "orientation:turned about-face counterclockwise",
    "positioned significantly left": "position:positioned significantly left",
    "positioned slightly left": "position:positioned slightly left",
    "positioned laterally centered": "position:positioned laterally centered",
    "positioned slightly right": "position:positioned slightly right",
    "positioned significantly right": "position:positioned significantly right",
    "positioned significantly downward": "position:positioned significantly downward",
    "positioned slightly downward": "position:positioned slightly downward",
    "positioned at neutral height": "position:positioned at neutral height",
    "positioned slightly upward": "position:positioned slightly upward",
    "positioned significantly upward": "position:positioned significantly upward",
    "positioned significantly backward": "position:positioned significantly backward",
    "positioned slightly backward": "position:positioned slightly backward",
    "positioned at neutral depth": "position:positioned at neutral depth",
    "positioned slightly forward": "position:positioned slightly forward",
    "positioned significantly forward": "position:positioned significantly forward"
  },
  "scales": {
    "lying flat forward": "x:-1",
    "leaning slightly forward": "x:-0.5",
    "upright": "x:0",
    "leaning slightly backward": "x:0.5",
    "lying flat backward": "x:1",
    "leaning far left": "y:-1",
    "leaning slightly left": "y:-0.5",
    "not leaning sideways": "y:0",
    "leaning slightly right": "y:0.5",
    "leaning far right": "y:1",
    "turned about-face clockwise": "z:-1",
    "turned slightly clockwise": "z:-0.5",
    "facing forward": "z:0",
    "turned slightly counterclockwise": "z:0.5",
    "turned about-face counterclockwise": "z:1",
    "positioned significantly left": "x:-1",
    "positioned slightly left": "x:-0.5",
    "positioned laterally centered": "x:0",
    "positioned slightly right": "x:0.5",
    "positioned significantly right": "x:1",
    "positioned significantly downward": "y:-1",
    "positioned slightly downward": "y:-0.5",
    "positioned at neutral height": "y:0",
    "positioned slightly upward": "y:0.5",
    "positioned significantly upward": "y:1",
    "positioned significantly backward": "z:-1",
    "positioned slightly backward": "z:-0.5",
    "positioned at neutral depth": "z:0",
    "positioned slightly forward": "z:0.5",
    "positioned significantly forward": "z:1"
  },
  "subjects": {
    "person": "none:person",
    "body": "none:person",
    "he": "none:person",
    "she": "none:person",
    "they": "none:person",
    "torso": "none:torso",
    "back": "none:torso",
    "chest": "none:chest",
    "pelvis": "none:pelvis",
    "hips": "none:pelvis",
    "spine1": "none:spine1",
    "spine2": "none:spine2",
    "spine3": "none:spine3",
    "neck": "none:neck",
    "head": "none:head",
    "left arm": "left:arm",
    "right arm": "right:arm",
    "arms": "both:arm",
    "both arms": "both:arm",
    "arm": "inherit:arm",
    "left upper arm": "left:upper arm",
    "right upper arm": "right:upper arm",
    "left forearm": "left:forearm",
    "right forearm": "right:forearm",
    "left hand": "left:hand",
    "right hand": "right:hand",
    "hands": "both:hand",
    "both hands": "both:hand",
    "hand": "inherit:hand",
    "left collar": "left:collar",
    "right collar": "right:collar",
    "left shoulder": "left:shoulder",
    "right shoulder": "right:shoulder",
    "shoulders": "both:shoulder",
    "left elbow": "left:elbow",
    "right elbow": "right:elbow",
    "elbows": "both:elbow",
    "elbow": "inherit:elbow",
    "left wrist": "left:wrist",
    "right wrist": "right:wrist",
    "left leg": "left:leg",
    "right leg": "right:leg",
    "legs": "both:leg",
    "both legs": "both:leg",
    "leg": "inherit:leg",
    "left thigh": "left:thigh",
    "right thigh": "right:thigh",
    "left shin": "left:shin",
    "right shin": "right:shin",
    "left hip": "left:hip",
    "right hip": "right:hip",
    "left knee": "left:knee",
    "right knee": "right:knee",
    "knees": "both:knee",
    "both knees": "both:knee",
    "knee": "inherit:knee",
    "left ankle": "left:ankle",
    "right ankle": "right:ankle",
    "left foot": "left:foot",
    "right foot": "right:foot",
    "feet": "both:foot",
    "both feet": "both:foot",
    "foot": "inherit:foot"
  },
  "parts": {
    "person|orientation": "pelvis",
    "person|position": "pelvis",
    "person|pitch_roll": "spine2",
    "person|motion": "root",
    "person|*": "pelvis",
    "torso|orientation": "pelvis",
    "torso|position": "pelvis",
    "torso|*": "spine2",
    "chest|*": "spine3",
    "pelvis|*": "pelvis",
    "spine1|*": "spine1",
    "spine2|*": "spine2",
    "spine3|*": "spine3",
    "neck|*": "neck",
    "head|*": "head",
    "arm|angle": "elbow",
    "arm|pitch_roll": "shoulder",
    "arm|*": "wrist",
    "upper arm|*": "shoulder",
    "forearm|*": "elbow",
    "hand|*": "wrist",
    "collar|*": "collar",
    "shoulder|*": "shoulder",
    "elbow|*": "elbow",
    "wrist|*": "wrist",
    "leg|angle": "knee",
    "leg|pitch_roll": "hip",
    "leg|*": "foot",
    "thigh|*": "hip",
    "shin|*": "knee",
    "hip|*": "hip",
    "knee|angle": "knee",
    "knee|*": "knee",
    "ankle|*": "ankle",
    "foot|*": "foot"
  },
  "hinges": {
    "elbow": "hinge",
    "knee": "hinge"
  },
  "motion": {
    "moves": "verb:move",
    "move": "verb:move",
    "moving": "verb:move",
    "steps": "verb:move",
    "step": "verb:move",
    "stepping": "verb:move",
    "walks": "verb:move",
    "walk": "verb:move",
    "walking": "verb:move",
    "turns": "verb:turn",
    "turn": "verb:turn",
    "turning": "verb:turn",
    "rotates": "verb:turn",
    "rotating": "verb:turn",
    "becomes": "verb:change",
    "become": "verb:change",
    "becoming": "verb:change",
    "extends": "verb:extend",
    "extend": "verb:extend",
    "extending": "verb:extend",
    "straightens": "verb:extend",
    "straightening": "verb:extend",
    "bends": "verb:bend",
    "bend": "verb:bend",
    "bending": "verb:bend",
    "holds the pose": "verb:hold",
    "holds still": "verb:hold",
    "holds": "verb:hold",
    "hold": "verb:hold",
    "holding": "verb:hold",
    "stays still": "verb:hold",
    "remains still": "verb:hold",
    "forward": "direction:forward",
    "forwards": "direction:forward",
    "backward": "direction:backward",
    "backwards": "direction:backward",
    "to the left": "direction:left",
    "left": "direction:left",
    "to the right": "direction:right",
    "right": "direction:right",
    "clockwise": "direction:clockwise",
    "counterclockwise": "direction:counterclockwise",
    "counter clockwise": "direction:counterclockwise",
    "anticlockwise": "direction:counterclockwise",
    "around": "direction:clockwise:greatly",
    "very fast": "speed:very fast",
    "rapidly": "speed:very fast",
    "fast": "speed:fast",
    "quickly": "speed:fast",
    "at a fast pace": "speed:fast",
    "at an average pace": "speed:average pace",
    "average pace": "speed:average pace",
    "at a steady pace": "speed:average pace",
    "slowly": "speed:slow",
    "slow": "speed:slow",
    "at a slow pace": "speed:slow",
    "greatly": "magnitude:greatly",
    "far": "magnitude:greatly",
    "way over": "magnitude:way over",
    "slightly": "magnitude:slightly",
    "a little": "magnitude:slightly",
    "at the same time": "connective:same",
    "simultaneously": "connective:same",
    "meanwhile": "connective:same",
    "a moment later": "connective:next",
    "then": "connective:next",
    "after that": "connective:next",
    "afterwards": "connective:next",
    "next": "connective:next",
    "from that pose": "connective:next"
  },
  "words": {
    "is": "copula",
    "are": "copula",
    "and": "and",
    "with": "with",
    "the": "filler",
    "a": "filler",
    "an": "filler",
    "his": "filler",
    "her": "filler",
    "their": "filler",
    "positioned": "filler",
    "placed": "filler",
    "held": "filler",
    "kept": "filler",
    "both": "filler"
  }
}
)json";

}  // namespace behaviorplan::data
