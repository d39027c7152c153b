#include "flexsign/synth.hpp"

namespace flexsign {

// Hand-authored trajectory library. Levels sit on a low/mid/high grid
// (0.15 / 0.50 / 0.85) at the start, middle and end of each gesture, so every
// pair of signs is separated by at least one full grid step on some channel.
// Each sign also carries an early "attack" keypoint at phase 0.12 on a moving
// channel: it guarantees a first-instant slope steep enough for onset
// detection yet gentle enough that frame-to-frame steps stay far below the
// spike-cleaning threshold. "hru" and "nice2meetu" intentionally share the
// same thumb curve and are told apart by elbow and middle finger alone.
const std::string& default_templates_text() {
  static const std::string text = R"(# flexsign-templates v1

sign hello
elbow 0:0.15 0.12:0.3 0.5:0.85 1:0.5
thumb 0:0.15 0.5:0.15 1:0.15
middle 0:0.15 0.5:0.5 1:0.15

sign welcome
elbow 0:0.85 0.12:0.7 0.5:0.5 1:0.85
thumb 0:0.5 0.5:0.5 1:0.5
middle 0:0.15 0.5:0.5 1:0.85

sign hru
elbow 0:0.15 0.5:0.15 1:0.15
thumb 0:0.2 0.12:0.35 0.4:0.75 0.6:0.75 1:0.25
middle 0:0.5 0.5:0.5 1:0.5

sign canIHelpU
elbow 0:0.5 0.12:0.65 0.5:0.85 1:0.15
thumb 0:0.15 0.5:0.5 1:0.85
middle 0:0.5 0.5:0.5 1:0.5

sign whatsup
elbow 0:0.15 0.12:0.3 0.5:0.5 1:0.85
thumb 0:0.85 0.5:0.5 1:0.85
middle 0:0.85 0.5:0.5 1:0.15

sign busy
elbow 0:0.85 0.5:0.85 1:0.15
thumb 0:0.5 0.12:0.65 0.5:0.85 1:0.5
middle 0:0.15 0.5:0.15 1:0.5

sign nothing
elbow 0:0.5 0.12:0.35 0.5:0.15 1:0.5
thumb 0:0.85 0.5:0.85 1:0.15
middle 0:0.5 0.5:0.85 1:0.5

sign yes
elbow 0:0.15 0.5:0.15 1:0.85
thumb 0:0.5 0.12:0.35 0.5:0.15 1:0.5
middle 0:0.85 0.5:0.85 1:0.5

sign no
elbow 0:0.85 0.12:0.7 0.5:0.15 1:0.15
thumb 0:0.15 0.5:0.85 1:0.5
middle 0:0.5 0.5:0.15 1:0.85

sign deaf
elbow 0:0.5 0.5:0.5 1:0.85
thumb 0:0.85 0.12:0.7 0.5:0.15 1:0.15
middle 0:0.15 0.5:0.85 1:0.15

sign hardHearing
elbow 0:0.15 0.12:0.3 0.5:0.85 1:0.85
thumb 0:0.15 0.5:0.85 1:0.85
middle 0:0.5 0.5:0.15 1:0.15

sign learn
elbow 0:0.85 0.12:0.7 0.5:0.5 1:0.15
thumb 0:0.5 0.5:0.85 1:0.85
middle 0:0.85 0.5:0.15 1:0.5

sign ASL
elbow 0:0.5 0.12:0.65 0.5:0.85 1:0.5
thumb 0:0.85 0.5:0.5 1:0.15
middle 0:0.15 0.5:0.85 1:0.85

sign want
elbow 0:0.15 0.12:0.3 0.5:0.5 1:0.5
thumb 0:0.85 0.5:0.85 1:0.5
middle 0:0.85 0.5:0.5 1:0.85

sign sorry
elbow 0:0.85 0.12:0.7 0.5:0.15 1:0.5
thumb 0:0.15 0.5:0.5 1:0.15
middle 0:0.5 0.5:0.85 1:0.85

sign please
elbow 0:0.5 0.12:0.35 0.5:0.15 1:0.85
thumb 0:0.5 0.5:0.15 1:0.85
middle 0:0.85 0.5:0.15 1:0.85

sign CULater
elbow 0:0.15 0.12:0.3 0.5:0.85 1:0.15
thumb 0:0.85 0.5:0.15 1:0.5
middle 0:0.5 0.5:0.5 1:0.15

sign ok
elbow 0:0.5 0.5:0.5 1:0.15
thumb 0:0.15 0.5:0.15 1:0.5
middle 0:0.85 0.12:0.7 0.5:0.15 1:0.15

sign notALot
elbow 0:0.85 0.5:0.85 1:0.5
thumb 0:0.5 0.5:0.5 1:0.15
middle 0:0.15 0.12:0.3 0.5:0.85 1:0.85

sign signLanguage
elbow 0:0.15 0.5:0.15 1:0.5
thumb 0:0.85 0.12:0.7 0.5:0.5 1:0.5
middle 0:0.5 0.5:0.85 1:0.15

sign have
elbow 0:0.85 0.12:0.7 0.5:0.5 1:0.5
thumb 0:0.15 0.5:0.85 1:0.15
middle 0:0.15 0.5:0.5 1:0.5

sign nice2meetu
elbow 0:0.85 0.5:0.85 1:0.85
thumb 0:0.2 0.12:0.35 0.4:0.75 0.6:0.75 1:0.25
middle 0:0.5 0.12:0.65 0.5:0.85 1:0.15

sign extra01
elbow 0:0.5 0.12:0.65 0.5:0.85 1:0.85
thumb 0:0.5 0.5:0.15 1:0.15
middle 0:0.85 0.5:0.5 1:0.5
)";
  return text;
}

}  // namespace flexsign
