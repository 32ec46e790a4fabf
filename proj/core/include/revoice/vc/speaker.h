// core/include/revoice/vc/speaker.h
#ifndef REVOICE_VC_SPEAKER_H_
#define REVOICE_VC_SPEAKER_H_

#include <Eigen/Core>

#include "revoice/audio.h"
#include "revoice/mel.h"

namespace revoice::vc {

// Unit-norm speaker vector. Feeds both the diffusion conditioning and SECS.
struct SpeakerEmbedding {
  Eigen::VectorXd vector;

  double norm() const { return vector.norm(); }
};

}  // namespace revoice::vc

#endif  // REVOICE_VC_SPEAKER_H_
