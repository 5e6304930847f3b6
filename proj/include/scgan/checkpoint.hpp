#pragma once

#include <string>

#include "scgan/trainer.hpp"

namespace scgan {

// Text container with named tensors (value + both Adam moments), step
// counters and serialized random streams. Floats are written as hexfloats, so
// a reload is bit-exact and an interrupted run resumes on the same trajectory.
void save_checkpoint(const std::string& path, const TrainState& state);

// The view/config rebuild the model skeleton; shapes must match the file.
TrainState load_checkpoint(const std::string& path, const CorpusView& view,
                           const TrainConfig& cfg);

}  // namespace scgan
