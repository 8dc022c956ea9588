#pragma once

#include <string>

#include "mbgan/trainer.hpp"

namespace mbgan {

// Binary checkpoint, magic "MBGN1", little-endian throughout.
//
// Layout after the 5 magic bytes (u64 = 64-bit unsigned LE, f64 = IEEE-754
// double LE):
//   u64 version (=1), u64 iteration, u64 k, u64 head_mode,
//   u64 alpha_mode, u64 alpha_fn, f64 alpha_static, f64 beta, f64 beta_floor,
//   u64 beta_adam_step, f64 beta_adam_m, f64 beta_adam_v,
//   u64 rng_state[4], u64 rng_has_cached, f64 rng_cached_normal,
//   u64 g_adam_step, u64 d_adam_step[k],
//   u64 tensor_count,
//   then tensors, each as u64 rows, u64 cols, f64 data[rows*cols]:
//     G (w0,b0,w1,b1,...), D_0..D_{k-1}, G-Adam m then v, per-D Adam m then v.
//
// The RNG state makes resumed runs bit-identical to uninterrupted ones.
void save_checkpoint(const TrainerState& state, const std::string& path);

// Rebuilds a TrainerState from the file. cfg supplies the architecture and
// every non-checkpointed knob; tensor shapes derived from it must match the
// file (ShapeMismatch naming the offending tensor). Truncated or malformed
// files raise CheckpointCorrupt.
TrainerState load_checkpoint(const std::string& path, const TrainConfig& cfg);

} // namespace mbgan
