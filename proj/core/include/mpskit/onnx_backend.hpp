#pragma once

#include "mpskit/manifest.hpp"
#include "mpskit/oracle.hpp"

namespace mpskit {

// Loads an exported feed-forward graph (Gemm / MatMul / Add / Relu / Sigmoid
// / Flatten / Reshape / Identity / Softmax / Constant over float tensors)
// and wraps it as an oracle. preprocess() resizes per the manifest strategy
// and normalizes with the per-channel means and stds; classify() expects the
// preprocessed tensor and feeds it in channel-major order.
// Throws BackendError naming model_id and path on any load or shape problem,
// including graphs using operators outside the supported set.
OracleHandle load_external_model(const ModelManifest& manifest);

}  // namespace mpskit
