#pragma once

#include <cstddef>
#include <string>

#include "qdre/nn/mlp.hpp"
#include "qdre/nn/train.hpp"

namespace qdre::nn {

// Reference architectures and optimiser settings.
//
//                 MLP          r++ / r+-
//   hidden 1      128 ReLU     128 ReLU
//   hidden 2      256 ReLU     128 ReLU
//   hidden 3      128 ReLU     128 ReLU
//   output        1 sigmoid    1 sigmoid
//
//                 MLP      r++     r+-     RoSMM
//   loss          REVERT   BCE     BCE     REVERT
//   lr            3e-4     1e-3    1e-3    3e-4
//   batch         256      128     64      512
//   patience      20       15      15      10
//
// All use Adam, at most 1e5 samples per epoch and a 500-epoch cap.

enum class Role { Mlp, BceMlp, SubRatioPositive, SubRatioNegative, Rosmm };

std::string to_string(Role role);

/// Input width of the reference feature set (jet four-vector plus four muon
/// three-vectors).
inline constexpr std::size_t kReferenceInputDim = 16;

MlpArchitecture default_architecture(Role role);
TrainConfig default_train_config(Role role);

}  // namespace qdre::nn
