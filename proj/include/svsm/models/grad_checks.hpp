// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace svsm {

/// Adds the geometry and model checks to the grad_check registry: rho_apply,
/// prope_attention, training_loss and one end-to-end loss per model family on 8×8
/// images ("model_<family>"). Idempotent.
void register_model_grad_checks();

}  // namespace svsm
