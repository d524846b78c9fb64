#pragma once

#include <memory>

#include "vsl/backend.hpp"

namespace vsl::detail {

std::unique_ptr<ProofBackend> make_mock_backend();
std::unique_ptr<ProofBackend> make_groth16_backend();
bool groth16_compiled();

/// Shared structural checks; returns false when the pieces cannot belong together.
bool header_matches(const VerifyingKey& vk, const Statement& x, const Proof& p, BackendId id);

}  // namespace vsl::detail
