#pragma once

#include <cstdint>
#include <string>

#include "cclqr/lti.hpp"

namespace cclqr {

// Seeded benchmark plant with a prescribed spectrum: the named unstable and
// slow stable poles appear exactly; the remaining poles are random and fast,
// with real parts in [2*fast_bound, fast_bound]. The realization is a random
// orthogonal similarity of a quasi-triangular seed matrix with random upper
// coupling, so the fast modes are non-normal. B has standard normal entries
// with normalized columns. Controllability and invertibility are asserted; on
// failure the construction retries with an incremented sub-seed (up to 10
// attempts).
LtiSystem generate_benchmark_system(std::uint64_t seed, int n_x = 97, int n_u = 1,
                                    const PoleSpec& spec = {});

// FNV-1a hash of the canonical text serialization; embedded in every result
// file for provenance.
std::uint64_t system_fingerprint(const LtiSystem& sys);
std::string fingerprint_hex(std::uint64_t fingerprint);

} // namespace cclqr
