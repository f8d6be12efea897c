// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include "datascout/harvester.hpp"
#include "support.hpp"

namespace testsupport {

inline std::filesystem::path community_fixture() { return fixtures() / "community"; }

/// Harvester settings matching the hosts used by the community fixture.
inline datascout::harvester::HarvesterConfig fixture_harvester_config(const std::filesystem::path& state_dir) {
  datascout::harvester::HarvesterConfig c;
  c.base_url = "https://repo.test/api";
  c.token = "fixture-token";
  c.oa_base_url = "https://oa.test";
  c.doi_resolver = "https://doi.test";
  c.contact_email = "datascout@example.org";
  c.retry.attempts = 2;
  c.retry.initial_backoff = std::chrono::milliseconds(0);
  c.state_dir = state_dir;
  return c;
}

}  // namespace testsupport
